/*
 * Copyright 2026 The bodycomp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <random>

#include "bodycomp/quantify.hpp"
#include "oracles.hpp"

using namespace bodycomp;

namespace {

std::pair<HUVolume, LabelVolume> random_case(Dims d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> hu(-300.0f, 300.0f);
    std::uniform_int_distribution<int> lab(0, 6);
    std::vector<float> h(d.count());
    std::vector<std::uint8_t> l(d.count());
    for (std::size_t i = 0; i < d.count(); ++i) {
        h[i] = hu(rng);
        const int v = lab(rng);
        l[i] = v == 6 ? kIgnoreLabel : static_cast<std::uint8_t>(v);
    }
    const Spacing s{5, 0.8, 0.8};
    return {HUVolume(d, s, std::move(h)), LabelVolume(d, s, std::move(l))};
}

}  // namespace

TEST_CASE("tissue thresholds") {
    CHECK(classify_tissue(-190) == TissueClass::Adipose);
    CHECK(classify_tissue(-30) == TissueClass::Adipose);
    CHECK(classify_tissue(-100) == TissueClass::Adipose);
    CHECK(classify_tissue(-191) == TissueClass::Other);
    CHECK(classify_tissue(-29.5) == TissueClass::Other);
    CHECK(classify_tissue(-29) == TissueClass::Muscle);
    CHECK(classify_tissue(150) == TissueClass::Muscle);
    CHECK(classify_tissue(150.5) == TissueClass::Other);
    CHECK(classify_tissue(400) == TissueClass::Other);
}

TEST_CASE("compartment rule") {
    CHECK(assign_compartment(TissueClass::Adipose, 3) == Compartment::SAT);
    CHECK(assign_compartment(TissueClass::Adipose, 4) == Compartment::VAT);
    CHECK(assign_compartment(TissueClass::Muscle, 1) == Compartment::MuscleTissue);
    CHECK(assign_compartment(TissueClass::Adipose, 1) == Compartment::Unassigned);
    CHECK(assign_compartment(TissueClass::Muscle, 4) == Compartment::Unassigned);
    CHECK(assign_compartment(TissueClass::Adipose, 5) == Compartment::Unassigned);
    CHECK(assign_compartment(TissueClass::Adipose, kIgnoreLabel) == Compartment::Unassigned);
    CHECK(assign_compartment(TissueClass::Other, 3) == Compartment::Unassigned);
}

TEST_CASE("worked example") {
    // one slice: two SAT voxels, one VAT voxel, one muscle voxel, one bone voxel
    const HUVolume hu({1, 1, 5}, Spacing{5, 1, 1}, std::vector<float>{-100, -50, -80, 40, 400});
    const LabelVolume l({1, 1, 5}, Spacing{5, 1, 1}, std::vector<std::uint8_t>{3, 3, 4, 1, 2});
    const auto r = quantify(hu, l);
    REQUIRE(r.rows.size() == 1);
    CHECK(r.rows[0].voxels == CompartmentCounts{2, 1, 1});
    CHECK(r.rows[0].sat_ml == doctest::Approx(0.010));
    CHECK(r.rows[0].vat_ml == doctest::Approx(0.005));
    CHECK(r.rows[0].muscle_ml == doctest::Approx(0.005));
    CHECK(r.voxel_volume_ml == doctest::Approx(0.005));
}

TEST_CASE("counts match a voxel-by-voxel oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto [hu, l] = random_case({6, 17, 23}, seed);
        const auto r = quantify(hu, l);
        const auto expect = oracle::compartment_counts(hu, l);
        REQUIRE(r.rows.size() == expect.size());
        CompartmentCounts total;
        for (std::size_t z = 0; z < expect.size(); ++z) {
            CHECK(r.rows[z].slice == z);
            CHECK(r.rows[z].voxels == expect[z]);
            total += expect[z];
        }
        CHECK(r.total_voxels == total);
    }
}

TEST_CASE("report invariants") {
    const auto [hu, l] = random_case({9, 20, 20}, 42);
    const auto r = quantify(hu, l);
    const double vv = voxel_volume_ml(hu.spacing());
    double sat = 0, vat = 0, mus = 0;
    for (const auto& row : r.rows) {
        CHECK(row.sat_ml >= 0.0);
        CHECK(row.sat_ml == doctest::Approx(static_cast<double>(row.voxels.sat) * vv).epsilon(1e-12));
        CHECK(row.voxels.sat + row.voxels.vat + row.voxels.muscle <= hu.dims().plane());
        sat += row.sat_ml;
        vat += row.vat_ml;
        mus += row.muscle_ml;
    }
    CHECK(r.total_sat_ml == sat);
    CHECK(r.total_vat_ml == vat);
    CHECK(r.total_muscle_ml == mus);
    CHECK(r.spacing == hu.spacing());
}

TEST_CASE("quantification needs paired grids") {
    const HUVolume hu({1, 2, 2}, Spacing{}, 0.0f);
    CHECK_THROWS(quantify(hu, LabelVolume({1, 2, 3}, Spacing{}, std::uint8_t{0})));
}
