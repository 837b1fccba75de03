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

#include <algorithm>
#include <set>

#include "bodycomp/phantom.hpp"
#include "bodycomp/quantify.hpp"

using namespace bodycomp;

namespace {

PhantomSpec small_spec(std::uint64_t seed) {
    PhantomSpec s;
    s.seed = seed;
    s.nz = 12;
    s.ny = s.nx = 64;
    s.thoracic_cap = 3;
    return s;
}

}  // namespace

TEST_CASE("phantoms are a function of the seed") {
    const Phantom a = generate_phantom(small_spec(3)), b = generate_phantom(small_spec(3)),
                  c = generate_phantom(small_spec(4));
    CHECK(a.hu == b.hu);
    CHECK(a.labels == b.labels);
    CHECK_FALSE(a.labels == c.labels);
    CHECK(a.hu.spacing() == Spacing{5, 2, 2});
}

TEST_CASE("every class is present") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Phantom p = generate_phantom(small_spec(seed));
        std::set<std::uint8_t> seen(p.labels.data().begin(), p.labels.data().end());
        CHECK(seen == std::set<std::uint8_t>{0, 1, 2, 3, 4, 5});
    }
}

TEST_CASE("thoracic cavity only in the top slices, abdominal cavity below") {
    const PhantomSpec s = small_spec(1);
    const Phantom p = generate_phantom(s);
    for (std::size_t z = 0; z < s.nz; ++z) {
        bool tc = false, ac = false;
        for (auto v : p.labels.slice(z)) {
            tc |= v == 5;
            ac |= v == 4;
        }
        CHECK(tc == (z >= s.nz - s.thoracic_cap));
        CHECK(ac == (z < s.nz - s.thoracic_cap));
    }
}

TEST_CASE("generated composition equals quantification of the clean image") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Phantom p = generate_phantom(small_spec(seed));
        const auto q = quantify(p.hu_clean, p.labels);
        REQUIRE(q.rows.size() == p.composition.rows.size());
        for (std::size_t z = 0; z < q.rows.size(); ++z) CHECK(q.rows[z].voxels == p.composition.rows[z].voxels);
        CHECK(q.total_sat_ml == p.composition.total_sat_ml);
        CHECK(p.composition.total_voxels.sat > 0);
        CHECK(p.composition.total_voxels.vat > 0);
        CHECK(p.composition.total_voxels.muscle > 0);
        CHECK(p.composition.metadata.at("seed") == seed);
    }
}

TEST_CASE("noise rarely moves a voxel across a threshold") {
    const Phantom p = generate_phantom(small_spec(9));
    std::size_t flipped = 0;
    for (std::size_t i = 0; i < p.hu.size(); ++i)
        flipped += classify_tissue(p.hu.data()[i]) != classify_tissue(p.hu_clean.data()[i]);
    CHECK(static_cast<double>(flipped) < 0.01 * static_cast<double>(p.hu.size()));
    CHECK_FALSE(p.hu == p.hu_clean);
}

TEST_CASE("clean intensities follow the tissue table") {
    const Phantom p = generate_phantom(small_spec(2));
    const std::set<float> allowed{phantom_hu::kAir, phantom_hu::kFat,  phantom_hu::kMuscle,
                                  phantom_hu::kOrgan, phantom_hu::kBone, phantom_hu::kLung};
    for (float v : p.hu_clean.data()) CHECK(allowed.count(v) == 1);
}

TEST_CASE("sparse annotation keeps every fifth slice") {
    PhantomSpec s = small_spec(5);
    s.nz = 40;
    s.thoracic_cap = 8;
    const Phantom p = generate_phantom(s);
    const LabelVolume sparse = sparsify_annotation(p.labels);
    std::size_t kept = 0;
    for (std::size_t z = 0; z < s.nz; ++z) {
        const auto sl = sparse.slice(z);
        const bool all_ignore = std::all_of(sl.begin(), sl.end(), [](auto v) { return v == kIgnoreLabel; });
        if (z % 5 == 0) {
            ++kept;
            CHECK(std::equal(sl.begin(), sl.end(), p.labels.slice(z).begin()));
        } else {
            CHECK(all_ignore);
        }
    }
    CHECK(kept == 8);
    CHECK_THROWS(sparsify_annotation(p.labels, 0));
}

TEST_CASE("abdominal organs never touch muscle directly") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const PhantomSpec s = small_spec(seed);
        const Phantom p = generate_phantom(s);
        const auto muscle = label_of(BodyRegion::Muscle);
        std::size_t checked = 0;
        for (std::size_t z = 0; z < s.nz; ++z) {
            for (std::size_t y = 1; y + 1 < s.ny; ++y) {
                for (std::size_t x = 1; x + 1 < s.nx; ++x) {
                    if (p.labels.at(z, y, x) != label_of(BodyRegion::AbdominalCavity)) continue;
                    const bool next_to_muscle = p.labels.at(z, y - 1, x) == muscle || p.labels.at(z, y + 1, x) == muscle ||
                                                p.labels.at(z, y, x - 1) == muscle || p.labels.at(z, y, x + 1) == muscle;
                    if (!next_to_muscle) continue;
                    ++checked;
                    CHECK(p.hu_clean.at(z, y, x) == phantom_hu::kFat);
                }
            }
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("compartments change along z and paraspinal muscle grows caudally") {
    PhantomSpec s = small_spec(7);
    s.nz = 40;
    s.thoracic_cap = 8;
    const Phantom p = generate_phantom(s);
    const auto& rows = p.composition.rows;
    auto spread = [&](auto field) {
        double lo = 1e300, hi = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, field(r));
            hi = std::max(hi, field(r));
        }
        return (hi - lo) / hi;
    };
    CHECK(spread([](const SliceComposition& r) { return r.muscle_ml; }) > 0.15);
    CHECK(spread([](const SliceComposition& r) { return r.sat_ml; }) > 0.1);

    PhantomSpec flat = s;
    flat.paraspinal_radius = 0.0;
    const Phantom q = generate_phantom(flat);
    const double extra_low = p.composition.rows.front().muscle_ml - q.composition.rows.front().muscle_ml;
    const double extra_high = p.composition.rows.back().muscle_ml - q.composition.rows.back().muscle_ml;
    CHECK(extra_low > 0.0);
    CHECK(extra_low > extra_high);
}

TEST_CASE("spec validation") {
    PhantomSpec s = small_spec(0);
    s.bone_count = 0;
    CHECK_THROWS(generate_phantom(s));
    s = small_spec(0);
    s.thoracic_cap = s.nz;
    CHECK_THROWS(generate_phantom(s));
    s = small_spec(0);
    s.body_rx = 0.6;
    CHECK_THROWS(generate_phantom(s));
    s = small_spec(0);
    s.thickness_variation = 0.5;
    CHECK_THROWS(generate_phantom(s));
    s = small_spec(0);
    s.fascia_thickness = -0.01;
    CHECK_THROWS(generate_phantom(s));
    s = small_spec(0);
    s.paraspinal_radius = -0.01;
    CHECK_THROWS(generate_phantom(s));
    s = small_spec(0);
    s.paraspinal_radius = 0.0;
    s.fascia_thickness = 0.0;
    s.thickness_variation = 0.0;
    CHECK_NOTHROW(generate_phantom(s));
}
