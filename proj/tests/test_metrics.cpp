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

#include "bodycomp/metrics.hpp"
#include "oracles.hpp"

using namespace bodycomp;

namespace {

LabelVolume row(std::vector<std::uint8_t> v) {
    const std::size_t n = v.size();
    return LabelVolume({1, 1, n}, Spacing{}, std::move(v));
}

}  // namespace

TEST_CASE("dice examples") {
    const auto gt = row({1, 1, 0, 0});
    CHECK(dice_score(row({1, 1, 0, 0}), gt, 1) == 1.0);
    CHECK(dice_score(row({1, 0, 0, 0}), gt, 1) == doctest::Approx(2.0 / 3.0));
    CHECK(dice_score(row({0, 0, 1, 1}), gt, 1) == 0.0);
    CHECK(dice_score(row({0, 0, 0, 0}), row({0, 0, 0, 0}), 2) == 1.0);
    // ignored voxels are left out
    CHECK(dice_score(row({1, 1, 1, 0}), row({1, 1, kIgnoreLabel, 0}), 1) == 1.0);
    CHECK(dice_score(row({1, kIgnoreLabel, 0, 0}), gt, 1) == 1.0);
}

TEST_CASE("dice is symmetric and bounded") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> lab(0, 5);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<std::uint8_t> a(50), b(50);
        for (auto& v : a) v = static_cast<std::uint8_t>(lab(rng));
        for (auto& v : b) v = static_cast<std::uint8_t>(lab(rng));
        for (std::uint8_t c = 1; c < 6; ++c) {
            const double d = dice_score(row(a), row(b), c);
            CHECK(d >= 0.0);
            CHECK(d <= 1.0);
            CHECK(d == dice_score(row(b), row(a), c));
        }
        const auto m = mean_foreground_dice(row(a), row(b));
        double s = 0;
        for (double v : m.per_class) s += v;
        CHECK(m.mean == doctest::Approx(s / 5.0));
    }
}

TEST_CASE("report order is AC, B, M, ST, TC") {
    // gt has one voxel of each class 1..5; prediction only gets class 4 (AC) right
    const auto gt = row({1, 2, 3, 4, 5});
    const auto pred = row({0, 0, 0, 4, 0});
    const auto r = mean_foreground_dice(pred, gt);
    CHECK(r.per_class[0] == 1.0);
    for (int i = 1; i < 5; ++i) CHECK(r.per_class[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("pooled tallies") {
    DiceTally t;
    t.add(row({1, 1, 0}), row({1, 0, 0}));
    t.add(row({1, 0, 0}), row({1, 1, 0}));
    // pooled: intersection 2, pred 3, gt 3
    CHECK(t.result().per_class[2] == doctest::Approx(2.0 * 2.0 / 6.0));
    CHECK_THROWS(t.add(row({1}), row({1, 1})));
}

TEST_CASE("ICC matches the ANOVA oracle") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 25; ++rep) {
        const std::size_t n = 3 + static_cast<std::size_t>(rep);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 100.0 + 20.0 * nd(rng);
            b[i] = a[i] + 0.5 * rep * nd(rng) + 0.3 * rep;
        }
        CHECK(std::abs(icc(a, b) - oracle::icc_agreement(a, b)) < 1e-12);
    }
}

TEST_CASE("ICC properties") {
    const std::vector<double> a{10, 20, 30, 45, 50, 71};
    CHECK(icc(a, a) == doctest::Approx(1.0).epsilon(1e-15));

    // a constant offset costs agreement but not consistency
    std::vector<double> shifted = a;
    for (auto& v : shifted) v += 5.0;
    CHECK(icc(a, shifted) < 1.0);
    CHECK(icc(a, shifted, IccForm::Consistency) == doctest::Approx(1.0).epsilon(1e-12));

    // more noise, lower agreement
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    std::vector<double> base(200), eps(200);
    for (std::size_t i = 0; i < 200; ++i) {
        base[i] = 50.0 * nd(rng);
        eps[i] = nd(rng);
    }
    double prev = 1.0;
    for (double s : {1.0, 5.0, 10.0, 30.0}) {
        std::vector<double> b(200);
        for (std::size_t i = 0; i < 200; ++i) b[i] = base[i] + s * eps[i];
        const double v = icc(base, b);
        CHECK(v < prev);
        prev = v;
    }

    CHECK(icc(std::vector<double>{3, 3, 3}, std::vector<double>{3, 3, 3}) == 1.0);
    CHECK_THROWS(icc(std::vector<double>{1}, std::vector<double>{1}));
    CHECK_THROWS(icc(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}));
    CHECK_THROWS(icc(std::vector<double>{1, std::nan("")}, std::vector<double>{1, 2}));
}
