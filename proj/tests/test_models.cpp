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

#include <cmath>
#include <random>

#include "bodycomp/models.hpp"
#include "bodycomp/nn/layers.hpp"
#include "test_helpers.hpp"

using namespace bodycomp;

namespace {

ArchitectureSpec spec_of(Variant v, int nf, int levels = 5) {
    ArchitectureSpec s;
    s.variant = v;
    s.nf = nf;
    s.levels = levels;
    return s;
}

}  // namespace

TEST_CASE("bottleneck width doubles per level") {
    CHECK(spec_of(Variant::UNet3D, 16).bottleneck_channels() == 256);
    CHECK(spec_of(Variant::UNet3D, 32).bottleneck_channels() == 512);
    CHECK(spec_of(Variant::UNet3D, 64).bottleneck_channels() == 1024);
    CHECK(spec_of(Variant::UNet3D, 32).divisor() == 16);
}

TEST_CASE("parameter counts track the published sizes") {
    struct Row {
        Variant v;
        int nf;
        double published;
    };
    const Row rows[] = {
        {Variant::UNet3D, 16, 5.34e6},         {Variant::UNet3D, 32, 21.36e6},
        {Variant::UNet3D, 64, 85.43e6},        {Variant::MultiResUNet3D, 16, 5.82e6},
        {Variant::MultiResUNet3D, 32, 21.24e6}, {Variant::MultiResUNet3D, 64, 85.10e6},
    };
    std::map<std::pair<int, int>, double> counts;
    for (const Row& r : rows) {
        const Model<float> m(spec_of(r.v, r.nf));
        const double n = static_cast<double>(m.param_count());
        INFO(to_string(r.v) << " nf=" << r.nf << " params=" << n);
        CHECK(std::abs(n - r.published) / r.published <= 0.10);
        counts[{static_cast<int>(r.v), r.nf}] = n;
    }
    for (int v : {0, 1}) {
        const double r1 = counts[{v, 32}] / counts[{v, 16}];
        const double r2 = counts[{v, 64}] / counts[{v, 32}];
        CHECK(r1 >= 3.5);
        CHECK(r1 <= 4.5);
        CHECK(r2 >= 3.5);
        CHECK(r2 <= 4.5);
    }
}

TEST_CASE("parameter count equals the sum of tensor sizes and of the breakdown") {
    const Model<float> m(spec_of(Variant::MultiResUNet3D, 4, 3));
    std::size_t total = 0;
    for (const auto& p : m.parameters()) total += p.size();
    CHECK(m.param_count() == total);
    std::size_t by_block = 0;
    for (const auto& [name, n] : m.param_breakdown()) by_block += n;
    CHECK(by_block == total);
}

TEST_CASE("classifier head is one 1x1x1 conv") {
    // 3 input features, 6 classes: 3 * 6 weights + 6 biases
    const Model<float> m(spec_of(Variant::UNet3D, 3, 2));
    CHECK(m.param_breakdown().at("head") == 24);
    const nn::Tensor<float> w({6, 3, 1, 1, 1}), b({1, 6, 1, 1, 1});
    CHECK(w.size() + b.size() == 24);
}

TEST_CASE("multi-res channel split") {
    const auto s = multires_split(32, 1.67);
    CHECK(s.a == 9);
    CHECK(s.b == 18);
    CHECK(s.c == 27);
    CHECK(s.total() == 54);
    for (int w : {2, 4, 16, 64, 256, 1024}) {
        const auto t = multires_split(w, 1.67);
        CHECK(t.a >= 1);
        CHECK(std::abs(t.total() - 1.67 * w) <= 1.5);
    }
}

TEST_CASE("forward produces per-class logits at input resolution") {
    for (Variant v : {Variant::UNet3D, Variant::MultiResUNet3D}) {
        Model<float> m(spec_of(v, 4, 3), 11);
        std::mt19937_64 rng(1);
        const auto x = random_tensor<float>({1, 3, 8, 16, 12}, rng);
        const auto y = m.logits(x);
        CHECK(y.shape() == nn::Shape5{1, 6, 8, 16, 12});
        for (float e : y.data()) CHECK(std::isfinite(e));
    }
}

TEST_CASE("zeroed classifier gives uniform probabilities") {
    Model<float> m(spec_of(Variant::MultiResUNet3D, 4, 2), 3);
    m.zero_head();
    std::mt19937_64 rng(2);
    const auto p = nn::softmax_channels_forward(m.logits(random_tensor<float>({1, 3, 4, 4, 4}, rng)));
    for (float e : p.data()) CHECK(e == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
}

TEST_CASE("initialisation is a function of the seed") {
    const Model<float> a(spec_of(Variant::UNet3D, 4, 3), 99), b(spec_of(Variant::UNet3D, 4, 3), 99),
        c(spec_of(Variant::UNet3D, 4, 3), 100);
    bool differs = false;
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        CHECK(a.parameters()[i].value == b.parameters()[i].value);
        differs |= !(a.parameters()[i].value == c.parameters()[i].value);
    }
    CHECK(differs);
}

TEST_CASE("copies are deep and casts preserve values") {
    Model<float> a(spec_of(Variant::MultiResUNet3D, 4, 2), 5);
    Model<float> b = a;
    b.parameters().front().value[0] += 1.0f;
    CHECK_FALSE(a.parameters().front().value == b.parameters().front().value);
    const Model<double> d = a.cast<double>();
    for (std::size_t i = 0; i < a.parameters().size(); ++i)
        for (std::size_t k = 0; k < a.parameters()[i].size(); ++k)
            CHECK(d.parameters()[i].value[k] == static_cast<double>(a.parameters()[i].value[k]));
}

TEST_CASE("input validation") {
    Model<float> m(spec_of(Variant::UNet3D, 2, 3));
    CHECK_THROWS_AS(m.validate_input({1, 3, 6, 8, 8}), nn::ShapeError);  // 6 not a multiple of 4
    CHECK_THROWS_AS(m.validate_input({1, 2, 8, 8, 8}), nn::ShapeError);
    CHECK_NOTHROW(m.validate_input({1, 3, 4, 8, 12}));
    ArchitectureSpec bad = spec_of(Variant::UNet3D, 0);
    CHECK_THROWS(bad.validate());
    CHECK_THROWS(parse_variant("resnet"));
    CHECK(parse_variant(to_string(Variant::MultiResUNet3D)) == Variant::MultiResUNet3D);
}

TEST_CASE("architecture json round trip") {
    ArchitectureSpec s = spec_of(Variant::UNet3D, 8, 4);
    s.in_channels = 1;
    const nlohmann::json j = s;
    CHECK(j.get<ArchitectureSpec>() == s);
}
