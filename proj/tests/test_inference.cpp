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

#include "bodycomp/inference.hpp"
#include "bodycomp/nn/layers.hpp"
#include "test_helpers.hpp"

using namespace bodycomp;
using nn::Tensor;

namespace {

/// Voxel-wise logits: class c gets (c + 1) * x - c^2 from the first input channel.
Tensor<float> pointwise_logits(const Tensor<float>& x) {
    const auto s = x.shape();
    Tensor<float> out({1, 6, s.d, s.h, s.w});
    const std::size_t sp = s.spatial();
    for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t v = 0; v < sp; ++v) {
            const float fc = static_cast<float>(c);
            out[c * sp + v] = (fc + 1.0f) * x[v] - fc * fc;
        }
    return out;
}

ArchitectureSpec small_arch() {
    ArchitectureSpec a;
    a.nf = 2;
    a.levels = 2;
    return a;
}

}  // namespace

TEST_CASE("window start positions") {
    CHECK(window_starts(64, 32, 0.75) == std::vector<std::size_t>{0, 8, 16, 24, 32});
    CHECK(window_starts(20, 32, 0.75) == std::vector<std::size_t>{0});
    CHECK(window_starts(44, 32, 0.75) == std::vector<std::size_t>{0, 8, 12});
    CHECK(window_starts(32, 32, 0.75) == std::vector<std::size_t>{0});
    CHECK(window_starts(10, 4, 0.0) == std::vector<std::size_t>{0, 4, 6});
    for (std::size_t nz = 1; nz < 100; ++nz) {
        const auto s = window_starts(nz, 32);
        CHECK(s.front() == 0);
        CHECK(s.back() + 32 >= nz);
        for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] > s[i - 1]);
    }
    CHECK_THROWS(window_starts(10, 4, 1.0));
}

TEST_CASE("slab weights") {
    CHECK(slab_weights(4) == std::vector<double>{1, 2, 2, 1});
    CHECK(slab_weights(5) == std::vector<double>{1, 2, 3, 2, 1});
    for (auto w : {SlabWeighting::Tent, SlabWeighting::Gaussian}) {
        const auto v = slab_weights(32, w);
        for (std::size_t i = 0; i < 32; ++i) {
            CHECK(v[i] > 0.0);
            CHECK(v[i] == doctest::Approx(v[31 - i]).epsilon(1e-15));
        }
    }
    const auto g = slab_weights(32, SlabWeighting::Gaussian);
    CHECK(g[15] == doctest::Approx(std::exp(-0.25 / (2.0 * 16.0))));
}

TEST_CASE("constant logits give the constant softmax everywhere") {
    const Tensor<float> in({1, 1, 13, 6, 5}, 0.0f);
    const LogitFunction constant = [](const Tensor<float>& x) {
        Tensor<float> out({1, 6, x.shape().d, x.shape().h, x.shape().w});
        for (std::size_t c = 0; c < 6; ++c)
            for (auto& v : out.channel(0, c)) v = static_cast<float>(c);
        return out;
    };
    const auto p = sliding_window_predict(constant, 4, in, Spacing{}, {8, 0.5, SlabWeighting::Tent});
    CHECK(p.dims == Dims{13, 6, 5});
    double z = 0;
    for (int c = 0; c < 6; ++c) z += std::exp(c);
    for (int c = 0; c < 6; ++c)
        for (std::size_t v = 0; v < p.dims.count(); ++v) CHECK(p.at(c, v) == doctest::Approx(std::exp(c) / z).epsilon(1e-6));
}

TEST_CASE("voxel-wise logits are recovered for any depth") {
    std::mt19937_64 rng(3);
    for (std::size_t nz : {1u, 31u, 32u, 33u, 44u, 64u}) {
        const auto in = random_tensor<float>({1, 2, nz, 6, 10}, rng);
        const auto direct = nn::softmax_channels_forward(pointwise_logits(in));
        for (auto w : {SlabWeighting::Tent, SlabWeighting::Gaussian}) {
            const auto p = sliding_window_predict(pointwise_logits, 4, in, Spacing{}, {32, 0.75, w});
            REQUIRE(p.dims == Dims{nz, 6, 10});
            CHECK(p.max_normalization_error() < 1e-5);
            double err = 0;
            for (std::size_t i = 0; i < direct.size(); ++i) err = std::max(err, std::abs(double(direct[i]) - p.data[i]));
            CHECK(err < 1e-6);
        }
    }
}

TEST_CASE("a single full-depth window equals the direct model output") {
    Model<float> m(small_arch(), 5);
    std::mt19937_64 rng(4);
    const auto in = random_tensor<float>({1, 3, 8, 8, 8}, rng);
    const auto direct = nn::softmax_channels_forward(m.logits(in));
    const auto p = sliding_window_predict(m, in, Spacing{}, {8, 0.75, SlabWeighting::Tent});
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(std::abs(direct[i] - p.data[i]) < 1e-6);
}

TEST_CASE("probabilities sum to one with a real network and odd sizes") {
    Model<float> m(small_arch(), 6);
    std::mt19937_64 rng(5);
    const auto in = random_tensor<float>({1, 3, 11, 7, 9}, rng);
    const auto p = sliding_window_predict(m, in, Spacing{5, 2, 2}, {4, 0.5, SlabWeighting::Tent});
    CHECK(p.dims == Dims{11, 7, 9});
    CHECK(p.spacing == Spacing{5, 2, 2});
    CHECK(p.max_normalization_error() < 1e-5);
    CHECK_THROWS_AS(sliding_window_predict(m, in, Spacing{}, {3, 0.5, SlabWeighting::Tent}), nn::ShapeError);
}

TEST_CASE("ensembles average member probabilities") {
    std::mt19937_64 rng(6);
    const auto in = random_tensor<float>({1, 3, 4, 4, 4}, rng);
    const SlidingWindowOptions opt{4, 0.75, SlabWeighting::Tent};

    std::vector<Model<float>> same{Model<float>(small_arch(), 1), Model<float>(small_arch(), 1)};
    const auto single = sliding_window_predict(same[0], in, Spacing{}, opt);
    const auto both = ensemble_predict(same, in, Spacing{}, opt);
    for (std::size_t i = 0; i < single.data.size(); ++i) CHECK(std::abs(single.data[i] - both.data[i]) < 1e-7);

    // constant members p and q give (p + q) / 2
    std::vector<Model<float>> pq{Model<float>(small_arch(), 2), Model<float>(small_arch(), 3)};
    for (auto& m : pq) m.zero_head();
    pq[0].parameter("head.bias").value[0] = std::log(5.0f);  // p = (5,1,1,1,1,1)/10
    pq[1].parameter("head.bias").value[1] = std::log(3.0f);  // q = (1,3,1,1,1,1)/8
    const auto avg = ensemble_predict(pq, in, Spacing{}, opt);
    const double expect[6] = {(0.5 + 0.125) / 2, (0.1 + 0.375) / 2, (0.1 + 0.125) / 2,
                              (0.1 + 0.125) / 2, (0.1 + 0.125) / 2, (0.1 + 0.125) / 2};
    for (int c = 0; c < 6; ++c)
        for (std::size_t v = 0; v < avg.dims.count(); ++v) CHECK(avg.at(c, v) == doctest::Approx(expect[c]).epsilon(1e-6));

    ArchitectureSpec other = small_arch();
    other.nf = 4;
    std::vector<Model<float>> mixed{Model<float>(small_arch()), Model<float>(other)};
    CHECK_THROWS(ensemble_predict(mixed, in, Spacing{}, opt));
    std::vector<Model<float>> none;
    CHECK_THROWS(ensemble_predict(none, in, Spacing{}, opt));
}

TEST_CASE("argmax picks the lowest index on ties") {
    ProbabilityVolume p({1, 1, 3}, Spacing{});
    // voxel 0: class 2 wins; voxel 1: tie 1/4 -> 1; voxel 2: uniform -> 0
    for (int c = 0; c < 6; ++c) {
        p.at(c, 0) = c == 2 ? 0.5f : 0.1f;
        p.at(c, 1) = (c == 1 || c == 4) ? 0.4f : 0.05f;
        p.at(c, 2) = 1.0f / 6.0f;
    }
    const auto l = argmax_labels(p);
    CHECK(l.at(0, 0, 0) == 2);
    CHECK(l.at(0, 0, 1) == 1);
    CHECK(l.at(0, 0, 2) == 0);
}
