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

#include "bodycomp/gradcheck_suite.hpp"

#include <random>

#include "bodycomp/loss.hpp"
#include "bodycomp/models.hpp"
#include "bodycomp/volume.hpp"

namespace bodycomp {

namespace {

using nn::Objective;
using nn::Parameter;
using nn::Shape5;
using nn::Tensor;
using Ids = std::vector<nn::Tape<double>::Id>;

struct Fixture {
    std::mt19937_64 rng;

    Tensor<double> normal(Shape5 s) {
        std::normal_distribution<double> nd;
        Tensor<double> t(s);
        for (auto& v : t.data()) v = nd(rng);
        return t;
    }
    Parameter<double> param(const std::string& name, Shape5 s) { return Parameter<double>(name, normal(s)); }
    std::vector<std::uint8_t> labels(std::size_t n, int classes) {
        std::vector<std::uint8_t> l(n);
        for (auto& v : l) v = static_cast<std::uint8_t>(rng() % static_cast<std::uint64_t>(classes));
        l[n / 3] = kIgnoreLabel;
        return l;
    }
};

}  // namespace

std::vector<LayerCheck> run_gradcheck_suite(std::uint64_t seed) {
    Fixture f{std::mt19937_64(seed)};
    std::vector<LayerCheck> out;
    const Shape5 xs{1, 2, 4, 4, 4};
    const nn::GradCheckOptions opts{};

    auto layer = [&](const std::string& name, const nn::GraphBuilder& build, const std::vector<Tensor<double>*>& inputs,
                     const std::vector<Parameter<double>*>& params, double tol = kLayerTolerance) {
        out.push_back({name, nn::grad_check(build, inputs, params, opts), tol});
    };

    for (std::size_t k : {1u, 3u}) {
        auto x = f.normal(xs);
        auto w = f.param("weight", {3, 2, k, k, k});
        auto b = f.param("bias", {1, 3, 1, 1, 1});
        auto r = f.normal({1, 3, 4, 4, 4});
        layer("conv3d_k" + std::to_string(k),
              [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.conv3d(in[0], w, b), nn::projection_head(r)}; },
              {&x}, {&w, &b});
    }
    {
        auto x = f.normal(xs);
        auto r = f.normal({1, 2, 2, 2, 2});
        layer("maxpool3d",
              [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.maxpool(in[0]), nn::projection_head(r)}; },
              {&x}, {});
    }
    {
        auto x = f.normal(xs);
        auto r = f.normal({1, 2, 8, 8, 8});
        layer("trilinear_upsample",
              [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.upsample(in[0]), nn::projection_head(r)}; },
              {&x}, {});
    }
    {
        auto x = f.normal(xs);
        auto g = f.param("gamma", {1, 2, 1, 1, 1});
        auto b = f.param("beta", {1, 2, 1, 1, 1});
        auto r = f.normal(xs);
        layer("instance_norm",
              [&](nn::Tape<double>& t, const Ids& in) {
                  return Objective{t.instance_norm(in[0], g, b), nn::projection_head(r)};
              },
              {&x}, {&g, &b});
    }
    {
        auto x = f.normal(xs);
        auto r = f.normal(xs);
        layer("relu", [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.relu(in[0]), nn::projection_head(r)}; },
              {&x}, {});
    }
    {
        auto a = f.normal(xs);
        auto b = f.normal({1, 3, 4, 4, 4});
        auto r = f.normal({1, 5, 4, 4, 4});
        layer("concat",
              [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.concat(in[0], in[1]), nn::projection_head(r)}; },
              {&a, &b}, {});
    }
    {
        auto a = f.normal(xs);
        auto b = f.normal(xs);
        auto r = f.normal(xs);
        layer("add",
              [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.add(in[0], in[1]), nn::projection_head(r)}; },
              {&a, &b}, {});
    }
    {
        auto x = f.normal({1, 6, 2, 4, 4});
        auto r = f.normal({1, 6, 2, 4, 4});
        layer("softmax",
              [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.softmax(in[0]), nn::projection_head(r)}; },
              {&x}, {});
    }

    // Losses through softmax, on logits.
    const Shape5 ls{1, 6, 2, 4, 4};
    const auto labels = f.labels(ls.spatial(), 6);
    auto loss_check = [&](const std::string& name, nn::ObjectiveHead head) {
        auto x = f.normal(ls);
        layer(name, [&](nn::Tape<double>& t, const Ids& in) { return Objective{t.softmax(in[0]), head}; }, {&x}, {});
    };
    loss_check("softmax+xce", [&](const Tensor<double>& p, Tensor<double>* g) { return xce_loss(p, labels, g, 1.0); });
    loss_check("softmax+dice", [&](const Tensor<double>& p, Tensor<double>* g) { return dice_loss(p, labels, g, 1.0); });
    loss_check("softmax+combined",
               [&](const Tensor<double>& p, Tensor<double>* g) { return combined_loss(p, labels, g).combined; });

    // Two-level networks end to end.
    for (Variant v : {Variant::UNet3D, Variant::MultiResUNet3D}) {
        ArchitectureSpec spec;
        spec.variant = v;
        spec.nf = 2;
        spec.levels = 2;
        spec.in_channels = 2;
        spec.out_classes = 3;
        Model<double> model(spec, f.rng());
        auto x = f.normal(xs);
        const auto net_labels = f.labels(xs.spatial(), spec.out_classes);
        std::vector<Parameter<double>*> params;
        for (auto& p : model.parameters()) params.push_back(&p);
        layer("network_" + to_string(v),
              [&](nn::Tape<double>& t, const Ids& in) {
                  return Objective{t.softmax(model.forward(t, in[0])),
                                   [&](const Tensor<double>& p, Tensor<double>* g) {
                                       return combined_loss(p, net_labels, g).combined;
                                   }};
              },
              {&x}, params, kEndToEndTolerance);
    }
    return out;
}

}  // namespace bodycomp
