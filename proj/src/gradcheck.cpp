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

#include "bodycomp/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace bodycomp::nn {

namespace {

struct Evaluation {
    double value;
    std::uint64_t branches;
};

Evaluation evaluate(const GraphBuilder& build, const std::vector<Tensor<double>*>& inputs) {
    Tape<double> tape(false);
    tape.set_track_branches(true);
    std::vector<Tape<double>::Id> ids;
    for (auto* t : inputs) ids.push_back(tape.input(*t));
    const Objective obj = build(tape, ids);
    return {obj.head(tape.value(obj.out), nullptr), tape.branch_signature()};
}

std::vector<std::size_t> pick(std::size_t size, std::size_t limit, std::mt19937_64& rng) {
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (size > limit) {
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(limit);
        std::sort(idx.begin(), idx.end());
    }
    return idx;
}

}  // namespace

GradCheckResult grad_check(const GraphBuilder& build, const std::vector<Tensor<double>*>& inputs,
                           const std::vector<Parameter<double>*>& params, const GradCheckOptions& options) {
    for (auto* p : params) p->zero_grad();

    Tape<double> tape(true);
    tape.set_track_branches(true);
    std::vector<Tape<double>::Id> ids;
    for (auto* t : inputs) ids.push_back(tape.input(*t, true));
    const Objective obj = build(tape, ids);
    Tensor<double> seed(tape.value(obj.out).shape());
    obj.head(tape.value(obj.out), &seed);
    tape.backward(obj.out, seed);
    const std::uint64_t base_branches = tape.branch_signature();

    struct Target {
        std::string name;
        Tensor<double>* value;
        Tensor<double> analytic;
    };
    std::vector<Target> targets;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Tensor<double> g = tape.grad(ids[k]);
        if (g.empty()) g = Tensor<double>(inputs[k]->shape());
        targets.push_back({"input" + std::to_string(k), inputs[k], std::move(g)});
    }
    for (auto* p : params) targets.push_back({p->name, &p->value, p->grad});

    GradCheckResult result;
    std::mt19937_64 rng(options.seed);
    for (auto& t : targets) {
        for (std::size_t i : pick(t.value->size(), options.max_elements, rng)) {
            const double orig = (*t.value)[i];
            (*t.value)[i] = orig + options.h;
            const Evaluation fp = evaluate(build, inputs);
            (*t.value)[i] = orig - options.h;
            const Evaluation fm = evaluate(build, inputs);
            (*t.value)[i] = orig;
            if (fp.branches != base_branches || fm.branches != base_branches) {
                ++result.skipped;
                continue;
            }
            const double numeric = (fp.value - fm.value) / (2.0 * options.h);
            const double analytic = t.analytic[i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
            const double rel = std::abs(analytic - numeric) / denom;
            ++result.checked;
            if (rel > result.max_rel_error || result.worst.empty()) {
                result.max_rel_error = std::max(result.max_rel_error, rel);
                std::ostringstream os;
                os.precision(10);
                os << t.name << "[" << i << "] analytic=" << analytic << " numeric=" << numeric;
                result.worst = os.str();
            }
        }
    }
    return result;
}

ObjectiveHead projection_head(Tensor<double> weights) {
    return [w = std::move(weights)](const Tensor<double>& out, Tensor<double>* grad) {
        if (out.shape() != w.shape()) throw ShapeError("projection head shape mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) s += w[i] * out[i];
        if (grad) {
            for (std::size_t i = 0; i < out.size(); ++i) (*grad)[i] += w[i];
        }
        return s;
    };
}

}  // namespace bodycomp::nn
