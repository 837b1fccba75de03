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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bodycomp/nn/tape.hpp"

namespace bodycomp::nn {

/// Scalar head placed on top of a graph output: returns the objective and,
/// when `grad` is non-null, accumulates d(objective)/d(output) into it.
using ObjectiveHead = std::function<double(const Tensor<double>& out, Tensor<double>* grad)>;

struct Objective {
    Tape<double>::Id out = 0;
    ObjectiveHead head;
};

/// Rebuilds the graph under test from leaf ids (one per checked input).
using GraphBuilder = std::function<Objective(Tape<double>& tape, const std::vector<Tape<double>::Id>& inputs)>;

struct GradCheckOptions {
    double h = 1e-4;
    /// Tensors larger than this are checked on a random subset of this many elements.
    std::size_t max_elements = 200;
    /// Denominator floor for the relative error of near-zero gradients.
    double abs_floor = 1e-6;
    std::uint64_t seed = 7;
};

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst;  // "<tensor>[<index>] analytic=... numeric=..."
    std::size_t checked = 0;
    /// Elements whose +-h evaluation switched a relu or maxpool branch; their
    /// finite difference straddles a kink and is not compared.
    std::size_t skipped = 0;
};

/// Compares analytic gradients against central finite differences for every
/// element (or a random subset) of each input and parameter. The harness owns
/// the tapes it builds; `build` must not keep references to them.
GradCheckResult grad_check(const GraphBuilder& build, const std::vector<Tensor<double>*>& inputs,
                           const std::vector<Parameter<double>*>& params, const GradCheckOptions& options = {});

/// Head computing sum(weights * out).
ObjectiveHead projection_head(Tensor<double> weights);

}  // namespace bodycomp::nn
