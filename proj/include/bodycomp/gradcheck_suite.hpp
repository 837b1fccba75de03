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
#include <string>
#include <vector>

#include "bodycomp/nn/gradcheck.hpp"

namespace bodycomp {

struct LayerCheck {
    std::string name;
    nn::GradCheckResult result;
    double tolerance = 0.0;

    /// Within tolerance and at most a tenth of the sampled elements skipped at kinks.
    bool passed() const {
        return result.checked > 0 && result.max_rel_error < tolerance && result.skipped * 10 <= result.checked + result.skipped;
    }
};

inline constexpr double kLayerTolerance = 1e-5;
inline constexpr double kEndToEndTolerance = 1e-4;

/// Finite-difference checks of every layer, the losses through softmax, and
/// two-level networks of both variants under the combined loss (64-bit).
std::vector<LayerCheck> run_gradcheck_suite(std::uint64_t seed = 7);

}  // namespace bodycomp
