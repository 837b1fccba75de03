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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "bodycomp/nn/tensor.hpp"

namespace bodycomp {

class LossError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDiceEps = 1e-5;
inline constexpr double kLogClamp = 1e-12;

struct LossValue {
    double xce = 0.0;
    double dice = 0.0;
    double combined = 0.0;  // 0.5 * xce + 0.5 * dice
    std::size_t annotated = 0;
};

// All losses take class probabilities of shape (1, C, d, h, w) and one label per
// voxel (z-y-x order). Voxels labelled Ignore contribute to no sum and no count.
// When `grad` is non-null, d(loss)/d(probs) is accumulated into it.

/// Mean negative log-probability of the true class over annotated voxels.
template <typename T>
double xce_loss(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels, nn::Tensor<T>* grad = nullptr,
                double scale = 1.0);

/// Soft Dice over the foreground classes 1..C-1, background excluded.
template <typename T>
double dice_loss(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels, nn::Tensor<T>* grad = nullptr,
                 double scale = 1.0, double eps = kDiceEps);

template <typename T>
LossValue combined_loss(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels,
                        nn::Tensor<T>* grad = nullptr);

}  // namespace bodycomp
