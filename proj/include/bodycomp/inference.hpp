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

#include <functional>
#include <vector>

#include "bodycomp/models.hpp"
#include "bodycomp/preproc.hpp"
#include "bodycomp/volume.hpp"

namespace bodycomp {

/// Start slices 0, S, 2S, ... (S = round(W * (1 - overlap))) capped at nz - W,
/// plus nz - W itself. A single start 0 when nz <= W.
std::vector<std::size_t> window_starts(std::size_t nz, std::size_t window, double overlap = 0.75);

enum class SlabWeighting { Tent, Gaussian };

/// Tent: min(i + 1, W - i). Gaussian: exp(-(i - (W-1)/2)^2 / (2 (W/8)^2)).
std::vector<double> slab_weights(std::size_t window, SlabWeighting weighting = SlabWeighting::Tent);

struct SlidingWindowOptions {
    std::size_t window = 32;
    double overlap = 0.75;
    SlabWeighting weighting = SlabWeighting::Tent;
};

/// Maps an input block (1, C_in, W, h, w) to logits (1, classes, W, h, w).
using LogitFunction = std::function<nn::Tensor<float>(const nn::Tensor<float>&)>;

/// Normalised-space value used to pad inputs (the lower end of every window).
inline constexpr float kInputPad = -1.0f;

/// Slab-wise prediction over z. `divisor` is the spatial multiple the
/// network needs; h and w are padded with -1 up to it and cropped back, and
/// volumes thinner than the window are padded symmetrically in z.
ProbabilityVolume sliding_window_predict(const LogitFunction& logits, std::size_t divisor, const nn::Tensor<float>& input,
                                         const Spacing& spacing, const SlidingWindowOptions& options = {});

ProbabilityVolume sliding_window_predict(Model<float>& model, const nn::Tensor<float>& input, const Spacing& spacing,
                                         const SlidingWindowOptions& options = {});

/// Mean of the members' sliding-window probabilities, accumulated in member order.
ProbabilityVolume ensemble_predict(std::vector<Model<float>>& models, const nn::Tensor<float>& input,
                                   const Spacing& spacing, const SlidingWindowOptions& options = {});

/// Lowest class index among the maxima.
LabelVolume argmax_labels(const ProbabilityVolume& probs);

/// Window stacking followed by ensemble prediction on an already downscaled volume.
ProbabilityVolume predict_hu(std::vector<Model<float>>& models, const HUVolume& hu, const std::vector<HUWindow>& windows,
                             const SlidingWindowOptions& options = {});

}  // namespace bodycomp
