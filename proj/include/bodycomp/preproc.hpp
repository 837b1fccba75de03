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
#include <random>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bodycomp/nn/tensor.hpp"
#include "bodycomp/volume.hpp"

namespace bodycomp {

/// Closed HU interval mapped onto [-1, 1].
struct HUWindow {
    double lo = -1024.0;
    double hi = 4096.0;

    void validate() const;
    friend bool operator==(const HUWindow&, const HUWindow&) = default;
};

void to_json(nlohmann::json& j, const HUWindow& w);
void from_json(const nlohmann::json& j, HUWindow& w);

/// Named window sets: "multi", "full12bit", "abdomen", "liver".
std::vector<HUWindow> window_preset(std::string_view name);

/// Accepts a preset name or an array of [lo, hi] pairs.
std::vector<HUWindow> parse_windows(const nlohmann::json& j);

/// 2 * (clamp(hu, lo, hi) - lo) / (hi - lo) - 1.
float window_value(float hu, const HUWindow& window);

std::vector<float> window_normalize(const HUVolume& volume, const HUWindow& window);

/// One channel per window, shape (1, windows, nz, ny, nx).
nn::Tensor<float> multi_window_stack(const HUVolume& volume, const std::vector<HUWindow>& windows);

/// Block-mean in-plane downscale; in-plane spacing grows by `factor`.
HUVolume downscale_xy(const HUVolume& volume, int factor);

/// Majority vote per block (ties to the smaller label value).
LabelVolume downscale_labels_xy(const LabelVolume& labels, int factor);

/// Image with its paired labels.
struct Sample {
    HUVolume image;
    LabelVolume labels;
};

inline constexpr float kPadHU = -1024.0f;
inline constexpr double kScaleMin = 0.8;
inline constexpr double kScaleMax = 1.2;

/// In-plane dims after scaling: round(n * factor), at least 1.
Dims scaled_dims(const Dims& dims, double scale_x, double scale_y);

/// Bilinear image / nearest-neighbour label resampling of every slice.
Sample augment_scale(const Sample& sample, double scale_x, double scale_y);

Sample augment_flip_x(const Sample& sample);

struct AugmentationParams {
    double scale_x = 1.0;
    double scale_y = 1.0;
    bool flip_x = false;
    /// Offsets into the volume after symmetric padding up to the crop size.
    std::size_t crop_z0 = 0, crop_y0 = 0, crop_x0 = 0;
};

struct AugmentationToggles {
    bool scale = true;
    bool flip = true;
};

inline constexpr Dims kDefaultCrop{32, 256, 256};

/// Pads symmetrically (HU -1024, label Ignore) where the input is smaller
/// than `crop`, then cuts the window starting at the params' offsets.
Sample crop_subvolume(const Sample& sample, const AugmentationParams& params, const Dims& crop = kDefaultCrop);

/// Draws scale, flip and crop offsets. `dims` is the pre-scale volume size.
AugmentationParams sample_augmentation_params(std::mt19937_64& rng, const Dims& dims, const Dims& crop = kDefaultCrop,
                                              const AugmentationToggles& toggles = {});

/// scale -> flip -> crop.
Sample apply_augmentation(const Sample& sample, const AugmentationParams& params, const Dims& crop = kDefaultCrop);

}  // namespace bodycomp
