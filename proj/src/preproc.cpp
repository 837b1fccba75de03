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

#include "bodycomp/preproc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bodycomp {

void HUWindow::validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw std::invalid_argument("HU window needs finite lo < hi, got [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
    }
}

void to_json(nlohmann::json& j, const HUWindow& w) { j = nlohmann::json::array({w.lo, w.hi}); }

void from_json(const nlohmann::json& j, HUWindow& w) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("HU window must be a [lo, hi] pair");
    w.lo = j.at(0).get<double>();
    w.hi = j.at(1).get<double>();
    w.validate();
}

std::vector<HUWindow> window_preset(std::string_view name) {
    if (name == "multi") return {{-1024, 4096}, {-150, 250}, {-95, 155}};
    if (name == "full12bit") return {{-1024, 3071}};
    if (name == "full11bit") return {{-1024, 2047}};
    if (name == "full10bit") return {{-1024, 1023}};
    if (name == "abdomen") return {{-150, 250}};
    if (name == "liver") return {{-95, 155}};
    throw std::invalid_argument("unknown HU window preset '" + std::string(name) + "'");
}

std::vector<HUWindow> parse_windows(const nlohmann::json& j) {
    if (j.is_string()) return window_preset(j.get<std::string>());
    if (!j.is_array() || j.empty()) throw std::invalid_argument("window list must be a preset name or non-empty array");
    std::vector<HUWindow> out;
    for (const auto& item : j) out.push_back(item.get<HUWindow>());
    return out;
}

float window_value(float hu, const HUWindow& window) {
    const double c = std::clamp(static_cast<double>(hu), window.lo, window.hi);
    return static_cast<float>(2.0 * (c - window.lo) / (window.hi - window.lo) - 1.0);
}

std::vector<float> window_normalize(const HUVolume& volume, const HUWindow& window) {
    window.validate();
    std::vector<float> out(volume.size());
    const auto src = volume.data();
    std::transform(src.begin(), src.end(), out.begin(), [&](float v) { return window_value(v, window); });
    return out;
}

nn::Tensor<float> multi_window_stack(const HUVolume& volume, const std::vector<HUWindow>& windows) {
    if (windows.empty()) throw std::invalid_argument("multi_window_stack needs at least one window");
    const Dims& d = volume.dims();
    nn::Tensor<float> out({1, windows.size(), d.nz, d.ny, d.nx});
    for (std::size_t k = 0; k < windows.size(); ++k) {
        const auto ch = window_normalize(volume, windows[k]);
        std::copy(ch.begin(), ch.end(), out.channel(0, k).begin());
    }
    return out;
}

namespace {

void check_factor(const Dims& d, int factor) {
    if (factor < 1) throw std::invalid_argument("downscale factor must be >= 1");
    const auto f = static_cast<std::size_t>(factor);
    if (d.ny % f != 0 || d.nx % f != 0) {
        throw VolumeError("in-plane dims " + to_string(d) + " not divisible by " + std::to_string(factor));
    }
}

Spacing scaled_spacing(const Spacing& s, double fy, double fx) { return {s.z_mm, s.y_mm * fy, s.x_mm * fx}; }

}  // namespace

HUVolume downscale_xy(const HUVolume& volume, int factor) {
    const Dims& d = volume.dims();
    check_factor(d, factor);
    const auto f = static_cast<std::size_t>(factor);
    const Dims od{d.nz, d.ny / f, d.nx / f};
    std::vector<float> out(od.count());
    const double inv = 1.0 / static_cast<double>(f * f);
    for (std::size_t z = 0; z < od.nz; ++z)
        for (std::size_t y = 0; y < od.ny; ++y)
            for (std::size_t x = 0; x < od.nx; ++x) {
                double s = 0.0;
                for (std::size_t dy = 0; dy < f; ++dy)
                    for (std::size_t dx = 0; dx < f; ++dx) s += volume.at(z, y * f + dy, x * f + dx);
                out[(z * od.ny + y) * od.nx + x] = static_cast<float>(s * inv);
            }
    return HUVolume(od, scaled_spacing(volume.spacing(), factor, factor), std::move(out));
}

LabelVolume downscale_labels_xy(const LabelVolume& labels, int factor) {
    const Dims& d = labels.dims();
    check_factor(d, factor);
    const auto f = static_cast<std::size_t>(factor);
    const Dims od{d.nz, d.ny / f, d.nx / f};
    std::vector<std::uint8_t> out(od.count());
    for (std::size_t z = 0; z < od.nz; ++z)
        for (std::size_t y = 0; y < od.ny; ++y)
            for (std::size_t x = 0; x < od.nx; ++x) {
                std::array<unsigned, 256> votes{};
                for (std::size_t dy = 0; dy < f; ++dy)
                    for (std::size_t dx = 0; dx < f; ++dx) ++votes[labels.at(z, y * f + dy, x * f + dx)];
                out[(z * od.ny + y) * od.nx + x] =
                    static_cast<std::uint8_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
            }
    return LabelVolume(od, scaled_spacing(labels.spacing(), factor, factor), std::move(out));
}

Dims scaled_dims(const Dims& dims, double scale_x, double scale_y) {
    auto scale = [](std::size_t n, double f) {
        return static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(n) * f)));
    };
    return {dims.nz, scale(dims.ny, scale_y), scale(dims.nx, scale_x)};
}

namespace {

/// Half-pixel-centre source coordinate of destination index `i`.
double source_coord(std::size_t i, std::size_t n_src, std::size_t n_dst) {
    return (static_cast<double>(i) + 0.5) * static_cast<double>(n_src) / static_cast<double>(n_dst) - 0.5;
}

struct Tap {
    std::size_t i0, i1;
    double w1;
};

std::vector<Tap> linear_taps(std::size_t n_src, std::size_t n_dst) {
    std::vector<Tap> taps(n_dst);
    const double last = static_cast<double>(n_src - 1);
    for (std::size_t i = 0; i < n_dst; ++i) {
        const double s = std::clamp(source_coord(i, n_src, n_dst), 0.0, last);
        const auto i0 = static_cast<std::size_t>(std::floor(s));
        const std::size_t i1 = std::min(i0 + 1, n_src - 1);
        taps[i] = {i0, i1, s - static_cast<double>(i0)};
    }
    return taps;
}

std::vector<std::size_t> nearest_taps(std::size_t n_src, std::size_t n_dst) {
    std::vector<std::size_t> idx(n_dst);
    for (std::size_t i = 0; i < n_dst; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * static_cast<double>(n_src) / static_cast<double>(n_dst);
        idx[i] = std::min(static_cast<std::size_t>(std::floor(s)), n_src - 1);
    }
    return idx;
}

}  // namespace

Sample augment_scale(const Sample& sample, double scale_x, double scale_y) {
    require_paired(sample.image, sample.labels);
    for (double f : {scale_x, scale_y}) {
        if (!(f >= kScaleMin - 1e-12 && f <= kScaleMax + 1e-12)) {
            throw std::invalid_argument("scale factor " + std::to_string(f) + " outside [0.8, 1.2]");
        }
    }
    const Dims& d = sample.image.dims();
    const Dims od = scaled_dims(d, scale_x, scale_y);
    if (od == d) return sample;

    const auto ty = linear_taps(d.ny, od.ny), tx = linear_taps(d.nx, od.nx);
    const auto ny_idx = nearest_taps(d.ny, od.ny), nx_idx = nearest_taps(d.nx, od.nx);
    std::vector<float> img(od.count());
    std::vector<std::uint8_t> lab(od.count());
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < od.ny; ++y)
            for (std::size_t x = 0; x < od.nx; ++x) {
                const Tap& a = ty[y];
                const Tap& b = tx[x];
                const auto& im = sample.image;
                const double top = (1.0 - b.w1) * im.at(z, a.i0, b.i0) + b.w1 * im.at(z, a.i0, b.i1);
                const double bot = (1.0 - b.w1) * im.at(z, a.i1, b.i0) + b.w1 * im.at(z, a.i1, b.i1);
                const std::size_t o = (z * od.ny + y) * od.nx + x;
                img[o] = static_cast<float>((1.0 - a.w1) * top + a.w1 * bot);
                lab[o] = sample.labels.at(z, ny_idx[y], nx_idx[x]);
            }
    const Spacing& s = sample.image.spacing();
    const Spacing os = scaled_spacing(s, static_cast<double>(d.ny) / static_cast<double>(od.ny),
                                      static_cast<double>(d.nx) / static_cast<double>(od.nx));
    return {HUVolume(od, os, std::move(img)), LabelVolume(od, os, std::move(lab))};
}

Sample augment_flip_x(const Sample& sample) {
    require_paired(sample.image, sample.labels);
    const Dims& d = sample.image.dims();
    std::vector<float> img(d.count());
    std::vector<std::uint8_t> lab(d.count());
    for (std::size_t z = 0; z < d.nz; ++z)
        for (std::size_t y = 0; y < d.ny; ++y)
            for (std::size_t x = 0; x < d.nx; ++x) {
                const std::size_t o = sample.image.index(z, y, x);
                img[o] = sample.image.at(z, y, d.nx - 1 - x);
                lab[o] = sample.labels.at(z, y, d.nx - 1 - x);
            }
    return {HUVolume(d, sample.image.spacing(), std::move(img)),
            LabelVolume(d, sample.labels.spacing(), std::move(lab))};
}

namespace {

Dims padded_dims(const Dims& d, const Dims& crop) {
    return {std::max(d.nz, crop.nz), std::max(d.ny, crop.ny), std::max(d.nx, crop.nx)};
}

}  // namespace

Sample crop_subvolume(const Sample& sample, const AugmentationParams& p, const Dims& crop) {
    require_paired(sample.image, sample.labels);
    if (crop.empty()) throw std::invalid_argument("crop size must be positive");
    const Dims& d = sample.image.dims();
    const Dims pd = padded_dims(d, crop);
    if (p.crop_z0 + crop.nz > pd.nz || p.crop_y0 + crop.ny > pd.ny || p.crop_x0 + crop.nx > pd.nx) {
        throw std::invalid_argument("crop window leaves the padded volume " + to_string(pd));
    }
    // Offset of the original volume inside the padded frame.
    const std::size_t bz = (pd.nz - d.nz) / 2, by = (pd.ny - d.ny) / 2, bx = (pd.nx - d.nx) / 2;

    std::vector<float> img(crop.count(), kPadHU);
    std::vector<std::uint8_t> lab(crop.count(), kIgnoreLabel);
    for (std::size_t z = 0; z < crop.nz; ++z) {
        const std::size_t pz = z + p.crop_z0;
        if (pz < bz || pz >= bz + d.nz) continue;
        for (std::size_t y = 0; y < crop.ny; ++y) {
            const std::size_t py = y + p.crop_y0;
            if (py < by || py >= by + d.ny) continue;
            for (std::size_t x = 0; x < crop.nx; ++x) {
                const std::size_t px = x + p.crop_x0;
                if (px < bx || px >= bx + d.nx) continue;
                const std::size_t o = (z * crop.ny + y) * crop.nx + x;
                img[o] = sample.image.at(pz - bz, py - by, px - bx);
                lab[o] = sample.labels.at(pz - bz, py - by, px - bx);
            }
        }
    }
    return {HUVolume(crop, sample.image.spacing(), std::move(img)),
            LabelVolume(crop, sample.labels.spacing(), std::move(lab))};
}

AugmentationParams sample_augmentation_params(std::mt19937_64& rng, const Dims& dims, const Dims& crop,
                                              const AugmentationToggles& toggles) {
    if (dims.empty()) throw std::invalid_argument("cannot sample augmentation for empty dims");
    AugmentationParams p;
    std::uniform_real_distribution<double> scale(kScaleMin, kScaleMax);
    std::bernoulli_distribution coin(0.5);
    // Draw every variate regardless of toggles so streams stay aligned.
    const double sx = scale(rng), sy = scale(rng);
    const bool flip = coin(rng);
    if (toggles.scale) {
        p.scale_x = sx;
        p.scale_y = sy;
    }
    p.flip_x = toggles.flip && flip;
    const Dims pd = padded_dims(scaled_dims(dims, p.scale_x, p.scale_y), crop);
    auto offset = [&](std::size_t padded, std::size_t window) {
        return std::uniform_int_distribution<std::size_t>(0, padded - window)(rng);
    };
    p.crop_z0 = offset(pd.nz, crop.nz);
    p.crop_y0 = offset(pd.ny, crop.ny);
    p.crop_x0 = offset(pd.nx, crop.nx);
    return p;
}

Sample apply_augmentation(const Sample& sample, const AugmentationParams& params, const Dims& crop) {
    Sample s = augment_scale(sample, params.scale_x, params.scale_y);
    if (params.flip_x) s = augment_flip_x(s);
    return crop_subvolume(s, params, crop);
}

}  // namespace bodycomp
