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

#include "bodycomp/inference.hpp"

#include <cmath>
#include <stdexcept>

#include "bodycomp/nn/layers.hpp"

namespace bodycomp {

std::vector<std::size_t> window_starts(std::size_t nz, std::size_t window, double overlap) {
    if (nz < 1 || window < 1) throw std::invalid_argument("window_starts needs nz >= 1 and window >= 1");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must lie in [0, 1)");
    if (nz <= window) return {0};
    const auto stride = static_cast<std::size_t>(std::max(1L, std::lround(static_cast<double>(window) * (1.0 - overlap))));
    const std::size_t last = nz - window;
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s <= last; s += stride) starts.push_back(s);
    if (starts.back() != last) starts.push_back(last);
    return starts;
}

std::vector<double> slab_weights(std::size_t window, SlabWeighting weighting) {
    if (window < 1) throw std::invalid_argument("slab_weights needs window >= 1");
    std::vector<double> w(window);
    const double centre = 0.5 * static_cast<double>(window - 1);
    const double sigma = static_cast<double>(window) / 8.0;
    for (std::size_t i = 0; i < window; ++i) {
        if (weighting == SlabWeighting::Tent) {
            w[i] = static_cast<double>(std::min(i + 1, window - i));
        } else {
            const double d = static_cast<double>(i) - centre;
            w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        }
    }
    return w;
}

namespace {

std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }

}  // namespace

ProbabilityVolume sliding_window_predict(const LogitFunction& logits, std::size_t divisor, const nn::Tensor<float>& input,
                                         const Spacing& spacing, const SlidingWindowOptions& options) {
    const nn::Shape5 in = input.shape();
    if (in.n != 1) throw nn::ShapeError("sliding-window inference expects a single volume");
    if (in.spatial() == 0) throw nn::ShapeError("empty input volume");
    if (divisor < 1 || options.window % divisor != 0) {
        throw nn::ShapeError("window depth " + std::to_string(options.window) + " is not a multiple of " +
                             std::to_string(divisor));
    }
    const std::size_t W = options.window;
    const std::size_t nz = in.d;
    // Working volume: z padded up to W, in-plane up to the divisor. Original sits at (z0, y0, x0).
    const std::size_t pd = std::max(nz, W), ph = round_up(in.h, divisor), pw = round_up(in.w, divisor);
    const std::size_t z0 = (pd - nz) / 2, y0 = (ph - in.h) / 2, x0 = (pw - in.w) / 2;
    const nn::Tensor<float> padded = nn::pad_spatial(input, {z0, y0, x0}, {pd - nz - z0, ph - in.h - y0, pw - in.w - x0}, kInputPad);

    const auto starts = window_starts(pd, W, options.overlap);
    const auto weights = slab_weights(W, options.weighting);
    const std::size_t plane = in.h * in.w;
    std::size_t classes = 0;
    std::vector<double> acc;
    std::vector<double> wsum(nz, 0.0);

    for (std::size_t s : starts) {
        const nn::Tensor<float> block = nn::slice_depth(padded, s, W);
        const nn::Tensor<float> out = logits(block);
        const nn::Shape5 os = out.shape();
        if (os.n != 1 || os.d != W || os.h != ph || os.w != pw || os.c < 1) {
            throw nn::ShapeError("logit function returned " + nn::to_string(os));
        }
        if (classes == 0) {
            classes = os.c;
            acc.assign(classes * nz * plane, 0.0);
        } else if (os.c != classes) {
            throw nn::ShapeError("class count changed between windows");
        }
        const nn::Tensor<float> probs = nn::softmax_channels_forward(out);
        for (std::size_t k = 0; k < W; ++k) {
            const std::size_t pz = s + k;
            if (pz < z0 || pz >= z0 + nz) continue;
            const std::size_t z = pz - z0;
            const double w = weights[k];
            wsum[z] += w;
            for (std::size_t c = 0; c < classes; ++c) {
                double* dst = acc.data() + (c * nz + z) * plane;
                for (std::size_t y = 0; y < in.h; ++y)
                    for (std::size_t x = 0; x < in.w; ++x)
                        dst[y * in.w + x] += w * static_cast<double>(probs.at(0, c, k, y + y0, x + x0));
            }
        }
    }

    ProbabilityVolume result({nz, in.h, in.w}, spacing, static_cast<int>(classes));
    for (std::size_t c = 0; c < classes; ++c)
        for (std::size_t z = 0; z < nz; ++z) {
            if (!(wsum[z] > 0.0)) throw std::logic_error("slice " + std::to_string(z) + " not covered by any window");
            const double inv = 1.0 / wsum[z];
            const std::size_t base = (c * nz + z) * plane;
            for (std::size_t i = 0; i < plane; ++i) result.data[base + i] = static_cast<float>(acc[base + i] * inv);
        }
    return result;
}

ProbabilityVolume sliding_window_predict(Model<float>& model, const nn::Tensor<float>& input, const Spacing& spacing,
                                         const SlidingWindowOptions& options) {
    if (input.shape().c != static_cast<std::size_t>(model.spec().in_channels)) {
        throw nn::ShapeError("input has " + std::to_string(input.shape().c) + " channels, model expects " +
                             std::to_string(model.spec().in_channels));
    }
    return sliding_window_predict([&](const nn::Tensor<float>& x) { return model.logits(x); }, model.spec().divisor(),
                                  input, spacing, options);
}

ProbabilityVolume ensemble_predict(std::vector<Model<float>>& models, const nn::Tensor<float>& input,
                                   const Spacing& spacing, const SlidingWindowOptions& options) {
    if (models.empty()) throw std::invalid_argument("ensemble needs at least one model");
    for (const auto& m : models) {
        if (!(m.spec() == models.front().spec())) throw std::invalid_argument("ensemble members have different specs");
    }
    if (models.size() == 1) return sliding_window_predict(models.front(), input, spacing, options);
    std::vector<double> sum;
    ProbabilityVolume first;
    for (std::size_t k = 0; k < models.size(); ++k) {
        ProbabilityVolume p = sliding_window_predict(models[k], input, spacing, options);
        if (k == 0) {
            sum.assign(p.data.begin(), p.data.end());
            first = std::move(p);
        } else {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p.data[i];
        }
    }
    const double inv = 1.0 / static_cast<double>(models.size());
    for (std::size_t i = 0; i < sum.size(); ++i) first.data[i] = static_cast<float>(sum[i] * inv);
    return first;
}

LabelVolume argmax_labels(const ProbabilityVolume& probs) {
    const std::size_t n = probs.dims.count();
    if (probs.classes < 1 || probs.classes > kNumClasses) throw std::invalid_argument("argmax: unsupported class count");
    if (probs.data.size() != n * static_cast<std::size_t>(probs.classes)) {
        throw std::invalid_argument("argmax: probability payload does not match dims");
    }
    std::vector<std::uint8_t> out(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
        float best = probs.at(0, v);
        for (int c = 1; c < probs.classes; ++c) {
            const float p = probs.at(c, v);
            if (p > best) {
                best = p;
                out[v] = static_cast<std::uint8_t>(c);
            }
        }
    }
    return LabelVolume(probs.dims, probs.spacing, std::move(out));
}

ProbabilityVolume predict_hu(std::vector<Model<float>>& models, const HUVolume& hu, const std::vector<HUWindow>& windows,
                             const SlidingWindowOptions& options) {
    return ensemble_predict(models, multi_window_stack(hu, windows), hu.spacing(), options);
}

}  // namespace bodycomp
