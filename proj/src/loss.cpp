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

#include "bodycomp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "bodycomp/volume.hpp"

namespace bodycomp {

namespace {

template <typename T>
std::size_t check_inputs(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels,
                         const nn::Tensor<T>* grad) {
    const auto& s = probs.shape();
    if (s.n != 1) throw LossError("losses expect a single-sample batch");
    if (labels.size() != s.spatial()) throw LossError("label count does not match probability volume");
    if (grad && grad->shape() != s) throw LossError("gradient buffer shape mismatch");
    std::size_t annotated = 0;
    for (auto l : labels) {
        if (l == kIgnoreLabel) continue;
        if (l >= s.c) throw LossError("label " + std::to_string(l) + " outside class range");
        ++annotated;
    }
    if (annotated == 0) throw LossError("no annotated voxels");
    return annotated;
}

}  // namespace

template <typename T>
double xce_loss(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels, nn::Tensor<T>* grad,
                double scale) {
    const std::size_t n = check_inputs(probs, labels, grad);
    const std::size_t m = probs.shape().spatial();
    const double inv_n = 1.0 / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
        if (labels[v] == kIgnoreLabel) continue;
        const std::size_t i = labels[v] * m + v;
        const double p = static_cast<double>(probs[i]);
        sum -= std::log(std::max(p, kLogClamp));
        if (grad && p > kLogClamp) (*grad)[i] += static_cast<T>(-scale * inv_n / p);
    }
    return sum * inv_n;
}

template <typename T>
double dice_loss(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels, nn::Tensor<T>* grad,
                 double scale, double eps) {
    check_inputs(probs, labels, grad);
    const std::size_t classes = probs.shape().c;
    const std::size_t m = probs.shape().spatial();
    if (classes < 2) throw LossError("dice loss needs at least one foreground class");
    std::vector<double> inter(classes, 0.0), denom(classes, 0.0);
    for (std::size_t c = 1; c < classes; ++c) {
        for (std::size_t v = 0; v < m; ++v) {
            if (labels[v] == kIgnoreLabel) continue;
            const double p = static_cast<double>(probs[c * m + v]);
            const double y = labels[v] == c ? 1.0 : 0.0;
            inter[c] += p * y;
            denom[c] += p + y;
        }
    }
    const double inv_k = 1.0 / static_cast<double>(classes - 1);
    double mean_term = 0.0;
    for (std::size_t c = 1; c < classes; ++c) mean_term += (2.0 * inter[c] + eps) / (denom[c] + eps);
    mean_term *= inv_k;

    if (grad) {
        for (std::size_t c = 1; c < classes; ++c) {
            const double d = denom[c] + eps;
            const double num = 2.0 * inter[c] + eps;
            const double g_pos = -scale * inv_k * (2.0 * d - num) / (d * d);
            const double g_neg = -scale * inv_k * (-num) / (d * d);
            for (std::size_t v = 0; v < m; ++v) {
                if (labels[v] == kIgnoreLabel) continue;
                (*grad)[c * m + v] += static_cast<T>(labels[v] == c ? g_pos : g_neg);
            }
        }
    }
    return 1.0 - mean_term;
}

template <typename T>
LossValue combined_loss(const nn::Tensor<T>& probs, std::span<const std::uint8_t> labels, nn::Tensor<T>* grad) {
    LossValue out;
    out.annotated = check_inputs(probs, labels, grad);
    out.xce = xce_loss(probs, labels, grad, 0.5);
    out.dice = dice_loss(probs, labels, grad, 0.5);
    out.combined = 0.5 * out.xce + 0.5 * out.dice;
    return out;
}

#define BODYCOMP_INSTANTIATE(T)                                                                                 \
    template double xce_loss(const nn::Tensor<T>&, std::span<const std::uint8_t>, nn::Tensor<T>*, double);       \
    template double dice_loss(const nn::Tensor<T>&, std::span<const std::uint8_t>, nn::Tensor<T>*, double, double); \
    template LossValue combined_loss(const nn::Tensor<T>&, std::span<const std::uint8_t>, nn::Tensor<T>*);

BODYCOMP_INSTANTIATE(float)
BODYCOMP_INSTANTIATE(double)

#undef BODYCOMP_INSTANTIATE

}  // namespace bodycomp
