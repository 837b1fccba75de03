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
#include <vector>

#include "bodycomp/nn/tensor.hpp"

// Forward/backward kernels for the layer set the segmentation networks use.
// Backward functions accumulate (+=) into the gradient tensors they are given.
namespace bodycomp::nn {

/// Weight shape (c_out, c_in, k, k, k), bias shape (1, c_out, 1, 1, 1). Stride 1, zero "same" padding, k in {1, 3}.
template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

/// `grad_x` may be null when the input needs no gradient.
template <typename T>
void conv3d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out, Tensor<T>* grad_x,
                     Tensor<T>& grad_weight, Tensor<T>& grad_bias);

/// 2x2x2 window, stride 2. `argmax` receives the flat input index of each output's winner.
template <typename T>
Tensor<T> maxpool3d_forward(const Tensor<T>& x, std::vector<std::uint32_t>* argmax);

template <typename T>
void maxpool3d_backward(const std::vector<std::uint32_t>& argmax, const Tensor<T>& grad_out, Tensor<T>& grad_x);

/// x2 trilinear, half-pixel centres, edge clamping.
template <typename T>
Tensor<T> upsample_trilinear_forward(const Tensor<T>& x);

template <typename T>
void upsample_trilinear_backward(const Tensor<T>& grad_out, Tensor<T>& grad_x);

inline constexpr double kInstanceNormEps = 1e-5;

/// Per-(sample, channel) statistics kept for the backward pass.
template <typename T>
struct InstanceNormCache {
    Tensor<T> normalized;          // x_hat
    std::vector<double> inv_std;   // indexed n * C + c
};

template <typename T>
Tensor<T> instance_norm_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                                InstanceNormCache<T>* cache);

template <typename T>
void instance_norm_backward(const InstanceNormCache<T>& cache, const Tensor<T>& gamma, const Tensor<T>& grad_out,
                            Tensor<T>& grad_x, Tensor<T>& grad_gamma, Tensor<T>& grad_beta);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

/// Subgradient at 0 is 0.
template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out, Tensor<T>& grad_x);

template <typename T>
Tensor<T> concat_channels_forward(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
void concat_channels_backward(const Tensor<T>& grad_out, Tensor<T>* grad_a, Tensor<T>* grad_b);

template <typename T>
Tensor<T> add_forward(const Tensor<T>& a, const Tensor<T>& b);

/// Max-subtracted softmax across the channel axis, independently per voxel.
template <typename T>
Tensor<T> softmax_channels_forward(const Tensor<T>& logits);

template <typename T>
void softmax_channels_backward(const Tensor<T>& probs, const Tensor<T>& grad_out, Tensor<T>& grad_logits);

}  // namespace bodycomp::nn
