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
#include <deque>
#include <vector>

#include <json.hpp>

#include "bodycomp/nn/tensor.hpp"

namespace bodycomp {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
    double weight_decay = 1e-4;
};

void to_json(nlohmann::json& j, const AdamWConfig& c);
void from_json(const nlohmann::json& j, AdamWConfig& c);

/// Stepped exponential decay: initial * factor^floor(epoch / every).
struct LrSchedule {
    double initial = 1e-4;
    double factor = 0.95;
    int every = 50;

    double at_epoch(int epoch) const;
};

void to_json(nlohmann::json& j, const LrSchedule& s);
void from_json(const nlohmann::json& j, LrSchedule& s);

/// Learning rate with the default schedule.
double lr_at_epoch(int epoch);

/// Adam with decoupled weight decay:
///   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
///   w = w - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * w
/// Decay applies to every parameter. Gradients are zeroed after the step.
template <typename T>
class AdamW {
public:
    explicit AdamW(AdamWConfig config = {}) : config_(config) {}

    void step(std::deque<nn::Parameter<T>>& params, double lr);
    void step(const std::vector<nn::Parameter<T>*>& params, double lr);

    std::size_t step_count() const noexcept { return t_; }
    const AdamWConfig& config() const noexcept { return config_; }

private:
    AdamWConfig config_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace bodycomp
