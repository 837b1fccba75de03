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

#include "bodycomp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace bodycomp {

void to_json(nlohmann::json& j, const AdamWConfig& c) {
    j = nlohmann::json{{"beta1", c.beta1}, {"beta2", c.beta2}, {"eps", c.eps}, {"weight_decay", c.weight_decay}};
}

void from_json(const nlohmann::json& j, AdamWConfig& c) {
    c = AdamWConfig{};
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
}

double LrSchedule::at_epoch(int epoch) const {
    if (epoch < 0) throw std::invalid_argument("epoch must be non-negative");
    if (every <= 0) throw std::invalid_argument("lr decay interval must be positive");
    return initial * std::pow(factor, epoch / every);
}

void to_json(nlohmann::json& j, const LrSchedule& s) {
    j = nlohmann::json{{"initial", s.initial}, {"factor", s.factor}, {"every", s.every}};
}

void from_json(const nlohmann::json& j, LrSchedule& s) {
    s = LrSchedule{};
    s.initial = j.value("initial", s.initial);
    s.factor = j.value("factor", s.factor);
    s.every = j.value("every", s.every);
}

double lr_at_epoch(int epoch) { return LrSchedule{}.at_epoch(epoch); }

template <typename T>
void AdamW<T>::step(std::deque<nn::Parameter<T>>& params, double lr) {
    std::vector<nn::Parameter<T>*> ptrs;
    ptrs.reserve(params.size());
    for (auto& p : params) ptrs.push_back(&p);
    step(ptrs, lr);
}

template <typename T>
void AdamW<T>::step(const std::vector<nn::Parameter<T>*>& params, double lr) {
    if (params.empty()) throw std::logic_error("adamw step without parameters");
    if (m_.empty()) {
        for (const auto* p : params) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }
    if (m_.size() != params.size()) throw std::logic_error("adamw parameter set changed between steps");
    for (std::size_t k = 0; k < params.size(); ++k) {
        const auto* p = params[k];
        if (p->grad.shape() != p->value.shape() || m_[k].size() != p->size()) {
            throw std::logic_error("adamw: gradient for " + p->name + " missing or mis-shaped");
        }
    }

    ++t_;
    const auto& c = config_;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
    const double decay = 1.0 - lr * c.weight_decay;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = *params[k];
        auto& m = m_[k];
        auto& v = v_[k];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = static_cast<double>(p.grad[i]);
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            const double w = static_cast<double>(p.value[i]);
            p.value[i] = static_cast<T>(w * decay - lr * (m_hat / (std::sqrt(v_hat) + c.eps)));
        }
        p.zero_grad();
    }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace bodycomp
