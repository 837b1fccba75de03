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
#include <functional>
#include <vector>

#include "bodycomp/nn/layers.hpp"
#include "bodycomp/nn/tensor.hpp"

namespace bodycomp::nn {

/// Records forward operations in execution order and replays their backward
/// kernels in exact reverse order. Restricted to the layer set in layers.hpp.
///
/// With recording disabled (inference) no backward state is kept; values are
/// still retained until the tape is destroyed.
template <typename T>
class Tape {
public:
    using Id = std::size_t;

    explicit Tape(bool record = true) : record_(record) {}

    bool recording() const noexcept { return record_; }

    /// Leaf value. `requires_grad` makes its gradient available through grad().
    Id input(Tensor<T> value, bool requires_grad = false);

    Id conv3d(Id x, Parameter<T>& weight, Parameter<T>& bias);
    Id maxpool(Id x);
    Id upsample(Id x);
    Id instance_norm(Id x, Parameter<T>& gamma, Parameter<T>& beta);
    Id relu(Id x);
    Id concat(Id a, Id b);
    Id add(Id a, Id b);
    Id softmax(Id x);

    const Tensor<T>& value(Id id) const { return nodes_.at(id).value; }
    /// Gradient accumulated into a node by backward(); empty if none reached it.
    const Tensor<T>& grad(Id id) const { return nodes_.at(id).grad; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Seeds d(objective)/d(value(out)) and propagates to every earlier node,
    /// accumulating into parameter gradients. May be called more than once.
    void backward(Id out, const Tensor<T>& seed);

    /// Set to check every produced value for NaN/Inf.
    void set_check_finite(bool on) noexcept { check_finite_ = on; }

    /// When on, every relu sign pattern and maxpool argmax is folded into
    /// branch_signature(). Two evaluations with equal signatures took the same
    /// piecewise-linear branch.
    void set_track_branches(bool on) noexcept { track_branches_ = on; }
    std::uint64_t branch_signature() const noexcept { return branch_hash_; }

private:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        bool requires_grad = false;
        std::function<void(Tape&, Node&)> backward;
    };

    Id push(Tensor<T> value, bool requires_grad, std::function<void(Tape&, Node&)> backward);
    Tensor<T>& grad_buffer(Id id);
    bool needs_grad(Id id) const { return nodes_[id].requires_grad; }
    void mix_branch(std::uint32_t v) noexcept;

    bool record_;
    bool check_finite_ = false;
    bool track_branches_ = false;
    std::uint64_t branch_hash_ = 0xcbf29ce484222325ULL;
    std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace bodycomp::nn
