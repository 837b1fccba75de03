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

#include "bodycomp/nn/tape.hpp"

#include <utility>

namespace bodycomp::nn {

template <typename T>
typename Tape<T>::Id Tape<T>::push(Tensor<T> value, bool requires_grad, std::function<void(Tape&, Node&)> backward) {
    if (check_finite_) value.check_finite("tape node");
    Node node;
    node.value = std::move(value);
    node.requires_grad = record_ && requires_grad;
    if (node.requires_grad) node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return nodes_.size() - 1;
}

template <typename T>
void Tape<T>::mix_branch(std::uint32_t v) noexcept {
    branch_hash_ = (branch_hash_ ^ v) * 0x100000001b3ULL;
}

template <typename T>
Tensor<T>& Tape<T>::grad_buffer(Id id) {
    Node& n = nodes_[id];
    if (n.grad.empty() && !n.value.empty()) n.grad = Tensor<T>(n.value.shape());
    return n.grad;
}

template <typename T>
typename Tape<T>::Id Tape<T>::input(Tensor<T> value, bool requires_grad) {
    return push(std::move(value), requires_grad, nullptr);
}

template <typename T>
typename Tape<T>::Id Tape<T>::conv3d(Id x, Parameter<T>& weight, Parameter<T>& bias) {
    Tensor<T> y = conv3d_forward(value(x), weight.value, bias.value);
    Parameter<T>* w = &weight;
    Parameter<T>* b = &bias;
    return push(std::move(y), true, [x, w, b](Tape& tape, Node& self) {
        Tensor<T>* gx = tape.needs_grad(x) ? &tape.grad_buffer(x) : nullptr;
        conv3d_backward(tape.value(x), w->value, self.grad, gx, w->grad, b->grad);
    });
}

template <typename T>
typename Tape<T>::Id Tape<T>::maxpool(Id x) {
    std::vector<std::uint32_t> argmax;
    const bool keep = (record_ && needs_grad(x)) || track_branches_;
    Tensor<T> y = maxpool3d_forward(value(x), keep ? &argmax : nullptr);
    if (track_branches_) {
        for (auto a : argmax) mix_branch(a);
    }
    return push(std::move(y), needs_grad(x), [x, argmax = std::move(argmax)](Tape& tape, Node& self) {
        maxpool3d_backward(argmax, self.grad, tape.grad_buffer(x));
    });
}

template <typename T>
typename Tape<T>::Id Tape<T>::upsample(Id x) {
    Tensor<T> y = upsample_trilinear_forward(value(x));
    return push(std::move(y), needs_grad(x),
                [x](Tape& tape, Node& self) { upsample_trilinear_backward(self.grad, tape.grad_buffer(x)); });
}

template <typename T>
typename Tape<T>::Id Tape<T>::instance_norm(Id x, Parameter<T>& gamma, Parameter<T>& beta) {
    InstanceNormCache<T> cache;
    Tensor<T> y = instance_norm_forward(value(x), gamma.value, beta.value, record_ ? &cache : nullptr);
    Parameter<T>* g = &gamma;
    Parameter<T>* b = &beta;
    return push(std::move(y), true, [x, g, b, cache = std::move(cache)](Tape& tape, Node& self) {
        if (tape.needs_grad(x)) {
            instance_norm_backward(cache, g->value, self.grad, tape.grad_buffer(x), g->grad, b->grad);
        } else {
            Tensor<T> scratch(self.grad.shape());
            instance_norm_backward(cache, g->value, self.grad, scratch, g->grad, b->grad);
        }
    });
}

template <typename T>
typename Tape<T>::Id Tape<T>::relu(Id x) {
    Tensor<T> y = relu_forward(value(x));
    if (track_branches_) {
        for (T v : value(x).data()) mix_branch(v > T(0) ? 1u : 0u);
    }
    return push(std::move(y), needs_grad(x),
                [x](Tape& tape, Node& self) { relu_backward(tape.value(x), self.grad, tape.grad_buffer(x)); });
}

template <typename T>
typename Tape<T>::Id Tape<T>::concat(Id a, Id b) {
    Tensor<T> y = concat_channels_forward(value(a), value(b));
    return push(std::move(y), needs_grad(a) || needs_grad(b), [a, b](Tape& tape, Node& self) {
        Tensor<T>* ga = tape.needs_grad(a) ? &tape.grad_buffer(a) : nullptr;
        Tensor<T>* gb = tape.needs_grad(b) ? &tape.grad_buffer(b) : nullptr;
        if (!ga && !gb) return;
        if (ga && !gb) {
            Tensor<T> scratch(tape.value(b).shape());
            concat_channels_backward(self.grad, ga, &scratch);
        } else {
            concat_channels_backward(self.grad, ga, gb);
        }
    });
}

template <typename T>
typename Tape<T>::Id Tape<T>::add(Id a, Id b) {
    Tensor<T> y = add_forward(value(a), value(b));
    return push(std::move(y), needs_grad(a) || needs_grad(b), [a, b](Tape& tape, Node& self) {
        for (Id id : {a, b}) {
            if (!tape.needs_grad(id)) continue;
            Tensor<T>& g = tape.grad_buffer(id);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

template <typename T>
typename Tape<T>::Id Tape<T>::softmax(Id x) {
    Tensor<T> y = softmax_channels_forward(value(x));
    return push(std::move(y), needs_grad(x), [x](Tape& tape, Node& self) {
        softmax_channels_backward(self.value, self.grad, tape.grad_buffer(x));
    });
}

template <typename T>
void Tape<T>::backward(Id out, const Tensor<T>& seed) {
    if (!record_) throw ShapeError("backward on a tape that is not recording");
    if (seed.shape() != value(out).shape()) throw ShapeError("backward seed shape mismatch");
    for (Node& n : nodes_) n.grad = Tensor<T>();
    if (!nodes_[out].requires_grad) return;
    Tensor<T>& g = grad_buffer(out);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
    for (Id i = out + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.grad.empty() || !n.backward) continue;
        n.backward(*this, n);
    }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace bodycomp::nn
