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

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bodycomp::nn {

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// (batch, channel, depth, height, width).
struct Shape5 {
    std::size_t n = 0, c = 0, d = 0, h = 0, w = 0;

    std::size_t spatial() const noexcept { return d * h * w; }
    std::size_t count() const noexcept { return n * c * spatial(); }
    friend bool operator==(const Shape5&, const Shape5&) = default;
};

std::string to_string(const Shape5& s);

/// Dense row-major 5-axis array.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;
    explicit Tensor(Shape5 shape, T fill = T(0)) : shape_(shape), data_(shape.count(), fill) {}
    Tensor(Shape5 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (data_.size() != shape_.count()) throw ShapeError("tensor data does not match shape " + to_string(shape_));
    }

    const Shape5& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }
    std::vector<T>& storage() noexcept { return data_; }
    const std::vector<T>& storage() const noexcept { return data_; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    T operator[](std::size_t i) const noexcept { return data_[i]; }

    std::size_t offset(std::size_t n, std::size_t c, std::size_t z, std::size_t y, std::size_t x) const noexcept {
        return (((n * shape_.c + c) * shape_.d + z) * shape_.h + y) * shape_.w + x;
    }
    T& at(std::size_t n, std::size_t c, std::size_t z, std::size_t y, std::size_t x) noexcept {
        return data_[offset(n, c, z, y, x)];
    }
    T at(std::size_t n, std::size_t c, std::size_t z, std::size_t y, std::size_t x) const noexcept {
        return data_[offset(n, c, z, y, x)];
    }

    /// Contiguous (d, h, w) block of one (sample, channel).
    std::span<T> channel(std::size_t n, std::size_t c) noexcept {
        return std::span<T>(data_).subspan((n * shape_.c + c) * shape_.spatial(), shape_.spatial());
    }
    std::span<const T> channel(std::size_t n, std::size_t c) const noexcept {
        return std::span<const T>(data_).subspan((n * shape_.c + c) * shape_.spatial(), shape_.spatial());
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    /// Throws ShapeError naming `what` if any entry is NaN or infinite.
    void check_finite(const char* what) const;

    template <typename U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape5 shape_{};
    std::vector<T> data_;
};

/// Trainable tensor plus its gradient accumulator.
template <typename T>
struct Parameter {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;

    Parameter() = default;
    Parameter(std::string n, Tensor<T> v) : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}

    std::size_t size() const noexcept { return value.size(); }
    void zero_grad() { grad.fill(T(0)); }
};

/// Slice [z0, z0 + depth) along the depth axis.
template <typename T>
Tensor<T> slice_depth(const Tensor<T>& t, std::size_t z0, std::size_t depth);

/// Pads every spatial axis (before/after per axis) with a constant.
template <typename T>
Tensor<T> pad_spatial(const Tensor<T>& t, std::array<std::size_t, 3> before, std::array<std::size_t, 3> after, T value);

/// Inverse of pad_spatial: keeps the box starting at `origin` with spatial size (d, h, w).
template <typename T>
Tensor<T> crop_spatial(const Tensor<T>& t, std::array<std::size_t, 3> origin, std::array<std::size_t, 3> size);

}  // namespace bodycomp::nn
