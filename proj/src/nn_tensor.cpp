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

#include <algorithm>
#include <cmath>

#include "bodycomp/nn/tensor.hpp"

namespace bodycomp::nn {

std::string to_string(const Shape5& s) {
    return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.d) + "," +
           std::to_string(s.h) + "," + std::to_string(s.w) + ")";
}

template <typename T>
void Tensor<T>::check_finite(const char* what) const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw ShapeError(std::string("non-finite value in ") + what + " at element " + std::to_string(i));
        }
    }
}

template <typename T>
Tensor<T> slice_depth(const Tensor<T>& t, std::size_t z0, std::size_t depth) {
    const Shape5 s = t.shape();
    if (z0 + depth > s.d) throw ShapeError("depth slice out of range");
    Tensor<T> out({s.n, s.c, depth, s.h, s.w});
    const std::size_t plane = s.h * s.w;
    for (std::size_t n = 0; n < s.n; ++n) {
        for (std::size_t c = 0; c < s.c; ++c) {
            auto src = t.channel(n, c).subspan(z0 * plane, depth * plane);
            std::copy(src.begin(), src.end(), out.channel(n, c).begin());
        }
    }
    return out;
}

template <typename T>
Tensor<T> pad_spatial(const Tensor<T>& t, std::array<std::size_t, 3> before, std::array<std::size_t, 3> after,
                      T value) {
    const Shape5 s = t.shape();
    Tensor<T> out({s.n, s.c, s.d + before[0] + after[0], s.h + before[1] + after[1], s.w + before[2] + after[2]},
                  value);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t z = 0; z < s.d; ++z)
                for (std::size_t y = 0; y < s.h; ++y) {
                    const T* src = &t.data()[t.offset(n, c, z, y, 0)];
                    std::copy(src, src + s.w, &out.data()[out.offset(n, c, z + before[0], y + before[1], before[2])]);
                }
    return out;
}

template <typename T>
Tensor<T> crop_spatial(const Tensor<T>& t, std::array<std::size_t, 3> origin, std::array<std::size_t, 3> size) {
    const Shape5 s = t.shape();
    if (origin[0] + size[0] > s.d || origin[1] + size[1] > s.h || origin[2] + size[2] > s.w) {
        throw ShapeError("crop box exceeds tensor " + to_string(s));
    }
    Tensor<T> out({s.n, s.c, size[0], size[1], size[2]});
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t z = 0; z < size[0]; ++z)
                for (std::size_t y = 0; y < size[1]; ++y) {
                    const T* src = &t.data()[t.offset(n, c, z + origin[0], y + origin[1], origin[2])];
                    std::copy(src, src + size[2], &out.data()[out.offset(n, c, z, y, 0)]);
                }
    return out;
}

#define BODYCOMP_INSTANTIATE(T)                                                                        \
    template class Tensor<T>;                                                                          \
    template Tensor<T> slice_depth(const Tensor<T>&, std::size_t, std::size_t);                        \
    template Tensor<T> pad_spatial(const Tensor<T>&, std::array<std::size_t, 3>, std::array<std::size_t, 3>, T); \
    template Tensor<T> crop_spatial(const Tensor<T>&, std::array<std::size_t, 3>, std::array<std::size_t, 3>);

BODYCOMP_INSTANTIATE(float)
BODYCOMP_INSTANTIATE(double)

#undef BODYCOMP_INSTANTIATE

}  // namespace bodycomp::nn
