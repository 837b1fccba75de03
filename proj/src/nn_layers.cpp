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

#include "bodycomp/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace bodycomp::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

// Upper bound on im2col scratch, in elements; sized so a chunk stays cache resident.
constexpr std::size_t kColumnChunkElems = std::size_t{1} << 17;

void require(bool cond, const std::string& msg) {
    if (!cond) throw ShapeError(msg);
}

std::size_t rows_per_chunk(std::size_t k_rows, std::size_t w, std::size_t total_rows) {
    const std::size_t r = kColumnChunkElems / std::max<std::size_t>(1, k_rows * w);
    return std::clamp<std::size_t>(r, 1, total_rows);
}

// One (z, y) row of the shifted input for kernel tap dx in {-1, 0, 1}.
template <typename T>
inline void copy_shifted_row(const T* src, T* dst, std::size_t w, int dx) {
    if (dx == 0) {
        std::copy(src, src + w, dst);
    } else if (dx < 0) {
        dst[0] = T(0);
        std::copy(src, src + w - 1, dst + 1);
    } else {
        std::copy(src + 1, src + w, dst);
        dst[w - 1] = T(0);
    }
}

// dst[x + dx] += src[x] where in range.
template <typename T>
inline void add_shifted_row(const T* src, T* dst, std::size_t w, int dx) {
    if (dx == 0) {
        for (std::size_t x = 0; x < w; ++x) dst[x] += src[x];
    } else if (dx < 0) {
        for (std::size_t x = 0; x + 1 < w; ++x) dst[x] += src[x + 1];
    } else {
        for (std::size_t x = 1; x < w; ++x) dst[x] += src[x - 1];
    }
}

// cols has c_in * 27 rows and (row_end - row_begin) * w columns.
template <typename T>
void im2col3(const T* x, std::size_t c_in, std::size_t d, std::size_t h, std::size_t w, std::size_t row_begin,
             std::size_t row_end, T* cols) {
    const std::size_t p = (row_end - row_begin) * w;
    std::size_t kr = 0;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
        const T* xc = x + ci * d * h * w;
        for (int kz = -1; kz <= 1; ++kz)
            for (int ky = -1; ky <= 1; ++ky)
                for (int kx = -1; kx <= 1; ++kx, ++kr) {
                    T* dst = cols + kr * p;
                    for (std::size_t r = row_begin; r < row_end; ++r) {
                        T* drow = dst + (r - row_begin) * w;
                        const auto zz = static_cast<long>(r / h) + kz;
                        const auto yy = static_cast<long>(r % h) + ky;
                        if (zz < 0 || yy < 0 || zz >= static_cast<long>(d) || yy >= static_cast<long>(h)) {
                            std::fill(drow, drow + w, T(0));
                        } else {
                            copy_shifted_row(xc + (static_cast<std::size_t>(zz) * h + static_cast<std::size_t>(yy)) * w,
                                             drow, w, kx);
                        }
                    }
                }
    }
}

template <typename T>
void col2im3(const T* cols, std::size_t c_in, std::size_t d, std::size_t h, std::size_t w, std::size_t row_begin,
             std::size_t row_end, T* gx) {
    const std::size_t p = (row_end - row_begin) * w;
    std::size_t kr = 0;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
        T* gc = gx + ci * d * h * w;
        for (int kz = -1; kz <= 1; ++kz)
            for (int ky = -1; ky <= 1; ++ky)
                for (int kx = -1; kx <= 1; ++kx, ++kr) {
                    const T* src = cols + kr * p;
                    for (std::size_t r = row_begin; r < row_end; ++r) {
                        const auto zz = static_cast<long>(r / h) + kz;
                        const auto yy = static_cast<long>(r % h) + ky;
                        if (zz < 0 || yy < 0 || zz >= static_cast<long>(d) || yy >= static_cast<long>(h)) continue;
                        // Column x read input x + kx.
                        add_shifted_row(src + (r - row_begin) * w,
                                        gc + (static_cast<std::size_t>(zz) * h + static_cast<std::size_t>(yy)) * w, w,
                                        kx);
                    }
                }
    }
}

template <typename T>
void check_conv_shapes(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    const Shape5 ws = weight.shape();
    require(ws.d == ws.h && ws.h == ws.w && (ws.d == 1 || ws.d == 3),
            "conv3d supports cubic kernels of size 1 or 3, got " + to_string(ws));
    require(x.shape().c == ws.c, "conv3d channel mismatch: input " + to_string(x.shape()) + ", weight " + to_string(ws));
    require(bias.size() == ws.n, "conv3d bias length must equal output channels");
}

template <typename T>
void bias_add(T* y, const T* b, std::size_t c_out, std::size_t spatial) {
    for (std::size_t co = 0; co < c_out; ++co) {
        T* yc = y + co * spatial;
        const T bv = b[co];
        for (std::size_t i = 0; i < spatial; ++i) yc[i] += bv;
    }
}

// Upsample one axis by 2 viewing data as (outer, n, inner).
template <typename T>
void up_axis(const T* in, T* out, std::size_t outer, std::size_t n, std::size_t inner) {
    for (std::size_t o = 0; o < outer; ++o) {
        const T* src = in + o * n * inner;
        T* dst = out + o * 2 * n * inner;
        for (std::size_t j = 0; j < n; ++j) {
            const T* lo = src + (j == 0 ? 0 : j - 1) * inner;
            const T* mid = src + j * inner;
            const T* hi = src + (j + 1 == n ? j : j + 1) * inner;
            T* even = dst + 2 * j * inner;
            T* odd = even + inner;
            for (std::size_t i = 0; i < inner; ++i) {
                even[i] = T(0.25) * lo[i] + T(0.75) * mid[i];
                odd[i] = T(0.75) * mid[i] + T(0.25) * hi[i];
            }
        }
    }
}

// Adjoint of up_axis; overwrites `gin`.
template <typename T>
void up_axis_adjoint(const T* gout, T* gin, std::size_t outer, std::size_t n, std::size_t inner) {
    std::fill(gin, gin + outer * n * inner, T(0));
    for (std::size_t o = 0; o < outer; ++o) {
        const T* src = gout + o * 2 * n * inner;
        T* dst = gin + o * n * inner;
        for (std::size_t j = 0; j < n; ++j) {
            T* lo = dst + (j == 0 ? 0 : j - 1) * inner;
            T* mid = dst + j * inner;
            T* hi = dst + (j + 1 == n ? j : j + 1) * inner;
            const T* even = src + 2 * j * inner;
            const T* odd = even + inner;
            for (std::size_t i = 0; i < inner; ++i) {
                lo[i] += T(0.25) * even[i];
                mid[i] += T(0.75) * even[i] + T(0.75) * odd[i];
                hi[i] += T(0.25) * odd[i];
            }
        }
    }
}

}  // namespace

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    check_conv_shapes(x, weight, bias);
    const Shape5 s = x.shape();
    const std::size_t c_out = weight.shape().n, c_in = s.c, k = weight.shape().d;
    const std::size_t spatial = s.spatial();
    Tensor<T> y({s.n, c_out, s.d, s.h, s.w});
    if (spatial == 0 || s.n == 0) return y;

    if (k == 1) {
        ConstMatMap<T> wm(weight.data().data(), c_out, c_in);
        for (std::size_t n = 0; n < s.n; ++n) {
            ConstMatMap<T> xm(x.data().data() + n * c_in * spatial, c_in, spatial);
            MatMap<T> ym(y.data().data() + n * c_out * spatial, c_out, spatial);
            ym.noalias() = wm * xm;
            bias_add(ym.data(), bias.data().data(), c_out, spatial);
        }
        return y;
    }

    const std::size_t k_rows = c_in * 27;
    const std::size_t total_rows = s.d * s.h;
    const std::size_t chunk = rows_per_chunk(k_rows, s.w, total_rows);
    std::vector<T> cols(k_rows * chunk * s.w);
    ConstMatMap<T> wm(weight.data().data(), c_out, k_rows);
    for (std::size_t n = 0; n < s.n; ++n) {
        const T* xn = x.data().data() + n * c_in * spatial;
        MatMap<T> ym(y.data().data() + n * c_out * spatial, c_out, spatial);
        for (std::size_t r0 = 0; r0 < total_rows; r0 += chunk) {
            const std::size_t r1 = std::min(total_rows, r0 + chunk);
            const std::size_t p = (r1 - r0) * s.w;
            im2col3(xn, c_in, s.d, s.h, s.w, r0, r1, cols.data());
            ConstMatMap<T> cm(cols.data(), k_rows, p);
            ym.middleCols(r0 * s.w, p).noalias() = wm * cm;
        }
        bias_add(ym.data(), bias.data().data(), c_out, spatial);
    }
    return y;
}

template <typename T>
void conv3d_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& grad_out, Tensor<T>* grad_x,
                     Tensor<T>& grad_weight, Tensor<T>& grad_bias) {
    const Shape5 s = x.shape();
    const std::size_t c_out = weight.shape().n, c_in = s.c, k = weight.shape().d;
    const std::size_t spatial = s.spatial();
    require(grad_out.shape() == Shape5{s.n, c_out, s.d, s.h, s.w}, "conv3d grad_out shape mismatch");
    require(grad_weight.shape() == weight.shape(), "conv3d grad_weight shape mismatch");
    if (grad_x) require(grad_x->shape() == s, "conv3d grad_x shape mismatch");

    for (std::size_t n = 0; n < s.n; ++n) {
        const T* gy = grad_out.data().data() + n * c_out * spatial;
        for (std::size_t co = 0; co < c_out; ++co) {
            T acc = T(0);
            for (std::size_t i = 0; i < spatial; ++i) acc += gy[co * spatial + i];
            grad_bias[co] += acc;
        }
    }

    if (k == 1) {
        ConstMatMap<T> wm(weight.data().data(), c_out, c_in);
        MatMap<T> gwm(grad_weight.data().data(), c_out, c_in);
        for (std::size_t n = 0; n < s.n; ++n) {
            ConstMatMap<T> xm(x.data().data() + n * c_in * spatial, c_in, spatial);
            ConstMatMap<T> gym(grad_out.data().data() + n * c_out * spatial, c_out, spatial);
            gwm.noalias() += gym * xm.transpose();
            if (grad_x) {
                MatMap<T> gxm(grad_x->data().data() + n * c_in * spatial, c_in, spatial);
                gxm.noalias() += wm.transpose() * gym;
            }
        }
        return;
    }

    const std::size_t k_rows = c_in * 27;
    const std::size_t total_rows = s.d * s.h;
    const std::size_t chunk = rows_per_chunk(k_rows, s.w, total_rows);
    std::vector<T> cols(k_rows * chunk * s.w);
    std::vector<T> gcols(grad_x ? cols.size() : 0);
    ConstMatMap<T> wm(weight.data().data(), c_out, k_rows);
    MatMap<T> gwm(grad_weight.data().data(), c_out, k_rows);
    for (std::size_t n = 0; n < s.n; ++n) {
        const T* xn = x.data().data() + n * c_in * spatial;
        ConstMatMap<T> gym(grad_out.data().data() + n * c_out * spatial, c_out, spatial);
        for (std::size_t r0 = 0; r0 < total_rows; r0 += chunk) {
            const std::size_t r1 = std::min(total_rows, r0 + chunk);
            const std::size_t p = (r1 - r0) * s.w;
            im2col3(xn, c_in, s.d, s.h, s.w, r0, r1, cols.data());
            ConstMatMap<T> cm(cols.data(), k_rows, p);
            gwm.noalias() += gym.middleCols(r0 * s.w, p) * cm.transpose();
            if (grad_x) {
                MatMap<T> gcm(gcols.data(), k_rows, p);
                gcm.noalias() = wm.transpose() * gym.middleCols(r0 * s.w, p);
                col2im3(gcols.data(), c_in, s.d, s.h, s.w, r0, r1, grad_x->data().data() + n * c_in * spatial);
            }
        }
    }
}

template <typename T>
Tensor<T> maxpool3d_forward(const Tensor<T>& x, std::vector<std::uint32_t>* argmax) {
    const Shape5 s = x.shape();
    require(s.d % 2 == 0 && s.h % 2 == 0 && s.w % 2 == 0, "maxpool3d needs even spatial dims, got " + to_string(s));
    require(s.count() <= std::numeric_limits<std::uint32_t>::max(), "maxpool3d input too large");
    const Shape5 os{s.n, s.c, s.d / 2, s.h / 2, s.w / 2};
    Tensor<T> y(os);
    if (argmax) argmax->assign(os.count(), 0);
    std::size_t o = 0;
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c)
            for (std::size_t z = 0; z < os.d; ++z)
                for (std::size_t yy = 0; yy < os.h; ++yy)
                    for (std::size_t xx = 0; xx < os.w; ++xx, ++o) {
                        std::size_t best = x.offset(n, c, 2 * z, 2 * yy, 2 * xx);
                        T best_v = x[best];
                        for (std::size_t dz = 0; dz < 2; ++dz)
                            for (std::size_t dy = 0; dy < 2; ++dy)
                                for (std::size_t dx = 0; dx < 2; ++dx) {
                                    const std::size_t i = x.offset(n, c, 2 * z + dz, 2 * yy + dy, 2 * xx + dx);
                                    if (x[i] > best_v) {
                                        best_v = x[i];
                                        best = i;
                                    }
                                }
                        y[o] = best_v;
                        if (argmax) (*argmax)[o] = static_cast<std::uint32_t>(best);
                    }
    return y;
}

template <typename T>
void maxpool3d_backward(const std::vector<std::uint32_t>& argmax, const Tensor<T>& grad_out, Tensor<T>& grad_x) {
    require(argmax.size() == grad_out.size(), "maxpool3d argmax/grad size mismatch");
    for (std::size_t o = 0; o < argmax.size(); ++o) grad_x[argmax[o]] += grad_out[o];
}

template <typename T>
Tensor<T> upsample_trilinear_forward(const Tensor<T>& x) {
    const Shape5 s = x.shape();
    const std::size_t nc = s.n * s.c;
    std::vector<T> a(nc * s.d * s.h * 2 * s.w);
    up_axis(x.data().data(), a.data(), nc * s.d * s.h, s.w, 1);
    std::vector<T> b(nc * s.d * 2 * s.h * 2 * s.w);
    up_axis(a.data(), b.data(), nc * s.d, s.h, 2 * s.w);
    Tensor<T> y({s.n, s.c, 2 * s.d, 2 * s.h, 2 * s.w});
    up_axis(b.data(), y.data().data(), nc, s.d, 4 * s.h * s.w);
    return y;
}

template <typename T>
void upsample_trilinear_backward(const Tensor<T>& grad_out, Tensor<T>& grad_x) {
    const Shape5 s = grad_x.shape();
    require(grad_out.shape() == Shape5{s.n, s.c, 2 * s.d, 2 * s.h, 2 * s.w}, "upsample grad_out shape mismatch");
    const std::size_t nc = s.n * s.c;
    std::vector<T> b(nc * s.d * 2 * s.h * 2 * s.w);
    up_axis_adjoint(grad_out.data().data(), b.data(), nc, s.d, 4 * s.h * s.w);
    std::vector<T> a(nc * s.d * s.h * 2 * s.w);
    up_axis_adjoint(b.data(), a.data(), nc * s.d, s.h, 2 * s.w);
    std::vector<T> g(s.count());
    up_axis_adjoint(a.data(), g.data(), nc * s.d * s.h, s.w, 1);
    for (std::size_t i = 0; i < g.size(); ++i) grad_x[i] += g[i];
}

template <typename T>
Tensor<T> instance_norm_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                                InstanceNormCache<T>* cache) {
    const Shape5 s = x.shape();
    require(s.spatial() >= 1, "instance_norm needs at least one voxel");
    require(gamma.size() == s.c && beta.size() == s.c, "instance_norm gamma/beta length must equal channels");
    Tensor<T> y(s);
    if (cache) {
        cache->normalized = Tensor<T>(s);
        cache->inv_std.assign(s.n * s.c, 0.0);
    }
    const std::size_t m = s.spatial();
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            auto xc = x.channel(n, c);
            double mean = 0.0;
            for (T v : xc) mean += static_cast<double>(v);
            mean /= static_cast<double>(m);
            double var = 0.0;
            for (T v : xc) {
                const double d = static_cast<double>(v) - mean;
                var += d * d;
            }
            var /= static_cast<double>(m);
            const double inv_std = 1.0 / std::sqrt(var + kInstanceNormEps);
            auto yc = y.channel(n, c);
            const double g = static_cast<double>(gamma[c]), b = static_cast<double>(beta[c]);
            for (std::size_t i = 0; i < m; ++i) {
                const double xh = (static_cast<double>(xc[i]) - mean) * inv_std;
                yc[i] = static_cast<T>(g * xh + b);
                if (cache) cache->normalized.channel(n, c)[i] = static_cast<T>(xh);
            }
            if (cache) cache->inv_std[n * s.c + c] = inv_std;
        }
    return y;
}

template <typename T>
void instance_norm_backward(const InstanceNormCache<T>& cache, const Tensor<T>& gamma, const Tensor<T>& grad_out,
                            Tensor<T>& grad_x, Tensor<T>& grad_gamma, Tensor<T>& grad_beta) {
    const Shape5 s = grad_out.shape();
    require(cache.normalized.shape() == s, "instance_norm cache shape mismatch");
    const std::size_t m = s.spatial();
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < s.c; ++c) {
            auto gy = grad_out.channel(n, c);
            auto xh = cache.normalized.channel(n, c);
            double sum_gy = 0.0, sum_gy_xh = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                sum_gy += static_cast<double>(gy[i]);
                sum_gy_xh += static_cast<double>(gy[i]) * static_cast<double>(xh[i]);
            }
            grad_beta[c] += static_cast<T>(sum_gy);
            grad_gamma[c] += static_cast<T>(sum_gy_xh);
            const double g = static_cast<double>(gamma[c]);
            const double scale = g * cache.inv_std[n * s.c + c];
            auto gx = grad_x.channel(n, c);
            for (std::size_t i = 0; i < m; ++i) {
                const double v =
                    scale * (static_cast<double>(gy[i]) - sum_gy * inv_m - static_cast<double>(xh[i]) * sum_gy_xh * inv_m);
                gx[i] += static_cast<T>(v);
            }
        }
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
    Tensor<T> y(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    return y;
}

template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& grad_out, Tensor<T>& grad_x) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] > T(0)) grad_x[i] += grad_out[i];
    }
}

template <typename T>
Tensor<T> concat_channels_forward(const Tensor<T>& a, const Tensor<T>& b) {
    const Shape5 sa = a.shape(), sb = b.shape();
    require(sa.n == sb.n && sa.d == sb.d && sa.h == sb.h && sa.w == sb.w,
            "concat spatial mismatch: " + to_string(sa) + " vs " + to_string(sb));
    Tensor<T> y({sa.n, sa.c + sb.c, sa.d, sa.h, sa.w});
    const std::size_t m = sa.spatial();
    for (std::size_t n = 0; n < sa.n; ++n) {
        T* dst = y.data().data() + n * (sa.c + sb.c) * m;
        std::copy_n(a.data().data() + n * sa.c * m, sa.c * m, dst);
        std::copy_n(b.data().data() + n * sb.c * m, sb.c * m, dst + sa.c * m);
    }
    return y;
}

template <typename T>
void concat_channels_backward(const Tensor<T>& grad_out, Tensor<T>* grad_a, Tensor<T>* grad_b) {
    const Shape5 s = grad_out.shape();
    const std::size_t m = s.spatial();
    const std::size_t ca = grad_a ? grad_a->shape().c : s.c - grad_b->shape().c;
    const std::size_t cb = s.c - ca;
    for (std::size_t n = 0; n < s.n; ++n) {
        const T* src = grad_out.data().data() + n * s.c * m;
        if (grad_a) {
            T* ga = grad_a->data().data() + n * ca * m;
            for (std::size_t i = 0; i < ca * m; ++i) ga[i] += src[i];
        }
        if (grad_b) {
            T* gb = grad_b->data().data() + n * cb * m;
            for (std::size_t i = 0; i < cb * m; ++i) gb[i] += src[ca * m + i];
        }
    }
}

template <typename T>
Tensor<T> add_forward(const Tensor<T>& a, const Tensor<T>& b) {
    require(a.shape() == b.shape(), "add shape mismatch: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    Tensor<T> y(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] + b[i];
    return y;
}

template <typename T>
Tensor<T> softmax_channels_forward(const Tensor<T>& logits) {
    const Shape5 s = logits.shape();
    Tensor<T> p(s);
    const std::size_t m = s.spatial();
    for (std::size_t n = 0; n < s.n; ++n) {
        const T* in = logits.data().data() + n * s.c * m;
        T* out = p.data().data() + n * s.c * m;
        for (std::size_t v = 0; v < m; ++v) {
            T mx = in[v];
            for (std::size_t c = 1; c < s.c; ++c) mx = std::max(mx, in[c * m + v]);
            T sum = T(0);
            for (std::size_t c = 0; c < s.c; ++c) {
                const T e = std::exp(in[c * m + v] - mx);
                out[c * m + v] = e;
                sum += e;
            }
            const T inv = T(1) / sum;
            for (std::size_t c = 0; c < s.c; ++c) out[c * m + v] *= inv;
        }
    }
    return p;
}

template <typename T>
void softmax_channels_backward(const Tensor<T>& probs, const Tensor<T>& grad_out, Tensor<T>& grad_logits) {
    const Shape5 s = probs.shape();
    const std::size_t m = s.spatial();
    for (std::size_t n = 0; n < s.n; ++n) {
        const T* p = probs.data().data() + n * s.c * m;
        const T* g = grad_out.data().data() + n * s.c * m;
        T* gl = grad_logits.data().data() + n * s.c * m;
        for (std::size_t v = 0; v < m; ++v) {
            T dot = T(0);
            for (std::size_t c = 0; c < s.c; ++c) dot += p[c * m + v] * g[c * m + v];
            for (std::size_t c = 0; c < s.c; ++c) gl[c * m + v] += p[c * m + v] * (g[c * m + v] - dot);
        }
    }
}

#define BODYCOMP_INSTANTIATE(T)                                                                                   \
    template Tensor<T> conv3d_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
    template void conv3d_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>*, Tensor<T>&,   \
                                  Tensor<T>&);                                                                    \
    template Tensor<T> maxpool3d_forward(const Tensor<T>&, std::vector<std::uint32_t>*);                          \
    template void maxpool3d_backward(const std::vector<std::uint32_t>&, const Tensor<T>&, Tensor<T>&);            \
    template Tensor<T> upsample_trilinear_forward(const Tensor<T>&);                                              \
    template void upsample_trilinear_backward(const Tensor<T>&, Tensor<T>&);                                      \
    template Tensor<T> instance_norm_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,                \
                                             InstanceNormCache<T>*);                                              \
    template void instance_norm_backward(const InstanceNormCache<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                         Tensor<T>&, Tensor<T>&, Tensor<T>&);                                     \
    template Tensor<T> relu_forward(const Tensor<T>&);                                                            \
    template void relu_backward(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);                                  \
    template Tensor<T> concat_channels_forward(const Tensor<T>&, const Tensor<T>&);                               \
    template void concat_channels_backward(const Tensor<T>&, Tensor<T>*, Tensor<T>*);                             \
    template Tensor<T> add_forward(const Tensor<T>&, const Tensor<T>&);                                           \
    template Tensor<T> softmax_channels_forward(const Tensor<T>&);                                                \
    template void softmax_channels_backward(const Tensor<T>&, const Tensor<T>&, Tensor<T>&);

BODYCOMP_INSTANTIATE(float)
BODYCOMP_INSTANTIATE(double)

#undef BODYCOMP_INSTANTIATE

}  // namespace bodycomp::nn
