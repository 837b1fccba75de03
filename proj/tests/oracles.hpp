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

// Reference implementations written directly from the definitions, kept
// deliberately naive. Tests compare the library against these.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "bodycomp/nn/tensor.hpp"
#include "bodycomp/quantify.hpp"
#include "bodycomp/volume.hpp"

namespace oracle {

using bodycomp::nn::Tensor;

/// Zero-padded "same" cross-correlation, stride 1, odd cubic kernel.
inline Tensor<double> conv3d(const Tensor<double>& x, const Tensor<double>& w, const Tensor<double>& b) {
    const auto xs = x.shape();
    const auto ws = w.shape();
    const long k = static_cast<long>(ws.d), r = k / 2;
    Tensor<double> y({xs.n, ws.n, xs.d, xs.h, xs.w});
    for (std::size_t n = 0; n < xs.n; ++n)
        for (std::size_t o = 0; o < ws.n; ++o)
            for (long z = 0; z < static_cast<long>(xs.d); ++z)
                for (long yy = 0; yy < static_cast<long>(xs.h); ++yy)
                    for (long xx = 0; xx < static_cast<long>(xs.w); ++xx) {
                        double s = b[o];
                        for (std::size_t i = 0; i < ws.c; ++i)
                            for (long dz = 0; dz < k; ++dz)
                                for (long dy = 0; dy < k; ++dy)
                                    for (long dx = 0; dx < k; ++dx) {
                                        const long sz = z + dz - r, sy = yy + dy - r, sx = xx + dx - r;
                                        if (sz < 0 || sy < 0 || sx < 0 || sz >= static_cast<long>(xs.d) ||
                                            sy >= static_cast<long>(xs.h) || sx >= static_cast<long>(xs.w))
                                            continue;
                                        s += w.at(o, i, dz, dy, dx) * x.at(n, i, sz, sy, sx);
                                    }
                        y.at(n, o, z, yy, xx) = s;
                    }
    return y;
}

struct MeanSquares {
    double rows, cols, error;
};

/// Two-way ANOVA without replication on an n x k table, written from the textbook sums of squares.
inline MeanSquares anova(const std::vector<std::vector<double>>& table) {
    const double n = static_cast<double>(table.size()), k = static_cast<double>(table.front().size());
    double grand = 0;
    for (const auto& row : table)
        for (double v : row) grand += v;
    grand /= n * k;
    std::vector<double> col_mean(table.front().size(), 0.0);
    double ssr = 0, ssc = 0, sst = 0;
    for (const auto& row : table) {
        double rm = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            rm += row[j];
            col_mean[j] += row[j] / n;
            sst += (row[j] - grand) * (row[j] - grand);
        }
        rm /= k;
        ssr += k * (rm - grand) * (rm - grand);
    }
    for (double cm : col_mean) ssc += n * (cm - grand) * (cm - grand);
    const double sse = sst - ssr - ssc;
    return {ssr / (n - 1), ssc / (k - 1), sse / ((n - 1) * (k - 1))};
}

/// Shrout-Fleiss / McGraw-Wong ICC(A,1) from mean squares.
inline double icc_agreement(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<std::vector<double>> t;
    for (std::size_t i = 0; i < a.size(); ++i) t.push_back({a[i], b[i]});
    const auto ms = anova(t);
    const double n = static_cast<double>(a.size()), k = 2;
    return (ms.rows - ms.error) / (ms.rows + (k - 1) * ms.error + k / n * (ms.cols - ms.error));
}

/// Scalar Adam with decoupled decay, written as the textbook recurrence.
struct ScalarAdamW {
    double b1 = 0.9, b2 = 0.999, eps = 1e-7, wd = 1e-4;
    double m = 0, v = 0;
    int t = 0;

    double step(double w, double g, double lr) {
        ++t;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mh = m / (1 - std::pow(b1, t));
        const double vh = v / (1 - std::pow(b2, t));
        return w - lr * (mh / (std::sqrt(vh) + eps)) - lr * wd * w;
    }
};

/// Straight-line restatement of the counting rule, one voxel at a time.
inline std::vector<bodycomp::CompartmentCounts> compartment_counts(const bodycomp::HUVolume& hu,
                                                                   const bodycomp::LabelVolume& labels) {
    std::vector<bodycomp::CompartmentCounts> out(hu.dims().nz);
    for (std::size_t z = 0; z < hu.dims().nz; ++z)
        for (std::size_t y = 0; y < hu.dims().ny; ++y)
            for (std::size_t x = 0; x < hu.dims().nx; ++x) {
                const double v = hu.at(z, y, x);
                const auto r = labels.at(z, y, x);
                const bool fat = v >= -190.0 && v <= -30.0;
                const bool lean = v >= -29.0 && v <= 150.0;
                if (fat && r == 3) ++out[z].sat;
                if (fat && r == 4) ++out[z].vat;
                if (lean && r == 1) ++out[z].muscle;
            }
    return out;
}

}  // namespace oracle
