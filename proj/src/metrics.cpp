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

#include "bodycomp/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace bodycomp {

namespace {

void require_same_dims(const LabelVolume& a, const LabelVolume& b) {
    if (a.dims() != b.dims()) {
        throw VolumeError("label volumes differ in dims: " + to_string(a.dims()) + " vs " + to_string(b.dims()));
    }
}

double ratio(std::uint64_t inter, std::uint64_t a, std::uint64_t b) {
    if (a + b == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(a + b);
}

}  // namespace

void DiceTally::add(const LabelVolume& p, const LabelVolume& g) {
    require_same_dims(p, g);
    const auto pd = p.data();
    const auto gd = g.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
        if (pd[i] == kIgnoreLabel || gd[i] == kIgnoreLabel) continue;
        ++pred[pd[i]];
        ++gt[gd[i]];
        if (pd[i] == gd[i]) ++intersection[pd[i]];
    }
}

DiceResult DiceTally::result() const {
    DiceResult r;
    for (std::size_t k = 0; k < kReportClasses.size(); ++k) {
        const auto c = label_of(kReportClasses[k]);
        r.per_class[k] = ratio(intersection[c], pred[c], gt[c]);
        r.mean += r.per_class[k];
    }
    r.mean /= static_cast<double>(kReportClasses.size());
    return r;
}

double dice_score(const LabelVolume& pred, const LabelVolume& gt, std::uint8_t class_id) {
    if (class_id >= kNumClasses) throw std::invalid_argument("dice_score: class id out of range");
    DiceTally t;
    t.add(pred, gt);
    return ratio(t.intersection[class_id], t.pred[class_id], t.gt[class_id]);
}

DiceResult mean_foreground_dice(const LabelVolume& pred, const LabelVolume& gt) {
    DiceTally t;
    t.add(pred, gt);
    return t.result();
}

double icc(std::span<const double> a, std::span<const double> b, IccForm form) {
    if (a.size() != b.size()) throw std::invalid_argument("icc: series lengths differ");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("icc needs at least two subjects");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw std::invalid_argument("icc: non-finite value");
    }
    constexpr double k = 2.0;
    const double nn = static_cast<double>(n);
    double grand = 0.0, mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= nn;
    mean_b /= nn;
    grand = 0.5 * (mean_a + mean_b);

    double ss_rows = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double row = 0.5 * (a[i] + b[i]);
        ss_rows += k * (row - grand) * (row - grand);
        ss_total += (a[i] - grand) * (a[i] - grand) + (b[i] - grand) * (b[i] - grand);
    }
    const double ss_cols = nn * ((mean_a - grand) * (mean_a - grand) + (mean_b - grand) * (mean_b - grand));
    const double ss_err = std::max(0.0, ss_total - ss_rows - ss_cols);

    if (ss_total == 0.0) return 1.0;
    const double ms_r = ss_rows / (nn - 1.0);
    const double ms_c = ss_cols / (k - 1.0);
    const double ms_e = ss_err / ((nn - 1.0) * (k - 1.0));
    const double denom = form == IccForm::AbsoluteAgreement ? ms_r + (k - 1.0) * ms_e + k / nn * (ms_c - ms_e)
                                                           : ms_r + (k - 1.0) * ms_e;
    if (denom == 0.0) throw std::domain_error("icc undefined: no between-subject variance");
    return (ms_r - ms_e) / denom;
}

}  // namespace bodycomp
