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
#include <span>
#include <string_view>

#include "bodycomp/volume.hpp"

namespace bodycomp {

/// Foreground classes in reporting order: AC, B, M, ST, TC.
inline constexpr std::array<BodyRegion, 5> kReportClasses{BodyRegion::AbdominalCavity, BodyRegion::Bones,
                                                          BodyRegion::Muscle, BodyRegion::SubcutaneousTissue,
                                                          BodyRegion::ThoracicCavity};
inline constexpr std::array<std::string_view, 5> kReportColumns{"AC", "B", "M", "ST", "TC"};

struct DiceResult {
    std::array<double, 5> per_class{};  // kReportClasses order
    double mean = 0.0;
};

/// 2|A and B| / (|A| + |B|) over voxels where neither volume is Ignore;
/// 1 when both masks are empty.
double dice_score(const LabelVolume& pred, const LabelVolume& gt, std::uint8_t class_id);

DiceResult mean_foreground_dice(const LabelVolume& pred, const LabelVolume& gt);

/// Per-class voxel tallies so dice can be pooled over several volumes.
struct DiceTally {
    std::array<std::uint64_t, kNumClasses> intersection{}, pred{}, gt{};

    void add(const LabelVolume& pred, const LabelVolume& gt);
    DiceResult result() const;
};

enum class IccForm {
    AbsoluteAgreement,  // ICC(A,1)
    Consistency,        // ICC(C,1)
};

/// Two-way single-measure ICC with subjects = entries, raters = {a, b}.
double icc(std::span<const double> a, std::span<const double> b, IccForm form = IccForm::AbsoluteAgreement);

}  // namespace bodycomp
