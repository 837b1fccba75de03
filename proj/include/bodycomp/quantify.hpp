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

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "bodycomp/volume.hpp"

namespace bodycomp {

enum class TissueClass { Adipose, Muscle, Other };
enum class Compartment { SAT, VAT, MuscleTissue, Unassigned };

inline constexpr double kAdiposeLo = -190.0, kAdiposeHi = -30.0;
inline constexpr double kMuscleLo = -29.0, kMuscleHi = 150.0;

/// Closed-interval HU rule; values in the (-30, -29) gap are Other.
TissueClass classify_tissue(double hu);

/// Adipose in AbdominalCavity -> VAT, adipose in SubcutaneousTissue -> SAT,
/// muscle-range HU in the Muscle region -> MuscleTissue, anything else Unassigned.
Compartment assign_compartment(TissueClass tissue, std::uint8_t region);

struct CompartmentCounts {
    std::uint64_t sat = 0, vat = 0, muscle = 0;

    CompartmentCounts& operator+=(const CompartmentCounts& o) {
        sat += o.sat;
        vat += o.vat;
        muscle += o.muscle;
        return *this;
    }
    friend bool operator==(const CompartmentCounts&, const CompartmentCounts&) = default;
};

struct SliceComposition {
    std::size_t slice = 0;
    CompartmentCounts voxels;
    double sat_ml = 0, vat_ml = 0, muscle_ml = 0;
};

struct CompositionReport {
    std::vector<SliceComposition> rows;
    CompartmentCounts total_voxels;
    /// Sums of the row volumes, accumulated in slice order.
    double total_sat_ml = 0, total_vat_ml = 0, total_muscle_ml = 0;
    double voxel_volume_ml = 0;
    Spacing spacing;
    /// Free-form provenance: input id, checkpoint hash, config.
    nlohmann::json metadata = nlohmann::json::object();
};

/// Builds rows and totals from per-slice voxel counts.
CompositionReport make_report(const std::vector<CompartmentCounts>& per_slice, const Spacing& spacing);

CompositionReport quantify(const HUVolume& hu, const LabelVolume& labels);

}  // namespace bodycomp
