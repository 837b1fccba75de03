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

#include "bodycomp/quantify.hpp"

namespace bodycomp {

TissueClass classify_tissue(double hu) {
    if (hu >= kAdiposeLo && hu <= kAdiposeHi) return TissueClass::Adipose;
    if (hu >= kMuscleLo && hu <= kMuscleHi) return TissueClass::Muscle;
    return TissueClass::Other;
}

Compartment assign_compartment(TissueClass tissue, std::uint8_t region) {
    if (tissue == TissueClass::Adipose) {
        if (region == label_of(BodyRegion::AbdominalCavity)) return Compartment::VAT;
        if (region == label_of(BodyRegion::SubcutaneousTissue)) return Compartment::SAT;
    } else if (tissue == TissueClass::Muscle && region == label_of(BodyRegion::Muscle)) {
        return Compartment::MuscleTissue;
    }
    return Compartment::Unassigned;
}

CompositionReport make_report(const std::vector<CompartmentCounts>& per_slice, const Spacing& spacing) {
    CompositionReport r;
    r.spacing = spacing;
    r.voxel_volume_ml = voxel_volume_ml(spacing);
    r.rows.reserve(per_slice.size());
    for (std::size_t z = 0; z < per_slice.size(); ++z) {
        const auto& c = per_slice[z];
        SliceComposition row{z, c, static_cast<double>(c.sat) * r.voxel_volume_ml,
                             static_cast<double>(c.vat) * r.voxel_volume_ml,
                             static_cast<double>(c.muscle) * r.voxel_volume_ml};
        r.total_voxels += c;
        r.total_sat_ml += row.sat_ml;
        r.total_vat_ml += row.vat_ml;
        r.total_muscle_ml += row.muscle_ml;
        r.rows.push_back(row);
    }
    return r;
}

CompositionReport quantify(const HUVolume& hu, const LabelVolume& labels) {
    require_paired(hu, labels);
    const Dims& d = hu.dims();
    std::vector<CompartmentCounts> counts(d.nz);
    for (std::size_t z = 0; z < d.nz; ++z) {
        const auto h = hu.slice(z);
        const auto l = labels.slice(z);
        auto& c = counts[z];
        for (std::size_t i = 0; i < h.size(); ++i) {
            switch (assign_compartment(classify_tissue(h[i]), l[i])) {
                case Compartment::SAT: ++c.sat; break;
                case Compartment::VAT: ++c.vat; break;
                case Compartment::MuscleTissue: ++c.muscle; break;
                case Compartment::Unassigned: break;
            }
        }
    }
    return make_report(counts, hu.spacing());
}

}  // namespace bodycomp
