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

#include "bodycomp/quantify.hpp"
#include "bodycomp/volume.hpp"

namespace bodycomp {

/// Abdomen-like phantom: nested elliptic rings (body > subcutaneous fat >
/// muscle > cavity) with bones in the cavity, paraspinal muscle beside the
/// spine, a fat plane between muscle and abdominal organs, visceral fat blobs
/// in the abdominal cavity and lung in the top `thoracic_cap` slices. Ring thicknesses and paraspinal size drift along z.
/// Lengths are fractions of the in-plane size so the same spec scales.
struct PhantomSpec {
    std::uint64_t seed = 0;
    std::size_t nz = 40;
    std::size_t ny = 256;
    std::size_t nx = 256;
    Spacing spacing{5.0, 2.0, 2.0};

    double body_ry = 0.32;  // of ny
    double body_rx = 0.38;  // of nx
    double radius_variation = 0.06;  // relative amplitude along z
    double sat_thickness = 0.05;     // of min(ny, nx)
    double muscle_thickness = 0.04;  // of min(ny, nx)
    double thickness_variation = 0.2;   // relative amplitude along z
    double paraspinal_radius = 0.06;    // of min(ny, nx); 0 disables
    double fascia_thickness = 0.016;    // fat plane lining muscle in the abdominal cavity, of min(ny, nx)
    int bone_count = 3;              // 1..3
    double bone_radius = 0.04;       // of min(ny, nx)
    double visceral_fat_fraction = 0.3;
    std::size_t thoracic_cap = 8;
    double noise_sigma = 10.0;

    /// Structural checks; geometric nesting is checked per slice during generation.
    void validate() const;
};

namespace phantom_hu {
inline constexpr float kAir = -1000.0f;
inline constexpr float kFat = -100.0f;
inline constexpr float kMuscle = 50.0f;
inline constexpr float kOrgan = 40.0f;
inline constexpr float kBone = 400.0f;
inline constexpr float kLung = -800.0f;
}  // namespace phantom_hu

struct Phantom {
    HUVolume hu;        // with noise
    HUVolume hu_clean;  // noise-free
    LabelVolume labels;
    /// Per-slice SAT/VAT/muscle from the generating geometry.
    CompositionReport composition;
};

Phantom generate_phantom(const PhantomSpec& spec);

/// Keeps slices z % period == 0, sets every other slice to Ignore.
LabelVolume sparsify_annotation(const LabelVolume& labels, std::size_t period = 5);

}  // namespace bodycomp
