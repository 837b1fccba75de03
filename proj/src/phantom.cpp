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

#include "bodycomp/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace bodycomp {

void PhantomSpec::validate() const {
    spacing.validate();
    if (nz < 2) throw std::invalid_argument("phantom needs at least 2 slices");
    if (ny < 16 || nx < 16) throw std::invalid_argument("phantom in-plane size must be at least 16");
    if (thoracic_cap < 1 || thoracic_cap >= nz) {
        throw std::invalid_argument("thoracic cap must leave at least one abdominal slice");
    }
    if (bone_count < 1 || bone_count > 3) throw std::invalid_argument("bone_count must be 1..3");
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
    };
    positive(body_ry, "body_ry");
    positive(body_rx, "body_rx");
    positive(sat_thickness, "sat_thickness");
    positive(muscle_thickness, "muscle_thickness");
    positive(bone_radius, "bone_radius");
    if (!(radius_variation >= 0.0 && radius_variation < 0.5)) throw std::invalid_argument("radius_variation in [0, 0.5)");
    if (!(thickness_variation >= 0.0 && thickness_variation < 0.5)) {
        throw std::invalid_argument("thickness_variation in [0, 0.5)");
    }
    if (!(fascia_thickness >= 0.0) || !std::isfinite(fascia_thickness)) {
        throw std::invalid_argument("fascia_thickness must be non-negative");
    }
    if (!(paraspinal_radius >= 0.0) || !std::isfinite(paraspinal_radius)) {
        throw std::invalid_argument("paraspinal_radius must be non-negative");
    }
    if (!(visceral_fat_fraction >= 0.0 && visceral_fat_fraction < 1.0)) {
        throw std::invalid_argument("visceral_fat_fraction in [0, 1)");
    }
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
}

namespace {

struct Blob {
    double z, y, x, inv_two_s2, amp;
};

/// Per-phantom random draws; everything else is deterministic geometry.
struct Draws {
    double ry_scale, rx_scale, phase_y, phase_x, freq;
    double sat_scale, muscle_scale, ring_phase;
    double sat_phase, muscle_phase, thick_freq;
    double para_scale, para_slope;
    double fat_fraction;
    double cy_off, cx_off;
    std::vector<Blob> blobs;
};

Draws draw(const PhantomSpec& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto range = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    Draws d;
    d.ry_scale = range(0.9, 1.1);
    d.rx_scale = range(0.9, 1.1);
    d.phase_y = range(0.0, 2.0 * std::numbers::pi);
    d.phase_x = range(0.0, 2.0 * std::numbers::pi);
    d.freq = range(0.5, 1.5);
    d.sat_scale = range(0.6, 1.35);
    d.muscle_scale = range(0.8, 1.25);
    d.ring_phase = range(0.0, std::numbers::pi);
    d.sat_phase = range(0.0, 2.0 * std::numbers::pi);
    d.muscle_phase = range(0.0, 2.0 * std::numbers::pi);
    d.thick_freq = range(0.4, 0.9);
    d.para_scale = range(0.9, 1.1);
    d.para_slope = range(0.7, 0.9);
    d.fat_fraction = std::clamp(s.visceral_fat_fraction * range(0.7, 1.3), 0.0, 0.95);
    d.cy_off = range(-0.02, 0.02);
    d.cx_off = range(-0.02, 0.02);
    for (int k = 0; k < 8; ++k) {
        const double sigma = range(0.12, 0.3);
        d.blobs.push_back({u(rng), u(rng), u(rng), 1.0 / (2.0 * sigma * sigma), range(-1.0, 1.0)});
    }
    return d;
}

double fat_field(const Draws& d, double z, double y, double x) {
    double f = 0.0;
    for (const auto& b : d.blobs) {
        const double r2 = (z - b.z) * (z - b.z) + (y - b.y) * (y - b.y) + (x - b.x) * (x - b.x);
        f += b.amp * std::exp(-r2 * b.inv_two_s2);
    }
    return f;
}

}  // namespace

Phantom generate_phantom(const PhantomSpec& s) {
    s.validate();
    std::mt19937_64 rng(s.seed);
    const Draws d = draw(s, rng);

    const Dims dims{s.nz, s.ny, s.nx};
    const double side = static_cast<double>(std::min(s.ny, s.nx));
    const double cy = static_cast<double>(s.ny) * (0.5 + d.cy_off);
    const double cx = static_cast<double>(s.nx) * (0.5 + d.cx_off);
    const double ts_mean = s.sat_thickness * side * d.sat_scale;
    const double tm_mean = s.muscle_thickness * side * d.muscle_scale;
    const double rb = s.bone_radius * side;
    const double tf = s.fascia_thickness * side;
    constexpr double kRingWobble = 0.2;

    std::vector<std::uint8_t> labels(dims.count(), label_of(BodyRegion::Background));
    std::vector<float> clean(dims.count(), phantom_hu::kAir);
    std::vector<std::size_t> abdominal;  // voxel indices of the abdominal cavity
    std::vector<double> field;

    for (std::size_t z = 0; z < s.nz; ++z) {
        const double t = static_cast<double>(z) / static_cast<double>(s.nz - 1);
        const double ry = s.body_ry * static_cast<double>(s.ny) * d.ry_scale *
                          (1.0 + s.radius_variation * std::sin(2.0 * std::numbers::pi * d.freq * t + d.phase_y));
        const double rx = s.body_rx * static_cast<double>(s.nx) * d.rx_scale *
                          (1.0 + s.radius_variation * std::sin(2.0 * std::numbers::pi * d.freq * t + d.phase_x));
        if (cy - ry < 0.5 || cy + ry > static_cast<double>(s.ny) - 0.5 || cx - rx < 0.5 ||
            cx + rx > static_cast<double>(s.nx) - 0.5) {
            throw std::invalid_argument("phantom body leaves the image at slice " + std::to_string(z));
        }
        const double ts0 =
            ts_mean * (1.0 + s.thickness_variation * std::sin(2.0 * std::numbers::pi * d.thick_freq * t + d.sat_phase));
        const double tm0 =
            tm_mean * (1.0 + s.thickness_variation * std::sin(2.0 * std::numbers::pi * d.thick_freq * t + d.muscle_phase));
        // Smallest cavity radii over all angles; bones must fit inside.
        const double rings_max = (ts0 + tm0) * (1.0 + kRingWobble) + tf;
        const double cav_ry = ry - rings_max, cav_rx = rx - rings_max;
        if (cav_ry < 2.5 * rb || cav_rx < 2.5 * rb) {
            throw std::invalid_argument("rings and bones do not fit inside the body at slice " + std::to_string(z));
        }
        const std::array<std::array<double, 3>, 3> bones{{
            {cy + 0.6 * cav_ry, cx, rb},
            {cy - 0.2 * cav_ry, cx - 0.6 * cav_rx, 0.7 * rb},
            {cy - 0.2 * cav_ry, cx + 0.6 * cav_rx, 0.7 * rb},
        }};
        const bool thoracic = z >= s.nz - s.thoracic_cap;
        // Paraspinal muscle: two ellipses flanking the vertebra, larger caudally (low z).
        const double pr = s.paraspinal_radius * side * d.para_scale * (1.0 + d.para_slope * (0.5 - t));
        const double para_y = bones[0][0], para_dx = rb + pr;
        auto paraspinal = [&](double py, double px, double grow) {
            if (pr <= 0.0) return false;
            const double a = pr + grow, b = 0.7 * pr + grow;
            const double ey = (py - para_y) / b;
            const double ex1 = (px - (cx - para_dx)) / a, ex2 = (px - (cx + para_dx)) / a;
            return ey * ey + ex1 * ex1 <= 1.0 || ey * ey + ex2 * ex2 <= 1.0;
        };

        for (std::size_t y = 0; y < s.ny; ++y) {
            for (std::size_t x = 0; x < s.nx; ++x) {
                const double dy = static_cast<double>(y) + 0.5 - cy;
                const double dx = static_cast<double>(x) + 0.5 - cx;
                if ((dy / ry) * (dy / ry) + (dx / rx) * (dx / rx) > 1.0) continue;
                const double theta = std::atan2(dy / ry, dx / rx);
                const double wobble = 1.0 + kRingWobble * std::cos(2.0 * theta + d.ring_phase);
                const double ts = ts0 * wobble, tm = tm0 * wobble;
                auto inside = [&](double shrink) {
                    const double a = ry - shrink, b = rx - shrink;
                    return (dy / a) * (dy / a) + (dx / b) * (dx / b) <= 1.0;
                };
                const std::size_t i = (z * s.ny + y) * s.nx + x;
                if (!inside(ts)) {
                    labels[i] = label_of(BodyRegion::SubcutaneousTissue);
                    clean[i] = phantom_hu::kFat;
                } else if (!inside(ts + tm)) {
                    labels[i] = label_of(BodyRegion::Muscle);
                    clean[i] = phantom_hu::kMuscle;
                } else {
                    bool bone = false;
                    for (int k = 0; k < s.bone_count; ++k) {
                        const auto& b = bones[static_cast<std::size_t>(k)];
                        const double by = static_cast<double>(y) + 0.5 - b[0];
                        const double bx = static_cast<double>(x) + 0.5 - b[1];
                        bone = bone || by * by + bx * bx <= b[2] * b[2];
                    }
                    if (bone) {
                        labels[i] = label_of(BodyRegion::Bones);
                        clean[i] = phantom_hu::kBone;
                    } else if (paraspinal(static_cast<double>(y) + 0.5, static_cast<double>(x) + 0.5, 0.0)) {
                        labels[i] = label_of(BodyRegion::Muscle);
                        clean[i] = phantom_hu::kMuscle;
                    } else if (!thoracic && (!inside(ts + tm + tf) ||
                                             paraspinal(static_cast<double>(y) + 0.5, static_cast<double>(x) + 0.5, tf))) {
                        labels[i] = label_of(BodyRegion::AbdominalCavity);
                        clean[i] = phantom_hu::kFat;
                    } else if (thoracic) {
                        labels[i] = label_of(BodyRegion::ThoracicCavity);
                        clean[i] = phantom_hu::kLung;
                    } else {
                        labels[i] = label_of(BodyRegion::AbdominalCavity);
                        clean[i] = phantom_hu::kOrgan;
                        abdominal.push_back(i);
                        field.push_back(fat_field(d, t, (static_cast<double>(y) + 0.5) / static_cast<double>(s.ny),
                                                  (static_cast<double>(x) + 0.5) / static_cast<double>(s.nx)));
                    }
                }
            }
        }
    }

    // Visceral fat: the lowest-field fraction of the abdominal cavity.
    const auto n_fat = static_cast<std::size_t>(d.fat_fraction * static_cast<double>(abdominal.size()));
    if (n_fat > 0) {
        std::vector<std::size_t> order(abdominal.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return field[a] < field[b]; });
        for (std::size_t k = 0; k < n_fat; ++k) clean[abdominal[order[k]]] = phantom_hu::kFat;
    }

    std::array<bool, kNumClasses> present{};
    std::vector<CompartmentCounts> counts(s.nz);
    for (std::size_t z = 0; z < s.nz; ++z) {
        for (std::size_t j = 0; j < dims.plane(); ++j) {
            const std::size_t i = z * dims.plane() + j;
            const auto region = static_cast<BodyRegion>(labels[i]);
            present[labels[i]] = true;
            if (region == BodyRegion::SubcutaneousTissue) ++counts[z].sat;
            if (region == BodyRegion::Muscle) ++counts[z].muscle;
            if (region == BodyRegion::AbdominalCavity && clean[i] == phantom_hu::kFat) ++counts[z].vat;
        }
    }
    for (int c = 0; c < kNumClasses; ++c) {
        if (!present[static_cast<std::size_t>(c)]) {
            throw std::invalid_argument("phantom spec produced no voxels of class " +
                                        std::string(region_name(static_cast<BodyRegion>(c))));
        }
    }

    std::vector<float> noisy = clean;
    if (s.noise_sigma > 0.0) {
        std::mt19937_64 noise_rng(s.seed ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> noise(0.0, s.noise_sigma);
        for (auto& v : noisy) v = static_cast<float>(v + noise(noise_rng));
    }

    Phantom p{HUVolume(dims, s.spacing, std::move(noisy)), HUVolume(dims, s.spacing, std::move(clean)),
              LabelVolume(dims, s.spacing, std::move(labels)), make_report(counts, s.spacing)};
    p.composition.metadata = {{"source", "phantom"}, {"seed", s.seed}};
    return p;
}

LabelVolume sparsify_annotation(const LabelVolume& labels, std::size_t period) {
    if (period < 1) throw std::invalid_argument("annotation period must be >= 1");
    const Dims& d = labels.dims();
    std::vector<std::uint8_t> out(labels.data().begin(), labels.data().end());
    for (std::size_t z = 0; z < d.nz; ++z) {
        if (z % period == 0) continue;
        std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(z * d.plane()), d.plane(), kIgnoreLabel);
    }
    return LabelVolume(d, labels.spacing(), std::move(out));
}

}  // namespace bodycomp
