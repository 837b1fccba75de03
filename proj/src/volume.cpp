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

#include "bodycomp/volume.hpp"

#include <cmath>

#include "binary_io.hpp"

namespace bodycomp {

namespace {

constexpr std::string_view kVolumeMagic = "VBCVOL01";
constexpr std::string_view kProbMagic = "VBCPROB1";

nlohmann::ordered_json volume_header(std::string_view kind, const Dims& d, const Spacing& s) {
    nlohmann::ordered_json h;
    h["kind"] = kind;
    h["dims"] = {d.nz, d.ny, d.nx};
    h["spacing_mm"] = {s.z_mm, s.y_mm, s.x_mm};
    return h;
}

struct ParsedHeader {
    std::string kind;
    Dims dims;
    Spacing spacing;
};

ParsedHeader parse_header(const nlohmann::json& h) {
    ParsedHeader p;
    try {
        p.kind = h.at("kind").get<std::string>();
        const auto dims = h.at("dims").get<std::vector<std::int64_t>>();
        const auto sp = h.at("spacing_mm").get<std::vector<double>>();
        if (dims.size() != 3 || sp.size() != 3) throw VolumeError("dims and spacing_mm need 3 entries");
        for (auto v : dims) {
            if (v <= 0) throw VolumeError("dims must be positive");
        }
        p.dims = {static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
                  static_cast<std::size_t>(dims[2])};
        p.spacing = {sp[0], sp[1], sp[2]};
        p.spacing.validate();
    } catch (const nlohmann::json::exception& e) {
        throw VolumeError(std::string("malformed header: ") + e.what());
    }
    return p;
}

template <typename T>
void save_grid(const Grid<T>& volume, const std::filesystem::path& path) {
    if (volume.dims().empty()) throw VolumeError("refusing to write a zero-voxel volume");
    auto out = detail::open_for_write(path);
    detail::write_frame_header(out, kVolumeMagic, volume_header(GridTraits<T>::kind, volume.dims(), volume.spacing()));
    detail::write_payload(out, volume.data());
    if (!out) throw VolumeError("write failed: " + path.string());
}

}  // namespace

std::string to_string(const Dims& d) {
    return std::to_string(d.nz) + "x" + std::to_string(d.ny) + "x" + std::to_string(d.nx);
}

void Spacing::validate() const {
    for (double v : {z_mm, y_mm, x_mm}) {
        if (!(std::isfinite(v) && v > 0.0)) throw VolumeError("spacing must be positive and finite");
    }
}

double voxel_volume_ml(const Spacing& s) {
    s.validate();
    return s.z_mm * s.y_mm * s.x_mm / 1000.0;
}

std::string_view region_name(BodyRegion r) {
    switch (r) {
        case BodyRegion::Background: return "background";
        case BodyRegion::Muscle: return "muscle";
        case BodyRegion::Bones: return "bones";
        case BodyRegion::SubcutaneousTissue: return "subcutaneous_tissue";
        case BodyRegion::AbdominalCavity: return "abdominal_cavity";
        case BodyRegion::ThoracicCavity: return "thoracic_cavity";
        case BodyRegion::Ignore: return "ignore";
    }
    return "unknown";
}

void GridTraits<float>::validate(std::span<const float> data) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) throw VolumeError("non-finite HU at voxel " + std::to_string(i));
    }
}

void GridTraits<std::uint8_t>::validate(std::span<const std::uint8_t> data) {
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!is_valid_label(data[i])) {
            throw VolumeError("label value " + std::to_string(data[i]) + " outside domain at voxel " +
                              std::to_string(i));
        }
    }
}

void require_paired(const HUVolume& hu, const LabelVolume& labels) {
    if (hu.dims() != labels.dims()) {
        throw VolumeError("HU dims " + to_string(hu.dims()) + " differ from label dims " + to_string(labels.dims()));
    }
}

double ProbabilityVolume::max_normalization_error() const {
    const std::size_t n = dims.count();
    double worst = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        double s = 0.0;
        for (int c = 0; c < classes; ++c) s += at(c, v);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

AnyVolume load_volume(const std::filesystem::path& path) {
    try {
        auto in = detail::open_for_read(path);
        const ParsedHeader h = parse_header(detail::read_frame_header(in, kVolumeMagic));
        if (h.kind == "hu") {
            return HUVolume(h.dims, h.spacing, detail::read_payload<float>(in, h.dims.count(), true));
        }
        if (h.kind == "label") {
            return LabelVolume(h.dims, h.spacing, detail::read_payload<std::uint8_t>(in, h.dims.count(), true));
        }
        throw VolumeError("unknown volume kind '" + h.kind + "'");
    } catch (const VolumeError&) {
        throw;
    } catch (const std::exception& e) {
        throw VolumeError(path.string() + ": " + e.what());
    }
}

HUVolume load_hu_volume(const std::filesystem::path& path) {
    auto v = load_volume(path);
    if (auto* hu = std::get_if<HUVolume>(&v)) return std::move(*hu);
    throw VolumeError(path.string() + " holds labels, expected HU");
}

LabelVolume load_label_volume(const std::filesystem::path& path) {
    auto v = load_volume(path);
    if (auto* l = std::get_if<LabelVolume>(&v)) return std::move(*l);
    throw VolumeError(path.string() + " holds HU, expected labels");
}

void save_volume(const HUVolume& volume, const std::filesystem::path& path) { save_grid(volume, path); }
void save_volume(const LabelVolume& volume, const std::filesystem::path& path) { save_grid(volume, path); }

void save_probabilities(const ProbabilityVolume& probs, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    nlohmann::ordered_json h;
    h["classes"] = probs.classes;
    h["dims"] = {probs.dims.nz, probs.dims.ny, probs.dims.nx};
    h["spacing_mm"] = {probs.spacing.z_mm, probs.spacing.y_mm, probs.spacing.x_mm};
    detail::write_frame_header(out, kProbMagic, h);
    detail::write_payload(out, std::span<const float>(probs.data));
    if (!out) throw VolumeError("write failed: " + path.string());
}

ProbabilityVolume load_probabilities(const std::filesystem::path& path) {
    try {
        auto in = detail::open_for_read(path);
        const auto h = detail::read_frame_header(in, kProbMagic);
        const auto d = h.at("dims").get<std::vector<std::size_t>>();
        const auto s = h.at("spacing_mm").get<std::vector<double>>();
        if (d.size() != 3 || s.size() != 3) throw VolumeError("dims and spacing_mm need 3 entries");
        ProbabilityVolume p({d[0], d[1], d[2]}, {s[0], s[1], s[2]}, h.at("classes").get<int>());
        p.data = detail::read_payload<float>(in, p.data.size(), true);
        return p;
    } catch (const VolumeError&) {
        throw;
    } catch (const std::exception& e) {
        throw VolumeError(path.string() + ": " + e.what());
    }
}

}  // namespace bodycomp
