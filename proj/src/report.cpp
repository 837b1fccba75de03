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

#include "bodycomp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bodycomp {

std::string format_ml(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

namespace {

std::ofstream open_text(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

nlohmann::ordered_json volumes(double sat, double vat, double muscle, const CompartmentCounts& c) {
    nlohmann::ordered_json j;
    j["sat_ml"] = sat;
    j["vat_ml"] = vat;
    j["muscle_ml"] = muscle;
    j["sat_voxels"] = c.sat;
    j["vat_voxels"] = c.vat;
    j["muscle_voxels"] = c.muscle;
    return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const CompositionReport& r) {
    nlohmann::ordered_json j;
    auto& meta = j["metadata"];
    meta["voxel_volume_ml"] = r.voxel_volume_ml;
    meta["spacing_mm"] = {r.spacing.z_mm, r.spacing.y_mm, r.spacing.x_mm};
    meta["slice_count"] = r.rows.size();
    for (const auto& [k, v] : r.metadata.items()) {
        meta[k] = nlohmann::ordered_json::parse(v.dump());
    }
    auto& slices = j["slices"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json s;
        s["slice"] = row.slice;
        const auto vols = volumes(row.sat_ml, row.vat_ml, row.muscle_ml, row.voxels);
        for (const auto& [k, v] : vols.items()) s[k] = v;
        slices.push_back(std::move(s));
    }
    j["total"] = volumes(r.total_sat_ml, r.total_vat_ml, r.total_muscle_ml, r.total_voxels);
    return j;
}

CompositionReport report_from_json(const nlohmann::json& j) {
    CompositionReport r;
    const auto& meta = j.at("metadata");
    const auto sp = meta.at("spacing_mm").get<std::vector<double>>();
    if (sp.size() != 3) throw std::invalid_argument("spacing_mm must have three entries");
    r.spacing = {sp[0], sp[1], sp[2]};
    r.voxel_volume_ml = meta.at("voxel_volume_ml").get<double>();
    for (const auto& [k, v] : meta.items()) {
        if (k != "voxel_volume_ml" && k != "spacing_mm" && k != "slice_count") r.metadata[k] = v;
    }
    auto counts = [](const nlohmann::json& e) {
        return CompartmentCounts{e.at("sat_voxels").get<std::uint64_t>(), e.at("vat_voxels").get<std::uint64_t>(),
                                 e.at("muscle_voxels").get<std::uint64_t>()};
    };
    for (const auto& s : j.at("slices")) {
        r.rows.push_back({s.at("slice").get<std::size_t>(), counts(s), s.at("sat_ml").get<double>(),
                          s.at("vat_ml").get<double>(), s.at("muscle_ml").get<double>()});
    }
    const auto& t = j.at("total");
    r.total_voxels = counts(t);
    r.total_sat_ml = t.at("sat_ml").get<double>();
    r.total_vat_ml = t.at("vat_ml").get<double>();
    r.total_muscle_ml = t.at("muscle_ml").get<double>();
    return r;
}

void emit_csv(const CompositionReport& r, const std::filesystem::path& path) {
    auto out = open_text(path);
    out << "slice,sat_ml,vat_ml,muscle_ml\n";
    for (const auto& row : r.rows) {
        out << row.slice << ',' << format_ml(row.sat_ml) << ',' << format_ml(row.vat_ml) << ','
            << format_ml(row.muscle_ml) << '\n';
    }
    out << "total," << format_ml(r.total_sat_ml) << ',' << format_ml(r.total_vat_ml) << ','
        << format_ml(r.total_muscle_ml) << '\n';
    finish(out, path);
}

void emit_json(const CompositionReport& r, const std::filesystem::path& path) {
    auto out = open_text(path);
    out << report_to_json(r).dump(2) << '\n';
    finish(out, path);
}

void emit_svg_stacked_bars(const CompositionReport& r, const std::filesystem::path& path, const BarColors& colors) {
    if (r.rows.empty()) throw std::invalid_argument("stacked bar plot needs at least one slice");
    constexpr double kBar = 12.0, kGap = 4.0, kLeft = 60.0, kTop = 40.0, kPlotH = 300.0, kBottom = 50.0;
    const double width = kLeft + static_cast<double>(r.rows.size()) * (kBar + kGap) + 140.0;
    const double height = kTop + kPlotH + kBottom;
    double peak = 0.0;
    for (const auto& row : r.rows) peak = std::max(peak, row.sat_ml + row.vat_ml + row.muscle_ml);
    const double scale = peak > 0.0 ? kPlotH / peak : 0.0;  // px per ml
    const double base = kTop + kPlotH;

    char buf[256];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.3f", v);
        return std::string(buf);
    };

    auto out = open_text(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
        << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
    out << "  <title>Tissue volume per axial slice</title>\n";
    out << "  <line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(base) << "\" x2=\"" << num(width - 140.0) << "\" y2=\""
        << num(base) << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << num(kLeft - 4) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft - 4) << "\" y2=\""
        << num(base) << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << num(kLeft - 8) << "\" y=\"" << num(kTop) << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_ml(peak) << " ml</text>\n";
    out << "  <text x=\"" << num(kLeft - 8) << "\" y=\"" << num(base) << "\" text-anchor=\"end\" font-size=\"10\">0</text>\n";
    out << "  <text x=\"" << num(kLeft) << "\" y=\"" << num(base + 30) << "\" font-size=\"12\">axial slice</text>\n";

    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const auto& row = r.rows[i];
        const double x = kLeft + static_cast<double>(i) * (kBar + kGap);
        out << "  <g class=\"slice\" data-slice=\"" << row.slice << "\">\n";
        // Edges are rounded to the printed precision so adjacent bars share them exactly.
        auto snap = [](double v) { return std::round(v * 1000.0) / 1000.0; };
        double y = snap(base);
        double top = base;
        const std::pair<double, const std::string*> parts[] = {
            {row.sat_ml, &colors.sat}, {row.vat_ml, &colors.vat}, {row.muscle_ml, &colors.muscle}};
        const char* names[] = {"sat", "vat", "muscle"};
        for (std::size_t k = 0; k < 3; ++k) {
            top -= parts[k].first * scale;
            const double h = y - snap(top);
            y = snap(top);
            out << "    <rect class=\"" << names[k] << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
                << num(kBar) << "\" height=\"" << num(h) << "\" fill=\"" << *parts[k].second << "\"/>\n";
        }
        out << "  </g>\n";
    }

    const double lx = width - 120.0;
    const std::pair<const char*, const std::string*> legend[] = {
        {"SAT", &colors.sat}, {"VAT", &colors.vat}, {"Muscle", &colors.muscle}};
    out << "  <g class=\"legend\">\n";
    for (std::size_t k = 0; k < 3; ++k) {
        const double ly = kTop + 20.0 * static_cast<double>(k);
        out << "    <circle cx=\"" << num(lx) << "\" cy=\"" << num(ly) << "\" r=\"6\" fill=\"" << *legend[k].second
            << "\"/>\n";
        out << "    <text x=\"" << num(lx + 12) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">" << legend[k].first
            << "</text>\n";
    }
    out << "  </g>\n</svg>\n";
    finish(out, path);
}

void emit_all(const CompositionReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    emit_csv(report, dir / "report.csv");
    emit_json(report, dir / "report.json");
    emit_svg_stacked_bars(report, dir / "report.svg");
}

}  // namespace bodycomp
