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

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bodycomp/quantify.hpp"

namespace bodycomp {

struct BarColors {
    std::string sat = "#d62728";     // red
    std::string vat = "#2ca02c";     // green
    std::string muscle = "#f5d800";  // yellow
};

/// Stable key order: metadata, slices, total.
nlohmann::ordered_json report_to_json(const CompositionReport& report);
CompositionReport report_from_json(const nlohmann::json& j);

/// Header `slice,sat_ml,vat_ml,muscle_ml`, one row per slice, then a `total` row; 4 decimals.
void emit_csv(const CompositionReport& report, const std::filesystem::path& path);
void emit_json(const CompositionReport& report, const std::filesystem::path& path);
/// One <g> per slice holding three <rect> (SAT, VAT, muscle, bottom to top)
/// on a shared linear scale; the legend uses circles so rect count stays 3 per slice.
void emit_svg_stacked_bars(const CompositionReport& report, const std::filesystem::path& path,
                           const BarColors& colors = {});

/// Writes report.csv, report.json and report.svg into `dir`.
void emit_all(const CompositionReport& report, const std::filesystem::path& dir);

std::string format_ml(double v);

}  // namespace bodycomp
