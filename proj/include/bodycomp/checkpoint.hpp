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

#include "bodycomp/models.hpp"

namespace bodycomp {

/// Weights plus whatever the trainer chose to record (fold, epoch,
/// monitored dice, config snapshot and hash).
struct Checkpoint {
    Model<float> model;
    nlohmann::json metadata = nlohmann::json::object();
};

/// "VBCCKPT1", u32 manifest length, JSON manifest {arch, parameters:[{name, shape}], metadata},
/// then each parameter as little-endian f32 in manifest order. Output is a
/// pure function of the inputs so equal runs give equal bytes.
void save_checkpoint(const Model<float>& model, const nlohmann::json& metadata, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// FNV-1a of the file bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

/// FNV-1a of a JSON value's compact dump.
std::string json_hash(const nlohmann::json& value);

}  // namespace bodycomp
