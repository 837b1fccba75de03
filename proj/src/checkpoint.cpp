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

#include "bodycomp/checkpoint.hpp"

#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

#include "binary_io.hpp"

namespace bodycomp {

namespace {

constexpr std::string_view kMagic = "VBCCKPT1";

nlohmann::json shape_json(const nn::Shape5& s) { return nlohmann::json::array({s.n, s.c, s.d, s.h, s.w}); }

}  // namespace

void save_checkpoint(const Model<float>& model, const nlohmann::json& metadata, const std::filesystem::path& path) {
    nlohmann::ordered_json manifest;
    manifest["arch"] = nlohmann::ordered_json::parse(nlohmann::json(model.spec()).dump());
    auto& params = manifest["parameters"] = nlohmann::ordered_json::array();
    for (const auto& p : model.parameters()) {
        params.push_back({{"name", p.name}, {"shape", shape_json(p.value.shape())}});
    }
    manifest["metadata"] = nlohmann::ordered_json::parse(metadata.dump());

    auto out = detail::open_for_write(path);
    detail::write_frame_header(out, kMagic, manifest);
    for (const auto& p : model.parameters()) detail::write_payload(out, p.value.data());
    out.flush();
    if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    const nlohmann::json manifest = detail::read_frame_header(in, kMagic);
    Checkpoint ck{Model<float>(manifest.at("arch").get<ArchitectureSpec>()), manifest.value("metadata", nlohmann::json::object())};
    const auto& entries = manifest.at("parameters");
    auto& params = ck.model.parameters();
    if (entries.size() != params.size()) {
        throw std::runtime_error("checkpoint lists " + std::to_string(entries.size()) + " parameters, architecture has " +
                                 std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        const auto& e = entries[i];
        const auto s = e.at("shape").get<std::vector<std::size_t>>();
        if (e.at("name").get<std::string>() != p.name || s.size() != 5 ||
            nn::Shape5{s[0], s[1], s[2], s[3], s[4]} != p.value.shape()) {
            throw std::runtime_error("checkpoint parameter " + std::to_string(i) + " does not match architecture (" +
                                     p.name + ")");
        }
        p.value = nn::Tensor<float>(p.value.shape(),
                                    detail::read_payload<float>(in, p.value.size(), i + 1 == params.size()));
        p.value.check_finite(p.name.c_str());
    }
    return ck;
}

std::string file_hash(const std::filesystem::path& path) {
    auto in = detail::open_for_read(path);
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return detail::hex64(detail::fnv1a(bytes));
}

std::string json_hash(const nlohmann::json& value) {
    const std::string text = value.dump();
    return detail::hex64(
        detail::fnv1a(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()), text.size())));
}

}  // namespace bodycomp
