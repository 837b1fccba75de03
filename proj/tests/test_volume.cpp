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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "bodycomp/volume.hpp"
#include "test_helpers.hpp"

using namespace bodycomp;

namespace {

HUVolume random_hu(Dims d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1024.0f, 3000.0f);
    std::vector<float> v(d.count());
    for (auto& x : v) x = u(rng);
    return HUVolume(d, Spacing{}, std::move(v));
}

std::vector<char> bytes_of(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_raw(const std::filesystem::path& p, const std::string& header, const std::vector<char>& payload) {
    std::ofstream out(p, std::ios::binary);
    out.write("VBCVOL01", 8);
    const auto n = static_cast<std::uint32_t>(header.size());
    const char len[4] = {static_cast<char>(n & 0xFF), static_cast<char>((n >> 8) & 0xFF),
                         static_cast<char>((n >> 16) & 0xFF), static_cast<char>((n >> 24) & 0xFF)};
    out.write(len, 4);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

}  // namespace

TEST_CASE("hu volume round trip is the identity") {
    TempDir dir("vol");
    const HUVolume v = random_hu({4, 8, 8}, 1);
    save_volume(v, dir / "a.vbc");
    const AnyVolume any = load_volume(dir / "a.vbc");
    REQUIRE(std::holds_alternative<HUVolume>(any));
    CHECK(std::get<HUVolume>(any) == v);
}

TEST_CASE("label volume round trip and byte-identical resave") {
    TempDir dir("vol");
    std::vector<std::uint8_t> data(2 * 3 * 4);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<std::uint8_t>(i % 6);
    data[5] = kIgnoreLabel;
    const LabelVolume l({2, 3, 4}, Spacing{5, 2, 2}, data);
    save_volume(l, dir / "l.vbc");
    const LabelVolume back = load_label_volume(dir / "l.vbc");
    CHECK(back == l);
    save_volume(back, dir / "l2.vbc");
    CHECK(bytes_of(dir / "l.vbc") == bytes_of(dir / "l2.vbc"));
}

TEST_CASE("header records spacing") {
    TempDir dir("vol");
    save_volume(HUVolume({1, 1, 1}, Spacing{5, 1, 1}, 0.0f), dir / "s.vbc");
    const auto bytes = bytes_of(dir / "s.vbc");
    const std::string text(bytes.begin(), bytes.end());
    CHECK(text.find("\"spacing_mm\":[5.0,1.0,1.0]") != std::string::npos);
    CHECK(text.find("\"kind\":\"hu\"") != std::string::npos);
}

TEST_CASE("load errors") {
    TempDir dir("vol");
    CHECK_THROWS_AS(load_volume(dir / "missing.vbc"), VolumeError);

    write_raw(dir / "short.vbc", R"({"kind":"hu","dims":[2,2,2],"spacing_mm":[5,1,1]})", std::vector<char>(7 * 4, 0));
    CHECK_THROWS_WITH_AS(load_volume(dir / "short.vbc"), doctest::Contains("payload"), VolumeError);

    write_raw(dir / "long.vbc", R"({"kind":"hu","dims":[2,2,2],"spacing_mm":[5,1,1]})", std::vector<char>(9 * 4, 0));
    CHECK_THROWS_AS(load_volume(dir / "long.vbc"), VolumeError);

    std::vector<char> labels(8, 0);
    labels[3] = 7;
    write_raw(dir / "dom.vbc", R"({"kind":"label","dims":[2,2,2],"spacing_mm":[5,1,1]})", labels);
    CHECK_THROWS_WITH_AS(load_volume(dir / "dom.vbc"), doctest::Contains("7"), VolumeError);

    write_raw(dir / "bad.vbc", R"({"kind":"hu","dims":[2,2)", {});
    CHECK_THROWS_AS(load_volume(dir / "bad.vbc"), VolumeError);

    std::ofstream(dir / "magic.vbc") << "NOTAVBC!xxxx";
    CHECK_THROWS_AS(load_volume(dir / "magic.vbc"), VolumeError);
}

TEST_CASE("zero-voxel volumes are rejected before write") {
    TempDir dir("vol");
    const HUVolume empty({0, 4, 4}, Spacing{}, std::vector<float>{});
    CHECK_THROWS_AS(save_volume(empty, dir / "e.vbc"), VolumeError);
    CHECK_FALSE(std::filesystem::exists(dir / "e.vbc"));
}

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(HUVolume({2, 2, 2}, Spacing{}, std::vector<float>(7)), VolumeError);
    CHECK_THROWS_AS(HUVolume({1, 1, 1}, Spacing{}, std::vector<float>{std::nanf("")}), VolumeError);
    CHECK_THROWS_AS(LabelVolume({1, 1, 1}, Spacing{}, std::vector<std::uint8_t>{6}), VolumeError);
    CHECK_THROWS(HUVolume({1, 1, 1}, Spacing{0, 1, 1}, 0.0f));
    CHECK_THROWS(HUVolume({1, 1, 1}, Spacing{5, -1, 1}, 0.0f));
    const HUVolume h({2, 2, 2}, Spacing{}, 0.0f);
    CHECK_THROWS_AS(require_paired(h, LabelVolume({2, 2, 3}, Spacing{}, std::uint8_t{0})), VolumeError);
    CHECK_NOTHROW(require_paired(h, LabelVolume({2, 2, 2}, Spacing{}, std::uint8_t{0})));
}

TEST_CASE("voxel volume in millilitres") {
    CHECK(voxel_volume_ml({5, 1, 1}) == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(voxel_volume_ml({5, 2, 2}) == doctest::Approx(0.020).epsilon(1e-15));
    CHECK(voxel_volume_ml({1, 1, 1}) == doctest::Approx(0.001).epsilon(1e-15));
    // multiplicative in each component
    const Spacing base{3, 0.7, 1.3};
    for (double f : {0.5, 2.0, 3.0}) {
        CHECK(voxel_volume_ml({base.z_mm * f, base.y_mm, base.x_mm}) == doctest::Approx(f * voxel_volume_ml(base)));
        CHECK(voxel_volume_ml({base.z_mm, base.y_mm * f, base.x_mm}) == doctest::Approx(f * voxel_volume_ml(base)));
        CHECK(voxel_volume_ml({base.z_mm, base.y_mm, base.x_mm * f}) == doctest::Approx(f * voxel_volume_ml(base)));
    }
}

TEST_CASE("class layout") {
    CHECK(kNumClasses == 6);
    CHECK(label_of(BodyRegion::Background) == 0);
    CHECK(label_of(BodyRegion::ThoracicCavity) == 5);
    CHECK(kIgnoreLabel == 255);
    for (int v = 0; v < 256; ++v) CHECK(is_valid_label(static_cast<std::uint8_t>(v)) == (v < 6 || v == 255));
}

TEST_CASE("probability dump round trip") {
    TempDir dir("prob");
    ProbabilityVolume p({2, 2, 2}, Spacing{5, 2, 2});
    for (std::size_t v = 0; v < 8; ++v)
        for (int c = 0; c < 6; ++c) p.at(c, v) = 1.0f / 6.0f;
    save_probabilities(p, dir / "p.bin");
    const ProbabilityVolume q = load_probabilities(dir / "p.bin");
    CHECK(q.dims == p.dims);
    CHECK(q.data == p.data);
    CHECK(q.max_normalization_error() < 1e-6);
}
