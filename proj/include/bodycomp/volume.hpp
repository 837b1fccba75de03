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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace bodycomp {

/// Raised for any malformed or inconsistent volume data.
class VolumeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Dims {
    std::size_t nz = 0;
    std::size_t ny = 0;
    std::size_t nx = 0;

    std::size_t count() const noexcept { return nz * ny * nx; }
    std::size_t plane() const noexcept { return ny * nx; }
    bool empty() const noexcept { return count() == 0; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& dims);

/// Millimetres per voxel edge. Defaults follow 5 mm axial slices.
struct Spacing {
    double z_mm = 5.0;
    double y_mm = 1.0;
    double x_mm = 1.0;

    void validate() const;
    friend bool operator==(const Spacing&, const Spacing&) = default;
};

/// Volume of one voxel in millilitres.
double voxel_volume_ml(const Spacing& spacing);

enum class BodyRegion : std::uint8_t {
    Background = 0,
    Muscle = 1,
    Bones = 2,
    SubcutaneousTissue = 3,
    AbdominalCavity = 4,
    ThoracicCavity = 5,
    Ignore = 255,
};

inline constexpr int kNumClasses = 6;
inline constexpr std::uint8_t kIgnoreLabel = 255;

constexpr std::uint8_t label_of(BodyRegion r) noexcept { return static_cast<std::uint8_t>(r); }
constexpr bool is_valid_label(std::uint8_t v) noexcept { return v < kNumClasses || v == kIgnoreLabel; }
std::string_view region_name(BodyRegion r);

template <typename T>
struct GridTraits;

template <>
struct GridTraits<float> {
    static constexpr std::string_view kind = "hu";
    static void validate(std::span<const float> data);
};

template <>
struct GridTraits<std::uint8_t> {
    static constexpr std::string_view kind = "label";
    static void validate(std::span<const std::uint8_t> data);
};

/// Dense voxel grid, row-major z -> y -> x. Immutable once constructed.
template <typename T>
class Grid {
public:
    Grid() = default;

    Grid(Dims dims, Spacing spacing, std::vector<T> data)
        : dims_(dims), spacing_(spacing), data_(std::move(data)) {
        spacing_.validate();
        if (data_.size() != dims_.count()) {
            throw VolumeError("grid payload has " + std::to_string(data_.size()) +
                              " values, dims " + to_string(dims_) + " need " +
                              std::to_string(dims_.count()));
        }
        GridTraits<T>::validate(data_);
    }

    Grid(Dims dims, Spacing spacing, T fill)
        : Grid(dims, spacing, std::vector<T>(dims.count(), fill)) {}

    const Dims& dims() const noexcept { return dims_; }
    const Spacing& spacing() const noexcept { return spacing_; }
    std::span<const T> data() const noexcept { return data_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::size_t index(std::size_t z, std::size_t y, std::size_t x) const noexcept {
        return (z * dims_.ny + y) * dims_.nx + x;
    }
    T at(std::size_t z, std::size_t y, std::size_t x) const noexcept { return data_[index(z, y, x)]; }
    std::span<const T> slice(std::size_t z) const noexcept {
        return std::span<const T>(data_).subspan(z * dims_.plane(), dims_.plane());
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Dims dims_{};
    Spacing spacing_{};
    std::vector<T> data_;
};

using HUVolume = Grid<float>;
using LabelVolume = Grid<std::uint8_t>;
using AnyVolume = std::variant<HUVolume, LabelVolume>;

/// Throws unless the two grids share dims.
void require_paired(const HUVolume& hu, const LabelVolume& labels);

/// Per-class probabilities, class axis leading: data[(c * nz + z) * ny * nx + ...].
struct ProbabilityVolume {
    Dims dims{};
    Spacing spacing{};
    int classes = kNumClasses;
    std::vector<float> data;

    ProbabilityVolume() = default;
    ProbabilityVolume(Dims d, Spacing s, int c = kNumClasses)
        : dims(d), spacing(s), classes(c), data(static_cast<std::size_t>(c) * d.count(), 0.0f) {}

    float& at(int c, std::size_t voxel) { return data[static_cast<std::size_t>(c) * dims.count() + voxel]; }
    float at(int c, std::size_t voxel) const { return data[static_cast<std::size_t>(c) * dims.count() + voxel]; }

    /// Largest deviation of any voxel's class sum from 1.
    double max_normalization_error() const;
};

AnyVolume load_volume(const std::filesystem::path& path);
HUVolume load_hu_volume(const std::filesystem::path& path);
LabelVolume load_label_volume(const std::filesystem::path& path);

void save_volume(const HUVolume& volume, const std::filesystem::path& path);
void save_volume(const LabelVolume& volume, const std::filesystem::path& path);

/// Raw probability dump: "VBCPROB1", u32 header length, JSON header, f32 payload (class leading).
void save_probabilities(const ProbabilityVolume& probs, const std::filesystem::path& path);
ProbabilityVolume load_probabilities(const std::filesystem::path& path);

}  // namespace bodycomp
