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
#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodycomp/nn/tape.hpp"
#include "bodycomp/nn/tensor.hpp"

namespace bodycomp {

enum class Variant { UNet3D, MultiResUNet3D };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

struct ArchitectureSpec {
    Variant variant = Variant::MultiResUNet3D;
    int nf = 32;
    int levels = 5;
    int in_channels = 3;
    int out_classes = 6;
    double alpha = 1.67;  // multi-res width multiplier

    void validate() const;
    /// Nominal feature count at a level: nf * 2^level.
    int width(int level) const { return nf << level; }
    int bottleneck_channels() const { return width(levels - 1); }
    /// Input depth/height/width must be multiples of this.
    std::size_t divisor() const { return std::size_t{1} << (levels - 1); }

    friend bool operator==(const ArchitectureSpec&, const ArchitectureSpec&) = default;
};

void to_json(nlohmann::json& j, const ArchitectureSpec& s);
void from_json(const nlohmann::json& j, ArchitectureSpec& s);

/// Channel split of a multi-res block of nominal width `width`: round(W/6), round(W/3), round(W/2) with W = alpha * width.
struct MultiResSplit {
    int a = 0, b = 0, c = 0;
    int total() const { return a + b + c; }
};
MultiResSplit multires_split(int width, double alpha);

/// A segmentation network: an immutable topology plus its parameter store.
template <typename T>
class Model {
public:
    using Tape = nn::Tape<T>;

    explicit Model(const ArchitectureSpec& spec, std::uint64_t seed = 0);
    Model(const Model& other);
    Model& operator=(const Model& other);
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    const ArchitectureSpec& spec() const noexcept { return spec_; }

    /// Builds the graph on `tape`, returning logits with out_classes channels.
    typename Tape::Id forward(Tape& tape, typename Tape::Id input);

    /// Inference-only convenience: logits for `input` without recording.
    nn::Tensor<T> logits(const nn::Tensor<T>& input);

    /// Throws ShapeError unless `shape` is a valid network input.
    void validate_input(const nn::Shape5& shape) const;

    std::deque<nn::Parameter<T>>& parameters() noexcept { return params_; }
    const std::deque<nn::Parameter<T>>& parameters() const noexcept { return params_; }
    nn::Parameter<T>& parameter(const std::string& name);
    const nn::Parameter<T>& parameter(const std::string& name) const;

    std::size_t param_count() const;
    /// Parameter totals keyed by top-level block name ("enc0", "dec2", "skip1", "head", ...).
    std::map<std::string, std::size_t> param_breakdown() const;

    /// Channel count produced by the encoder block at `level` (skip source).
    int encoder_channels(int level) const;

    void zero_grad();
    /// Zeroes the final 1x1x1 classifier so every voxel gets uniform class probabilities.
    void zero_head();

    template <typename U>
    Model<U> cast() const {
        Model<U> out(spec_, 0);
        for (std::size_t i = 0; i < params_.size(); ++i) out.parameters()[i].value = params_[i].value.template cast<U>();
        return out;
    }

private:
    struct ConvUnit {
        nn::Parameter<T>* w = nullptr;
        nn::Parameter<T>* b = nullptr;
        nn::Parameter<T>* gamma = nullptr;
        nn::Parameter<T>* beta = nullptr;
        bool relu = true;
    };
    struct NormUnit {
        nn::Parameter<T>* gamma = nullptr;
        nn::Parameter<T>* beta = nullptr;
    };
    struct MultiResBlock {
        ConvUnit shortcut, c1, c2, c3;
        NormUnit post_concat, post_add;
        int out_channels = 0;
    };
    struct ResPathStage {
        ConvUnit shortcut, conv;
        NormUnit post_add;
    };
    struct Level {
        // unet: double conv; multires: block
        ConvUnit conv_a, conv_b;
        MultiResBlock block;
        std::vector<ResPathStage> res_path;
        ConvUnit up;  // decoder only
        int out_channels = 0;
    };

    nn::Parameter<T>& add_param(const std::string& name, nn::Shape5 shape);
    ConvUnit make_conv(const std::string& name, int in, int out, int k, bool relu, bool norm = true);
    NormUnit make_norm(const std::string& name, int channels);
    MultiResBlock make_block(const std::string& name, int in, int width);
    void init_weights(std::uint64_t seed);

    typename Tape::Id run(Tape& tape, typename Tape::Id x, const ConvUnit& u);
    typename Tape::Id run(Tape& tape, typename Tape::Id x, const NormUnit& u);
    typename Tape::Id run(Tape& tape, typename Tape::Id x, const MultiResBlock& b);
    typename Tape::Id run(Tape& tape, typename Tape::Id x, const std::vector<ResPathStage>& path);

    ArchitectureSpec spec_;
    std::deque<nn::Parameter<T>> params_;
    std::vector<Level> encoder_;
    std::vector<Level> decoder_;  // index = level, last entry unused
    ConvUnit head_;
};

extern template class Model<float>;
extern template class Model<double>;

template <typename T>
Model<T> build_unet3d(ArchitectureSpec spec, std::uint64_t seed = 0) {
    spec.variant = Variant::UNet3D;
    return Model<T>(spec, seed);
}

template <typename T>
Model<T> build_multires_unet3d(ArchitectureSpec spec, std::uint64_t seed = 0) {
    spec.variant = Variant::MultiResUNet3D;
    return Model<T>(spec, seed);
}

template <typename T>
std::size_t param_count(const Model<T>& model) {
    return model.param_count();
}

}  // namespace bodycomp
