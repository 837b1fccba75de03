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

#include "bodycomp/models.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bodycomp {

std::string to_string(Variant v) { return v == Variant::UNet3D ? "unet3d" : "multires_unet3d"; }

Variant parse_variant(const std::string& s) {
    if (s == "unet3d" || s == "unet") return Variant::UNet3D;
    if (s == "multires_unet3d" || s == "multires") return Variant::MultiResUNet3D;
    throw std::invalid_argument("unknown architecture '" + s + "' (expected unet3d or multires)");
}

void ArchitectureSpec::validate() const {
    if (nf < 1) throw std::invalid_argument("nf must be >= 1");
    if (levels < 2 || levels > 8) throw std::invalid_argument("levels must be in [2, 8]");
    if (in_channels < 1 || out_classes < 1) throw std::invalid_argument("channel counts must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
}

void to_json(nlohmann::json& j, const ArchitectureSpec& s) {
    j = nlohmann::json{{"variant", to_string(s.variant)}, {"nf", s.nf},
                       {"levels", s.levels},              {"in_channels", s.in_channels},
                       {"out_classes", s.out_classes},    {"alpha", s.alpha}};
}

void from_json(const nlohmann::json& j, ArchitectureSpec& s) {
    s = ArchitectureSpec{};
    if (j.contains("variant")) s.variant = parse_variant(j.at("variant").get<std::string>());
    if (j.contains("nf")) s.nf = j.at("nf").get<int>();
    if (j.contains("levels")) s.levels = j.at("levels").get<int>();
    if (j.contains("in_channels")) s.in_channels = j.at("in_channels").get<int>();
    if (j.contains("out_classes")) s.out_classes = j.at("out_classes").get<int>();
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    s.validate();
}

MultiResSplit multires_split(int width, double alpha) {
    const double w = alpha * width;
    auto part = [](double v) { return std::max(1, static_cast<int>(std::lround(v))); };
    return {part(w / 6.0), part(w / 3.0), part(w / 2.0)};
}

template <typename T>
Model<T>::Model(const ArchitectureSpec& spec, std::uint64_t seed) : spec_(spec) {
    spec_.validate();
    const int L = spec_.levels;
    const bool multires = spec_.variant == Variant::MultiResUNet3D;
    encoder_.resize(static_cast<std::size_t>(L));
    decoder_.resize(static_cast<std::size_t>(L));

    int in = spec_.in_channels;
    for (int l = 0; l < L; ++l) {
        const std::string name = "enc" + std::to_string(l);
        Level& lv = encoder_[static_cast<std::size_t>(l)];
        const int width = spec_.width(l);
        if (multires) {
            lv.block = make_block(name, in, width);
            lv.out_channels = lv.block.out_channels;
        } else {
            lv.conv_a = make_conv(name + ".conv_a", in, width, 3, true);
            lv.conv_b = make_conv(name + ".conv_b", width, width, 3, true);
            lv.out_channels = width;
        }
        if (multires && l < L - 1) {
            const int ch = lv.out_channels;
            for (int s = 0; s < L - 1 - l; ++s) {
                const std::string pname = "skip" + std::to_string(l) + ".stage" + std::to_string(s);
                ResPathStage st;
                st.shortcut = make_conv(pname + ".shortcut", ch, ch, 1, false);
                st.conv = make_conv(pname + ".conv", ch, ch, 3, true);
                st.post_add = make_norm(pname + ".norm", ch);
                lv.res_path.push_back(st);
            }
        }
        in = lv.out_channels;
    }

    for (int l = L - 2; l >= 0; --l) {
        const std::string name = "dec" + std::to_string(l);
        Level& lv = decoder_[static_cast<std::size_t>(l)];
        const int width = spec_.width(l);
        const int skip = encoder_[static_cast<std::size_t>(l)].out_channels;
        lv.up = make_conv(name + ".up", in, width, 1, true);
        if (multires) {
            lv.block = make_block(name, width + skip, width);
            lv.out_channels = lv.block.out_channels;
        } else {
            lv.conv_a = make_conv(name + ".conv_a", width + skip, width, 3, true);
            lv.conv_b = make_conv(name + ".conv_b", width, width, 3, true);
            lv.out_channels = width;
        }
        in = lv.out_channels;
    }
    head_ = make_conv("head", in, spec_.out_classes, 1, false, false);
    init_weights(seed);
}

template <typename T>
Model<T>::Model(const Model& other) : Model(other.spec_, 0) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        params_[i].value = other.params_[i].value;
        params_[i].grad = other.params_[i].grad;
    }
}

template <typename T>
Model<T>& Model<T>::operator=(const Model& other) {
    if (this != &other) *this = Model(other);
    return *this;
}

template <typename T>
nn::Parameter<T>& Model<T>::add_param(const std::string& name, nn::Shape5 shape) {
    params_.emplace_back(name, nn::Tensor<T>(shape));
    return params_.back();
}

template <typename T>
typename Model<T>::ConvUnit Model<T>::make_conv(const std::string& name, int in, int out, int k, bool relu, bool norm) {
    const auto ci = static_cast<std::size_t>(in), co = static_cast<std::size_t>(out), kk = static_cast<std::size_t>(k);
    ConvUnit u;
    u.w = &add_param(name + ".weight", {co, ci, kk, kk, kk});
    u.b = &add_param(name + ".bias", {1, co, 1, 1, 1});
    if (norm) {
        u.gamma = &add_param(name + ".norm.gamma", {1, co, 1, 1, 1});
        u.beta = &add_param(name + ".norm.beta", {1, co, 1, 1, 1});
    }
    u.relu = relu;
    return u;
}

template <typename T>
typename Model<T>::NormUnit Model<T>::make_norm(const std::string& name, int channels) {
    const auto c = static_cast<std::size_t>(channels);
    return {&add_param(name + ".gamma", {1, c, 1, 1, 1}), &add_param(name + ".beta", {1, c, 1, 1, 1})};
}

template <typename T>
typename Model<T>::MultiResBlock Model<T>::make_block(const std::string& name, int in, int width) {
    const MultiResSplit sp = multires_split(width, spec_.alpha);
    MultiResBlock b;
    b.out_channels = sp.total();
    b.shortcut = make_conv(name + ".shortcut", in, sp.total(), 1, false);
    b.c1 = make_conv(name + ".conv1", in, sp.a, 3, true);
    b.c2 = make_conv(name + ".conv2", sp.a, sp.b, 3, true);
    b.c3 = make_conv(name + ".conv3", sp.b, sp.c, 3, true);
    b.post_concat = make_norm(name + ".concat_norm", sp.total());
    b.post_add = make_norm(name + ".out_norm", sp.total());
    return b;
}

// He-uniform on conv weights, zero biases, unit gains.
template <typename T>
void Model<T>::init_weights(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& p : params_) {
        const std::string& n = p.name;
        if (n.ends_with(".weight")) {
            const auto& s = p.value.shape();
            const double fan_in = static_cast<double>(s.c * s.d * s.h * s.w);
            std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
            for (auto& v : p.value.data()) v = static_cast<T>(dist(rng));
        } else if (n.ends_with(".gamma")) {
            p.value.fill(T(1));
        } else {
            p.value.fill(T(0));
        }
        p.grad = nn::Tensor<T>(p.value.shape());
    }
}

template <typename T>
void Model<T>::validate_input(const nn::Shape5& s) const {
    if (s.c != static_cast<std::size_t>(spec_.in_channels)) {
        throw nn::ShapeError("model expects " + std::to_string(spec_.in_channels) + " input channels, got " +
                             nn::to_string(s));
    }
    const std::size_t div = spec_.divisor();
    if (s.n == 0 || s.d == 0 || s.h == 0 || s.w == 0 || s.d % div || s.h % div || s.w % div) {
        throw nn::ShapeError("input spatial dims " + nn::to_string(s) + " must be positive multiples of " +
                             std::to_string(div));
    }
}

template <typename T>
typename Model<T>::Tape::Id Model<T>::run(Tape& tape, typename Tape::Id x, const ConvUnit& u) {
    auto y = tape.conv3d(x, *u.w, *u.b);
    if (u.gamma) y = tape.instance_norm(y, *u.gamma, *u.beta);
    if (u.relu) y = tape.relu(y);
    return y;
}

template <typename T>
typename Model<T>::Tape::Id Model<T>::run(Tape& tape, typename Tape::Id x, const NormUnit& u) {
    return tape.instance_norm(x, *u.gamma, *u.beta);
}

template <typename T>
typename Model<T>::Tape::Id Model<T>::run(Tape& tape, typename Tape::Id x, const MultiResBlock& b) {
    const auto shortcut = run(tape, x, b.shortcut);
    const auto a = run(tape, x, b.c1);
    const auto bb = run(tape, a, b.c2);
    const auto c = run(tape, bb, b.c3);
    auto y = run(tape, tape.concat(tape.concat(a, bb), c), b.post_concat);
    y = tape.relu(tape.add(shortcut, y));
    return run(tape, y, b.post_add);
}

template <typename T>
typename Model<T>::Tape::Id Model<T>::run(Tape& tape, typename Tape::Id x, const std::vector<ResPathStage>& path) {
    for (const auto& st : path) {
        const auto shortcut = run(tape, x, st.shortcut);
        const auto y = run(tape, x, st.conv);
        x = run(tape, tape.relu(tape.add(shortcut, y)), st.post_add);
    }
    return x;
}

template <typename T>
typename Model<T>::Tape::Id Model<T>::forward(Tape& tape, typename Tape::Id input) {
    validate_input(tape.value(input).shape());
    const int L = spec_.levels;
    const bool multires = spec_.variant == Variant::MultiResUNet3D;
    std::vector<typename Tape::Id> skips(static_cast<std::size_t>(L));
    auto x = input;
    for (int l = 0; l < L; ++l) {
        const Level& lv = encoder_[static_cast<std::size_t>(l)];
        if (l > 0) x = tape.maxpool(x);
        x = multires ? run(tape, x, lv.block) : run(tape, run(tape, x, lv.conv_a), lv.conv_b);
        if (l < L - 1) skips[static_cast<std::size_t>(l)] = multires ? run(tape, x, lv.res_path) : x;
    }
    for (int l = L - 2; l >= 0; --l) {
        const Level& lv = decoder_[static_cast<std::size_t>(l)];
        auto up = run(tape, tape.upsample(x), lv.up);
        auto cat = tape.concat(up, skips[static_cast<std::size_t>(l)]);
        x = multires ? run(tape, cat, lv.block) : run(tape, run(tape, cat, lv.conv_a), lv.conv_b);
    }
    return run(tape, x, head_);
}

template <typename T>
nn::Tensor<T> Model<T>::logits(const nn::Tensor<T>& input) {
    Tape tape(false);
    const auto out = forward(tape, tape.input(input));
    return tape.value(out);
}

template <typename T>
nn::Parameter<T>& Model<T>::parameter(const std::string& name) {
    for (auto& p : params_) {
        if (p.name == name) return p;
    }
    throw std::out_of_range("no parameter named " + name);
}

template <typename T>
const nn::Parameter<T>& Model<T>::parameter(const std::string& name) const {
    return const_cast<Model*>(this)->parameter(name);
}

template <typename T>
std::size_t Model<T>::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

template <typename T>
std::map<std::string, std::size_t> Model<T>::param_breakdown() const {
    std::map<std::string, std::size_t> out;
    for (const auto& p : params_) out[p.name.substr(0, p.name.find('.'))] += p.size();
    return out;
}

template <typename T>
int Model<T>::encoder_channels(int level) const {
    return encoder_.at(static_cast<std::size_t>(level)).out_channels;
}

template <typename T>
void Model<T>::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

template <typename T>
void Model<T>::zero_head() {
    head_.w->value.fill(T(0));
    head_.b->value.fill(T(0));
}

template class Model<float>;
template class Model<double>;

}  // namespace bodycomp
