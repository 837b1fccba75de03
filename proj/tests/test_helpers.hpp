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
#include <random>
#include <string>

#include "bodycomp/nn/tensor.hpp"

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("bodycomp_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

template <typename T>
bodycomp::nn::Tensor<T> random_tensor(bodycomp::nn::Shape5 s, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    bodycomp::nn::Tensor<T> t(s);
    for (auto& v : t.data()) v = static_cast<T>(nd(rng));
    return t;
}

#include "bodycomp/phantom.hpp"
#include "bodycomp/trainer.hpp"

/// Small phantom cases for training tests.
inline std::vector<bodycomp::Case> phantom_cases(int count, std::size_t nz, std::size_t size, std::uint64_t seed0 = 1) {
    std::vector<bodycomp::Case> out;
    for (int i = 0; i < count; ++i) {
        bodycomp::PhantomSpec s;
        s.seed = seed0 + static_cast<std::uint64_t>(i);
        s.nz = nz;
        s.ny = s.nx = size;
        s.thoracic_cap = nz / 4;
        auto p = bodycomp::generate_phantom(s);
        out.push_back({"case" + std::to_string(i), std::move(p.hu), std::move(p.labels)});
    }
    return out;
}

/// A network and schedule small enough to train in well under a second per epoch.
inline bodycomp::TrainConfig tiny_config() {
    bodycomp::TrainConfig c;
    c.arch.variant = bodycomp::Variant::MultiResUNet3D;
    c.arch.nf = 2;
    c.arch.levels = 2;
    c.epochs = 3;
    c.steps_per_epoch = 2;
    c.folds = 2;
    c.seed = 17;
    c.crop = {4, 16, 16};
    c.lr.initial = 1e-3;
    c.overlap = 0.5;
    return c;
}
