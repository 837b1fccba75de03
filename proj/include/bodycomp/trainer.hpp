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
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bodycomp/inference.hpp"
#include "bodycomp/metrics.hpp"
#include "bodycomp/models.hpp"
#include "bodycomp/optim.hpp"
#include "bodycomp/preproc.hpp"

namespace bodycomp {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    ArchitectureSpec arch;
    AdamWConfig optimizer;
    LrSchedule lr;
    int epochs = 200;
    /// 0 means one random crop per training case.
    int steps_per_epoch = 0;
    int folds = 5;
    std::uint64_t seed = 0;
    std::vector<HUWindow> windows = window_preset("multi");
    AugmentationToggles augment;
    Dims crop = kDefaultCrop;
    /// In-plane block-mean factor applied when cases are loaded.
    int downscale = 1;
    /// Validate after every n-th epoch (and always after the last one).
    int validate_every = 1;
    SlabWeighting weighting = SlabWeighting::Tent;
    double overlap = 0.75;

    void validate() const;
    SlidingWindowOptions inference_options() const { return {crop.nz, overlap, weighting}; }
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Stable hash of the config's JSON form.
std::string config_hash(const TrainConfig& c);

struct Case {
    std::string id;
    HUVolume hu;
    LabelVolume labels;
};

/// Reads every "<id>_hu.vbc" with a matching "<id>_labels.vbc", sorted by id,
/// downscaling in-plane by `downscale`.
std::vector<Case> load_dataset(const std::filesystem::path& dir, int downscale = 1);

/// Seeded shuffle of the ids followed by round-robin assignment to k folds.
std::vector<std::vector<std::string>> make_cv_folds(const std::vector<std::string>& case_ids, int k, std::uint64_t seed);

/// Generator for one (fold, epoch, sample) triple of the master seed.
std::mt19937_64 stream_for(std::uint64_t master, std::uint64_t fold, std::uint64_t epoch, std::uint64_t sample);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;  // mean combined loss over the epoch's steps
    bool validated = false;
    DiceResult val;
};

struct FoldResult {
    int fold = 0;
    Model<float> best;
    int best_epoch = -1;
    double best_dice = -1.0;
    std::vector<EpochRecord> history;
    nlohmann::json metadata;  // what gets stored with the checkpoint
};

/// Per-class dice of argmax predictions, averaged over the cases.
DiceResult evaluate_val_dice(Model<float>& model, const std::vector<Case>& cases, const TrainConfig& config);

/// Trains on every fold except `fold_index`, validates on that one and keeps
/// the weights with the highest mean foreground dice (earliest on ties).
FoldResult train_fold(const TrainConfig& config, const std::vector<Case>& dataset, int fold_index,
                      std::ostream* log = nullptr);

/// CSV curve: epoch,lr,loss,dice_AC,dice_B,dice_M,dice_ST,dice_TC,dice_mean.
void write_curve_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

/// Trains the listed folds (all when empty) and writes fold<k>.ckpt and
/// fold<k>_curve.csv into `out_dir`.
std::vector<FoldResult> train_ensemble(const TrainConfig& config, const std::vector<Case>& dataset,
                                       const std::filesystem::path& out_dir, std::vector<int> folds = {},
                                       std::ostream* log = nullptr);

}  // namespace bodycomp
