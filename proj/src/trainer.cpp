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

#include "bodycomp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

#include "bodycomp/checkpoint.hpp"
#include "bodycomp/loss.hpp"

namespace bodycomp {

void TrainConfig::validate() const {
    arch.validate();
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (steps_per_epoch < 0) throw std::invalid_argument("steps_per_epoch must be >= 0");
    if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
    if (windows.empty()) throw std::invalid_argument("at least one HU window is required");
    for (const auto& w : windows) w.validate();
    if (static_cast<int>(windows.size()) != arch.in_channels) {
        throw std::invalid_argument("arch.in_channels (" + std::to_string(arch.in_channels) + ") must equal the window count (" +
                                    std::to_string(windows.size()) + ")");
    }
    const std::size_t div = arch.divisor();
    if (crop.empty() || crop.nz % div || crop.ny % div || crop.nx % div) {
        throw std::invalid_argument("crop " + to_string(crop) + " must be positive multiples of " + std::to_string(div));
    }
    if (downscale < 1) throw std::invalid_argument("downscale must be >= 1");
    if (validate_every < 1) throw std::invalid_argument("validate_every must be >= 1");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must lie in [0, 1)");
    if (!(lr.initial >= 0.0) || !(lr.factor > 0.0) || lr.every < 1) throw std::invalid_argument("invalid lr schedule");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = nlohmann::json::object();
    j["arch"] = c.arch;
    j["optimizer"] = c.optimizer;
    j["lr"] = c.lr;
    j["epochs"] = c.epochs;
    j["steps_per_epoch"] = c.steps_per_epoch;
    j["folds"] = c.folds;
    j["seed"] = c.seed;
    j["windows"] = c.windows;
    j["augment"] = {{"scale", c.augment.scale}, {"flip", c.augment.flip}};
    j["crop"] = {c.crop.nz, c.crop.ny, c.crop.nx};
    j["downscale"] = c.downscale;
    j["validate_every"] = c.validate_every;
    j["weighting"] = c.weighting == SlabWeighting::Tent ? "tent" : "gaussian";
    j["overlap"] = c.overlap;
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    static const std::set<std::string> known{"arch",   "optimizer", "lr",       "epochs",         "steps_per_epoch",
                                             "folds",  "seed",      "windows",  "augment",        "crop",
                                             "downscale", "validate_every", "weighting", "overlap"};
    if (!j.is_object()) throw std::invalid_argument("train config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw std::invalid_argument("unknown train config key '" + key + "'");
    }
    c = TrainConfig{};
    if (j.contains("arch")) c.arch = j.at("arch").get<ArchitectureSpec>();
    if (j.contains("optimizer")) c.optimizer = j.at("optimizer").get<AdamWConfig>();
    if (j.contains("lr")) c.lr = j.at("lr").get<LrSchedule>();
    c.epochs = j.value("epochs", c.epochs);
    c.steps_per_epoch = j.value("steps_per_epoch", c.steps_per_epoch);
    c.folds = j.value("folds", c.folds);
    c.seed = j.value("seed", c.seed);
    if (j.contains("windows")) c.windows = parse_windows(j.at("windows"));
    if (j.contains("augment")) {
        c.augment.scale = j.at("augment").value("scale", c.augment.scale);
        c.augment.flip = j.at("augment").value("flip", c.augment.flip);
    }
    if (j.contains("crop")) {
        const auto v = j.at("crop").get<std::vector<std::size_t>>();
        if (v.size() != 3) throw std::invalid_argument("crop must be [nz, ny, nx]");
        c.crop = {v[0], v[1], v[2]};
    }
    c.downscale = j.value("downscale", c.downscale);
    c.validate_every = j.value("validate_every", c.validate_every);
    if (j.contains("weighting")) {
        const auto w = j.at("weighting").get<std::string>();
        if (w == "tent") c.weighting = SlabWeighting::Tent;
        else if (w == "gaussian") c.weighting = SlabWeighting::Gaussian;
        else throw std::invalid_argument("weighting must be 'tent' or 'gaussian'");
    }
    c.overlap = j.value("overlap", c.overlap);
    c.validate();
}

std::string config_hash(const TrainConfig& c) { return json_hash(nlohmann::json(c)); }

std::vector<Case> load_dataset(const std::filesystem::path& dir, int downscale) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());
    const std::string suffix = "_hu.vbc";
    std::vector<std::string> ids;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix)) ids.push_back(name.substr(0, name.size() - suffix.size()));
    }
    std::sort(ids.begin(), ids.end());
    std::vector<Case> cases;
    for (const auto& id : ids) {
        const fs::path lp = dir / (id + "_labels.vbc");
        if (!fs::exists(lp)) throw std::runtime_error("case " + id + " has no label volume");
        HUVolume hu = load_hu_volume(dir / (id + suffix));
        LabelVolume labels = load_label_volume(lp);
        require_paired(hu, labels);
        if (downscale > 1) {
            hu = downscale_xy(hu, downscale);
            labels = downscale_labels_xy(labels, downscale);
        }
        cases.push_back({id, std::move(hu), std::move(labels)});
    }
    if (cases.empty()) throw std::runtime_error("no cases found in " + dir.string());
    return cases;
}

std::vector<std::vector<std::string>> make_cv_folds(const std::vector<std::string>& case_ids, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("fold count must be >= 1");
    if (static_cast<std::size_t>(k) > case_ids.size()) {
        throw std::invalid_argument("cannot split " + std::to_string(case_ids.size()) + " cases into " + std::to_string(k) +
                                    " folds");
    }
    std::vector<std::string> ids = case_ids;
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::vector<std::string>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ids.size(); ++i) folds[i % folds.size()].push_back(ids[i]);
    return folds;
}

std::mt19937_64 stream_for(std::uint64_t master, std::uint64_t fold, std::uint64_t epoch, std::uint64_t sample) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(master), hi(master), lo(fold), hi(fold), lo(epoch), hi(epoch), lo(sample), hi(sample)};
    return std::mt19937_64(seq);
}

DiceResult evaluate_val_dice(Model<float>& model, const std::vector<Case>& cases, const TrainConfig& config) {
    DiceResult avg;
    if (cases.empty()) return avg;
    for (const auto& c : cases) {
        const ProbabilityVolume probs = sliding_window_predict(model, multi_window_stack(c.hu, config.windows),
                                                               c.hu.spacing(), config.inference_options());
        const DiceResult r = mean_foreground_dice(argmax_labels(probs), c.labels);
        for (std::size_t k = 0; k < avg.per_class.size(); ++k) avg.per_class[k] += r.per_class[k];
        avg.mean += r.mean;
    }
    const double n = static_cast<double>(cases.size());
    for (auto& v : avg.per_class) v /= n;
    avg.mean /= n;
    return avg;
}

namespace {

constexpr std::uint64_t kInitTag = ~std::uint64_t{0};
constexpr std::uint64_t kOrderTag = ~std::uint64_t{0} - 1;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

FoldResult train_fold(const TrainConfig& config, const std::vector<Case>& dataset, int fold_index, std::ostream* log) {
    config.validate();
    if (fold_index < 0 || fold_index >= config.folds) throw std::invalid_argument("fold index out of range");
    std::vector<std::string> ids;
    for (const auto& c : dataset) ids.push_back(c.id);
    const auto folds = make_cv_folds(ids, config.folds, config.seed);
    const auto& val_ids = folds[static_cast<std::size_t>(fold_index)];

    std::vector<const Case*> train;
    std::vector<Case> val;
    for (const auto& c : dataset) {
        require_paired(c.hu, c.labels);
        if (std::find(val_ids.begin(), val_ids.end(), c.id) != val_ids.end()) {
            val.push_back(c);
        } else {
            train.push_back(&c);
        }
    }
    if (train.empty()) throw TrainingError("fold " + std::to_string(fold_index) + " has an empty training split");

    const auto fold = static_cast<std::uint64_t>(fold_index);
    Model<float> model(config.arch, stream_for(config.seed, fold, kInitTag, kInitTag)());
    AdamW<float> optimizer(config.optimizer);
    FoldResult result{fold_index, model, -1, -1.0, {}, {}};
    const std::size_t steps =
        config.steps_per_epoch > 0 ? static_cast<std::size_t>(config.steps_per_epoch) : train.size();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto ep = static_cast<std::uint64_t>(epoch);
        const double lr = config.lr.at_epoch(epoch);
        std::vector<std::size_t> order(train.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto order_rng = stream_for(config.seed, fold, ep, kOrderTag);
        std::shuffle(order.begin(), order.end(), order_rng);

        double loss_sum = 0.0;
        std::size_t loss_steps = 0;
        for (std::size_t step = 0; step < steps; ++step) {
            const Case& c = *train[order[step % order.size()]];
            auto rng = stream_for(config.seed, fold, ep, step);
            const AugmentationParams params =
                sample_augmentation_params(rng, c.hu.dims(), config.crop, config.augment);
            const Sample sample = apply_augmentation({c.hu, c.labels}, params, config.crop);
            const auto labels = sample.labels.data();
            if (std::none_of(labels.begin(), labels.end(), [](std::uint8_t l) { return l != kIgnoreLabel; })) continue;

            nn::Tape<float> tape;
            const auto x = tape.input(multi_window_stack(sample.image, config.windows));
            const auto probs = tape.softmax(model.forward(tape, x));
            nn::Tensor<float> grad(tape.value(probs).shape());
            const LossValue loss = combined_loss(tape.value(probs), labels, &grad);
            if (!std::isfinite(loss.combined)) {
                throw TrainingError("non-finite loss in fold " + std::to_string(fold_index) + ", epoch " +
                                    std::to_string(epoch) + ", step " + std::to_string(step) + " (case " + c.id +
                                    "): xce=" + fmt(loss.xce) + " dice=" + fmt(loss.dice));
            }
            tape.backward(probs, grad);
            optimizer.step(model.parameters(), lr);
            loss_sum += loss.combined;
            ++loss_steps;
        }

        EpochRecord rec{epoch, lr, loss_steps ? loss_sum / static_cast<double>(loss_steps) : 0.0, false, {}};
        const bool last = epoch + 1 == config.epochs;
        if (!val.empty() && ((epoch + 1) % config.validate_every == 0 || last)) {
            rec.val = evaluate_val_dice(model, val, config);
            rec.validated = true;
            if (rec.val.mean > result.best_dice) {
                result.best_dice = rec.val.mean;
                result.best_epoch = epoch;
                result.best = model;
            }
        }
        if (val.empty() && last) {
            result.best_epoch = epoch;
            result.best = model;
        }
        result.history.push_back(rec);
        if (log) {
            *log << "fold " << fold_index << " epoch " << epoch << " lr " << fmt(lr) << " loss " << fmt(rec.loss);
            if (rec.validated) *log << " val_dice " << fmt(rec.val.mean);
            *log << '\n' << std::flush;
        }
    }

    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t k = 0; k < kReportColumns.size(); ++k) {
        const auto& h = result.history[static_cast<std::size_t>(result.best_epoch)];
        per_class[std::string(kReportColumns[k])] = h.validated ? h.val.per_class[k] : 0.0;
    }
    result.metadata = {{"fold", fold_index},
                       {"epoch", result.best_epoch},
                       {"val_dice", result.best_dice},
                       {"val_dice_per_class", per_class},
                       {"validation_cases", val_ids},
                       {"config", nlohmann::json(config)},
                       {"config_hash", config_hash(config)}};
    return result;
}

void write_curve_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "epoch,lr,loss";
    for (auto col : kReportColumns) out << ",dice_" << col;
    out << ",dice_mean\n";
    for (const auto& r : history) {
        out << r.epoch << ',' << fmt(r.lr) << ',' << fmt(r.loss);
        for (double d : r.val.per_class) out << ',' << (r.validated ? fmt(d) : "");
        out << ',' << (r.validated ? fmt(r.val.mean) : "") << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<FoldResult> train_ensemble(const TrainConfig& config, const std::vector<Case>& dataset,
                                       const std::filesystem::path& out_dir, std::vector<int> folds, std::ostream* log) {
    config.validate();
    if (folds.empty()) {
        for (int k = 0; k < config.folds; ++k) folds.push_back(k);
    }
    std::filesystem::create_directories(out_dir);
    std::vector<FoldResult> results;
    for (int k : folds) {
        FoldResult r = train_fold(config, dataset, k, log);
        const std::string stem = "fold" + std::to_string(k);
        save_checkpoint(r.best, r.metadata, out_dir / (stem + ".ckpt"));
        write_curve_csv(r.history, out_dir / (stem + "_curve.csv"));
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace bodycomp
