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

#include "bodycomp/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "bodycomp/checkpoint.hpp"
#include "bodycomp/gradcheck_suite.hpp"
#include "bodycomp/inference.hpp"
#include "bodycomp/metrics.hpp"
#include "bodycomp/phantom.hpp"
#include "bodycomp/quantify.hpp"
#include "bodycomp/report.hpp"
#include "bodycomp/trainer.hpp"

namespace bodycomp {

namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

nlohmann::json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_json_file(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::vector<fs::path> checkpoint_files(const fs::path& where) {
    std::vector<fs::path> files;
    if (fs::is_directory(where)) {
        for (const auto& e : fs::directory_iterator(where)) {
            if (e.path().extension() == ".ckpt") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    } else if (fs::exists(where)) {
        files.push_back(where);
    }
    if (files.empty()) throw std::runtime_error("no checkpoints found at " + where.string());
    return files;
}

struct Options {
    std::optional<std::uint64_t> seed;

    // phantom
    fs::path out_dir;
    int count = 1;
    std::size_t nz = 40, size = 256;
    double noise = 10.0;
    std::size_t sparse_period = 1;

    // train
    fs::path config_path, data_dir;
    std::vector<int> folds;
    bool quiet = false;

    // infer / quantify / evaluate / report
    fs::path checkpoints, in_path, out_path, probs_path;
    fs::path hu_path, labels_path, pred_path, gt_path, json_path;
    std::string checkpoint_hash, input_id, icc_form = "agreement";
};

int run_phantom(const Options& o, std::ostream& out) {
    fs::create_directories(o.out_dir);
    const std::uint64_t base = o.seed.value_or(0);
    for (int i = 0; i < o.count; ++i) {
        PhantomSpec spec;
        spec.seed = base + static_cast<std::uint64_t>(i);
        spec.nz = o.nz;
        spec.ny = spec.nx = o.size;
        spec.noise_sigma = o.noise;
        const Phantom p = generate_phantom(spec);
        char stem[64];
        std::snprintf(stem, sizeof stem, "phantom_%03d", i);
        save_volume(p.hu, o.out_dir / (std::string(stem) + "_hu.vbc"));
        if (o.sparse_period > 1) {
            save_volume(sparsify_annotation(p.labels, o.sparse_period), o.out_dir / (std::string(stem) + "_labels.vbc"));
            save_volume(p.labels, o.out_dir / (std::string(stem) + "_labels_dense.vbc"));
        } else {
            save_volume(p.labels, o.out_dir / (std::string(stem) + "_labels.vbc"));
        }
        CompositionReport comp = p.composition;
        comp.metadata["input_id"] = stem;
        std::ofstream js(o.out_dir / (std::string(stem) + "_composition.json"));
        js << report_to_json(comp).dump(2) << '\n';
        if (!js) throw std::runtime_error("cannot write composition for " + std::string(stem));
        out << stem << " seed=" << spec.seed << " sat_ml=" << format_ml(comp.total_sat_ml)
            << " vat_ml=" << format_ml(comp.total_vat_ml) << " muscle_ml=" << format_ml(comp.total_muscle_ml) << '\n';
    }
    return 0;
}

int run_train(const Options& o, std::ostream& out) {
    TrainConfig config = read_json_file(o.config_path).get<TrainConfig>();
    if (o.seed) config.seed = *o.seed;
    config.validate();
    const auto dataset = load_dataset(o.data_dir, config.downscale);
    fs::create_directories(o.out_dir);
    write_json_file(nlohmann::json(config), o.out_dir / "config.json");
    const auto results = train_ensemble(config, dataset, o.out_dir, o.folds, o.quiet ? nullptr : &out);
    for (const auto& r : results) {
        out << "fold " << r.fold << ": best epoch " << r.best_epoch << ", val dice " << fixed(r.best_dice, 4) << '\n';
    }
    return 0;
}

/// Inference settings recorded in the checkpoint's config, defaults otherwise.
TrainConfig config_of(const Checkpoint& ck) {
    if (ck.metadata.contains("config")) return ck.metadata.at("config").get<TrainConfig>();
    TrainConfig c;
    c.arch = ck.model.spec();
    return c;
}

int run_infer(const Options& o, std::ostream& out) {
    std::vector<Model<float>> models;
    std::optional<TrainConfig> config;
    std::string hashes;
    for (const auto& f : checkpoint_files(o.checkpoints)) {
        Checkpoint ck = load_checkpoint(f);
        if (!config) config = config_of(ck);
        hashes += file_hash(f);
        models.push_back(std::move(ck.model));
    }
    HUVolume hu = load_hu_volume(o.in_path);
    if (config->downscale > 1) hu = downscale_xy(hu, config->downscale);
    const ProbabilityVolume probs = predict_hu(models, hu, config->windows, config->inference_options());
    save_volume(argmax_labels(probs), o.out_path);
    if (!o.probs_path.empty()) save_probabilities(probs, o.probs_path);
    out << "labels " << to_string(probs.dims) << " from " << models.size() << " model(s), checkpoint hash "
        << json_hash(hashes) << '\n';
    return 0;
}

int run_quantify(const Options& o, std::ostream& out) {
    const HUVolume hu = load_hu_volume(o.hu_path);
    const LabelVolume labels = load_label_volume(o.labels_path);
    CompositionReport r = quantify(hu, labels);
    r.metadata["input_id"] = o.input_id.empty() ? o.hu_path.stem().string() : o.input_id;
    r.metadata["labels"] = o.labels_path.filename().string();
    if (!o.checkpoint_hash.empty()) r.metadata["checkpoint_hash"] = o.checkpoint_hash;
    emit_all(r, o.out_dir);
    out << "SAT " << format_ml(r.total_sat_ml) << " ml, VAT " << format_ml(r.total_vat_ml) << " ml, muscle "
        << format_ml(r.total_muscle_ml) << " ml -> " << o.out_dir.string() << '\n';
    return 0;
}

int run_evaluate(const Options& o, std::ostream& out) {
    const LabelVolume pred = load_label_volume(o.pred_path);
    const LabelVolume gt = load_label_volume(o.gt_path);
    const DiceResult d = mean_foreground_dice(pred, gt);
    out << "metric";
    for (auto c : kReportColumns) out << ',' << c;
    out << ",Average\ndice";
    for (double v : d.per_class) out << ',' << fixed(v, 4);
    out << ',' << fixed(d.mean, 4) << '\n';
    if (!o.hu_path.empty()) {
        const HUVolume hu = load_hu_volume(o.hu_path);
        const CompositionReport rp = quantify(hu, pred), rg = quantify(hu, gt);
        std::vector<double> a[3], b[3];
        for (std::size_t z = 0; z < rp.rows.size(); ++z) {
            a[0].push_back(rp.rows[z].sat_ml);
            b[0].push_back(rg.rows[z].sat_ml);
            a[1].push_back(rp.rows[z].vat_ml);
            b[1].push_back(rg.rows[z].vat_ml);
            a[2].push_back(rp.rows[z].muscle_ml);
            b[2].push_back(rg.rows[z].muscle_ml);
        }
        const IccForm form = o.icc_form == "consistency" ? IccForm::Consistency : IccForm::AbsoluteAgreement;
        out << "metric,sat,vat,muscle\nicc";
        for (int k = 0; k < 3; ++k) out << ',' << fixed(icc(a[k], b[k], form), 4);
        out << '\n';
    }
    return 0;
}

int run_gradcheck(const Options& o, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto checks = run_gradcheck_suite(o.seed.value_or(7));
    bool ok = true;
    for (const auto& c : checks) {
        char line[256];
        std::snprintf(line, sizeof line, "%-28s max_rel_error=%.3e tol=%.0e checked=%zu skipped=%zu %s",
                      c.name.c_str(), c.result.max_rel_error, c.tolerance, c.result.checked, c.result.skipped,
                      c.passed() ? "ok" : "FAIL");
        out << line << '\n';
        if (!c.passed()) out << "  worst: " << c.result.worst << '\n';
        ok = ok && c.passed();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << (ok ? "all layers within tolerance" : "gradient check FAILED") << " (" << fixed(sec, 1) << " s)\n";
    return ok ? 0 : 1;
}

int run_report(const Options& o, std::ostream& out) {
    const CompositionReport r = report_from_json(read_json_file(o.json_path));
    emit_all(r, o.out_dir);
    out << "wrote " << r.rows.size() << " slices to " << o.out_dir.string() << '\n';
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Volumetric body-composition analysis: phantoms, training, inference and reports.", "bodycomp"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (phantom base seed, training seed, gradcheck seed)");

    auto* phantom = app.add_subcommand("phantom", "Generate synthetic phantoms with exact labels");
    phantom->add_option("--out", o.out_dir, "Output directory")->required();
    phantom->add_option("--count", o.count, "Number of phantoms")->check(CLI::PositiveNumber);
    phantom->add_option("--nz", o.nz, "Slices per phantom")->check(CLI::Range(2, 4096));
    phantom->add_option("--size", o.size, "In-plane size")->check(CLI::Range(16, 4096));
    phantom->add_option("--noise", o.noise, "Gaussian HU noise sigma")->check(CLI::NonNegativeNumber);
    phantom->add_option("--sparse-period", o.sparse_period, "Annotate every n-th slice only")->check(CLI::PositiveNumber);

    auto* train = app.add_subcommand("train", "Cross-validated training");
    train->add_option("--config", o.config_path, "TrainConfig JSON")->required()->check(CLI::ExistingFile);
    train->add_option("--data", o.data_dir, "Directory of <id>_hu.vbc / <id>_labels.vbc")->required();
    train->add_option("--out", o.out_dir, "Output directory")->required();
    train->add_option("--folds", o.folds, "Subset of folds to train (default all)");
    train->add_flag("--quiet", o.quiet, "No per-epoch progress");

    auto* infer = app.add_subcommand("infer", "Ensemble sliding-window segmentation");
    infer->add_option("--checkpoints", o.checkpoints, "Checkpoint file or directory of *.ckpt")->required();
    infer->add_option("--in", o.in_path, "HU volume")->required()->check(CLI::ExistingFile);
    infer->add_option("--out", o.out_path, "Output label volume")->required();
    infer->add_option("--probs", o.probs_path, "Optional probability dump");

    auto* quant = app.add_subcommand("quantify", "SAT/VAT/muscle per slice from HU + labels");
    quant->add_option("--hu", o.hu_path, "HU volume")->required()->check(CLI::ExistingFile);
    quant->add_option("--labels", o.labels_path, "Label volume")->required()->check(CLI::ExistingFile);
    quant->add_option("--out", o.out_dir, "Output directory for report.{csv,json,svg}")->required();
    quant->add_option("--checkpoint-hash", o.checkpoint_hash, "Recorded in the report metadata");
    quant->add_option("--input-id", o.input_id, "Recorded in the report metadata");

    auto* eval = app.add_subcommand("evaluate", "Dice table and, with --hu, per-slice ICC");
    eval->add_option("--pred", o.pred_path, "Predicted labels")->required()->check(CLI::ExistingFile);
    eval->add_option("--gt", o.gt_path, "Reference labels")->required()->check(CLI::ExistingFile);
    eval->add_option("--hu", o.hu_path, "HU volume for compartment ICC")->check(CLI::ExistingFile);
    eval->add_option("--icc-form", o.icc_form, "agreement or consistency")
        ->check(CLI::IsMember({"agreement", "consistency"}));

    auto* grad = app.add_subcommand("gradcheck", "Finite-difference verification of every layer");

    auto* report = app.add_subcommand("report", "Re-render CSV/JSON/SVG from a report JSON");
    report->add_option("--json", o.json_path, "report.json")->required()->check(CLI::ExistingFile);
    report->add_option("--out", o.out_dir, "Output directory")->required();

    std::vector<std::string> argv_store{"bodycomp"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    if (seed_opt->count() > 0) o.seed = seed;

    try {
        if (phantom->parsed()) return run_phantom(o, out);
        if (train->parsed()) return run_train(o, out);
        if (infer->parsed()) return run_infer(o, out);
        if (quant->parsed()) return run_quantify(o, out);
        if (eval->parsed()) return run_evaluate(o, out);
        if (grad->parsed()) return run_gradcheck(o, out);
        if (report->parsed()) return run_report(o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace bodycomp
