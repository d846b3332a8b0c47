// Command-line surface: generate | preprocess | fit-correction | train |
// evaluate | sweep | export-report. Exit codes: 0 success, 2 usage error,
// 1 runtime failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermoscope/checkpoint.hpp"
#include "thermoscope/dataset_io.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/eval_harness.hpp"
#include "thermoscope/report.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/run_config.hpp"

namespace fs = std::filesystem;
using namespace thermoscope;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_rx;
    std::optional<int> n_pts;
    std::optional<int> folds;
};

RunConfig resolve_config(const CommonOpts& opts) {
    RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.n_rx) cfg.cnn.input_rx = *opts.n_rx;
    if (opts.n_pts) cfg.cnn.n_pts = *opts.n_pts;
    if (opts.folds) cfg.n_folds = *opts.folds;
    cfg.sync_derived();
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "RunConfig JSON file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override the master seed");
    cmd->add_option("--n-rx", opts.n_rx, "override the receiver count (odd)");
    cmd->add_option("--n-pts", opts.n_pts, "override the radial point count");
    cmd->add_option("--folds", opts.folds, "override the fold count");
}

int cmd_generate(const CommonOpts& opts, const std::string& out_dir) {
    const RunConfig cfg = resolve_config(opts);
    std::cerr << "generating " << cfg.dataset.n_runs << " runs (seed " << cfg.seed << ")...\n";
    const std::vector<RunData> runs = generate_runs(cfg);
    for (const auto& run : runs) {
        std::cerr << "  run " << run.run_id << ": " << run.sim_profiles.steps() << " steps\n";
    }
    write_dataset(cfg, runs, out_dir);
    std::cerr << "dataset written to " << out_dir << "\n";
    return 0;
}

int cmd_fit_correction(const CommonOpts& opts, const std::string& data_dir) {
    const RunConfig cfg = resolve_config(opts);
    DiskDataset data(data_dir);
    std::vector<CorrectionParams> thetas;
    for (std::size_t r = 0; r < data.manifest().run_ids.size(); ++r) {
        const int run = static_cast<int>(r);
        const FitResult fit = fit_theta(data.sim_profiles(run), data.thermocouples(run), cfg.fit);
        thetas.push_back(fit.params);
        std::cout << "run " << r << ": a0=" << format_double(fit.params.a0)
                  << " b0=" << format_double(fit.params.b0)
                  << " aR=" << format_double(fit.params.aR)
                  << " bR=" << format_double(fit.params.bR) << " c=" << format_double(fit.params.c)
                  << " d=" << format_double(fit.params.d)
                  << " rms_c=" << format_double(std::sqrt(fit.objective_c2)) << "\n";
    }
    data.write_corrections(thetas);
    std::cerr << "corrections written to " << (fs::path(data_dir) / "corrections.json").string()
              << "\n";
    return 0;
}

// normalized CNN inputs as f32le blobs, mirroring the waveform layout
int cmd_preprocess(const CommonOpts& opts, const std::string& data_dir,
                   const std::string& out_dir) {
    const RunConfig cfg = resolve_config(opts);
    DiskSource source{DiskDataset(data_dir)};
    const Waveform ex = source.excitation();
    const int n_rx = cfg.cnn.input_rx;

    int n_time = 0;
    for (int run = 0; run < source.n_runs(); ++run) {
        for (int tx = 0; tx < source.n_transducers(); ++tx) {
            const std::vector<int> rx = select_receivers(tx, n_rx, source.n_transducers());
            for (int step = 0; step < source.n_steps(run); ++step) {
                const MeasurementArray x =
                    preprocess(source.raw_measurement(run, step, tx, rx), ex, cfg.decimation);
                n_time = x.n_t();
                char name[48];
                std::snprintf(name, sizeof(name), "step_%04d_tx_%02d.f32le", step, tx);
                char rdir[16];
                std::snprintf(rdir, sizeof(rdir), "run_%02d", run);
                const fs::path path = fs::path(out_dir) / rdir / name;
                fs::create_directories(path.parent_path());
                std::ofstream out(path, std::ios::binary);
                if (!out) throw DatasetLoadError("preprocess: cannot write " + path.string());
                for (int i = 0; i < x.n_t(); ++i) {
                    for (int c = 0; c < x.n_rx(); ++c) {
                        const float v = static_cast<float>(x.columns[c][i]);
                        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
                    }
                }
            }
        }
    }

    nlohmann::json meta;
    meta["n_time"] = n_time;
    meta["n_rx"] = n_rx;
    meta["decimation"] = cfg.decimation;
    meta["layout"] = "row-major n_time x n_rx float32 LE, receivers in window order";
    std::ofstream mo(fs::path(out_dir) / "preprocessed.json", std::ios::binary);
    mo << meta.dump(2) << '\n';
    std::cerr << "preprocessed inputs written to " << out_dir << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& data_dir, const std::string& out_dir) {
    const RunConfig cfg = resolve_config(opts);
    DiskSource source{DiskDataset(data_dir)};
    std::cerr << "assembling sets (n_rx=" << cfg.cnn.input_rx << ", n_pts=" << cfg.cnn.n_pts
              << ")...\n";
    const std::vector<TxSet> sets =
        assemble_tx_sets(source, cfg.cnn.input_rx, cfg.cnn.n_pts, cfg.decimation);

    std::vector<Tensor<float>> inputs;
    std::vector<std::vector<double>> targets;
    for (const auto& s : sets) {
        inputs.insert(inputs.end(), s.inputs.begin(), s.inputs.end());
        targets.insert(targets.end(), s.labels.begin(), s.labels.end());
    }

    CnnConfig cnn = cfg.cnn;
    cnn.input_time = inputs.front().shape[0];
    CnnModel<float> model(cnn, derive_seed(cfg.seed, 0x1417u));
    std::cerr << "training on " << inputs.size() << " samples...\n";
    const TrainResult result = train(model, inputs, targets, cfg.training, cfg.seed);

    fs::create_directories(out_dir);
    CheckpointMeta meta;
    meta.seed = cfg.seed;
    meta.epochs_trained = static_cast<int>(result.history.size());
    meta.best_epoch = result.best_epoch;
    meta.best_val_mse = result.best_val_mse;
    save_checkpoint(model, meta, fs::path(out_dir) / "model.tsckpt");
    write_loss_csv(result, fs::path(out_dir) / "loss_history.csv");
    std::cerr << "checkpoint + loss history written to " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& data_dir,
                 const std::string& checkpoint_path, const std::string& out_csv) {
    const RunConfig cfg = resolve_config(opts);
    const CnnModel<float> model = load_checkpoint<float>(checkpoint_path);
    DiskSource source{DiskDataset(data_dir)};

    const int n_rx = model.config().input_rx;
    const int n_pts = model.config().n_pts;
    const std::vector<TxSet> sets = assemble_tx_sets(source, n_rx, n_pts, cfg.decimation);

    std::vector<EvalRow> rows;
    std::vector<std::vector<double>> pred_all, true_all;
    for (const auto& s : sets) {
        for (std::size_t step = 0; step < s.inputs.size(); ++step) {
            const auto out = model.predict(s.inputs[step]);
            EvalRow row;
            row.run_id = s.run_id;
            row.tx_index = s.tx_index;
            row.step = static_cast<int>(step);
            row.predicted_c.assign(out.begin(), out.end());
            row.true_c = s.labels[step];
            pred_all.push_back(row.predicted_c);
            true_all.push_back(row.true_c);
            rows.push_back(std::move(row));
        }
    }
    write_eval_csv(rows, n_pts, out_csv);
    std::cout << "rmse_c=" << format_double(rmse(pred_all, true_all)) << "\n";
    return 0;
}

int cmd_sweep(const CommonOpts& opts, const std::string& data_dir, const std::string& out_dir) {
    const RunConfig cfg = resolve_config(opts);
    DiskSource source{DiskDataset(data_dir)};

    SweepOptions sweep_opts;
    sweep_opts.cnn = cfg.cnn;
    sweep_opts.training = cfg.training;
    sweep_opts.n_folds = cfg.n_folds;
    sweep_opts.decimation = cfg.decimation;
    sweep_opts.seed = cfg.seed;
    sweep_opts.stratify_by_run = cfg.stratify_by_run;
    sweep_opts.progress = [](const std::string& msg) { std::cerr << msg << "\n"; };

    const SweepResult result = run_sweep(source, cfg.sweep.n_pts, cfg.sweep.n_rx, sweep_opts);
    fs::create_directories(out_dir);
    write_sweep_csv(result, fs::path(out_dir) / "sweep.csv");
    write_sweep_summary_csv(result, fs::path(out_dir) / "sweep_summary.csv");
    write_sweep_svg(result, fs::path(out_dir) / "sweep.svg");
    std::cerr << "sweep outputs written to " << out_dir << "\n";
    return 0;
}

int cmd_export_report(const std::string& in_csv, const std::string& out_dir) {
    const SweepResult result = read_sweep_csv(in_csv);
    fs::create_directories(out_dir);
    write_sweep_summary_csv(result, fs::path(out_dir) / "sweep_summary.csv");
    write_sweep_svg(result, fs::path(out_dir) / "sweep.svg");
    std::cerr << "report written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermoscope: radial temperature profiles from exterior acoustic bursts"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_dir, data_dir, checkpoint_path, in_csv;

    auto* generate = app.add_subcommand("generate", "synthesize a dataset directory");
    add_common(generate, opts);
    generate->add_option("--out", out_dir, "output dataset directory")->required();

    auto* preprocess =
        app.add_subcommand("preprocess", "write preprocessed CNN inputs for inspection");
    add_common(preprocess, opts);
    preprocess->add_option("--data", data_dir, "dataset directory")->required();
    preprocess->add_option("--out", out_dir, "output directory")->required();

    auto* fitc = app.add_subcommand("fit-correction", "fit theta per run against thermocouples");
    add_common(fitc, opts);
    fitc->add_option("--data", data_dir, "dataset directory")->required();

    auto* train_cmd = app.add_subcommand("train", "train one model on the full dataset");
    add_common(train_cmd, opts);
    train_cmd->add_option("--data", data_dir, "dataset directory")->required();
    train_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "predict profiles with a trained checkpoint");
    add_common(evaluate, opts);
    evaluate->add_option("--data", data_dir, "dataset directory")->required();
    evaluate->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    evaluate->add_option("--out", out_dir, "output CSV path")->required();

    auto* sweep = app.add_subcommand("sweep", "cross-validated (n_pts, n_rx) grid");
    add_common(sweep, opts);
    sweep->add_option("--data", data_dir, "dataset directory")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();

    auto* export_report = app.add_subcommand("export-report", "summary + SVG from a sweep CSV");
    export_report->add_option("--in", in_csv, "sweep.csv produced by the sweep command")
        ->required();
    export_report->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (generate->parsed()) return cmd_generate(opts, out_dir);
        if (preprocess->parsed()) return cmd_preprocess(opts, data_dir, out_dir);
        if (fitc->parsed()) return cmd_fit_correction(opts, data_dir);
        if (train_cmd->parsed()) return cmd_train(opts, data_dir, out_dir);
        if (evaluate->parsed()) return cmd_evaluate(opts, data_dir, checkpoint_path, out_dir);
        if (sweep->parsed()) return cmd_sweep(opts, data_dir, out_dir);
        if (export_report->parsed()) return cmd_export_report(in_csv, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
