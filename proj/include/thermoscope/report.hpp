#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "thermoscope/cnn.hpp"
#include "thermoscope/eval_harness.hpp"

namespace thermoscope {

// Locale-independent decimal formatting, 9 significant digits.
std::string format_double(double v);

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);
void write_sweep_summary_csv(const SweepResult& result, const std::filesystem::path& path);

// Mean RMSE vs n_pts, one polyline per n_rx (the paper-style trend chart).
void write_sweep_svg(const SweepResult& result, const std::filesystem::path& path);

void write_loss_csv(const TrainResult& result, const std::filesystem::path& path);

struct EvalRow {
    int run_id = 0;
    int tx_index = 0;
    int step = 0;
    std::vector<double> predicted_c;
    std::vector<double> true_c;
};

void write_eval_csv(const std::vector<EvalRow>& rows, int n_pts,
                    const std::filesystem::path& path);

SweepResult read_sweep_csv(const std::filesystem::path& path);

}  // namespace thermoscope
