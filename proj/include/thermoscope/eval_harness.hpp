#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "thermoscope/cnn.hpp"
#include "thermoscope/dataset.hpp"

namespace thermoscope {

// All measurements from one transmitter over one heating run: the unit of
// fold assignment.
struct TxSet {
    std::string id;
    int run_id = 0;
    int tx_index = 0;
    std::vector<Tensor<float>> inputs;         // per step, (time, n_rx, 1)
    std::vector<std::vector<double>> labels;   // per step, n_pts °C
};

struct FoldAssignment {
    std::string set_id;
    int fold = 0;
};

struct FoldPlan {
    int n_folds = 10;
    std::vector<FoldAssignment> assignment;
    std::uint64_t seed = 0;
};

// Seeded uniform partition; fold sizes differ by at most one.
FoldPlan make_folds(const std::vector<std::string>& set_ids, int n_folds, std::uint64_t seed);

// sqrt of the mean squared entry-wise error.
double rmse(const std::vector<std::vector<double>>& predicted,
            const std::vector<std::vector<double>>& truth);

// Per-fold baseline: predict the training-fold mean temperature everywhere.
double mean_predictor_rmse(const std::vector<const TxSet*>& train,
                           const std::vector<const TxSet*>& test);

struct CvResult {
    std::vector<double> fold_rmse_c;
    std::vector<double> baseline_rmse_c;  // mean-predictor per fold
};

// Leave-one-fold-out training/evaluation; throws on train/test overlap.
// on_fold, when given, observes (fold, cnn_rmse, baseline_rmse) as folds finish.
CvResult run_cv(const std::vector<TxSet>& sets, const FoldPlan& plan, const CnnConfig& cnn,
                const TrainConfig& training, std::uint64_t seed,
                const std::function<void(int, double, double)>& on_fold = {});

struct SweepCell {
    int n_pts = 0;
    int n_rx = 0;
    std::vector<double> fold_rmse_c;
    double mean_rmse_c = 0.0;
    double std_rmse_c = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    int n_folds = 0;
    std::uint64_t seed = 0;
};

struct SweepOptions {
    CnnConfig cnn;  // n_pts / input_rx overridden per cell
    TrainConfig training;
    int n_folds = 10;
    int decimation = 4;
    std::uint64_t seed = 0;
    bool stratify_by_run = false;
    std::function<void(const std::string&)> progress;  // optional log sink
};

// Rebuilds inputs (receiver subselection + preprocessing) and labels
// (interpolation at n_pts) per grid cell, shares one fold plan across cells,
// and aggregates the per-fold RMSE values.
SweepResult run_sweep(const DatasetSource& source, const std::vector<int>& n_pts_list,
                      const std::vector<int>& n_rx_list, const SweepOptions& options);

// One cell's dataset assembly (also used by the train/evaluate commands).
std::vector<TxSet> assemble_tx_sets(const DatasetSource& source, int n_rx, int n_pts,
                                    int decimation);

FoldPlan make_fold_plan_for(const DatasetSource& source, int n_folds, bool stratify_by_run,
                            std::uint64_t seed);

}  // namespace thermoscope
