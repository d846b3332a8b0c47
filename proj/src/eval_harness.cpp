#include "thermoscope/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "thermoscope/errors.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/thread_pool.hpp"

namespace thermoscope {

FoldPlan make_folds(const std::vector<std::string>& set_ids, int n_folds, std::uint64_t seed) {
    if (n_folds < 1) throw std::invalid_argument("make_folds: n_folds must be >= 1");
    if (static_cast<std::size_t>(n_folds) > set_ids.size()) {
        throw std::invalid_argument("make_folds: more folds than sets");
    }

    std::vector<std::string> shuffled = set_ids;
    Rng rng(derive_seed(seed, 0xf01du));
    rng.shuffle(shuffled);

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.assignment.reserve(shuffled.size());
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
        plan.assignment.push_back({shuffled[i], static_cast<int>(i % n_folds)});
    }
    return plan;
}

double rmse(const std::vector<std::vector<double>>& predicted,
            const std::vector<std::vector<double>>& truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("rmse: row count mismatch");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i].size() != truth[i].size()) {
            throw std::invalid_argument("rmse: row length mismatch");
        }
        for (std::size_t j = 0; j < predicted[i].size(); ++j) {
            const double e = predicted[i][j] - truth[i][j];
            acc += e * e;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("rmse: empty input");
    return std::sqrt(acc / static_cast<double>(count));
}

double mean_predictor_rmse(const std::vector<const TxSet*>& train,
                           const std::vector<const TxSet*>& test) {
    double mean = 0.0;
    std::size_t n = 0;
    for (const TxSet* s : train) {
        for (const auto& row : s->labels) {
            for (double v : row) {
                mean += v;
                ++n;
            }
        }
    }
    if (n == 0) throw std::invalid_argument("mean_predictor_rmse: empty training labels");
    mean /= static_cast<double>(n);

    double acc = 0.0;
    std::size_t count = 0;
    for (const TxSet* s : test) {
        for (const auto& row : s->labels) {
            for (double v : row) {
                const double e = mean - v;
                acc += e * e;
                ++count;
            }
        }
    }
    if (count == 0) throw std::invalid_argument("mean_predictor_rmse: empty test labels");
    return std::sqrt(acc / static_cast<double>(count));
}

namespace {

// materialize train/test membership for one fold and enforce the no-leakage
// invariant (a corrupted plan can place one id on both sides)
void split_fold(const std::vector<TxSet>& sets, const FoldPlan& plan, int fold,
                std::vector<const TxSet*>& train, std::vector<const TxSet*>& test) {
    std::set<std::string> train_ids;
    std::set<std::string> test_ids;
    for (const auto& a : plan.assignment) {
        (a.fold == fold ? test_ids : train_ids).insert(a.set_id);
    }
    for (const auto& id : test_ids) {
        if (train_ids.count(id) > 0) {
            throw std::logic_error("run_cv: leakage detected, set '" + id +
                                   "' appears in both train and test for fold " +
                                   std::to_string(fold));
        }
    }

    train.clear();
    test.clear();
    for (const auto& s : sets) {
        if (test_ids.count(s.id) > 0) {
            test.push_back(&s);
        } else if (train_ids.count(s.id) > 0) {
            train.push_back(&s);
        } else {
            throw std::invalid_argument("run_cv: set '" + s.id + "' missing from the fold plan");
        }
    }
}

double evaluate_rmse(const CnnModel<float>& model, const std::vector<const TxSet*>& test) {
    // gather (pointer, step) pairs so evaluation parallelizes over samples
    std::vector<std::pair<const TxSet*, int>> items;
    for (const TxSet* s : test) {
        for (int i = 0; i < static_cast<int>(s->inputs.size()); ++i) items.emplace_back(s, i);
    }
    std::vector<std::vector<double>> pred(items.size());
    std::vector<std::vector<double>> truth(items.size());
    parallel_for(static_cast<int>(items.size()), [&](int i) {
        const auto [s, step] = items[i];
        const auto out = model.predict(s->inputs[step]);
        pred[i].assign(out.begin(), out.end());
        truth[i] = s->labels[step];
    });
    return rmse(pred, truth);
}

}  // namespace

CvResult run_cv(const std::vector<TxSet>& sets, const FoldPlan& plan, const CnnConfig& cnn,
                const TrainConfig& training, std::uint64_t seed,
                const std::function<void(int, double, double)>& on_fold) {
    if (plan.n_folds < 2) {
        throw std::invalid_argument("run_cv: need at least 2 folds to hold out and train");
    }
    if (sets.empty()) throw std::invalid_argument("run_cv: empty dataset");

    for (const auto& s : sets) {
        if (s.inputs.size() != s.labels.size()) {
            throw std::invalid_argument("run_cv: set '" + s.id + "' has misaligned inputs/labels");
        }
    }

    CvResult result;
    for (int fold = 0; fold < plan.n_folds; ++fold) {
        std::vector<const TxSet*> train_sets;
        std::vector<const TxSet*> test_sets;
        split_fold(sets, plan, fold, train_sets, test_sets);
        if (train_sets.empty() || test_sets.empty()) {
            throw std::invalid_argument("run_cv: fold " + std::to_string(fold) +
                                        " leaves train or test empty");
        }

        std::vector<Tensor<float>> inputs;
        std::vector<std::vector<double>> targets;
        for (const TxSet* s : train_sets) {
            inputs.insert(inputs.end(), s->inputs.begin(), s->inputs.end());
            targets.insert(targets.end(), s->labels.begin(), s->labels.end());
        }

        const std::uint64_t fold_seed = derive_seed(seed, 0xcfu, static_cast<std::uint64_t>(fold));
        CnnModel<float> model(cnn, derive_seed(fold_seed, 0x1417u));
        try {
            train(model, inputs, targets, training, fold_seed);
        } catch (const DivergenceError& e) {
            throw std::runtime_error("run_cv: fold " + std::to_string(fold) + ": " + e.what());
        }

        result.fold_rmse_c.push_back(evaluate_rmse(model, test_sets));
        result.baseline_rmse_c.push_back(mean_predictor_rmse(train_sets, test_sets));
        if (on_fold) on_fold(fold, result.fold_rmse_c.back(), result.baseline_rmse_c.back());
    }
    return result;
}

std::vector<TxSet> assemble_tx_sets(const DatasetSource& source, int n_rx, int n_pts,
                                    int decimation) {
    const int n_tx = source.n_transducers();
    const int n_runs = source.n_runs();
    const Waveform ex = source.excitation();

    std::vector<TxSet> sets(static_cast<std::size_t>(n_runs) * n_tx);
    parallel_for(n_runs * n_tx, [&](int job) {
        const int run = job / n_tx;
        const int tx = job % n_tx;
        TxSet& set = sets[job];
        set.run_id = run;
        set.tx_index = tx;
        {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "r%02d_tx%02d", run, tx);
            set.id = buf;
        }

        const std::vector<int> rx = select_receivers(tx, n_rx, n_tx);
        const ProfileSeries& corrected = source.corrected_profiles(run);
        const int steps = source.n_steps(run);
        set.inputs.reserve(steps);
        set.labels.reserve(steps);
        for (int step = 0; step < steps; ++step) {
            const MeasurementArray raw = source.raw_measurement(run, step, tx, rx);
            const MeasurementArray x = preprocess(raw, ex, decimation);
            Tensor<float> t({x.n_t(), x.n_rx(), 1});
            for (int i = 0; i < x.n_t(); ++i) {
                for (int j = 0; j < x.n_rx(); ++j) {
                    t.at(i, j, 0) = static_cast<float>(x.columns[j][i]);
                }
            }
            set.inputs.push_back(std::move(t));
            set.labels.push_back(interpolate_profile(corrected, step, n_pts));
        }
    });
    return sets;
}

FoldPlan make_fold_plan_for(const DatasetSource& source, int n_folds, bool stratify_by_run,
                            std::uint64_t seed) {
    const int n_tx = source.n_transducers();
    std::vector<std::string> ids;
    for (int run = 0; run < source.n_runs(); ++run) {
        for (int tx = 0; tx < n_tx; ++tx) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "r%02d_tx%02d", run, tx);
            ids.emplace_back(buf);
        }
    }

    if (!stratify_by_run) return make_folds(ids, n_folds, seed);

    // whole runs stay together: assign folds to run ids, then expand
    std::vector<std::string> run_ids;
    for (int run = 0; run < source.n_runs(); ++run) run_ids.push_back(std::to_string(run));
    const FoldPlan run_plan = make_folds(run_ids, n_folds, seed);

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    for (const auto& a : run_plan.assignment) {
        const int run = std::stoi(a.set_id);
        for (int tx = 0; tx < n_tx; ++tx) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "r%02d_tx%02d", run, tx);
            plan.assignment.push_back({std::string(buf), a.fold});
        }
    }
    return plan;
}

SweepResult run_sweep(const DatasetSource& source, const std::vector<int>& n_pts_list,
                      const std::vector<int>& n_rx_list, const SweepOptions& options) {
    for (int n_rx : n_rx_list) {
        if (n_rx % 2 == 0 || n_rx < 1) {
            throw std::invalid_argument("run_sweep: n_rx values must be odd");
        }
    }

    // one fold plan shared by every cell: folds depend only on set ids + seed
    const FoldPlan plan =
        make_fold_plan_for(source, options.n_folds, options.stratify_by_run, options.seed);

    SweepResult result;
    result.n_folds = options.n_folds;
    result.seed = options.seed;

    for (int n_rx : n_rx_list) {
        for (int n_pts : n_pts_list) {
            if (options.progress) {
                options.progress("cell n_pts=" + std::to_string(n_pts) +
                                 " n_rx=" + std::to_string(n_rx));
            }
            const std::vector<TxSet> sets =
                assemble_tx_sets(source, n_rx, n_pts, options.decimation);

            CnnConfig cnn = options.cnn;
            cnn.n_pts = n_pts;
            cnn.input_rx = n_rx;
            cnn.input_time = sets.front().inputs.front().shape[0];

            const std::uint64_t cell_seed =
                derive_seed(options.seed, 0xce11u, static_cast<std::uint64_t>(n_pts),
                            static_cast<std::uint64_t>(n_rx));
            const CvResult cv = run_cv(sets, plan, cnn, options.training, cell_seed);

            SweepCell cell;
            cell.n_pts = n_pts;
            cell.n_rx = n_rx;
            cell.fold_rmse_c = cv.fold_rmse_c;
            double mean = 0.0;
            for (double v : cv.fold_rmse_c) mean += v;
            mean /= static_cast<double>(cv.fold_rmse_c.size());
            double var = 0.0;
            for (double v : cv.fold_rmse_c) var += (v - mean) * (v - mean);
            cell.mean_rmse_c = mean;
            cell.std_rmse_c = cv.fold_rmse_c.size() > 1
                                  ? std::sqrt(var / static_cast<double>(cv.fold_rmse_c.size() - 1))
                                  : 0.0;
            result.cells.push_back(std::move(cell));
        }
    }
    return result;
}

}  // namespace thermoscope
