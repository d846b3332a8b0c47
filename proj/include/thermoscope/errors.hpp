#pragma once

#include <stdexcept>
#include <string>

namespace thermoscope {

// A signal column with zero variance cannot be normalized (Eq. 2 divides by it).
class DegenerateSignalError : public std::runtime_error {
public:
    explicit DegenerateSignalError(int rx_index)
        : std::runtime_error("degenerate signal: zero-variance column for rx " +
                             std::to_string(rx_index)),
          rx_index_(rx_index) {}
    int rx_index() const { return rx_index_; }

private:
    int rx_index_;
};

class SolverFailure : public std::runtime_error {
public:
    SolverFailure(int step, const std::string& what)
        : std::runtime_error("heat solver failed at step " + std::to_string(step) + ": " + what),
          step_(step) {}
    int step() const { return step_; }

private:
    int step_;
};

class FitFailure : public std::runtime_error {
public:
    FitFailure(double identity_residual, double best_residual)
        : std::runtime_error("correction fit failed to improve: identity residual " +
                             std::to_string(identity_residual) + ", best residual " +
                             std::to_string(best_residual)),
          identity_residual_(identity_residual),
          best_residual_(best_residual) {}
    double identity_residual() const { return identity_residual_; }
    double best_residual() const { return best_residual_; }

private:
    double identity_residual_;
    double best_residual_;
};

class RecordOverflowError : public std::runtime_error {
public:
    RecordOverflowError(int tx, int rx, double arrival_s, double record_s)
        : std::runtime_error("arrival at " + std::to_string(arrival_s * 1e6) + " us for pair tx=" +
                             std::to_string(tx) + " rx=" + std::to_string(rx) +
                             " exceeds record length " + std::to_string(record_s * 1e6) + " us") {}
};

class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(int epoch)
        : std::runtime_error("training diverged (non-finite loss) at epoch " +
                             std::to_string(epoch)),
          epoch_(epoch) {}
    int epoch() const { return epoch_; }

private:
    int epoch_;
};

// Structured dataset-load failure; message names the offending file.
class DatasetLoadError : public std::runtime_error {
public:
    explicit DatasetLoadError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace thermoscope
