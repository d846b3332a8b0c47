#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "thermoscope/tensor.hpp"

namespace thermoscope {

// Three Conv+ReLU+MaxPool blocks (8*2^(l-1) filters of 16x2), flatten,
// dropout, linear output of n_pts temperatures.
struct CnnConfig {
    int n_blocks = 3;
    int base_filters = 8;
    int kernel_time = 16;
    int kernel_rx = 2;
    int pool_time = 4;
    double dropout_rate = 0.2;
    int n_pts = 25;
    int input_time = 512;
    int input_rx = 3;

    int filters_at(int block) const { return base_filters << block; }  // block is 0-based
    int kernel_rx_effective() const { return kernel_rx < input_rx ? kernel_rx : input_rx; }
    void validate() const;
};

// Time length after each pooling stage and the flattened feature size.
struct CnnDims {
    std::vector<int> block_time;  // time extent after block 0..n-1
    int flat_len = 0;
};
CnnDims compute_dims(const CnnConfig& config);

enum class CnnMode { train, eval };

template <typename T>
struct CnnParams {
    // conv weights are (kernel_time, kernel_rx_eff, c_in, c_out); biases (c_out);
    // dense weight is (n_pts, flat_len); dense bias (n_pts)
    std::vector<Tensor<T>> tensors;

    std::size_t total_elements() const {
        std::size_t n = 0;
        for (const auto& t : tensors) n += t.numel();
        return n;
    }
};

// Per-sample forward cache reused across the backward pass; scratch buffers
// persist so repeated passes do not allocate.
template <typename T>
struct CnnWorkspace {
    std::vector<Tensor<T>> conv_out;   // post-ReLU activations per block
    std::vector<Tensor<T>> pool_out;   // pooled activations per block
    std::vector<std::vector<int>> pool_argmax;
    std::vector<T> dropout_mask;       // scale per flattened feature (1/(1-p) or 0)
    std::vector<T> dropped;            // flatten after dropout
    std::vector<T> output;             // dense output, standardized units
    bool forward_done = false;

    std::vector<Tensor<T>> back_dconv;      // gradient at each conv output
    std::vector<Tensor<T>> back_dpool;      // gradient at each pool output
    std::vector<std::vector<T>> back_wt;    // transposed conv weights per block
};

template <typename T>
class CnnModel {
public:
    CnnModel() = default;
    CnnModel(const CnnConfig& config, std::uint64_t init_seed);

    const CnnConfig& config() const { return config_; }
    CnnParams<T>& params() { return params_; }
    const CnnParams<T>& params() const { return params_; }

    CnnMode mode() const { return mode_; }
    void set_mode(CnnMode m) { mode_ = m; }

    // target standardization factors fixed at training time
    double target_mean() const { return target_mean_; }
    double target_std() const { return target_std_; }
    void set_target_stats(double mean, double std);

    // Forward pass; dropout (train mode) uses dropout_seed. Returns the
    // standardized output, also kept in the workspace for backward().
    const std::vector<T>& forward(const Tensor<T>& input, CnnWorkspace<T>& ws,
                                  std::uint64_t dropout_seed = 0) const;

    // MSE loss of a cached forward pass against a standardized target.
    T loss_from_forward(const CnnWorkspace<T>& ws, const std::vector<T>& target_std_units) const;

    // Gradients of the per-sample MSE loss w.r.t. every parameter (and, when
    // input_grad is given, the input); requires a preceding forward() on the
    // same workspace.
    void backward(const Tensor<T>& input, CnnWorkspace<T>& ws,
                  const std::vector<T>& target_std_units, CnnParams<T>& grads,
                  Tensor<T>* input_grad = nullptr) const;

    // Forward in eval mode and de-standardize to °C.
    std::vector<T> predict(const Tensor<T>& input) const;

    CnnParams<T> zero_grads() const;

private:
    CnnConfig config_;
    CnnDims dims_;
    CnnParams<T> params_;
    CnnMode mode_ = CnnMode::train;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
};

struct AdamConfig {
    double learning_rate = 1.0e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1.0e-8;
};

template <typename T>
class AdamState {
public:
    AdamState() = default;
    AdamState(const CnnParams<T>& params, const AdamConfig& config);

    void step(CnnParams<T>& params, const CnnParams<T>& grads);
    long step_count() const { return step_count_; }

private:
    AdamConfig config_;
    std::vector<Tensor<T>> m_;
    std::vector<Tensor<T>> v_;
    long step_count_ = 0;
};

struct TrainConfig {
    AdamConfig adam;
    int batch_size = 16;
    int max_epochs = 12;
    int patience = 3;
    double validation_fraction = 0.1;  // 0 disables the split; early stop then watches train loss
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = 0;
    double best_val_mse = 0.0;
};

// Mini-batch Adam on MSE with a seeded validation split and early stopping;
// the model is left holding the best-validation parameters. Deterministic for
// a fixed seed regardless of worker count.
template <typename T>
TrainResult train(CnnModel<T>& model, const std::vector<Tensor<T>>& inputs,
                  const std::vector<std::vector<double>>& targets_c, const TrainConfig& config,
                  std::uint64_t seed);

}  // namespace thermoscope
