#include "thermoscope/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "thermoscope/cnn_kernels.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/thread_pool.hpp"

namespace thermoscope {

void CnnConfig::validate() const {
    if (n_blocks < 1) throw std::invalid_argument("CnnConfig: n_blocks must be >= 1");
    if (base_filters < 1) throw std::invalid_argument("CnnConfig: base_filters must be >= 1");
    if (kernel_time < 1 || kernel_rx < 1) throw std::invalid_argument("CnnConfig: bad kernel");
    if (pool_time < 1) throw std::invalid_argument("CnnConfig: pool_time must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw std::invalid_argument("CnnConfig: dropout_rate must be in [0, 1)");
    }
    if (n_pts < 1) throw std::invalid_argument("CnnConfig: n_pts must be >= 1");
    if (input_time < 1 || input_rx < 1) throw std::invalid_argument("CnnConfig: bad input shape");
}

CnnDims compute_dims(const CnnConfig& config) {
    config.validate();
    CnnDims dims;
    int time = config.input_time;
    for (int l = 0; l < config.n_blocks; ++l) {
        if (time < config.pool_time) {
            throw std::invalid_argument("CnnConfig: pool window exceeds time extent at block " +
                                        std::to_string(l));
        }
        time /= config.pool_time;
        dims.block_time.push_back(time);
    }
    dims.flat_len = time * config.input_rx * config.filters_at(config.n_blocks - 1);
    return dims;
}

using namespace cnn_kernels;

// ---- model ---------------------------------------------------------------

template <typename T>
CnnModel<T>::CnnModel(const CnnConfig& config, std::uint64_t init_seed)
    : config_(config), dims_(compute_dims(config)) {
    Rng rng(init_seed);
    const int kw = config.kernel_rx_effective();

    auto he_uniform = [&](Tensor<T>& t, int fan_in) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (auto& x : t.v) x = static_cast<T>(rng.uniform(-bound, bound));
    };

    int cin = 1;
    for (int l = 0; l < config.n_blocks; ++l) {
        const int cout = config.filters_at(l);
        Tensor<T> wgt({config.kernel_time, kw, cin, cout});
        he_uniform(wgt, config.kernel_time * kw * cin);
        params_.tensors.push_back(std::move(wgt));
        params_.tensors.push_back(Tensor<T>({cout}));  // zero bias
        cin = cout;
    }
    Tensor<T> dense_w({config.n_pts, dims_.flat_len});
    he_uniform(dense_w, dims_.flat_len);
    params_.tensors.push_back(std::move(dense_w));
    params_.tensors.push_back(Tensor<T>({config.n_pts}));
}

template <typename T>
void CnnModel<T>::set_target_stats(double mean, double std) {
    if (!(std > 0.0) || !std::isfinite(mean) || !std::isfinite(std)) {
        throw std::invalid_argument("CnnModel: target std must be positive and finite");
    }
    target_mean_ = mean;
    target_std_ = std;
}

template <typename T>
const std::vector<T>& CnnModel<T>::forward(const Tensor<T>& input, CnnWorkspace<T>& ws,
                                           std::uint64_t dropout_seed) const {
    if (static_cast<int>(input.shape.size()) != 3 || input.shape[0] != config_.input_time ||
        input.shape[1] != config_.input_rx || input.shape[2] != 1) {
        throw std::invalid_argument("CnnModel::forward: input shape mismatch");
    }

    const int nb = config_.n_blocks;
    const int kw = config_.kernel_rx_effective();
    ws.conv_out.resize(nb);
    ws.pool_out.resize(nb);
    ws.pool_argmax.resize(nb);

    const Tensor<T>* src = &input;
    int h = config_.input_time;
    const int w = config_.input_rx;
    int cin = 1;
    for (int l = 0; l < nb; ++l) {
        const int cout = config_.filters_at(l);
        const int ho = dims_.block_time[l];
        std::vector<int> conv_shape = {h, w, cout};
        if (ws.conv_out[l].shape != conv_shape) ws.conv_out[l] = Tensor<T>(conv_shape);
        std::vector<int> pool_shape = {ho, w, cout};
        if (ws.pool_out[l].shape != pool_shape) ws.pool_out[l] = Tensor<T>(pool_shape);
        ws.pool_argmax[l].resize(static_cast<std::size_t>(ho) * w * cout);

        conv2d_forward(src->data(), h, w, cin, params_.tensors[2 * l].data(), config_.kernel_time,
                       kw, cout, params_.tensors[2 * l + 1].data(), ws.conv_out[l].data());
        relu_inplace(ws.conv_out[l].data(), ws.conv_out[l].numel());
        maxpool_forward(ws.conv_out[l].data(), h, w, cout, config_.pool_time,
                        ws.pool_out[l].data(), ws.pool_argmax[l].data());
        src = &ws.pool_out[l];
        h = ho;
        cin = cout;
    }

    const std::size_t flat = static_cast<std::size_t>(dims_.flat_len);
    const T* flat_src = ws.pool_out[nb - 1].data();
    ws.dropout_mask.assign(flat, T(1));
    ws.dropped.resize(flat);
    if (mode_ == CnnMode::train && config_.dropout_rate > 0.0) {
        Rng rng(dropout_seed);
        const T keep_scale = static_cast<T>(1.0 / (1.0 - config_.dropout_rate));
        for (std::size_t i = 0; i < flat; ++i) {
            ws.dropout_mask[i] = rng.uniform() < config_.dropout_rate ? T(0) : keep_scale;
        }
    }
    for (std::size_t i = 0; i < flat; ++i) ws.dropped[i] = flat_src[i] * ws.dropout_mask[i];

    ws.output.resize(config_.n_pts);
    dense_forward(ws.dropped.data(), dims_.flat_len, params_.tensors[2 * nb].data(),
                  params_.tensors[2 * nb + 1].data(), config_.n_pts, ws.output.data());
    ws.forward_done = true;
    return ws.output;
}

template <typename T>
T CnnModel<T>::loss_from_forward(const CnnWorkspace<T>& ws,
                                 const std::vector<T>& target_std_units) const {
    if (!ws.forward_done) throw std::logic_error("CnnModel: loss requested before forward pass");
    if (target_std_units.size() != ws.output.size()) {
        throw std::invalid_argument("CnnModel: target length mismatch");
    }
    T acc = T(0);
    for (std::size_t o = 0; o < ws.output.size(); ++o) {
        const T e = ws.output[o] - target_std_units[o];
        acc += e * e;
    }
    return acc / static_cast<T>(ws.output.size());
}

template <typename T>
void CnnModel<T>::backward(const Tensor<T>& input, CnnWorkspace<T>& ws,
                           const std::vector<T>& target_std_units, CnnParams<T>& grads,
                           Tensor<T>* input_grad) const {
    if (!ws.forward_done) throw std::logic_error("CnnModel: backward called before forward pass");
    if (grads.tensors.size() != params_.tensors.size()) {
        throw std::invalid_argument("CnnModel: gradient buffer mismatch");
    }

    const int nb = config_.n_blocks;
    const int kw = config_.kernel_rx_effective();
    const int n_out = config_.n_pts;
    ws.back_dconv.resize(nb);
    ws.back_dpool.resize(nb);
    ws.back_wt.resize(nb);

    std::vector<T> dout(n_out);
    for (int o = 0; o < n_out; ++o) {
        dout[o] = T(2) * (ws.output[o] - target_std_units[o]) / static_cast<T>(n_out);
    }

    Tensor<T>& dlast = ws.back_dpool[nb - 1];
    if (dlast.shape != ws.pool_out[nb - 1].shape) dlast = Tensor<T>(ws.pool_out[nb - 1].shape);
    dense_backward(ws.dropped.data(), dims_.flat_len, params_.tensors[2 * nb].data(), n_out,
                   dout.data(), dlast.data(), grads.tensors[2 * nb].data(),
                   grads.tensors[2 * nb + 1].data());
    for (int i = 0; i < dims_.flat_len; ++i) dlast.v[i] *= ws.dropout_mask[i];

    for (int l = nb - 1; l >= 0; --l) {
        const int cout = config_.filters_at(l);
        const int h = (l == 0) ? config_.input_time : dims_.block_time[l - 1];
        const int w = config_.input_rx;
        const int cin = (l == 0) ? 1 : config_.filters_at(l - 1);

        Tensor<T>& dconv = ws.back_dconv[l];
        if (dconv.shape != ws.conv_out[l].shape) dconv = Tensor<T>(ws.conv_out[l].shape);
        dconv.fill(T(0));
        maxpool_backward(ws.back_dpool[l].data(), dims_.block_time[l], w, cout, config_.pool_time,
                         ws.pool_argmax[l].data(), dconv.data());
        // ReLU gate: conv_out holds post-activation values
        const T* act = ws.conv_out[l].data();
        for (std::size_t i = 0; i < dconv.numel(); ++i) {
            if (!(act[i] > T(0))) dconv.v[i] = T(0);
        }

        const T* src = (l == 0) ? input.data() : ws.pool_out[l - 1].data();
        T* din = nullptr;
        if (l > 0) {
            Tensor<T>& dprev = ws.back_dpool[l - 1];
            if (dprev.shape != ws.pool_out[l - 1].shape) dprev = Tensor<T>(ws.pool_out[l - 1].shape);
            dprev.fill(T(0));
            din = dprev.data();
        } else if (input_grad != nullptr) {
            if (input_grad->shape != input.shape) *input_grad = Tensor<T>(input.shape);
            input_grad->fill(T(0));
            din = input_grad->data();
        }
        conv2d_backward(src, h, w, cin, params_.tensors[2 * l].data(), config_.kernel_time, kw,
                        cout, dconv.data(), din, grads.tensors[2 * l].data(),
                        grads.tensors[2 * l + 1].data(), ws.back_wt[l]);
    }
}

template <typename T>
std::vector<T> CnnModel<T>::predict(const Tensor<T>& input) const {
    if (mode_ != CnnMode::eval) throw std::logic_error("CnnModel::predict requires eval mode");
    CnnWorkspace<T> ws;
    forward(input, ws);
    std::vector<T> out(ws.output);
    for (auto& v : out) v = static_cast<T>(static_cast<double>(v) * target_std_ + target_mean_);
    return out;
}

template <typename T>
CnnParams<T> CnnModel<T>::zero_grads() const {
    CnnParams<T> g;
    g.tensors.reserve(params_.tensors.size());
    for (const auto& t : params_.tensors) {
        Tensor<T> z;
        z.shape = t.shape;
        z.v.assign(t.v.size(), T(0));
        g.tensors.push_back(std::move(z));
    }
    return g;
}

// ---- Adam ------------------------------------------------------------------

template <typename T>
AdamState<T>::AdamState(const CnnParams<T>& params, const AdamConfig& config) : config_(config) {
    if (config.beta1 < 0 || config.beta1 >= 1 || config.beta2 < 0 || config.beta2 >= 1) {
        throw std::invalid_argument("AdamConfig: betas must be in [0, 1)");
    }
    if (config.epsilon <= 0) throw std::invalid_argument("AdamConfig: epsilon must be > 0");
    for (const auto& t : params.tensors) {
        Tensor<T> z;
        z.shape = t.shape;
        z.v.assign(t.v.size(), T(0));
        m_.push_back(z);
        v_.push_back(std::move(z));
    }
}

template <typename T>
void AdamState<T>::step(CnnParams<T>& params, const CnnParams<T>& grads) {
    if (params.tensors.size() != m_.size() || grads.tensors.size() != m_.size()) {
        throw std::invalid_argument("AdamState: tensor count mismatch");
    }
    ++step_count_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    const double lr = config_.learning_rate;
    const double eps = config_.epsilon;

    for (std::size_t t = 0; t < m_.size(); ++t) {
        T* p = params.tensors[t].data();
        const T* g = grads.tensors[t].data();
        T* m = m_[t].data();
        T* v = v_[t].data();
        const std::size_t n = params.tensors[t].numel();
        for (std::size_t i = 0; i < n; ++i) {
            const double gi = static_cast<double>(g[i]);
            const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
            const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
            m[i] = static_cast<T>(mi);
            v[i] = static_cast<T>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            p[i] = static_cast<T>(static_cast<double>(p[i]) - lr * mhat / (std::sqrt(vhat) + eps));
        }
    }
}

// ---- training loop ---------------------------------------------------------

template <typename T>
TrainResult train(CnnModel<T>& model, const std::vector<Tensor<T>>& inputs,
                  const std::vector<std::vector<double>>& targets_c, const TrainConfig& config,
                  std::uint64_t seed) {
    const int n = static_cast<int>(inputs.size());
    if (n == 0 || targets_c.size() != inputs.size()) {
        throw std::invalid_argument("train: dataset empty or misaligned");
    }
    if (config.batch_size < 1 || config.max_epochs < 1) {
        throw std::invalid_argument("train: bad batch size or epoch count");
    }

    // target standardization over the training fold
    double mean = 0.0;
    std::size_t count = 0;
    for (const auto& t : targets_c) {
        for (double v : t) {
            mean += v;
            ++count;
        }
    }
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (const auto& t : targets_c) {
        for (double v : t) var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(count);
    const double stddev = std::sqrt(var) > 1.0e-9 ? std::sqrt(var) : 1.0;
    model.set_target_stats(mean, stddev);

    std::vector<std::vector<T>> targets(inputs.size());
    for (std::size_t i = 0; i < targets_c.size(); ++i) {
        targets[i].resize(targets_c[i].size());
        for (std::size_t o = 0; o < targets_c[i].size(); ++o) {
            targets[i][o] = static_cast<T>((targets_c[i][o] - mean) / stddev);
        }
    }

    Rng rng(derive_seed(seed, 0x7e41u));
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);

    int n_val = 0;
    if (config.validation_fraction > 0.0 && n >= 2) {
        n_val = std::max(1, static_cast<int>(std::floor(config.validation_fraction * n)));
        n_val = std::min(n_val, n - 1);
    }
    std::vector<int> val_idx(order.begin(), order.begin() + n_val);
    std::vector<int> train_idx(order.begin() + n_val, order.end());
    const int n_train = static_cast<int>(train_idx.size());

    const int slots = std::min(config.batch_size, n_train);
    std::vector<CnnWorkspace<T>> ws(slots);
    std::vector<CnnParams<T>> slot_grads;
    slot_grads.reserve(slots);
    for (int s = 0; s < slots; ++s) slot_grads.push_back(model.zero_grads());
    std::vector<double> slot_loss(slots, 0.0);

    CnnParams<T> batch_grads = model.zero_grads();
    AdamState<T> adam(model.params(), config.adam);

    // separate eval workspaces sized once for validation
    const int val_workers = std::max(1, std::min(worker_count(), std::max(n_val, 1)));
    std::vector<CnnWorkspace<T>> val_ws(val_workers);
    std::vector<double> val_loss_slots(std::max(n_val, 1), 0.0);

    auto validation_mse = [&]() -> double {
        if (n_val == 0) return 0.0;
        model.set_mode(CnnMode::eval);
        parallel_for_indexed(n_val, val_workers, [&](int worker, int i) {
            model.forward(inputs[val_idx[i]], val_ws[worker]);
            val_loss_slots[i] =
                static_cast<double>(model.loss_from_forward(val_ws[worker], targets[val_idx[i]]));
        });
        model.set_mode(CnnMode::train);
        double acc = 0.0;
        for (int i = 0; i < n_val; ++i) acc += val_loss_slots[i];
        return acc / static_cast<double>(n_val);
    };

    TrainResult result;
    CnnParams<T> best_params = model.params();
    double best_metric = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int stall = 0;

    model.set_mode(CnnMode::train);
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        double epoch_loss = 0.0;

        for (int start = 0; start < n_train; start += config.batch_size) {
            const int b = std::min(config.batch_size, n_train - start);
            for (int s = 0; s < b; ++s) {
                for (auto& t : slot_grads[s].tensors) t.fill(T(0));
            }
            parallel_for_indexed(b, std::min(worker_count(), b), [&](int, int s) {
                const int idx = train_idx[start + s];
                const std::uint64_t drop_seed = derive_seed(seed, 0xd0u, epoch, idx);
                model.forward(inputs[idx], ws[s], drop_seed);
                slot_loss[s] = static_cast<double>(model.loss_from_forward(ws[s], targets[idx]));
                model.backward(inputs[idx], ws[s], targets[idx], slot_grads[s]);
            });

            double batch_loss = 0.0;
            for (auto& t : batch_grads.tensors) t.fill(T(0));
            const T inv_b = static_cast<T>(1.0 / static_cast<double>(b));
            for (int s = 0; s < b; ++s) {
                batch_loss += slot_loss[s];
                for (std::size_t t = 0; t < batch_grads.tensors.size(); ++t) {
                    T* acc = batch_grads.tensors[t].data();
                    const T* g = slot_grads[s].tensors[t].data();
                    const std::size_t len = batch_grads.tensors[t].numel();
                    for (std::size_t i = 0; i < len; ++i) acc[i] += g[i] * inv_b;
                }
            }
            batch_loss /= static_cast<double>(b);
            if (!std::isfinite(batch_loss)) throw DivergenceError(epoch);
            epoch_loss += batch_loss * b;

            adam.step(model.params(), batch_grads);
        }
        epoch_loss /= static_cast<double>(n_train);

        const double val_mse = validation_mse();
        result.history.push_back({epoch_loss, val_mse});

        const double metric = n_val > 0 ? val_mse : epoch_loss;
        if (metric < best_metric) {
            best_metric = metric;
            best_epoch = epoch;
            best_params = model.params();
            stall = 0;
        } else if (++stall >= config.patience) {
            break;
        }
    }

    model.params() = std::move(best_params);
    model.set_mode(CnnMode::eval);
    result.best_epoch = best_epoch;
    result.best_val_mse = best_metric;
    return result;
}

template class CnnModel<float>;
template class CnnModel<double>;
template class AdamState<float>;
template class AdamState<double>;
template TrainResult train<float>(CnnModel<float>&, const std::vector<Tensor<float>>&,
                                  const std::vector<std::vector<double>>&, const TrainConfig&,
                                  std::uint64_t);
template TrainResult train<double>(CnnModel<double>&, const std::vector<Tensor<double>>&,
                                   const std::vector<std::vector<double>>&, const TrainConfig&,
                                   std::uint64_t);

}  // namespace thermoscope
