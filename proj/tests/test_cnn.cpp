#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "thermoscope/cnn.hpp"
#include "thermoscope/cnn_kernels.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/rng.hpp"

using namespace thermoscope;
namespace k = thermoscope::cnn_kernels;

namespace {

CnnConfig micro_config() {
    CnnConfig c;
    c.input_time = 32;
    c.input_rx = 3;
    c.pool_time = 2;
    c.n_pts = 4;
    c.dropout_rate = 0.0;
    return c;
}

template <typename T>
Tensor<T> random_input(const CnnConfig& c, std::uint64_t seed) {
    Tensor<T> x({c.input_time, c.input_rx, 1});
    Rng rng(seed);
    for (auto& v : x.v) v = static_cast<T>(rng.normal());
    return x;
}

// central finite differences over every parameter
template <typename T>
double max_gradient_rel_error(CnnModel<T>& model, const Tensor<T>& x, const std::vector<T>& y,
                              double step) {
    CnnWorkspace<T> ws;
    model.set_mode(CnnMode::train);
    model.forward(x, ws, 1);
    auto grads = model.zero_grads();
    model.backward(x, ws, y, grads);

    auto loss_at = [&]() {
        CnnWorkspace<T> w2;
        model.forward(x, w2, 1);
        return static_cast<double>(model.loss_from_forward(w2, y));
    };

    double worst = 0.0;
    for (std::size_t t = 0; t < model.params().tensors.size(); ++t) {
        auto& tensor = model.params().tensors[t];
        for (std::size_t i = 0; i < tensor.numel(); ++i) {
            const T saved = tensor.v[i];
            tensor.v[i] = static_cast<T>(saved + step);
            const double up = loss_at();
            tensor.v[i] = static_cast<T>(saved - step);
            const double down = loss_at();
            tensor.v[i] = saved;
            const double fd = (up - down) / (2.0 * step);
            const double an = static_cast<double>(grads.tensors[t].v[i]);
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
            worst = std::max(worst, std::abs(fd - an) / denom);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("conv2d: delta kernel is the identity") {
    const int h = 7, w = 3;
    std::vector<double> in(h * w);
    Rng rng(3);
    for (auto& v : in) v = rng.normal();
    // 3x1 kernel, delta at the center row (pad_t = 1)
    std::vector<double> wgt = {0.0, 1.0, 0.0};
    std::vector<double> bias = {0.0};
    std::vector<double> out(h * w);
    k::conv2d_forward(in.data(), h, w, 1, wgt.data(), 3, 1, 1, bias.data(), out.data());
    for (int i = 0; i < h * w; ++i) REQUIRE(out[i] == doctest::Approx(in[i]).epsilon(1e-15));
}

TEST_CASE("conv2d: all-ones 3x1 kernel shows the zero padding at borders") {
    const int h = 6, w = 1;
    std::vector<double> in(h, 1.0);
    std::vector<double> wgt = {1.0, 1.0, 1.0};
    std::vector<double> bias = {0.0};
    std::vector<double> out(h);
    k::conv2d_forward(in.data(), h, w, 1, wgt.data(), 3, 1, 1, bias.data(), out.data());
    CHECK(out.front() == doctest::Approx(2.0));
    CHECK(out.back() == doctest::Approx(2.0));
    for (int i = 1; i + 1 < h; ++i) REQUIRE(out[i] == doctest::Approx(3.0));
}

TEST_CASE("conv2d matches the six-nested-loop reference") {
    const int h = 5, w = 3, cin = 2, cout = 4, kh = 3, kw = 2;
    Rng rng(17);
    std::vector<double> in(h * w * cin), wgt(kh * kw * cin * cout), bias(cout);
    for (auto& v : in) v = rng.normal();
    for (auto& v : wgt) v = rng.normal();
    for (auto& v : bias) v = rng.normal();

    std::vector<double> out(h * w * cout);
    k::conv2d_forward(in.data(), h, w, cin, wgt.data(), kh, kw, cout, bias.data(), out.data());
    const auto expected = oracles::reference_conv2d(in, h, w, cin, wgt, kh, kw, cout, bias);
    for (std::size_t i = 0; i < out.size(); ++i) {
        REQUIRE(out[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    }
}

TEST_CASE("relu, maxpool, dropout behaviors") {
    std::vector<double> x = {-1.0, 0.0, 2.0};
    k::relu_inplace(x.data(), x.size());
    CHECK(x == std::vector<double>{0.0, 0.0, 2.0});

    std::vector<double> pin = {1.0, 3.0, 2.0, 8.0};
    std::vector<double> pout(2);
    std::vector<int> argmax(2);
    k::maxpool_forward(pin.data(), 4, 1, 1, 2, pout.data(), argmax.data());
    CHECK(pout == std::vector<double>{3.0, 8.0});
    CHECK(argmax == std::vector<int>{1, 1});

    // ties route to the first index
    std::vector<double> tie = {5.0, 5.0};
    k::maxpool_forward(tie.data(), 2, 1, 1, 2, pout.data(), argmax.data());
    CHECK(argmax[0] == 0);

    // dropout rate 0 is the identity in both modes
    CnnConfig c = micro_config();
    c.dropout_rate = 0.0;
    CnnModel<double> model(c, 5);
    model.set_target_stats(0.0, 1.0);
    const auto x0 = random_input<double>(c, 8);
    CnnWorkspace<double> ws;
    model.set_mode(CnnMode::train);
    const auto train_out = model.forward(x0, ws, 123);
    std::vector<double> train_copy = train_out;
    model.set_mode(CnnMode::eval);
    const auto eval_out = model.forward(x0, ws, 456);
    for (std::size_t i = 0; i < eval_out.size(); ++i) {
        REQUIRE(train_copy[i] == doctest::Approx(eval_out[i]).epsilon(1e-12));
    }
}

TEST_CASE("maxpool truncates a remainder and rejects oversized windows") {
    CnnConfig c = micro_config();
    c.input_time = 9;  // 9 -> 4 -> 2 -> 1
    const CnnDims dims = compute_dims(c);
    CHECK(dims.block_time == std::vector<int>{4, 2, 1});

    c.input_time = 4;  // block 2 would pool a length-1 extent with window 2
    CHECK_THROWS_AS(compute_dims(c), std::invalid_argument);
}

TEST_CASE("backward before forward is a state error") {
    CnnConfig c = micro_config();
    CnnModel<double> model(c, 7);
    CnnWorkspace<double> ws;
    auto grads = model.zero_grads();
    const auto x = random_input<double>(c, 3);
    CHECK_THROWS_AS(model.backward(x, ws, std::vector<double>(c.n_pts, 0.0), grads),
                    std::logic_error);
}

TEST_CASE("zero input and zero targets give zero loss and zero gradients") {
    CnnConfig c = micro_config();
    CnnModel<double> model(c, 11);
    Tensor<double> x({c.input_time, c.input_rx, 1});  // zeros
    const std::vector<double> y(c.n_pts, 0.0);
    CnnWorkspace<double> ws;
    model.set_mode(CnnMode::train);
    model.forward(x, ws, 1);
    CHECK(model.loss_from_forward(ws, y) == doctest::Approx(0.0));
    auto grads = model.zero_grads();
    model.backward(x, ws, y, grads);
    for (const auto& t : grads.tensors) {
        for (double v : t.v) REQUIRE(v == 0.0);
    }
}

TEST_CASE("gradients match central finite differences (micro model, 32x3)") {
    CnnConfig c = micro_config();
    CnnModel<double> model(c, 2024);
    model.set_target_stats(0.0, 1.0);
    const auto x = random_input<double>(c, 55);
    std::vector<double> y(c.n_pts);
    Rng rng(56);
    for (auto& v : y) v = rng.normal();

    const double worst = max_gradient_rel_error(model, x, y, 1e-5);
    CAPTURE(worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("gradient accumulation is additive over repeated backward calls") {
    CnnConfig c = micro_config();
    CnnModel<double> model(c, 77);
    model.set_target_stats(0.0, 1.0);
    const auto x = random_input<double>(c, 78);
    std::vector<double> y(c.n_pts, 0.5);

    CnnWorkspace<double> ws;
    model.set_mode(CnnMode::train);
    model.forward(x, ws, 1);
    auto once = model.zero_grads();
    model.backward(x, ws, y, once);
    auto twice = model.zero_grads();
    model.backward(x, ws, y, twice);
    model.backward(x, ws, y, twice);
    for (std::size_t t = 0; t < once.tensors.size(); ++t) {
        for (std::size_t i = 0; i < once.tensors[t].numel(); ++i) {
            REQUIRE(twice.tensors[t].v[i] == doctest::Approx(2.0 * once.tensors[t].v[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("relu/maxpool gradient sparsity") {
    CnnConfig c = micro_config();
    c.n_blocks = 1;
    CnnModel<double> model(c, 13);
    model.set_target_stats(0.0, 1.0);
    const auto x = random_input<double>(c, 14);
    std::vector<double> y(c.n_pts, 1.0);

    CnnWorkspace<double> ws;
    model.set_mode(CnnMode::train);
    model.forward(x, ws, 1);
    auto grads = model.zero_grads();
    Tensor<double> input_grad;
    model.backward(x, ws, y, grads, &input_grad);

    // clipped ReLU outputs: perturbing the corresponding conv bias must not
    // change the loss to first order -> check via the activation mask
    const auto& act = ws.conv_out[0];
    int clipped = 0;
    for (double v : act.v) {
        if (v == 0.0) ++clipped;
    }
    CHECK(clipped > 0);  // the check below is only meaningful if some units clip
    CHECK(input_grad.numel() == x.numel());
}

TEST_CASE("adam: first-step magnitude, zero-gradient fixed point, quadratic descent") {
    AdamConfig cfg;
    cfg.learning_rate = 0.01;

    CnnParams<double> params;
    params.tensors.push_back(Tensor<double>({1}));
    params.tensors[0].v[0] = 1.0;
    AdamState<double> adam(params, cfg);

    CnnParams<double> grads;
    grads.tensors.push_back(Tensor<double>({1}));
    grads.tensors[0].v[0] = 1.0;  // f = w^2/2 at w = 1
    adam.step(params, grads);
    CHECK(std::abs((1.0 - params.tensors[0].v[0]) - 0.01) < 1e-6);

    // zero gradient leaves parameters unchanged
    CnnParams<double> p2;
    p2.tensors.push_back(Tensor<double>({1}));
    p2.tensors[0].v[0] = 0.7;
    AdamState<double> adam2(p2, cfg);
    CnnParams<double> zero;
    zero.tensors.push_back(Tensor<double>({1}));
    for (int i = 0; i < 10; ++i) adam2.step(p2, zero);
    CHECK(p2.tensors[0].v[0] == doctest::Approx(0.7).epsilon(1e-12));

    // 2000 steps on f = w^2 with lr 0.05 drive |w| below 1e-3
    AdamConfig cfg3;
    cfg3.learning_rate = 0.05;
    CnnParams<double> p3;
    p3.tensors.push_back(Tensor<double>({1}));
    p3.tensors[0].v[0] = 1.0;
    AdamState<double> adam3(p3, cfg3);
    CnnParams<double> g3;
    g3.tensors.push_back(Tensor<double>({1}));
    for (int i = 0; i < 2000; ++i) {
        g3.tensors[0].v[0] = 2.0 * p3.tensors[0].v[0];
        adam3.step(p3, g3);
    }
    CHECK(std::abs(p3.tensors[0].v[0]) < 1e-3);
}

TEST_CASE("train: memorizes a 4-sample toy dataset") {
    CnnConfig c = micro_config();
    CnnModel<double> model(c, 99);

    std::vector<Tensor<double>> xs;
    std::vector<std::vector<double>> ys;
    Rng rng(100);
    for (int i = 0; i < 4; ++i) {
        xs.push_back(random_input<double>(c, 200 + i));
        std::vector<double> y(c.n_pts);
        for (auto& v : y) v = rng.uniform(20.0, 180.0);
        ys.push_back(y);
    }

    TrainConfig tc;
    tc.batch_size = 4;
    tc.max_epochs = 2000;
    tc.patience = 2000;
    tc.validation_fraction = 0.0;
    const TrainResult result = train(model, xs, ys, tc, 42);

    // standardized training MSE under 1e-3, and predictions within 0.5 C
    CHECK(result.history.back().train_mse < 1e-3);
    for (int i = 0; i < 4; ++i) {
        const auto pred = model.predict(xs[i]);
        for (int o = 0; o < c.n_pts; ++o) {
            REQUIRE(std::abs(pred[o] - ys[i][o]) < 0.5);
        }
    }
}

TEST_CASE("train: identical seeds reproduce the loss history bit-for-bit") {
    CnnConfig c = micro_config();
    c.dropout_rate = 0.2;

    std::vector<Tensor<double>> xs;
    std::vector<std::vector<double>> ys;
    Rng rng(300);
    for (int i = 0; i < 12; ++i) {
        xs.push_back(random_input<double>(c, 400 + i));
        std::vector<double> y(c.n_pts);
        for (auto& v : y) v = rng.uniform(20.0, 180.0);
        ys.push_back(y);
    }

    TrainConfig tc;
    tc.max_epochs = 8;
    tc.patience = 8;
    auto run_once = [&] {
        CnnModel<double> model(c, 99);
        return train(model, xs, ys, tc, 4242);
    };
    const TrainResult a = run_once();
    const TrainResult b = run_once();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e) {
        REQUIRE(a.history[e].train_mse == b.history[e].train_mse);
        REQUIRE(a.history[e].val_mse == b.history[e].val_mse);
    }
}

TEST_CASE("train: full-batch descent with small lr never increases the loss") {
    CnnConfig c = micro_config();
    CnnModel<double> model(c, 500);
    std::vector<Tensor<double>> xs;
    std::vector<std::vector<double>> ys;
    Rng rng(501);
    for (int i = 0; i < 4; ++i) {
        xs.push_back(random_input<double>(c, 600 + i));
        std::vector<double> y(c.n_pts);
        for (auto& v : y) v = rng.uniform(20.0, 180.0);
        ys.push_back(y);
    }
    TrainConfig tc;
    tc.adam.learning_rate = 1e-4;
    tc.batch_size = 4;
    tc.max_epochs = 50;
    tc.patience = 50;
    tc.validation_fraction = 0.0;
    const TrainResult result = train(model, xs, ys, tc, 7);
    for (std::size_t e = 1; e < result.history.size(); ++e) {
        REQUIRE(result.history[e].train_mse <=
                result.history[e - 1].train_mse * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("train: divergence raises an error naming the epoch") {
    CnnConfig c = micro_config();
    CnnModel<float> model(c, 1);
    std::vector<Tensor<float>> xs = {random_input<float>(c, 2), random_input<float>(c, 3)};
    std::vector<std::vector<double>> ys = {std::vector<double>(c.n_pts, 100.0),
                                           std::vector<double>(c.n_pts, 50.0)};
    TrainConfig tc;
    tc.adam.learning_rate = 1e30;
    tc.max_epochs = 50;
    tc.validation_fraction = 0.0;
    CHECK_THROWS_AS(train(model, xs, ys, tc, 1), DivergenceError);
}

TEST_CASE("predict: eval determinism and output length across sweep configs") {
    for (int n_pts : {5, 25, 50}) {
        for (int n_rx : {1, 3, 9}) {
            CnnConfig c;
            c.input_time = 512;
            c.input_rx = n_rx;
            c.n_pts = n_pts;
            const CnnDims dims = compute_dims(c);
            // shape contract: flat = (time / pool^3) * n_rx * (8 * 2^2)
            CHECK(dims.flat_len == (512 / 4 / 4 / 4) * n_rx * 32);

            CnnModel<float> model(c, 5);
            model.set_target_stats(100.0, 40.0);
            model.set_mode(CnnMode::eval);
            Tensor<float> x({c.input_time, c.input_rx, 1});
            Rng rng(6);
            for (auto& v : x.v) v = static_cast<float>(rng.normal());
            const auto p1 = model.predict(x);
            const auto p2 = model.predict(x);
            REQUIRE(p1.size() == static_cast<std::size_t>(n_pts));
            REQUIRE(p1 == p2);
        }
    }
}

TEST_CASE("kernel_rx clamps to the receiver extent for n_rx = 1") {
    CnnConfig c;
    c.input_time = 256;
    c.input_rx = 1;
    CHECK(c.kernel_rx_effective() == 1);
    CnnModel<float> model(c, 3);
    CHECK(model.params().tensors[0].shape == std::vector<int>{16, 1, 1, 8});
}

TEST_CASE("dropout: train-mode mask mean matches the eval output within 3 SE") {
    CnnConfig c = micro_config();
    c.dropout_rate = 0.3;
    CnnModel<double> model(c, 8);
    model.set_target_stats(0.0, 1.0);
    const auto x = random_input<double>(c, 9);

    model.set_mode(CnnMode::eval);
    CnnWorkspace<double> ws;
    const std::vector<double> eval_out = model.forward(x, ws);

    model.set_mode(CnnMode::train);
    const int n_masks = 10000;
    std::vector<double> mean(c.n_pts, 0.0), m2(c.n_pts, 0.0);
    for (int trial = 0; trial < n_masks; ++trial) {
        const auto& out = model.forward(x, ws, derive_seed(123, trial));
        for (int o = 0; o < c.n_pts; ++o) {
            const double delta = out[o] - mean[o];
            mean[o] += delta / (trial + 1);
            m2[o] += delta * (out[o] - mean[o]);
        }
    }
    for (int o = 0; o < c.n_pts; ++o) {
        const double se = std::sqrt(m2[o] / (n_masks - 1.0) / n_masks);
        CAPTURE(o);
        REQUIRE(std::abs(mean[o] - eval_out[o]) < 3.0 * se + 1e-12);
    }
}
