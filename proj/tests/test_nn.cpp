#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "drf/adam.hpp"
#include "drf/encoding.hpp"
#include "drf/errors.hpp"
#include "drf/loss.hpp"
#include "drf/mlp.hpp"
#include "drf/rng.hpp"

using drf::Activation;
using drf::EncoderConfig;
using drf::Mlp;
using drf::MlpConfig;

TEST_CASE("encoder width is 64 with default levels, 6 in raw mode") {
    EncoderConfig cfg;
    CHECK(drf::encoded_width(cfg) == 64);
    EncoderConfig raw;
    raw.encode = false;
    CHECK(drf::encoded_width(raw) == 6);
}

TEST_CASE("encoding the origin gives exact (0, 1) pairs") {
    EncoderConfig cfg;
    const double zero[6] = {0, 0, 0, 0, 0, 0};
    std::vector<double> out(drf::encoded_width(cfg));
    drf::positional_encode(cfg, zero, out.data());
    for (std::size_t i = 0; i < out.size(); i += 2) {
        CHECK(out[i] == 0.0);
        CHECK(out[i + 1] == 1.0);
    }
}

TEST_CASE("encoding follows sin/cos at dyadic frequencies") {
    EncoderConfig cfg;
    const double coords[6] = {0.5, -0.25, 0.1, 0.2, 0.3, 0.4};
    std::vector<double> out(64);
    drf::positional_encode(cfg, coords, out.data());
    // display group: x with one level
    CHECK(out[0] == doctest::Approx(std::sin(std::numbers::pi * 0.5)).epsilon(1e-15));
    CHECK(out[1] == doctest::Approx(std::cos(std::numbers::pi * 0.5)).epsilon(1e-15));
    // angular group starts at 4; first scalar u, levels 0..4
    for (std::size_t l = 0; l < 5; ++l) {
        const double f = std::pow(2.0, static_cast<double>(l)) * std::numbers::pi;
        CHECK(out[4 + 2 * l] == doctest::Approx(std::sin(f * 0.1)).epsilon(1e-12));
        CHECK(out[4 + 2 * l + 1] == doctest::Approx(std::cos(f * 0.1)).epsilon(1e-12));
    }
    // spatial group starts at 4 + 20; second scalar t at offset 24 + 20
    const double f9 = std::pow(2.0, 9.0) * std::numbers::pi;
    CHECK(out[24 + 20 + 18] == doctest::Approx(std::sin(f9 * 0.4)).epsilon(1e-9));
}

TEST_CASE("raw mode passes the coordinates through") {
    EncoderConfig raw;
    raw.encode = false;
    const double coords[6] = {1, -1, 0.5, -0.5, 0.25, -0.25};
    double out[6];
    drf::positional_encode(raw, coords, out);
    for (int i = 0; i < 6; ++i) CHECK(out[i] == coords[i]);
}

TEST_CASE("only the touched coordinate group changes its features") {
    EncoderConfig cfg;
    double a[6] = {0.3, 0.4, 0.1, 0.2, 0.6, 0.7};
    double b[6] = {0.3, 0.4, 0.15, 0.2, 0.6, 0.7}; // u changed
    std::vector<double> ea(64), eb(64);
    drf::positional_encode(cfg, a, ea.data());
    drf::positional_encode(cfg, b, eb.data());
    for (std::size_t i = 0; i < 4; ++i) CHECK(ea[i] == eb[i]);          // display
    bool angular_changed = false;
    for (std::size_t i = 4; i < 14; ++i) angular_changed |= ea[i] != eb[i];
    CHECK(angular_changed);
    for (std::size_t i = 14; i < 24; ++i) CHECK(ea[i] == eb[i]);        // v slice
    for (std::size_t i = 24; i < 64; ++i) CHECK(ea[i] == eb[i]);        // spatial
}

TEST_CASE("coordinate noise: disabled mode is the identity") {
    drf::NoiseConfig cfg;
    cfg.enabled = false;
    drf::RngStream rng(1, 1);
    double coords[6] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    const double before[6] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    drf::inject_coordinate_noise(cfg, coords, rng);
    for (int i = 0; i < 6; ++i) CHECK(coords[i] == before[i]);
}

TEST_CASE("coordinate noise: per-group standard deviations") {
    drf::NoiseConfig cfg;
    drf::RngStream rng(2, 1);
    const int n = 100000;
    double sq[6] = {0, 0, 0, 0, 0, 0};
    for (int it = 0; it < n; ++it) {
        double coords[6] = {0, 0, 0, 0, 0, 0};
        drf::inject_coordinate_noise(cfg, coords, rng);
        for (int i = 0; i < 6; ++i) sq[i] += coords[i] * coords[i];
    }
    const double expect[6] = {5e-3, 5e-3, 1e-2, 1e-2, 1e-3, 1e-3};
    for (int i = 0; i < 6; ++i) {
        const double std_est = std::sqrt(sq[i] / n);
        CHECK(std::fabs(std_est - expect[i]) / expect[i] < 0.05);
    }
}

TEST_CASE("coordinate noise touches only its group") {
    drf::NoiseConfig cfg;
    cfg.display_std = 0.0;
    cfg.subview_std = 0.0;
    drf::RngStream rng(3, 1);
    double coords[6] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    drf::inject_coordinate_noise(cfg, coords, rng);
    CHECK(coords[0] == 0.1);
    CHECK(coords[1] == 0.2);
    CHECK(coords[2] != 0.3);
    CHECK(coords[4] == 0.5);
    CHECK(coords[5] == 0.6);
}

TEST_CASE("mlp parameter counts") {
    Mlp<float> ours(MlpConfig{64, {32, 32, 32}, Activation::Sine, 30.0});
    CHECK(ours.param_count() == 64 * 32 + 32 + 2 * (32 * 32 + 32) + 32 + 1);
    CHECK(ours.param_count() == 4225);
    Mlp<float> vanilla(MlpConfig{6, {32, 32, 32}, Activation::Relu, 30.0});
    CHECK(vanilla.param_count() == 2369);
}

TEST_CASE("zero parameters give zero output") {
    Mlp<double> net(MlpConfig{4, {8, 8}, Activation::Sine, 30.0});
    const std::vector<double> X = {0.5, -0.5, 0.25, 1.0};
    double y = 1.0;
    net.forward(X.data(), 1, &y);
    CHECK(y == 0.0);
}

TEST_CASE("tiny sine network matches a hand computation") {
    Mlp<double> net(MlpConfig{2, {2}, Activation::Sine, 30.0});
    // layout: W0 (2x2 row-major), b0 (2), W1 (1x2), b1 (1)
    net.theta = {0.1, 0.2, 0.3, 0.4, 0.01, 0.02, 0.5, 0.6, 0.07};
    const std::vector<double> X = {0.3, -0.7};
    double y = 0.0;
    net.forward(X.data(), 1, &y);
    const double z0 = 0.1 * 0.3 + 0.2 * -0.7 + 0.01;
    const double z1 = 0.3 * 0.3 + 0.4 * -0.7 + 0.02;
    const double expect = 0.5 * std::sin(30.0 * z0) + 0.6 * std::sin(30.0 * z1) + 0.07;
    CHECK(y == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("relu network with dead hidden layers returns the head bias") {
    Mlp<double> net(MlpConfig{3, {4, 4}, Activation::Relu, 30.0});
    // all weights zero, hidden biases negative, head bias distinctive
    for (auto& v : net.theta) v = 0.0;
    // biases of layer 0 live after 3*4 weights
    for (int i = 0; i < 4; ++i) net.theta[12 + i] = -1.0;
    for (int i = 0; i < 4; ++i) net.theta[16 + 16 + i] = -2.0;
    net.theta.back() = 0.625;
    const std::vector<double> X = {1.0, 2.0, 3.0};
    double y = 0.0;
    net.forward(X.data(), 1, &y);
    CHECK(y == 0.625);
}

TEST_CASE("sine layer derivative is omega cos(omega z)") {
    // 1 -> 1 -> 1 network: y = w1 * sin(omega * (w0 x + b0)) + b1
    Mlp<double> net(MlpConfig{1, {1}, Activation::Sine, 30.0});
    net.theta = {0.7, 0.1, 1.3, 0.0}; // w0, b0, w1, b1
    for (double x : {-0.9, -0.2, 0.0, 0.4, 1.1}) {
        std::vector<double> grad;
        const double dy = 1.0;
        net.forward_backward(&x, 1, &dy, grad);
        const double z = 0.7 * x + 0.1;
        // d y / d b0 = w1 * omega * cos(omega z)
        CHECK(grad[1] == doctest::Approx(1.3 * 30.0 * std::cos(30.0 * z)).epsilon(1e-12));
        // d y / d w0 = w1 * omega * cos(omega z) * x
        CHECK(grad[0] == doctest::Approx(1.3 * 30.0 * std::cos(30.0 * z) * x).epsilon(1e-12));
    }
}

namespace {

// L(theta) = 0.5 * sum_r y_r^2 evaluated with the network's own forward pass.
template <typename Net>
double half_square_loss(Net& net, const std::vector<double>& X, std::size_t n) {
    std::vector<double> y(n);
    net.forward(X.data(), n, y.data());
    double acc = 0.0;
    for (double v : y) acc += 0.5 * v * v;
    return acc;
}

void check_grad_fd(Activation act, std::uint64_t seed) {
    MlpConfig cfg{6, {8, 8}, act, 30.0};
    Mlp<double> net(cfg);
    net.init(drf::RngStream(seed, 0));
    const std::size_t n = 5;
    std::vector<double> X(n * 6);
    drf::RngStream rng(seed, 1);
    for (auto& v : X) v = rng.uniform(-1.0, 1.0);

    std::vector<double> y(n), dy(n), grad;
    net.forward(X.data(), n, y.data());
    for (std::size_t r = 0; r < n; ++r) dy[r] = y[r];
    net.forward_backward(X.data(), n, dy.data(), grad);

    drf::RngStream pick(seed, 2);
    for (int it = 0; it < 30; ++it) {
        const std::size_t i = pick.below(net.param_count());
        const double h = 1e-6;
        const double saved = net.theta[i];
        net.theta[i] = saved + h;
        const double lp = half_square_loss(net, X, n);
        net.theta[i] = saved - h;
        const double lm = half_square_loss(net, X, n);
        net.theta[i] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        const double denom = std::max({std::fabs(fd), std::fabs(grad[i]), 1e-8});
        CHECK(std::fabs(fd - grad[i]) / denom < 1e-5);
    }
}

} // namespace

TEST_CASE("backward matches finite differences for sine networks") {
    check_grad_fd(Activation::Sine, 41);
}

TEST_CASE("backward matches finite differences for relu networks") {
    check_grad_fd(Activation::Relu, 43);
}

TEST_CASE("zero upstream gradient gives zero parameter gradient") {
    Mlp<double> net(MlpConfig{4, {8}, Activation::Sine, 30.0});
    net.init(drf::RngStream(7, 0));
    std::vector<double> X(4, 0.5), grad;
    const double dy = 0.0;
    net.forward_backward(X.data(), 1, &dy, grad);
    for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("initialization is deterministic and respects its bounds") {
    MlpConfig cfg{64, {32, 32, 32}, Activation::Sine, 30.0};
    Mlp<float> a(cfg), b(cfg);
    a.init(drf::RngStream(5, 5));
    b.init(drf::RngStream(5, 5));
    CHECK(a.theta == b.theta);

    const double first_bound = 1.0 / 64.0;
    for (std::size_t i = 0; i < 64 * 32 + 32; ++i)
        CHECK(std::fabs(a.theta[i]) <= first_bound);
    const double later_bound = std::sqrt(6.0 / 32.0) / 30.0;
    for (std::size_t i = 64 * 32 + 32; i < a.param_count(); ++i)
        CHECK(std::fabs(a.theta[i]) <= later_bound);

    Mlp<float> r(MlpConfig{6, {32, 32, 32}, Activation::Relu, 30.0});
    r.init(drf::RngStream(5, 5));
    bool nonzero = false;
    for (std::size_t i = 0; i < 6 * 32; ++i) {
        CHECK(std::fabs(r.theta[i]) <= std::sqrt(6.0 / 6.0));
        nonzero |= r.theta[i] != 0.0f;
    }
    CHECK(nonzero);
    for (std::size_t i = 6 * 32; i < 6 * 32 + 32; ++i) CHECK(r.theta[i] == 0.0f); // biases
}

TEST_CASE("adam first step moves by about the learning rate") {
    drf::AdamConfig cfg;
    cfg.base_lr = 0.1;
    drf::AdamState<double> st(1);
    std::vector<double> theta = {1.0};
    std::vector<double> grad = {0.5};
    drf::adam_step(st, cfg, theta, grad, 0);
    CHECK(std::fabs((1.0 - theta[0]) - 0.1) <= 1e-3);

    std::vector<double> up = {-0.25};
    drf::AdamState<double> st2(1);
    std::vector<double> theta2 = {1.0};
    drf::adam_step(st2, cfg, theta2, up, 0);
    CHECK(std::fabs((theta2[0] - 1.0) - 0.1) <= 1e-3);
}

TEST_CASE("adam ignores a zero gradient") {
    drf::AdamConfig cfg;
    drf::AdamState<double> st(3);
    std::vector<double> theta = {1.0, -2.0, 0.5};
    const std::vector<double> zero(3, 0.0);
    drf::adam_step(st, cfg, theta, zero, 0);
    CHECK(theta == std::vector<double>{1.0, -2.0, 0.5});
}

TEST_CASE("gradients above the ceiling are rescaled to norm one") {
    drf::AdamConfig cfg; // clip_norm = 1.0
    drf::AdamState<double> st(2);
    std::vector<double> theta = {0.0, 0.0};
    const std::vector<double> grad = {6.0, 8.0}; // norm 10
    drf::adam_step(st, cfg, theta, grad, 0);
    // first moment is (1 - beta1) * g_eff; recover g_eff and check its norm
    const double gx = st.m[0] / 0.1, gy = st.m[1] / 0.1;
    CHECK(std::sqrt(gx * gx + gy * gy) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("adam with zero betas and no clip degenerates to sign descent") {
    drf::AdamConfig cfg;
    cfg.beta1 = 0.0;
    cfg.beta2 = 0.0;
    cfg.clip_norm = std::numeric_limits<double>::infinity();
    cfg.base_lr = 0.05;
    drf::AdamState<double> st(1);
    std::vector<double> theta = {0.4};
    for (int i = 0; i < 6; ++i) {
        const double before = theta[0];
        const std::vector<double> grad = {theta[0]}; // d/dx of x^2/2
        drf::adam_step(st, cfg, theta, grad, 0);
        if (std::fabs(before) > 0.06)
            CHECK(std::fabs(std::fabs(before - theta[0]) - 0.05) < 1e-6);
    }
    CHECK(std::fabs(theta[0]) < 0.12);
}

TEST_CASE("learning-rate schedule endpoints") {
    drf::AdamConfig cfg;
    CHECK(drf::lr_at(cfg, 0) == 0.001);
    CHECK(drf::lr_at(cfg, 800) == 0.0);
    CHECK(drf::lr_at(cfg, 400) == doctest::Approx(0.0005).epsilon(1e-12));
    CHECK(drf::lr_at(cfg, 900) == 0.0); // floored past the horizon
}

TEST_CASE("non-finite gradients raise a divergence error") {
    drf::AdamConfig cfg;
    drf::AdamState<double> st(1);
    std::vector<double> theta = {0.0};
    const std::vector<double> bad = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_WITH_AS(drf::adam_step(st, cfg, theta, bad, 0),
                         doctest::Contains("diverged"), drf::NumericError);
}

TEST_CASE("range penalty on the analytic examples") {
    const double in_range[4] = {0.0, 0.25, 0.75, 1.0};
    CHECK(drf::range_penalty(in_range, 4) == 0.0);
    const double over[1] = {1.5};
    CHECK(drf::range_penalty(over, 1) == 0.5);
    const double under[1] = {-0.2};
    CHECK(drf::range_penalty(under, 1) == 0.2);
}

TEST_CASE("total loss on the analytic examples") {
    const drf::LossConfig cfg;
    const double gt[3] = {0.1, 0.5, 0.9};
    CHECK(drf::total_loss(gt, gt, 3, cfg) == 0.0);

    const double zeros[4] = {0, 0, 0, 0};
    const double ones[4] = {1, 1, 1, 1};
    CHECK(drf::total_loss(zeros, ones, 4, cfg) == 4.0);

    const double gt1[1] = {0.0};
    const double pred1[1] = {1.5};
    CHECK(drf::total_loss(gt1, pred1, 1, cfg) == 1.0 * 1.5 + 1e-7 * 0.5);
}

TEST_CASE("total loss is nonnegative and zero only at an in-range match") {
    const drf::LossConfig cfg;
    drf::RngStream rng(31, 0);
    for (int it = 0; it < 50; ++it) {
        double gt[4], pred[4];
        for (int i = 0; i < 4; ++i) {
            gt[i] = rng.uniform(-0.5, 1.5);
            pred[i] = rng.uniform(-0.5, 1.5);
        }
        CHECK(drf::total_loss(gt, pred, 4, cfg) >= 0.0);
    }
    const double out_match[2] = {1.2, -0.1}; // matching but out of range
    CHECK(drf::total_loss(out_match, out_match, 2, cfg) ==
          doctest::Approx(1e-7 * 0.3).epsilon(1e-12));
}

TEST_CASE("loss gradient matches finite differences away from kinks") {
    const drf::LossConfig cfg;
    const double gt[5] = {0.2, 0.8, 0.5, 0.1, 0.9};
    double pred[5] = {0.4, 0.6, 1.3, -0.2, 0.7};
    double dpred[5];
    const double loss = drf::total_loss_grad(gt, pred, 5, cfg, dpred);
    CHECK(loss == doctest::Approx(drf::total_loss(gt, pred, 5, cfg)).epsilon(1e-15));
    for (int i = 0; i < 5; ++i) {
        const double h = 1e-7;
        const double saved = pred[i];
        pred[i] = saved + h;
        const double lp = drf::total_loss(gt, pred, 5, cfg);
        pred[i] = saved - h;
        const double lm = drf::total_loss(gt, pred, 5, cfg);
        pred[i] = saved;
        CHECK(dpred[i] == doctest::Approx((lp - lm) / (2 * h)).epsilon(1e-5));
    }
}

TEST_CASE("tensor-level loss validates shapes") {
    drf::Tensor a({2, 2}, 0.5f), b({2, 3}, 0.5f);
    CHECK_THROWS(drf::total_loss(a, b, drf::LossConfig{}));
}
