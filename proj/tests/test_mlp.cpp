#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pinnsel/mlp.hpp"

using namespace pinnsel;

namespace {

// Central finite differences of forward_value as the independent oracle for
// the propagated derivatives.
DerivativeBundle fd_bundle(const MlpParams& p, double x, double t, double h = 1e-4) {
    DerivativeBundle d;
    d.u = forward_value(p, x, t);
    d.u_x = (forward_value(p, x + h, t) - forward_value(p, x - h, t)) / (2 * h);
    d.u_t = (forward_value(p, x, t + h) - forward_value(p, x, t - h)) / (2 * h);
    d.u_xx = (forward_value(p, x + h, t) - 2 * d.u + forward_value(p, x - h, t)) / (h * h);
    return d;
}

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::max(1e-8, std::fabs(want));
}

TrainingData tiny_data(Rng& rng, int n_ic = 8, int n_bc = 8, int n_col = 12) {
    TrainingData d;
    for (int i = 0; i < n_ic; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        d.ic_points.push_back({x, 0.0});
        d.ic_values.push_back(-std::sin(kPi * x));
    }
    for (int i = 0; i < n_bc; ++i) {
        d.bc_points.push_back({i % 2 ? 1.0 : -1.0, rng.uniform(0.0, 1.0)});
        d.bc_values.push_back(0.0);
    }
    for (int i = 0; i < n_col; ++i) {
        d.collocation.push_back({rng.uniform(-1.0, 1.0), rng.uniform(0.0, 1.0)});
    }
    return d;
}

// Flat views for parameter-space loops.
std::vector<double*> flat(MlpParams& p) {
    std::vector<double*> out;
    for (auto& w : p.weights)
        for (auto& v : w) out.push_back(&v);
    for (auto& b : p.biases)
        for (auto& v : b) out.push_back(&v);
    return out;
}

}  // namespace

TEST_CASE("init_params validates and is deterministic") {
    CHECK_THROWS(init_params({}, 1));
    CHECK_THROWS(init_params({3, 1}, 1));
    CHECK_THROWS(init_params({2, 4}, 1));
    CHECK_THROWS(init_params({2, 0, 1}, 1));

    const auto a = init_params({2, 8, 1}, 42);
    const auto b = init_params({2, 8, 1}, 42);
    CHECK(a.weights == b.weights);
    CHECK(a.biases == b.biases);
    const auto c = init_params({2, 8, 1}, 43);
    CHECK(a.weights != c.weights);
}

TEST_CASE("parameter count for the default architecture") {
    const auto p = init_params({2, 32, 32, 32, 32, 1}, 0);
    CHECK(p.parameter_count() == 3297);
}

TEST_CASE("single linear layer is affine with exact derivatives") {
    MlpParams p = init_params({2, 1}, 7);
    p.weights[0] = {0.75, -1.25};  // u = w1 x + w2 t + b
    p.biases[0] = {0.5};
    const auto d = forward_with_derivatives(p, 0.3, 0.4);
    CHECK(d.u == doctest::Approx(0.75 * 0.3 - 1.25 * 0.4 + 0.5).epsilon(1e-15));
    CHECK(d.u_x == 0.75);
    CHECK(d.u_t == -1.25);
    CHECK(d.u_xx == 0.0);

    // residual closed form: r = w2 + u * w1
    const double r = residual(p, 0.3, 0.4, 0.01);
    CHECK(r == doctest::Approx(-1.25 + d.u * 0.75).epsilon(1e-14));
}

TEST_CASE("all-zero weights give a constant network") {
    MlpParams p = init_params({2, 16, 16, 1}, 3);
    p.set_zero();
    p.biases.back()[0] = 1.75;
    const auto d = forward_with_derivatives(p, -0.2, 0.9);
    CHECK(d.u == 1.75);
    CHECK(d.u_x == 0.0);
    CHECK(d.u_t == 0.0);
    CHECK(d.u_xx == 0.0);
    CHECK(residual(p, -0.2, 0.9, 0.5) == 0.0);
}

TEST_CASE("derivative bundle matches finite differences over random probes") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const auto p = init_params({2, 16, 16, 1}, 1000 + trial);
        const double x = rng.uniform(-0.9, 0.9);
        const double t = rng.uniform(0.05, 0.95);
        const auto got = forward_with_derivatives(p, x, t);
        const auto want = fd_bundle(p, x, t);
        CHECK(rel_err(got.u_x, want.u_x) < 1e-5);
        CHECK(rel_err(got.u_t, want.u_t) < 1e-5);
        CHECK(rel_err(got.u_xx, want.u_xx) < 1e-4);
    }
}

TEST_CASE("residual matches a finite-difference assembly") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = init_params({2, 12, 12, 1}, 500 + trial);
        const double x = rng.uniform(-0.9, 0.9);
        const double t = rng.uniform(0.05, 0.95);
        const double nu = 0.01 / kPi;
        const auto fd = fd_bundle(p, x, t);
        const double want = fd.u_t + fd.u * fd.u_x - nu * fd.u_xx;
        CHECK(rel_err(residual(p, x, t, nu), want) < 1e-4);
    }
}

TEST_CASE("loss term isolation and hand arithmetic") {
    Rng rng(11);
    const auto p = init_params({2, 8, 1}, 21);
    TrainingData d = tiny_data(rng);

    SUBCASE("IC-only weights reduce to the IC mean squared error") {
        double expect = 0.0;
        for (std::size_t i = 0; i < d.ic_points.size(); ++i) {
            const double e = forward_value(p, d.ic_points[i].x, d.ic_points[i].t) -
                             d.ic_values[i];
            expect += e * e;
        }
        expect /= static_cast<double>(d.ic_points.size());
        CHECK(loss(p, d, {1, 0, 0}, 0.01) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("two-point hand-computed composite") {
        TrainingData h;
        h.ic_points = {{0.25, 0.0}, {-0.5, 0.0}};
        h.ic_values = {0.1, -0.2};
        h.bc_points = {{-1.0, 0.3}, {1.0, 0.7}};
        h.bc_values = {0.0, 0.0};
        h.collocation = {{0.2, 0.4}, {-0.3, 0.8}};
        const double nu = 0.05;
        double ic = 0.0, bc = 0.0, pde = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double ei =
                forward_value(p, h.ic_points[i].x, h.ic_points[i].t) - h.ic_values[i];
            ic += ei * ei;
            const double eb =
                forward_value(p, h.bc_points[i].x, h.bc_points[i].t) - h.bc_values[i];
            bc += eb * eb;
            const double r = residual(p, h.collocation[i].x, h.collocation[i].t, nu);
            pde += r * r;
        }
        const double expect = 0.5 * (2.0 * ic + 0.25 * bc + 3.0 * pde) / 1.0;
        CHECK(loss(p, h, {2.0, 0.25, 3.0}, nu) ==
              doctest::Approx(0.5 * (2.0 * ic + 0.25 * bc + 3.0 * pde)).epsilon(1e-12));
        (void)expect;
    }

    SUBCASE("empty set with nonzero weight throws") {
        TrainingData e = d;
        e.collocation.clear();
        CHECK_THROWS(loss(p, e, {1, 1, 1}, 0.01));
        CHECK_NOTHROW(loss(p, e, {1, 1, 0}, 0.01));
    }

    SUBCASE("loss is nonnegative and scales linearly in lambda_pde") {
        const double l1 = loss(p, d, {0, 0, 1}, 0.01);
        const double l2 = loss(p, d, {0, 0, 2}, 0.01);
        CHECK(l1 >= 0.0);
        CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-12));
    }
}

TEST_CASE("loss gradient matches finite differences") {
    Rng rng(17);
    MlpParams p = init_params({2, 8, 8, 1}, 77);
    const TrainingData d = tiny_data(rng);
    const LossWeights w{0.7, 1.3, 2.1};
    const double nu = 0.01 / kPi;

    double base = 0.0;
    MlpParams g = loss_gradient(p, d, w, nu, 0, &base);
    CHECK(base == doctest::Approx(loss(p, d, w, nu)).epsilon(1e-12));

    auto gptr = flat(g);
    auto pptr = flat(p);
    REQUIRE(gptr.size() == pptr.size());

    Rng pick(123);
    const double h = 1e-5;
    int checked = 0;
    while (checked < 25) {
        const std::size_t i = pick.integer(pptr.size());
        const double save = *pptr[i];
        *pptr[i] = save + h;
        const double up = loss(p, d, w, nu);
        *pptr[i] = save - h;
        const double dn = loss(p, d, w, nu);
        *pptr[i] = save;
        const double fd = (up - dn) / (2 * h);
        if (std::fabs(fd) < 1e-7) continue;  // skip numerically dead directions
        CHECK(rel_err(*gptr[i], fd) < 1e-4);
        ++checked;
    }
}

TEST_CASE("gradient linearity in the PDE weight") {
    Rng rng(31);
    const auto p = init_params({2, 8, 1}, 5);
    const TrainingData d = tiny_data(rng);
    MlpParams g1 = loss_gradient(p, d, {0, 0, 1}, 0.02);
    MlpParams g2 = loss_gradient(p, d, {0, 0, 2}, 0.02);
    auto f1 = flat(g1), f2 = flat(g2);
    for (std::size_t i = 0; i < f1.size(); ++i) {
        CHECK(*f2[i] == doctest::Approx(2.0 * *f1[i]).epsilon(1e-12));
    }
}

TEST_CASE("gradient vanishes at an exact data fit") {
    // IC targets equal the network output, other weights zero.
    Rng rng(41);
    const auto p = init_params({2, 8, 1}, 6);
    TrainingData d = tiny_data(rng);
    for (std::size_t i = 0; i < d.ic_points.size(); ++i) {
        d.ic_values[i] = forward_value(p, d.ic_points[i].x, d.ic_points[i].t);
    }
    MlpParams g = loss_gradient(p, d, {1, 0, 0}, 0.01);
    for (double* v : flat(g)) CHECK(*v == 0.0);
}

TEST_CASE("training runs deterministically and reduces the loss") {
    Rng rng(53);
    const auto p0 = init_params({2, 16, 16, 1}, 8);
    const TrainingData d = tiny_data(rng, 32, 32, 64);
    TrainConfig cfg;
    cfg.steps = 500;
    cfg.record_every = 100;

    SUBCASE("zero learning rate leaves parameters unchanged") {
        TrainConfig frozen = cfg;
        frozen.learning_rate = 0.0;
        const auto out = train(p0, d, {1, 1, 1}, 0.01, frozen);
        CHECK(out.params.weights == p0.weights);
        CHECK(out.params.biases == p0.biases);
    }

    SUBCASE("loss decreases and reruns are identical") {
        const auto a = train(p0, d, {1, 1, 1}, 0.01, cfg);
        const auto b = train(p0, d, {1, 1, 1}, 0.01, cfg);
        REQUIRE(!a.history.empty());
        CHECK(a.history.back().loss < a.history.front().loss);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].loss == b.history[i].loss);
        }
        CHECK(a.params.weights == b.params.weights);
    }

    SUBCASE("thread count does not change the result") {
        TrainConfig one = cfg;
        one.threads = 1;
        TrainConfig four = cfg;
        four.threads = 4;
        const auto a = train(p0, d, {1, 1, 1}, 0.01, one);
        const auto b = train(p0, d, {1, 1, 1}, 0.01, four);
        CHECK(a.params.weights == b.params.weights);
        CHECK(a.params.biases == b.params.biases);
    }
}

TEST_CASE("trainer segments match a single run") {
    Rng rng(61);
    const auto p0 = init_params({2, 8, 1}, 9);
    const TrainingData d = tiny_data(rng);
    TrainConfig cfg;
    cfg.record_every = 0;

    Trainer whole(p0, cfg);
    whole.run(120, d, {1, 1, 1}, 0.02);
    Trainer parts(p0, cfg);
    parts.run(50, d, {1, 1, 1}, 0.02);
    parts.run(70, d, {1, 1, 1}, 0.02);
    CHECK(whole.params().weights == parts.params().weights);
    CHECK(whole.params().biases == parts.params().biases);
}

TEST_CASE("activation agrees with the standard tanh composition") {
    MlpParams p = init_params({2, 4, 1}, 1);
    p.weights[0] = {1.3, -0.7, 0.2, 2.9, -4.0, 0.5, 8.0, 6.0};
    p.biases[0] = {0.1, -0.4, 2.0, -25.0};
    p.weights[1] = {0.9, -1.1, 0.3, 0.8};
    p.biases[1] = {-0.05};
    Rng rng(15);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.uniform(-3.0, 3.0);
        const double t = rng.uniform(-3.0, 3.0);
        double want = p.biases[1][0];
        for (int k = 0; k < 4; ++k) {
            want += p.weights[1][k] * std::tanh(p.weights[0][2 * k] * x +
                                                p.weights[0][2 * k + 1] * t +
                                                p.biases[0][k]);
        }
        CHECK(forward_value(p, x, t) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("parameter serialization round trip") {
    const auto p = init_params({2, 8, 4, 1}, 2024);
    const std::string path = "mlp_roundtrip_test.bin";
    save_params(p, path);
    const auto back = load_params(path);
    CHECK(back.widths == p.widths);
    CHECK(back.weights == p.weights);
    CHECK(back.biases == p.biases);
    std::remove(path.c_str());
}
