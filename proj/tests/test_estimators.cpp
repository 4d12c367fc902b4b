// Monte-Carlo estimators vs closed-form halfspace targets. The closed forms
// themselves are first validated against brute-force sampling before being
// used as expected values anywhere else.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "jp/closed_forms.hpp"
#include "jp/estimators.hpp"
#include "jp/rng.hpp"
#include "jp/zoo.hpp"

using namespace jp;

namespace {

FunctionOracle axis_halfspace(std::size_t dim, double theta) {
    std::vector<double> u(dim, 0.0);
    u[0] = 1.0;
    return make_zoo_oracle(zoo_halfspace(u, theta));
}

std::vector<double> axis_point(std::size_t dim, double first) {
    std::vector<double> y(dim, 0.0);
    y[0] = first;
    return y;
}

}  // namespace

TEST_CASE("closed forms agree with brute-force Monte Carlo") {
    // Before the closed forms are used as oracle targets, check them the hard
    // way: direct sampling of the defining expectations, 1e6 samples each.
    const double t = 0.5;
    const double rho = std::exp(-t), sig = std::sqrt(1.0 - rho * rho);
    Rng rng(1);
    const int N = 1'000'000;

    double mean1 = 0.0;        // E[sign(x1 - 1)]
    double pt = 0.0;           // P_t sign(x1) at y1 = 0.7
    double grad = 0.0;         // d/dy1 P_t sign(x1) at y1 = 0.7 via c_t E[f(.) x]
    double ns = 0.0;           // Pr[sign flip under noise t]
    const double ct = rho / sig;
    for (int i = 0; i < N; ++i) {
        const double x = rng.normal();
        mean1 += x - 1.0 >= 0.0 ? 1.0 : -1.0;
        const double z = rng.normal();
        const double smoothed = rho * 0.7 + sig * z >= 0.0 ? 1.0 : -1.0;
        pt += smoothed;
        grad += ct * smoothed * z;
        const double w = rho * x + sig * rng.normal();
        ns += (x >= 0.0) != (w >= 0.0) ? 1.0 : 0.0;
    }
    CHECK(mean1 / N == doctest::Approx(halfspace_mean(1.0)).epsilon(0.02));
    CHECK(pt / N == doctest::Approx(halfspace_pt(0.7, t)).epsilon(0.02));
    CHECK(grad / N == doctest::Approx(halfspace_grad_norm(0.7, t)).epsilon(0.05));
    CHECK(ns / N == doctest::Approx(halfspace_ns(t)).epsilon(0.02));
    // Degree-1 coefficient sqrt(2/pi) via E[sign(x) x].
    Rng rng2(2);
    double w1 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double x = rng2.normal();
        w1 += (x >= 0.0 ? 1.0 : -1.0) * x;
    }
    CHECK(w1 / N == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(0.01));
}

TEST_CASE("pairwise_sum matches sequential summation and is chunk-stable") {
    Rng rng(3);
    std::vector<double> v(10'001);
    for (auto& x : v) x = rng.normal();
    const double seq = std::accumulate(v.begin(), v.end(), 0.0);
    CHECK(pairwise_sum(v) == doctest::Approx(seq).epsilon(1e-12));
    // Deterministic: same input, same bits.
    CHECK(pairwise_sum(v) == pairwise_sum(v));
}

TEST_CASE("config sizing formulas") {
    EstimatorConfig cfg;
    cfg.epsilon = 0.1;
    cfg.delta = 0.05;
    CHECK(cfg.resolved_blocks() ==
          2 * static_cast<std::size_t>(std::ceil(18.0 * std::log(20.0))) + 1);
    CHECK(cfg.resolved_blocks() % 2 == 1);
    CHECK(cfg.resolved_batch(2.0) == static_cast<std::size_t>(std::ceil(2.0 * 4.0 / 0.01)));
    cfg.blocks = 7;
    cfg.batch = 123;
    CHECK(cfg.resolved_blocks() == 7);
    CHECK(cfg.resolved_batch(2.0) == 123);
    cfg.blocks = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("estimate_mean: exact on constants, accurate on halfspaces") {
    FunctionOracle c = make_zoo_oracle(zoo_constant(-1, 4));
    EstimatorConfig cfg;
    cfg.epsilon = 0.5;
    cfg.delta = 0.2;
    GaussianSampler s(5);
    CHECK(estimate_mean(c, cfg, s).value == -1.0);

    FunctionOracle h = axis_halfspace(8, 1.0);
    EstimatorConfig hcfg;
    hcfg.epsilon = 0.02;
    hcfg.delta = 0.05;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        GaussianSampler hs(seed);
        const ScalarEstimate e = estimate_mean(h, hcfg, hs);
        CHECK(std::abs(e.value - halfspace_mean(1.0)) <= hcfg.epsilon);
        CHECK(e.samples_used == static_cast<std::uint64_t>(hcfg.resolved_blocks()) *
                                    hcfg.resolved_batch(2.0));
    }
}

TEST_CASE("estimate_pt matches the smoothed-halfspace closed form") {
    FunctionOracle h = axis_halfspace(8, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.02;
    cfg.delta = 0.05;
    cfg.t = 0.5;
    for (double y1 : {-1.0, 0.0, 0.7}) {
        GaussianSampler s(17);
        const double est = estimate_pt(h, 0.5, axis_point(8, y1), cfg, s).value;
        CHECK(std::abs(est - halfspace_pt(y1, 0.5)) <= cfg.epsilon);
    }
}

TEST_CASE("estimate_degree1_eval matches its defining smoothed difference") {
    // E[(f(eta x + sqrt(1-eta^2) z) - f(z)) / eta] = (P_{t(eta)} f(x) - E f)/eta.
    const double eta = 0.1;
    FunctionOracle h = axis_halfspace(8, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.1;
    cfg.delta = 0.05;
    const double t_eta = -std::log(eta);
    for (double x1 : {0.5, 1.5}) {
        GaussianSampler s(19);
        const double est = estimate_degree1_eval(h, eta, axis_point(8, x1), cfg, s).value;
        const double target = halfspace_pt(x1, t_eta) / eta;
        // Same thing, spelled directly: P_t f at x with e^{-t} = eta.
        const double direct = (2.0 * norm_cdf(eta * x1 / std::sqrt(1.0 - eta * eta)) - 1.0) / eta;
        CHECK(target == doctest::Approx(direct).epsilon(1e-9));
        CHECK(std::abs(est - direct) <= cfg.epsilon);
        // ...and close to the true degree-1 value <W1(f), x>.
        CHECK(std::abs(est - halfspace_degree1(x1)) <= 0.15);
    }
}

TEST_CASE("estimate_grad_inner is symmetric under anchor swap with shared seed") {
    FunctionOracle h = axis_halfspace(6, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.5;
    cfg.delta = 0.2;
    cfg.t = 0.5;
    cfg.blocks = 3;
    cfg.batch = 500;
    const auto y1 = axis_point(6, 0.7);
    auto y2 = axis_point(6, -0.4);
    y2[1] = 0.3;
    GaussianSampler a(23), b(23);
    const double v12 = estimate_grad_inner(h, 0.5, y1, y2, cfg, a).value;
    const double v21 = estimate_grad_inner(h, 0.5, y2, y1, cfg, b).value;
    CHECK(v12 == v21);  // exact, not approximate
}

TEST_CASE("estimate_grad_inner converges to the halfspace closed form") {
    FunctionOracle h = axis_halfspace(6, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.3;
    cfg.delta = 0.1;
    cfg.t = 0.5;
    cfg.blocks = 5;
    cfg.batch = 200'000;
    const auto y = axis_point(6, 0.7);
    GaussianSampler s(29);
    const double est = estimate_grad_inner(h, 0.5, y, y, cfg, s).value;
    const double target = halfspace_grad_inner(0.7, 0.7, 0.5);
    CHECK(std::abs(est - target) <= 0.1);
}

TEST_CASE("estimate_directional_eval tracks <D(P_t f)(y), x>") {
    FunctionOracle h = axis_halfspace(6, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.1;
    cfg.delta = 0.05;
    cfg.t = 0.5;
    cfg.blocks = 5;
    cfg.batch = 100'000;
    const auto y = axis_point(6, 0.3);
    for (double x1 : {1.0, -0.8}) {
        auto x = axis_point(6, x1);
        x[2] = 0.5;  // orthogonal component contributes nothing in expectation
        GaussianSampler s(31);
        const double est = estimate_directional_eval(h, 0.5, y, x, 0.1, cfg, s).value;
        const double target = halfspace_grad_norm(0.3, 0.5) * x1;
        CHECK(std::abs(est - target) <= 0.12);
    }
}

TEST_CASE("estimate_noise_sensitivity matches arccos closed form") {
    FunctionOracle h = axis_halfspace(8, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.01;
    cfg.delta = 0.05;
    cfg.t = 0.5;
    GaussianSampler s(37);
    CHECK(std::abs(estimate_noise_sensitivity(h, 0.5, cfg, s).value - halfspace_ns(0.5)) <=
          cfg.epsilon);
}

TEST_CASE("estimate_grad_vector recovers direction and norm of the gradient") {
    FunctionOracle h = axis_halfspace(8, 0.0);
    GaussianSampler s(41);
    const auto y = axis_point(8, 0.7);
    const GradVectorEstimate g = estimate_grad_vector(h, 0.5, y, 200'000, s);
    const double target = halfspace_grad_norm(0.7, 0.5);
    CHECK(g.mean[0] == doctest::Approx(target).epsilon(0.05));
    for (std::size_t c = 1; c < 8; ++c) CHECK(std::abs(g.mean[c]) < 0.02);
    // Split-half inner product is a bias-free norm^2 estimate.
    double h12 = 0.0;
    for (std::size_t c = 0; c < 8; ++c) h12 += g.half1[c] * g.half2[c];
    CHECK(h12 == doctest::Approx(target * target).epsilon(0.15));
    CHECK(g.samples_used == 200'000);
}

TEST_CASE("estimators are bit-for-bit reproducible for a fixed seed") {
    FunctionOracle h = axis_halfspace(6, 0.0);
    EstimatorConfig cfg;
    cfg.epsilon = 0.1;
    cfg.delta = 0.1;
    GaussianSampler a(43), b(43);
    CHECK(estimate_mean(h, cfg, a).value == estimate_mean(h, cfg, b).value);
    GaussianSampler c(43), d(43);
    const auto g1 = estimate_grad_vector(h, 0.5, axis_point(6, 0.1), 10'000, c);
    const auto g2 = estimate_grad_vector(h, 0.5, axis_point(6, 0.1), 10'000, d);
    CHECK(g1.mean == g2.mean);
}

TEST_CASE("trace sink records every raw sample") {
    FunctionOracle cst = make_zoo_oracle(zoo_constant(1, 2));
    std::vector<double> trace;
    EstimatorConfig cfg;
    cfg.epsilon = 0.5;
    cfg.delta = 0.3;
    cfg.blocks = 3;
    cfg.batch = 10;
    cfg.trace = &trace;
    GaussianSampler s(47);
    estimate_mean(cst, cfg, s);
    CHECK(trace.size() == 30);
    for (double v : trace) CHECK(v == 1.0);
}
