// Tests for the two-dimensional query-design lab: coupled striped trials,
// event-A bookkeeping, empirical total-variation distance, and the empirical
// distance-to-1-junta measure.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <numbers>
#include <stdexcept>

#include "jp/lowerbound.hpp"
#include "jp/oracle.hpp"
#include "jp/rng.hpp"
#include "jp/zoo.hpp"

using namespace jp;

TEST_CASE("design constructors and spec parsing") {
    SUBCASE("grid 1x1 is the origin") {
        QueryDesign d = design_grid(1, 1);
        REQUIRE(d.n() == 1);
        CHECK(d.points[0][0] == 0.0);
        CHECK(d.points[0][1] == 0.0);
    }
    SUBCASE("grid RxC has R*C points inside the extent box") {
        QueryDesign d = design_grid(2, 3, 1.2);
        REQUIRE(d.n() == 6);
        for (const auto& p : d.points) {
            CHECK(std::abs(p[0]) <= 1.2 + 1e-12);
            CHECK(std::abs(p[1]) <= 1.2 + 1e-12);
        }
        // Corners present.
        CHECK(d.points[0][0] == doctest::Approx(-1.2));
        CHECK(d.points[5][0] == doctest::Approx(1.2));
    }
    SUBCASE("cloud is seed-deterministic") {
        QueryDesign a = design_cloud(7, 42);
        QueryDesign b = design_cloud(7, 42);
        QueryDesign c = design_cloud(7, 43);
        REQUIRE(a.n() == 7);
        CHECK(a.points == b.points);
        CHECK(a.points != c.points);
    }
    SUBCASE("two clusters alternate sides") {
        QueryDesign d = design_two_cluster(6, 9, 2.0, 0.05);
        REQUIRE(d.n() == 6);
        for (std::size_t i = 0; i < 6; ++i)
            CHECK(d.points[i][0] * ((i % 2 == 0) ? 1.0 : -1.0) > 1.0);
    }
    SUBCASE("spec strings") {
        CHECK(design_from_spec("grid:3x4", 1).n() == 12);
        CHECK(design_from_spec("cloud:9", 1).n() == 9);
        CHECK(design_from_spec("clusters:5", 1).n() == 5);
        CHECK_THROWS_AS(design_from_spec("grid:7", 1), std::invalid_argument);
        CHECK_THROWS_AS(design_from_spec("torus:3", 1), std::invalid_argument);
    }
    SUBCASE("validation rejects empty and non-finite designs") {
        QueryDesign empty;
        CHECK_THROWS_AS(empty.validate(), std::invalid_argument);
        QueryDesign bad;
        bad.points.push_back({0.0, std::numeric_limits<double>::infinity()});
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        CHECK_THROWS_AS(design_grid(0, 3), std::invalid_argument);
    }
}

TEST_CASE("event A always holds for designs that cannot straddle a cut") {
    SUBCASE("single point") {
        QueryDesign d = design_grid(1, 1);
        CHECK(event_a_failure_rate(d, 6, 2000, 77) == 0.0);
    }
    SUBCASE("identical points") {
        QueryDesign d;
        d.points.assign(5, {0.3, -0.4});
        CHECK(event_a_failure_rate(d, 6, 2000, 78) == 0.0);
    }
}

TEST_CASE("coupled trials: answer identity under A and independent geometry check") {
    QueryDesign d = design_cloud(8, 5, 1.0);
    std::size_t held = 0, failed = 0;
    for (std::uint64_t t = 0; t < 10'000; ++t) {
        CouplingOutcome out = run_coupling_trial(d, 50, mix64(1234 ^ mix64(t + 1)), true);
        REQUIRE(out.answers_f.size() == d.n());
        REQUIRE(out.event_A_direct.has_value());
        // The pairwise-inequality recomputation must agree with the
        // stripe-bookkeeping verdict on every trial.
        CHECK(*out.event_A_direct == out.event_A_held);
        for (int v : out.answers_f) CHECK(std::abs(v) == 1);
        for (int v : out.answers_g) CHECK(std::abs(v) == 1);
        if (out.event_A_held) {
            CHECK(out.answers_f == out.answers_g);
            ++held;
        } else {
            ++failed;
        }
    }
    // At s = 50 on a unit cloud both outcomes occur with decent frequency.
    CHECK(held > 1000);
    CHECK(failed > 100);
}

TEST_CASE("coupled trials are seed-deterministic") {
    QueryDesign d = design_cloud(6, 11);
    CouplingOutcome a = run_coupling_trial(d, 20, 991);
    CouplingOutcome b = run_coupling_trial(d, 20, 991);
    CHECK(a.event_A_held == b.event_A_held);
    CHECK(a.answers_f == b.answers_f);
    CHECK(a.answers_g == b.answers_g);
}

TEST_CASE("event A failure rate decreases with the stripe count and vanishes for large s") {
    QueryDesign d = design_cloud(5, 3, 1.0);
    const double coarse = event_a_failure_rate(d, 100, 20'000, 55);
    const double fine = event_a_failure_rate(d, 10'000, 20'000, 55);
    CHECK(fine < coarse);
    CHECK(fine <= 0.01);
}

TEST_CASE("single random direction rarely aligns with a thin slab") {
    // Pr(|<theta, x>| <= delta |x|) over a uniform unit direction theta in the
    // plane is (2/pi) asin(delta) <= delta; checked by direct simulation.
    Rng rng(2024);
    const double delta = 0.1;
    std::uint64_t hits = 0;
    const std::uint64_t n = 100'000;
    for (std::uint64_t i = 0; i < n; ++i) {
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double x0 = rng.normal(), x1 = rng.normal();
        const double norm = std::sqrt(x0 * x0 + x1 * x1);
        if (std::abs(x0 * std::cos(phi) + x1 * std::sin(phi)) <= delta * norm) ++hits;
    }
    const double rate = static_cast<double>(hits) / static_cast<double>(n);
    CHECK(rate <= delta);
    CHECK(rate == doctest::Approx(2.0 / std::numbers::pi * std::asin(delta)).epsilon(0.1));
}

TEST_CASE("TV distance input validation") {
    QueryDesign big = design_grid(5, 5);  // 25 points > 20
    CHECK_THROWS_AS(estimate_tv_distance(big, 4, 100, 1), std::invalid_argument);
    QueryDesign d = design_grid(1, 1);
    CHECK_THROWS_AS(estimate_tv_distance(d, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("TV distance is ~0 on a single-point design") {
    // At one query point both answer distributions are a fair +-1 coin.
    QueryDesign d = design_grid(1, 1);
    TvEstimate est = estimate_tv_distance(d, 3, 20'000, 314);
    CHECK(est.trials == 20'000);
    CHECK(est.cells_occupied <= 2);
    CHECK(est.tv <= 0.02);
}

TEST_CASE("TV distance separates the pair on a rich design at moderate s") {
    QueryDesign d = design_cloud(8, 7, 1.0);
    TvEstimate est = estimate_tv_distance(d, 10, 20'000, 2718);
    CHECK(est.tv > 3.0 * est.tv_ci);
    CHECK(est.tv > 0.05);
}

TEST_CASE("TV distance shrinks as the stripe count grows") {
    QueryDesign d = design_cloud(8, 7, 1.0);
    const double coarse = estimate_tv_distance(d, 4, 20'000, 99).tv;
    const double fine = estimate_tv_distance(d, 64, 20'000, 99).tv;
    CHECK(fine < coarse);
}

TEST_CASE("distance to a 1-junta: stripe-only samples are near, the quadrant is far") {
    SUBCASE("a drawn stripe-only function is close to some 1-junta") {
        GaussianSampler sampler(404);
        FunctionOracle f = make_zoo_oracle(sample_d1(1, sampler));
        REQUIRE(f.dimension() == 2);
        CHECK(estimate_distance_to_1junta(f, 360, 100'000, 17) <= 0.02);
    }
    SUBCASE("the quadrant function is far from every 1-junta") {
        FunctionOracle q(2, [](std::span<const double> x) {
            return sign_pm1(x[0]) * sign_pm1(x[1]);
        });
        CHECK(estimate_distance_to_1junta(q, 90, 100'000, 18) >= 0.2);
    }
    SUBCASE("input validation") {
        FunctionOracle f3(3, [](std::span<const double>) { return 1.0; });
        CHECK_THROWS_AS(estimate_distance_to_1junta(f3, 8, 100, 1), std::invalid_argument);
        FunctionOracle f2(2, [](std::span<const double>) { return 1.0; });
        CHECK_THROWS_AS(estimate_distance_to_1junta(f2, 0, 100, 1), std::invalid_argument);
    }
}
