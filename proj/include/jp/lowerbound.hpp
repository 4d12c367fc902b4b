#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jp/oracle.hpp"
#include "jp/rng.hpp"

namespace jp {

/// A fixed (non-adaptive) set of query points in R^2.
struct QueryDesign {
    std::vector<std::array<double, 2>> points;
    std::size_t n() const { return points.size(); }
    void validate() const;
};

/// rows x cols lattice spanning [-extent, extent]^2 (degenerate axes collapse
/// to 0, so grid:1x1 is the single point at the origin).
QueryDesign design_grid(std::size_t rows, std::size_t cols, double extent = 1.2);

/// n iid draws from N(0, scale^2 I_2), seeded.
QueryDesign design_cloud(std::size_t n, std::uint64_t seed, double scale = 1.0);

/// Two jittered clusters centered at (+-separation, 0), points alternating.
QueryDesign design_two_cluster(std::size_t n, std::uint64_t seed, double separation = 1.0,
                               double jitter = 0.1);

/// Parse "grid:RxC", "cloud:N", "clusters:N".
QueryDesign design_from_spec(const std::string& spec, std::uint64_t seed);

/**
 * One coupled trial of the two adversarial striped distributions: the pair
 * (f, g) shares (theta, stripe breakpoints, stripe bits); g additionally cuts
 * each stripe along <x, theta_perp> = z and is given per-stripe sign flips
 * chosen from (theta, a, z, design) alone — a measure-preserving re-coupling
 * under which the answer vectors agree exactly whenever event A holds.
 *
 * Event A: no stripe contains design points on both sides of the cut line.
 */
struct CouplingOutcome {
    bool event_A_held = false;
    std::vector<int> answers_f;  ///< +-1 per design point
    std::vector<int> answers_g;
    /// Second, independent geometric recomputation of event A (pairwise
    /// straddle checks); only filled when requested. Must equal event_A_held.
    std::optional<bool> event_A_direct;
};

CouplingOutcome run_coupling_trial(const QueryDesign& design, std::size_t s, std::uint64_t seed,
                                   bool verify_geometry = false);

/// Fraction of `trials` coupled trials where event A fails.
double event_a_failure_rate(const QueryDesign& design, std::size_t s, std::uint64_t trials,
                            std::uint64_t seed);

/**
 * Empirical total variation distance between the answer-vector distributions
 * of the two (uncoupled) striped distributions on a design with n <= 20
 * points, with plus-four smoothing spread over the 2^n cells and a bootstrap
 * upper half-width (tv_ci = q97.5(TV*) - tv over `bootstrap` resamples).
 */
struct TvEstimate {
    double tv = 0.0;
    double tv_ci = 0.0;
    std::uint64_t trials = 0;
    std::size_t cells_occupied = 0;
};

TvEstimate estimate_tv_distance(const QueryDesign& design, std::size_t s, std::uint64_t trials,
                                std::uint64_t seed, std::size_t bootstrap = 200);

/**
 * Empirical distance from a two-dimensional +-1 function to the best 1-junta:
 * for each of `directions` grid angles phi in [0, pi), bin <x, phi> into 200
 * bins over [-4, 4] (clamped), take the per-bin conditional majority, and
 * measure the disagreement fraction; return the minimum over angles.
 */
double estimate_distance_to_1junta(const FunctionOracle& g, std::size_t directions,
                                   std::size_t samples, std::uint64_t seed);

}  // namespace jp
