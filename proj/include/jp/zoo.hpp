#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "jp/oracle.hpp"
#include "jp/rng.hpp"

namespace jp {

using njson = nlohmann::json;

/**
 * Zoo of ground-truth test subjects, each described by a small JSON object
 * ({"kind": "halfspace", "u": [...], "theta": 0.0}, ...) so experiments are
 * replayable from their reports.
 *
 * Kinds:
 *   constant            {"kind","c","dim"}
 *   halfspace           {"kind","u","theta"}             sign(<u,x> - theta)
 *   halfspace_combo     {"kind","halfspaces","table"}    Boolean table over k halfspace bits
 *   sign_lifted_junta   {"kind","coords","table","dim"}  Boolean table over k coordinate signs
 *   rotated_junta       {"kind","rows","inner"}          inner function of an orthonormal projection
 *   striped_one_junta   {"kind","theta","breaks","bits"} random +-1 stripes along theta (R^2)
 *   cut_striped_two_junta  same + {"z"}                  stripes cut once along theta-perp (R^2)
 *
 * All zoo functions return exactly +-1; sign(0) resolves to +1 everywhere.
 */

/// Builders (validate and normalize their inputs).
njson zoo_constant(int c, std::size_t dim);
njson zoo_halfspace(const std::vector<double>& u, double theta);
njson zoo_halfspace_combo(const std::vector<std::vector<double>>& us,
                          const std::vector<double>& thetas,
                          const std::vector<int>& table);
njson zoo_sign_lifted_junta(const std::vector<std::size_t>& coords,
                            const std::vector<int>& table, std::size_t dim);
njson zoo_rotated_junta(const std::vector<std::vector<double>>& rows, const njson& inner);

/// Intersection of halfspaces as a combo table (value +1 iff all bits set).
njson zoo_intersection(const std::vector<std::vector<double>>& us,
                       const std::vector<double>& thetas);

/**
 * Adversarial striped distributions (R^2).
 *
 * sample_d1: random unit theta, breakpoints -1 = a_0 < a_1 < ... < a_s = 1
 * with the interior points uniform in [-1,1], iid +-1 stripe bits; value is
 * the stripe bit on (a_{i-1}, a_i] along <x,theta>, and +1 outside (-1,1].
 *
 * sample_d2: shares (theta, a, b) with the d1 drawn from the same sampler
 * state, plus an independent cut z uniform in [-1,1]; inside stripe i the
 * value is b_i * sign(<x,theta_perp> - z), with theta_perp the 90-degree
 * clockwise rotation of theta.
 */
njson sample_d1(std::size_t s, GaussianSampler& sampler);
njson sample_d2(std::size_t s, GaussianSampler& sampler);
/// Coupled pair (f ~ D1, g ~ D2) sharing (theta, a, b) — one seed, one coupling.
std::pair<njson, njson> sample_coupled_pair(std::size_t s, GaussianSampler& sampler);

/// Compile a zoo description into an oracle (fresh ledger).
FunctionOracle make_zoo_oracle(const njson& desc);
std::size_t zoo_dimension(const njson& desc);

/**
 * Ground-truth introspection — for the test harness ONLY, never consumed by
 * the algorithms under test.
 */

/// Orthonormal basis of the relevant subspace, when the kind defines one.
std::optional<std::vector<std::vector<double>>> zoo_true_subspace(const njson& desc);

/// Upper bound on the Gaussian surface area, when a closed form is known.
std::optional<double> zoo_surface_area_bound(const njson& desc);

/// Random orthonormal k x n projection rows (Gram-Schmidt on Gaussian rows).
std::vector<std::vector<double>> random_orthonormal_rows(std::size_t k, std::size_t n,
                                                         GaussianSampler& sampler);

}  // namespace jp
