#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "jp/oracle.hpp"
#include "jp/rng.hpp"

namespace jp {

/**
 * Shared estimator configuration. Confidence amplification is median-of-means
 * with an odd number of blocks; when batch/blocks are left at 0 they are
 * derived from (epsilon, delta, value range) as
 *
 *   blocks = 2 * ceil(18 ln(1/delta)) + 1
 *   batch  = ceil(2 * range^2 / epsilon^2)
 *
 * — explicit, auditable constants (per-block Hoeffding sizing). Presets may
 * pin batch/blocks directly instead.
 */
struct EstimatorConfig {
    double epsilon = 0.05;   ///< target additive accuracy
    double delta = 0.05;     ///< failure probability
    double t = 0.5;          ///< noise parameter (dimensionless, > 0) where applicable
    std::size_t batch = 0;   ///< samples per block; 0 => derive
    std::size_t blocks = 0;  ///< odd block count; 0 => derive
    /// Optional trace sink: every raw sample value, in order (CSV debugging).
    std::vector<double>* trace = nullptr;

    void validate() const;
    std::size_t resolved_blocks() const;
    std::size_t resolved_batch(double range) const;
};

struct ScalarEstimate {
    double value = 0.0;
    std::uint64_t samples_used = 0;
    EstimatorConfig config;
};

/// Deterministic pairwise tree reduction (exact summation order regardless of
/// how the caller partitions work).
double pairwise_sum(std::span<const double> v);

/// |value - E_{gamma_n}[f]| <= epsilon w.p. >= 1 - delta.
ScalarEstimate estimate_mean(const FunctionOracle& f, const EstimatorConfig& cfg,
                             GaussianSampler& sampler);

/// Smoothed evaluation P_t f(x) = E_z[f(e^{-t} x + sqrt(1-e^{-2t}) z)].
ScalarEstimate estimate_pt(const FunctionOracle& f, double t, std::span<const double> x,
                           const EstimatorConfig& cfg, GaussianSampler& sampler);

/**
 * Degree-1 proxy evaluation f_{d,eta}(x) = (P_t f(x) - E[f]) / eta with
 * e^{-t} = eta. Single-sample form (f(eta x + sqrt(1-eta^2) z) - f(z)) / eta
 * shares z between the two terms, which keeps the estimator unbiased and cuts
 * variance. The caller inherits the tail guarantee
 * Pr_x[|f_{d,eta}(x) - <W1(f), x>| > lambda * eta] <= lambda^{-2}.
 */
ScalarEstimate estimate_degree1_eval(const FunctionOracle& f, double eta,
                                     std::span<const double> x, const EstimatorConfig& cfg,
                                     GaussianSampler& sampler);

/**
 * Gradient inner product <D(P_t f)(y1), D(P_t f)(y2)> via the product
 * estimator
 *
 *   J(x,y,z) = e^{2t'} (F1(e^{-t'}x + s'y) - F1(y)) (F2(e^{-t'}x + s'z) - F2(z))
 *
 * applied to the shifted functions Fi(w) = f(e^{-t} y_i + sqrt(1-e^{-2t}) w),
 * whose degree-1 parts are sqrt(e^{2t}-1) * D(P_t f)(y_i); the result is
 * divided by e^{2t}-1. The inner noise is set by e^{-t'} =
 * epsilon (e^{2t}-1) / 2 (capped at 1/2) so the smoothing bias lands within
 * the requested accuracy after the rescale.
 */
ScalarEstimate estimate_grad_inner(const FunctionOracle& f, double t,
                                   std::span<const double> y1, std::span<const double> y2,
                                   const EstimatorConfig& cfg, GaussianSampler& sampler);

/**
 * Directional evaluation f_{d,xi,t,y}(x) ~ <D(P_t f)(y), x>: degree-1 proxy of
 * the shifted function at x with inner parameter xi, divided by
 * sqrt(e^{2t}-1).
 */
ScalarEstimate estimate_directional_eval(const FunctionOracle& f, double t,
                                         std::span<const double> y, std::span<const double> x,
                                         double xi, const EstimatorConfig& cfg,
                                         GaussianSampler& sampler);

/// Disagreement probability Pr[f(x) != f(e^{-t} x + sqrt(1-e^{-2t}) y)].
ScalarEstimate estimate_noise_sensitivity(const FunctionOracle& f, double t,
                                          const EstimatorConfig& cfg, GaussianSampler& sampler);

/**
 * Shared-sample gradient-vector estimate (used by the practical presets):
 *
 *   D(P_t f)(y) = c_t E_x[f(e^{-t} y + sqrt(1-e^{-2t}) x) x],
 *   c_t = e^{-t} / sqrt(1-e^{-2t})
 *
 * by Gaussian integration by parts. One query yields all n coordinates, so an
 * r-anchor Gram costs r*N queries instead of r^2 * (per-entry batches). The
 * two half-sample averages are returned alongside the full average so callers
 * can form bias-free quadratic functionals (e.g. <half1, half2> for norms).
 */
struct GradVectorEstimate {
    std::vector<double> mean;   ///< full-sample average
    std::vector<double> half1;  ///< average over samples 0, 2, 4, ...
    std::vector<double> half2;  ///< average over samples 1, 3, 5, ...
    std::uint64_t samples_used = 0;
};

GradVectorEstimate estimate_grad_vector(const FunctionOracle& f, double t,
                                        std::span<const double> y, std::size_t samples,
                                        GaussianSampler& sampler);

}  // namespace jp
