#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jp/estimators.hpp"
#include "jp/linalg.hpp"
#include "jp/oracle.hpp"
#include "jp/rank_test.hpp"
#include "jp/rng.hpp"

namespace jp {

/// Thrown when anchors fail their independence certification downstream.
class CertificationFailedError : public std::runtime_error {
public:
    explicit CertificationFailedError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by build_cover when enumeration would exceed the configured cap.
class CoverTooLargeError : public std::runtime_error {
public:
    CoverTooLargeError(double estimated, std::uint64_t cap);
    double estimated_size;
    std::uint64_t cap;
};

/**
 * The learner's implicit basis: anchors y_1..y_l, the (estimated) Gram of
 * their smoothed gradients, and the orthonormalization coefficients alpha.
 * Projections <w_i, x> are evaluated through the oracle at runtime; the
 * gradient directions themselves are never output.
 *
 * grad_cache holds the practical preset's shared-sample gradient-vector
 * estimates (plus split halves for bias-free norms). It is internal state of
 * the estimation pipeline, not part of any guarantee.
 */
struct DirectionBundle {
    double t = 0.5;
    double gamma = 0.0;             ///< independence margin
    double accept_threshold = 0.0;  ///< residual^2 a candidate must clear
    std::size_t grad_samples = 200'000;
    double xi = 0.1;                ///< inner parameter of directional evaluations
    std::size_t dir_batch = 20'000; ///< pinned batch for directional evaluations
    std::size_t pt_batch = 20'000;  ///< pinned batch for P_t f target values
    Preset preset = Preset::Practical;

    std::vector<std::vector<double>> anchors;
    std::vector<GradVectorEstimate> grad_cache;
    std::vector<double> beta;   ///< l x l Gram estimate (row-major)
    std::vector<double> alpha;  ///< l x l coefficients (row-major); empty until computed

    std::size_t l() const { return anchors.size(); }
    double beta_at(std::size_t i, std::size_t j) const { return beta[i * l() + j]; }
};

struct CandidateVerdict {
    bool yes = false;
    double norm2_estimate = 0.0;  ///< beta_{l+1,l+1}
    double residual2 = 0.0;       ///< beta_{l+1,l+1} - sum_i zeta_i^2
    std::vector<double> cross;    ///< beta_{j,l+1}, j = 1..l
    GradVectorEstimate grad;      ///< candidate's gradient estimate (for reuse on accept)
};

/**
 * Candidate-direction test: estimate the new row/diagonal of the Gram, form
 * zeta_i = sum_j alpha_{ij} beta_{j,l+1}, and accept iff
 * beta_{l+1,l+1} - sum zeta_i^2 exceeds the acceptance threshold (the
 * unsquared diagonal reading: the diagonal entry estimates ||v_{l+1}||^2).
 * Yes is guaranteed when D(P_t f)(y_new) is >= gamma from the current span;
 * no implies distance < gamma/2 (up to estimation error).
 */
CandidateVerdict test_candidate_direction(const FunctionOracle& f, const DirectionBundle& bundle,
                                          std::span<const double> y_new,
                                          GaussianSampler& sampler);

/**
 * Direction collection: repeatedly draw y ~ gamma_n and keep those whose
 * smoothed gradient leaves the current span, until k directions are found or
 * max_stale candidates in a row fail. gamma = eps^2/8; the practical preset
 * floors the acceptance threshold at the estimator noise scale and caps the
 * stale-streak budget.
 */
DirectionBundle find_candidate_directions(const FunctionOracle& f, std::size_t k, double s,
                                          double eps, GaussianSampler& sampler,
                                          Preset preset = Preset::Practical);

/**
 * Orthonormalization coefficients for the bundle: alpha = transpose-indexed
 * inverse square root of the (symmetrized) Gram, certified via the appendix
 * tolerance chain with perturbation budget tau. Stores alpha into the bundle.
 * Throws CertificationFailedError when the Gram is rank-deficient.
 */
void compute_ortho_transform(const FunctionOracle& f, DirectionBundle& bundle, double tau);

/**
 * A hypothesis g: R^l -> [-1,1] with a serializable description.
 */
struct Hypothesis {
    std::string desc;
    std::function<double(std::span<const double>)> eval;
};

/// sign(+-(z - theta)) thresholds on R^1; `count` total members, half per
/// orientation, thresholds equispaced over [lo, hi].
std::vector<Hypothesis> threshold_hypotheses(std::size_t count, double lo = -2.0,
                                             double hi = 2.0);

/// Constant hypotheses c in {-1, ..., +1}, `count` equispaced values (any l).
std::vector<Hypothesis> constant_hypotheses(std::size_t count);

/**
 * Discretized Lipschitz hypothesis on R^l: value at the nearest net point
 * (ties by lexicographic order of the net point), 0 outside the ball of
 * radius sqrt(l) * ln(100/delta). All stored values are exact multiples of
 * delta/100; net points form a maximal delta/(2L)-packing of a deterministic
 * centered grid; L = 2 * C_t with C_t = c / sqrt(t).
 */
struct CoverFunction {
    std::size_t dim = 1;
    double delta = 0.1;
    double lipschitz = 1.0;  ///< L
    double radius = 1.0;
    std::vector<std::vector<double>> net;
    std::vector<double> values;

    double evaluate(std::span<const double> x) const;
};

struct CoverOptions {
    double c = 1.0;                        ///< constant in C_t = c / sqrt(t)
    std::uint64_t max_functions = 200'000; ///< enumeration cap
};

/// Net points only (shared by every function in the cover).
CoverFunction cover_skeleton(std::size_t l, double t, double delta, const CoverOptions& opts);

/// Upper bound used for the feasibility pre-check: (2 floor(100/delta) + 1)^|net|.
double cover_size_upper_bound(std::size_t l, double t, double delta, const CoverOptions& opts);

/**
 * Enumerate all value assignments (multiples of delta/100, adjacent net
 * points Lipschitz-compatible), lazily via sink; return false from the sink
 * to stop. Throws CoverTooLargeError if the pre-check exceeds the cap.
 */
void enumerate_cover(std::size_t l, double t, double delta, const CoverOptions& opts,
                     const std::function<bool(const CoverFunction&)>& sink);

/// Materialized cover (throws CoverTooLargeError past the cap).
std::vector<CoverFunction> build_cover(std::size_t l, double t, double delta,
                                       const CoverOptions& opts);

/// Theorem-style covering-number bound: exp((C sqrt(k) ln^2(1/delta) / (delta sqrt(t)))^k).
double cover_count_log_bound(std::size_t k, double t, double delta, double C);

struct LearnedHypothesis {
    Hypothesis g;
    DirectionBundle bundle;
    double score = 0.0;  ///< O_g of the winner
    std::vector<double> all_scores;
    std::uint64_t queries = 0;
};

/**
 * Hypothesis selection: draw J = (10/eps^2) ln(1/mu) fresh points with
 * mu = eps/|hypotheses|, evaluate the implicit projections
 * xbar_{i,j'} = sum_j alpha_{j',j} f_{d,xi,t,y_j}(x_i), score each g by
 * O_g = mean |P_t f(x_i) - g(xbar_i)|, return the argmin (ties by enumeration
 * order).
 */
LearnedHypothesis estimate_closest_hypothesis(const FunctionOracle& f,
                                              const DirectionBundle& bundle,
                                              const std::vector<Hypothesis>& hypotheses,
                                              double eps, GaussianSampler& sampler);

/// A family generator: given the discovered dimension l, produce hypotheses.
using HypothesisFamily = std::function<std::vector<Hypothesis>(std::size_t l)>;

/// Restricted families for the CLI: "thresholds:200", "constants:41", "cover".
HypothesisFamily named_hypothesis_family(const std::string& spec);

/**
 * End-to-end learner: collect directions, orthonormalize
 * (tau = eps^2 sqrt(t) / (100 l^{3/2})), build/receive hypotheses, select the
 * closest. family == nullptr uses the full cover enumeration (feasible only
 * at toy parameters).
 */
LearnedHypothesis find_invariant_structure(const FunctionOracle& f, std::size_t k, double s,
                                           double eps, GaussianSampler& sampler,
                                           const HypothesisFamily& family,
                                           Preset preset = Preset::Practical);

/// Evaluate the learned hypothesis at x through the same estimator chain used
/// in training (fresh oracle queries; deterministic given the sampler state).
double evaluate_learned(const LearnedHypothesis& h, const FunctionOracle& f,
                        std::span<const double> x, GaussianSampler& sampler);

struct StructureClassVerdict {
    bool yes = false;
    RankVerdict rank;
    bool learned = false;
    std::optional<LearnedHypothesis> hypothesis;
    bool checker_accepted = false;
    std::uint64_t queries = 0;
};

/**
 * Subclass tester: rank test, then structure learning, then a query-free
 * closeness check of the learned g against the class. The checker must issue
 * zero oracle queries — enforced by a ledger freeze (throws logic_error on
 * violation).
 */
StructureClassVerdict test_structure_class(
    const FunctionOracle& f, const std::function<bool(const LearnedHypothesis&)>& class_checker,
    std::size_t k, double s, double eps, GaussianSampler& sampler, const HypothesisFamily& family,
    Preset preset = Preset::Practical);

}  // namespace jp
