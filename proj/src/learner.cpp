#include "jp/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jp {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

}  // namespace

CoverTooLargeError::CoverTooLargeError(double estimated, std::uint64_t limit)
    : std::runtime_error("cover enumeration too large: estimated " + fmt(estimated) +
                         " functions > cap " + std::to_string(limit) +
                         " (use a restricted hypothesis family)"),
      estimated_size(estimated),
      cap(limit) {}

// ---------------------------------------------------------------------------
// Candidate directions
// ---------------------------------------------------------------------------

CandidateVerdict test_candidate_direction(const FunctionOracle& f, const DirectionBundle& bundle,
                                          std::span<const double> y_new,
                                          GaussianSampler& sampler) {
    CandidateVerdict v;
    v.grad = estimate_grad_vector(f, bundle.t, y_new, bundle.grad_samples, sampler);
    // Diagonal from the split halves: <half1, half2> is a bias-free estimate
    // of ||D(P_t f)(y_new)||^2 (the full-sample norm carries +E||noise||^2).
    v.norm2_estimate = dot(v.grad.half1, v.grad.half2);
    const std::size_t l = bundle.l();
    v.cross.resize(l);
    for (std::size_t j = 0; j < l; ++j) v.cross[j] = dot(bundle.grad_cache[j].mean, v.grad.mean);
    double zeta2 = 0.0;
    if (l > 0) {
        require(bundle.alpha.size() == l * l,
                "test_candidate_direction: bundle has no orthonormalization coefficients");
        for (std::size_t i = 0; i < l; ++i) {
            double zeta = 0.0;
            for (std::size_t j = 0; j < l; ++j) zeta += bundle.alpha[i * l + j] * v.cross[j];
            zeta2 += zeta * zeta;
        }
    }
    v.residual2 = v.norm2_estimate - zeta2;
    v.yes = v.residual2 > bundle.accept_threshold;
    return v;
}

namespace {

/// Recompute bundle.alpha from bundle.beta; throws CertificationFailedError.
void refresh_alpha(DirectionBundle& bundle, double nu) {
    const std::size_t l = bundle.l();
    if (l == 0) {
        bundle.alpha.clear();
        return;
    }
    SymMatrix beta = SymMatrix::symmetrized(l, bundle.beta);
    const double eta = 1.0 / std::sqrt(std::exp(2.0 * bundle.t) - 1.0);
    try {
        SymMatrix alpha = orthonormalize_coeffs(beta, l, std::max(eta, bundle.gamma / 2.0),
                                                bundle.gamma / 2.0, nu);
        bundle.alpha = alpha.data();
    } catch (const PerturbationTooLargeError& e) {
        throw CertificationFailedError(
            "anchors failed independence certification (Gram lambda_min = " +
            fmt(e.lambda_min) + ")");
    }
}

void push_anchor(DirectionBundle& bundle, std::vector<double> y, CandidateVerdict&& cand,
                 double nu) {
    const std::size_t l = bundle.l();
    std::vector<double> beta((l + 1) * (l + 1), 0.0);
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = 0; j < l; ++j) beta[i * (l + 1) + j] = bundle.beta_at(i, j);
        beta[i * (l + 1) + l] = cand.cross[i];
        beta[l * (l + 1) + i] = cand.cross[i];
    }
    beta[l * (l + 1) + l] = cand.norm2_estimate;
    bundle.anchors.push_back(std::move(y));
    bundle.grad_cache.push_back(std::move(cand.grad));
    bundle.beta = std::move(beta);
    refresh_alpha(bundle, nu);
}

}  // namespace

DirectionBundle find_candidate_directions(const FunctionOracle& f, std::size_t k, double s,
                                          double eps, GaussianSampler& sampler, Preset preset) {
    require(k >= 1, "find_candidate_directions: k must be >= 1");
    require(s > 0.0 && eps > 0.0 && eps < 1.0,
            "find_candidate_directions: need s > 0, eps in (0,1)");

    DirectionBundle bundle;
    bundle.preset = preset;
    bundle.gamma = eps * eps / 8.0;
    const double tau_succ = std::pow(eps, 6.0) / (s * s);
    double max_stale = (1.0 / tau_succ) * std::log(10.0 * static_cast<double>(k) / eps);
    if (preset == Preset::Practical) {
        bundle.t = 0.5;
        bundle.grad_samples = 200'000;
        max_stale = std::min(max_stale, 40.0);
        // Floor the acceptance threshold at the shared-sample estimator's
        // noise scale so pure noise cannot certify a fresh direction.
        bundle.accept_threshold =
            std::max(std::pow(0.75 * bundle.gamma, 2.0),
                     600.0 / static_cast<double>(bundle.grad_samples));
    } else {
        bundle.t = std::pow(eps, 4.0) / (900.0 * s * s);
        bundle.accept_threshold = std::pow(0.75 * bundle.gamma, 2.0);
    }
    const double nu = bundle.gamma * bundle.gamma * bundle.t / 100.0;

    const std::size_t n = f.dimension();
    GaussianSampler draw_stream = sampler.child(0);
    std::uint64_t attempt = 0;
    std::size_t stale = 0;
    while (bundle.l() < k && static_cast<double>(stale) < max_stale) {
        std::vector<double> y = draw_stream.point(n);
        GaussianSampler est_stream = sampler.child(1 + attempt++);
        CandidateVerdict cand = test_candidate_direction(f, bundle, y, est_stream);
        if (cand.yes) {
            try {
                push_anchor(bundle, std::move(y), std::move(cand), nu);
                stale = 0;
                continue;
            } catch (const CertificationFailedError&) {
                // Candidate looked independent entrywise but broke the Gram's
                // spectral certificate; treat as a failed attempt.
            }
        }
        ++stale;
    }
    return bundle;
}

void compute_ortho_transform(const FunctionOracle& /*f*/, DirectionBundle& bundle, double tau) {
    require(tau > 0.0, "compute_ortho_transform: tau must be positive");
    refresh_alpha(bundle, tau);
}

// ---------------------------------------------------------------------------
// Hypothesis families
// ---------------------------------------------------------------------------

std::vector<Hypothesis> threshold_hypotheses(std::size_t count, double lo, double hi) {
    require(count >= 2 && hi > lo, "threshold_hypotheses: need count >= 2, hi > lo");
    const std::size_t per_side = count / 2;
    std::vector<Hypothesis> out;
    out.reserve(per_side * 2);
    for (int orient = 0; orient < 2; ++orient) {
        const double sgn = orient == 0 ? 1.0 : -1.0;
        for (std::size_t i = 0; i < per_side; ++i) {
            const double theta =
                lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(per_side - 1);
            Hypothesis h;
            h.desc = std::string("threshold:") + (orient == 0 ? "+" : "-") + ":" + fmt(theta);
            h.eval = [sgn, theta](std::span<const double> z) {
                return sgn * sign_pm1(z[0] - theta);
            };
            out.push_back(std::move(h));
        }
    }
    return out;
}

std::vector<Hypothesis> constant_hypotheses(std::size_t count) {
    require(count >= 2, "constant_hypotheses: need count >= 2");
    std::vector<Hypothesis> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double c = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(count - 1);
        Hypothesis h;
        h.desc = "constant:" + fmt(c);
        h.eval = [c](std::span<const double>) { return c; };
        out.push_back(std::move(h));
    }
    return out;
}

HypothesisFamily named_hypothesis_family(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    std::size_t count = 0;
    if (colon != std::string::npos) count = std::stoul(spec.substr(colon + 1));
    if (name == "thresholds") {
        const std::size_t c = count ? count : 200;
        return [c](std::size_t l) {
            return l == 0 ? constant_hypotheses(41) : threshold_hypotheses(c);
        };
    }
    if (name == "constants") {
        const std::size_t c = count ? count : 41;
        return [c](std::size_t) { return constant_hypotheses(c); };
    }
    if (name == "cover") return HypothesisFamily();  // empty => full enumeration
    throw std::invalid_argument("unknown hypothesis family '" + spec + "'");
}

// ---------------------------------------------------------------------------
// Cover construction
// ---------------------------------------------------------------------------

double CoverFunction::evaluate(std::span<const double> x) const {
    double norm2x = 0.0;
    for (double c : x) norm2x += c * c;
    if (norm2x > radius * radius) return 0.0;
    // Nearest net point; ties resolved by lexicographic order of the point
    // coordinates (net points are pre-sorted so the first minimum wins).
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < net.size(); ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double diff = x[c] - net[i][c];
            d += diff * diff;
        }
        if (d < best_d - 1e-15) {
            best_d = d;
            best = i;
        }
    }
    return values[best];
}

CoverFunction cover_skeleton(std::size_t l, double t, double delta, const CoverOptions& opts) {
    require(l >= 1, "cover_skeleton: l must be >= 1");
    require(t > 0.0 && delta > 0.0 && delta < 1.0, "cover_skeleton: need t > 0, delta in (0,1)");
    CoverFunction skel;
    skel.dim = l;
    skel.delta = delta;
    const double ct = opts.c / std::sqrt(t);
    skel.lipschitz = 2.0 * ct;  // L = 2 C_t
    skel.radius = std::sqrt(static_cast<double>(l)) * std::log(100.0 / delta);
    const double spacing = delta / (2.0 * skel.lipschitz);

    // Deterministic candidate grid (step = spacing/2), scanned center-out
    // (then lexicographically), greedily kept when >= spacing from all
    // accepted points: a maximal spacing-packing containing the origin.
    const double step = spacing / 2.0;
    const long radius_steps = static_cast<long>(std::floor(skel.radius / step));
    const double cand_per_axis = 2.0 * static_cast<double>(radius_steps) + 1.0;
    if (std::pow(cand_per_axis, static_cast<double>(l)) > 4e6)
        throw CoverTooLargeError(std::pow(cand_per_axis, static_cast<double>(l)),
                                 opts.max_functions);

    std::vector<std::vector<double>> candidates;
    std::vector<long> z(l, -radius_steps);
    while (true) {
        double norm2p = 0.0;
        std::vector<double> p(l);
        for (std::size_t c = 0; c < l; ++c) {
            p[c] = static_cast<double>(z[c]) * step;
            norm2p += p[c] * p[c];
        }
        if (norm2p <= skel.radius * skel.radius) candidates.push_back(std::move(p));
        // Odometer increment.
        std::size_t c = l;
        while (c > 0) {
            --c;
            if (++z[c] <= radius_steps) break;
            z[c] = -radius_steps;
            if (c == 0) goto done;
        }
        if (l == 1 && z[0] == -radius_steps) break;  // wrapped
    }
done:
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const std::vector<double>& a, const std::vector<double>& b) {
                         double na = 0.0, nb = 0.0;
                         for (double v : a) na += v * v;
                         for (double v : b) nb += v * v;
                         if (na != nb) return na < nb;
                         return a < b;
                     });
    for (auto& p : candidates) {
        bool ok = true;
        for (const auto& q : skel.net) {
            double d = 0.0;
            for (std::size_t c = 0; c < l; ++c) d += (p[c] - q[c]) * (p[c] - q[c]);
            if (d < spacing * spacing) {
                ok = false;
                break;
            }
        }
        if (ok) skel.net.push_back(p);
    }
    return skel;
}

double cover_size_upper_bound(std::size_t l, double t, double delta, const CoverOptions& opts) {
    CoverFunction skel = cover_skeleton(l, t, delta, opts);
    const double levels = 2.0 * std::floor(100.0 / delta) + 1.0;
    return std::pow(levels, static_cast<double>(skel.net.size()));
}

void enumerate_cover(std::size_t l, double t, double delta, const CoverOptions& opts,
                     const std::function<bool(const CoverFunction&)>& sink) {
    CoverFunction skel = cover_skeleton(l, t, delta, opts);
    const long max_level = static_cast<long>(std::floor(100.0 / delta));
    const double unit = delta / 100.0;
    const double levels = 2.0 * static_cast<double>(max_level) + 1.0;
    const double estimate = std::pow(levels, static_cast<double>(skel.net.size()));
    if (estimate > static_cast<double>(opts.max_functions))
        throw CoverTooLargeError(estimate, opts.max_functions);

    const std::size_t P = skel.net.size();
    std::vector<long> assignment(P, 0);
    CoverFunction out = skel;
    out.values.assign(P, 0.0);
    bool keep_going = true;

    // Depth-first assignment with pairwise Lipschitz pruning against all
    // already-assigned net points.
    std::function<void(std::size_t)> rec = [&](std::size_t idx) {
        if (!keep_going) return;
        if (idx == P) {
            for (std::size_t i = 0; i < P; ++i)
                out.values[i] = static_cast<double>(assignment[i]) * unit;
            keep_going = sink(out);
            return;
        }
        for (long level = -max_level; level <= max_level && keep_going; ++level) {
            const double v = static_cast<double>(level) * unit;
            bool ok = true;
            for (std::size_t j = 0; j < idx; ++j) {
                double d = 0.0;
                for (std::size_t c = 0; c < l; ++c) {
                    const double diff = skel.net[idx][c] - skel.net[j][c];
                    d += diff * diff;
                }
                // Exact-multiple values: allow half a quantum of slack so the
                // rounding of a genuinely L-Lipschitz function survives
                // (lipschitz already holds L = 2 C_t).
                if (std::abs(v - static_cast<double>(assignment[j]) * unit) >
                    skel.lipschitz * std::sqrt(d) + 0.5 * unit) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            assignment[idx] = level;
            rec(idx + 1);
        }
    };
    rec(0);
}

std::vector<CoverFunction> build_cover(std::size_t l, double t, double delta,
                                       const CoverOptions& opts) {
    std::vector<CoverFunction> out;
    enumerate_cover(l, t, delta, opts, [&](const CoverFunction& g) {
        out.push_back(g);
        return out.size() < opts.max_functions;
    });
    return out;
}

double cover_count_log_bound(std::size_t k, double t, double delta, double C) {
    const double kk = static_cast<double>(k);
    const double log1d = std::log(1.0 / delta);
    return std::pow(C * std::sqrt(kk) * log1d * log1d / (delta * std::sqrt(t)), kk);
}

// ---------------------------------------------------------------------------
// Hypothesis selection and learned-function evaluation
// ---------------------------------------------------------------------------

namespace {

/// xbar_{j'} = sum_j alpha_{j',j} * f_{d,xi,t,y_j}(x) for one point x.
std::vector<double> implicit_projection(const FunctionOracle& f, const DirectionBundle& bundle,
                                        std::span<const double> x, GaussianSampler& sampler) {
    const std::size_t l = bundle.l();
    std::vector<double> dir(l);
    EstimatorConfig cfg;
    cfg.epsilon = 0.05;  // nominal; the pinned batch/blocks control the work
    cfg.delta = 0.2;
    cfg.t = bundle.t;
    cfg.blocks = 1;
    cfg.batch = bundle.dir_batch;
    for (std::size_t j = 0; j < l; ++j) {
        GaussianSampler stream = sampler.child(j);
        dir[j] =
            estimate_directional_eval(f, bundle.t, bundle.anchors[j], x, bundle.xi, cfg, stream)
                .value;
    }
    std::vector<double> xbar(l, 0.0);
    for (std::size_t jp_ = 0; jp_ < l; ++jp_)
        for (std::size_t j = 0; j < l; ++j) xbar[jp_] += bundle.alpha[jp_ * l + j] * dir[j];
    return xbar;
}

}  // namespace

LearnedHypothesis estimate_closest_hypothesis(const FunctionOracle& f,
                                              const DirectionBundle& bundle,
                                              const std::vector<Hypothesis>& hypotheses,
                                              double eps, GaussianSampler& sampler) {
    require(!hypotheses.empty(), "estimate_closest_hypothesis: empty hypothesis list");
    require(eps > 0.0 && eps < 1.0, "estimate_closest_hypothesis: eps must be in (0,1)");
    const std::size_t l = bundle.l();
    require(l == 0 || bundle.alpha.size() == l * l,
            "estimate_closest_hypothesis: bundle has no orthonormalization coefficients");

    auto ledger = std::make_shared<QueryLedger>();
    FunctionOracle fc = f.with_ledger(ledger);

    const double mu = eps / static_cast<double>(hypotheses.size());
    const std::size_t J = static_cast<std::size_t>(
        std::ceil(10.0 / (eps * eps) * std::log(1.0 / mu)));

    EstimatorConfig pt_cfg;
    pt_cfg.epsilon = 0.05;
    pt_cfg.delta = 0.2;
    pt_cfg.t = bundle.t;
    pt_cfg.blocks = 1;
    pt_cfg.batch = bundle.pt_batch;

    const std::size_t n = fc.dimension();
    std::vector<double> scores(hypotheses.size(), 0.0);
    GaussianSampler point_stream = sampler.child(0);
    for (std::size_t i = 0; i < J; ++i) {
        std::vector<double> x = point_stream.point(n);
        GaussianSampler work = sampler.child(1 + i);
        std::vector<double> xbar = implicit_projection(fc, bundle, x, work);
        GaussianSampler pt_stream = work.child(l);
        const double target = estimate_pt(fc, bundle.t, x, pt_cfg, pt_stream).value;
        for (std::size_t h = 0; h < hypotheses.size(); ++h)
            scores[h] += std::abs(target - hypotheses[h].eval(xbar));
    }
    for (double& s : scores) s /= static_cast<double>(J);

    std::size_t best = 0;
    for (std::size_t h = 1; h < scores.size(); ++h)
        if (scores[h] < scores[best]) best = h;  // strict: ties keep first in order

    LearnedHypothesis out;
    out.g = hypotheses[best];
    out.bundle = bundle;
    out.score = scores[best];
    out.all_scores = std::move(scores);
    out.queries = ledger->total();
    return out;
}

LearnedHypothesis find_invariant_structure(const FunctionOracle& f, std::size_t k, double s,
                                           double eps, GaussianSampler& sampler,
                                           const HypothesisFamily& family, Preset preset) {
    auto ledger = std::make_shared<QueryLedger>();
    FunctionOracle fc = f.with_ledger(ledger);

    GaussianSampler collect_stream = sampler.child(0);
    DirectionBundle bundle = find_candidate_directions(fc, k, s, eps, collect_stream, preset);
    const std::size_t l = bundle.l();
    if (l > 0) {
        const double tau = eps * eps * std::sqrt(bundle.t) /
                           (100.0 * std::pow(static_cast<double>(l), 1.5));
        compute_ortho_transform(fc, bundle, tau);
    }

    std::vector<Hypothesis> hypotheses;
    if (family) {
        hypotheses = family(l);
    } else if (l == 0) {
        hypotheses = constant_hypotheses(41);
    } else {
        CoverOptions opts;
        std::vector<CoverFunction> cover = build_cover(l, bundle.t, eps / 10.0, opts);
        hypotheses.reserve(cover.size());
        for (std::size_t i = 0; i < cover.size(); ++i) {
            Hypothesis h;
            h.desc = "cover:" + std::to_string(i);
            h.eval = [g = cover[i]](std::span<const double> z) { return g.evaluate(z); };
            hypotheses.push_back(std::move(h));
        }
    }

    GaussianSampler select_stream = sampler.child(1);
    LearnedHypothesis out = estimate_closest_hypothesis(fc, bundle, hypotheses, eps, select_stream);
    out.queries = ledger->total();
    return out;
}

double evaluate_learned(const LearnedHypothesis& h, const FunctionOracle& f,
                        std::span<const double> x, GaussianSampler& sampler) {
    std::vector<double> xbar = implicit_projection(f, h.bundle, x, sampler);
    return h.g.eval(xbar);
}

StructureClassVerdict test_structure_class(
    const FunctionOracle& f, const std::function<bool(const LearnedHypothesis&)>& class_checker,
    std::size_t k, double s, double eps, GaussianSampler& sampler, const HypothesisFamily& family,
    Preset preset) {
    require(static_cast<bool>(class_checker), "test_structure_class: missing class checker");
    StructureClassVerdict verdict;

    RankTestParams params = RankTestParams::derive(k, s, eps, preset);
    GaussianSampler rank_stream = sampler.child(0);
    verdict.rank = test_rank(f, params, rank_stream);
    verdict.queries = verdict.rank.queries;
    if (!verdict.rank.yes) {
        verdict.yes = false;
        return verdict;
    }

    GaussianSampler learn_stream = sampler.child(1);
    verdict.hypothesis = find_invariant_structure(f, k, s, eps, learn_stream, family, preset);
    verdict.learned = true;
    verdict.queries += verdict.hypothesis->queries;

    // Step 3 is query-free by contract: freeze the ledger around the checker.
    const std::uint64_t before = f.ledger()->total();
    verdict.checker_accepted = class_checker(*verdict.hypothesis);
    if (f.ledger()->total() != before)
        throw std::logic_error("test_structure_class: class checker issued oracle queries");
    verdict.yes = verdict.checker_accepted;
    return verdict;
}

}  // namespace jp
