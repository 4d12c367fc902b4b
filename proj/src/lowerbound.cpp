#include "jp/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace jp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct StripedTrial {
    double theta[2];       // unit direction of the stripes
    double perp[2];        // 90-degree clockwise rotation of theta
    double z;              // cut offset along perp
    std::uint64_t bseed;   // per-stripe bit stream key
    std::vector<double> breaks;  // interior breakpoints, unsorted, in (-1,1)

    double proj(const std::array<double, 2>& p) const {
        return p[0] * theta[0] + p[1] * theta[1];
    }
    double cut_side(const std::array<double, 2>& p) const {
        return sign_pm1(p[0] * perp[0] + p[1] * perp[1] - z);
    }
    bool inside(double t) const { return t > -1.0 && t <= 1.0; }
    /// 1-based stripe index of a projection in (-1, 1].
    std::size_t stripe(double t) const {
        std::size_t idx = 1;
        for (double a : breaks)
            if (a < t) ++idx;
        return idx;
    }
    int bit(std::size_t stripe_index) const {
        return (mix64(bseed ^ mix64(stripe_index)) & 1ULL) ? 1 : -1;
    }
};

/// Draw order: stripe angle, bit-stream key, cut offset, then the s-1
/// interior breakpoints. All from one Rng so a seed pins the whole trial.
StripedTrial draw_trial(std::size_t s, std::uint64_t seed) {
    if (s == 0) throw std::invalid_argument("striped trial: s must be >= 1");
    Rng rng(seed);
    StripedTrial tr;
    const double phi = rng.uniform(0.0, kTwoPi);
    tr.theta[0] = std::cos(phi);
    tr.theta[1] = std::sin(phi);
    tr.perp[0] = tr.theta[1];
    tr.perp[1] = -tr.theta[0];
    tr.bseed = rng.next_u64();
    tr.z = rng.uniform(-1.0, 1.0);
    tr.breaks.resize(s - 1);
    for (double& a : tr.breaks) a = rng.uniform(-1.0, 1.0);
    return tr;
}

}  // namespace

void QueryDesign::validate() const {
    if (points.empty()) throw std::invalid_argument("QueryDesign: need at least one point");
    for (const auto& p : points)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
            throw std::invalid_argument("QueryDesign: points must be finite");
}

QueryDesign design_grid(std::size_t rows, std::size_t cols, double extent) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("design_grid: empty grid");
    QueryDesign d;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double y = rows == 1 ? 0.0
                                       : -extent + 2.0 * extent * static_cast<double>(r) /
                                                       static_cast<double>(rows - 1);
            const double x = cols == 1 ? 0.0
                                       : -extent + 2.0 * extent * static_cast<double>(c) /
                                                       static_cast<double>(cols - 1);
            d.points.push_back({x, y});
        }
    d.validate();
    return d;
}

QueryDesign design_cloud(std::size_t n, std::uint64_t seed, double scale) {
    QueryDesign d;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        d.points.push_back({scale * rng.normal(), scale * rng.normal()});
    d.validate();
    return d;
}

QueryDesign design_two_cluster(std::size_t n, std::uint64_t seed, double separation,
                               double jitter) {
    QueryDesign d;
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double cx = (i % 2 == 0) ? separation : -separation;
        d.points.push_back({cx + jitter * rng.normal(), jitter * rng.normal()});
    }
    d.validate();
    return d;
}

QueryDesign design_from_spec(const std::string& spec, std::uint64_t seed) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "grid") {
        const auto x = arg.find('x');
        if (x == std::string::npos)
            throw std::invalid_argument("design_from_spec: expected grid:RxC");
        return design_grid(std::stoul(arg.substr(0, x)), std::stoul(arg.substr(x + 1)));
    }
    if (name == "cloud") return design_cloud(std::stoul(arg), seed);
    if (name == "clusters") return design_two_cluster(std::stoul(arg), seed);
    throw std::invalid_argument("unknown design '" + spec + "'");
}

CouplingOutcome run_coupling_trial(const QueryDesign& design, std::size_t s, std::uint64_t seed,
                                   bool verify_geometry) {
    design.validate();
    const StripedTrial tr = draw_trial(s, seed);
    const std::size_t n = design.n();

    std::vector<double> projs(n);
    std::vector<std::size_t> stripes(n, 0);  // 0 = outside (-1, 1]
    std::vector<double> sides(n);
    for (std::size_t i = 0; i < n; ++i) {
        projs[i] = tr.proj(design.points[i]);
        if (tr.inside(projs[i])) stripes[i] = tr.stripe(projs[i]);
        sides[i] = tr.cut_side(design.points[i]);
    }

    // Per occupied stripe: which cut sides do design points use?
    // A fails iff any stripe sees both sides. The re-coupling flip for a
    // one-sided stripe is that side (so g's answers there reproduce f's);
    // stripes never queried keep flip +1 (any choice is measure-preserving).
    std::map<std::size_t, std::pair<bool, bool>> stripe_sides;  // {saw +, saw -}
    for (std::size_t i = 0; i < n; ++i) {
        if (stripes[i] == 0) continue;
        auto& f = stripe_sides[stripes[i]];
        (sides[i] > 0.0 ? f.first : f.second) = true;
    }

    CouplingOutcome out;
    out.event_A_held = true;
    for (const auto& [stripe, seen] : stripe_sides)
        if (seen.first && seen.second) out.event_A_held = false;

    out.answers_f.resize(n);
    out.answers_g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (stripes[i] == 0) {
            out.answers_f[i] = 1;
            out.answers_g[i] = 1;
            continue;
        }
        const int b = tr.bit(stripes[i]);
        const auto& seen = stripe_sides.at(stripes[i]);
        const double flip = (seen.first && seen.second) ? 1.0 : (seen.first ? 1.0 : -1.0);
        out.answers_f[i] = b;
        out.answers_g[i] = static_cast<int>(b * flip * sides[i]);
    }

    if (out.event_A_held && out.answers_f != out.answers_g)
        throw std::logic_error("coupling identity violated despite event A");

    if (verify_geometry) {
        // Independent recomputation by direct pairwise inequalities: A fails
        // iff some pair of in-range points has no breakpoint strictly between
        // their projections (same stripe) yet lies on opposite cut sides.
        bool held = true;
        for (std::size_t i = 0; i < n && held; ++i) {
            if (stripes[i] == 0) continue;
            for (std::size_t j = i + 1; j < n && held; ++j) {
                if (stripes[j] == 0) continue;
                if (sides[i] == sides[j]) continue;
                const double lo = std::min(projs[i], projs[j]);
                const double hi = std::max(projs[i], projs[j]);
                bool separated = false;
                for (double a : tr.breaks)
                    if (a >= lo && a < hi) {  // a in [lo, hi): splits (lo, hi]
                        separated = true;
                        break;
                    }
                if (!separated) held = false;
            }
        }
        out.event_A_direct = held;
    }
    return out;
}

double event_a_failure_rate(const QueryDesign& design, std::size_t s, std::uint64_t trials,
                            std::uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("event_a_failure_rate: trials must be >= 1");
    std::uint64_t failures = 0;
    for (std::uint64_t t = 0; t < trials; ++t)
        if (!run_coupling_trial(design, s, mix64(seed ^ mix64(t + 1))).event_A_held) ++failures;
    return static_cast<double>(failures) / static_cast<double>(trials);
}

namespace {

/// Answer-vector bitmask (bit i set iff answer at point i is +1) for one
/// independent sample of the stripe-only (d2 = false) or cut (d2 = true)
/// distribution.
std::uint32_t answer_mask(const QueryDesign& design, std::size_t s, std::uint64_t seed,
                          bool d2) {
    const StripedTrial tr = draw_trial(s, seed);
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < design.n(); ++i) {
        const double t = tr.proj(design.points[i]);
        int v = 1;
        if (tr.inside(t)) {
            v = tr.bit(tr.stripe(t));
            if (d2) v = static_cast<int>(v * tr.cut_side(design.points[i]));
        }
        if (v > 0) mask |= (1U << i);
    }
    return mask;
}

double tv_from_counts(const std::vector<std::uint64_t>& cf, const std::vector<std::uint64_t>& cg,
                      std::uint64_t trials, double cells_total) {
    // Plus-four smoothing with the 4 pseudo-counts spread uniformly over all
    // 2^n cells; cells untouched by both samples cancel exactly.
    const double alpha = 4.0 / cells_total;
    const double denom = static_cast<double>(trials) + 4.0;
    double tv = 0.0;
    for (std::size_t c = 0; c < cf.size(); ++c)
        tv += std::abs((static_cast<double>(cf[c]) + alpha) - (static_cast<double>(cg[c]) + alpha)) /
              denom;
    return 0.5 * tv;
}

std::vector<std::uint64_t> resample_counts(const std::vector<std::uint64_t>& counts,
                                           std::uint64_t trials, Rng& rng) {
    std::vector<double> cum(counts.size());
    double acc = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        acc += static_cast<double>(counts[c]);
        cum[c] = acc;
    }
    std::vector<std::uint64_t> out(counts.size(), 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        const double u = rng.uniform() * acc;
        const std::size_t c = static_cast<std::size_t>(
            std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        ++out[std::min(c, out.size() - 1)];
    }
    return out;
}

}  // namespace

TvEstimate estimate_tv_distance(const QueryDesign& design, std::size_t s, std::uint64_t trials,
                                std::uint64_t seed, std::size_t bootstrap) {
    design.validate();
    if (design.n() > 20)
        throw std::invalid_argument("estimate_tv_distance: answer space 2^n needs n <= 20");
    if (trials == 0) throw std::invalid_argument("estimate_tv_distance: trials must be >= 1");

    std::map<std::uint32_t, std::pair<std::uint64_t, std::uint64_t>> cells;
    for (std::uint64_t t = 0; t < trials; ++t) {
        ++cells[answer_mask(design, s, mix64(seed ^ mix64(2 * t + 1)), false)].first;
        ++cells[answer_mask(design, s, mix64(seed ^ mix64(2 * t + 2)), true)].second;
    }

    std::vector<std::uint64_t> cf, cg;
    cf.reserve(cells.size());
    cg.reserve(cells.size());
    for (const auto& [mask, counts] : cells) {
        cf.push_back(counts.first);
        cg.push_back(counts.second);
    }
    const double cells_total = std::pow(2.0, static_cast<double>(design.n()));

    TvEstimate est;
    est.trials = trials;
    est.cells_occupied = cells.size();
    est.tv = tv_from_counts(cf, cg, trials, cells_total);

    if (bootstrap > 0) {
        Rng boot(mix64(seed ^ 0x626f6f74ULL));
        std::vector<double> tvs(bootstrap);
        for (std::size_t b = 0; b < bootstrap; ++b) {
            Rng r = boot.child(b);
            tvs[b] = tv_from_counts(resample_counts(cf, trials, r),
                                    resample_counts(cg, trials, r), trials, cells_total);
        }
        std::sort(tvs.begin(), tvs.end());
        const std::size_t q = static_cast<std::size_t>(
            std::ceil(0.975 * static_cast<double>(bootstrap))) - 1;
        est.tv_ci = std::max(0.0, tvs[q] - est.tv);
    }
    return est;
}

double estimate_distance_to_1junta(const FunctionOracle& g, std::size_t directions,
                                   std::size_t samples, std::uint64_t seed) {
    if (g.dimension() != 2)
        throw std::invalid_argument("estimate_distance_to_1junta: oracle must be on R^2");
    if (directions == 0 || samples == 0)
        throw std::invalid_argument("estimate_distance_to_1junta: need directions, samples >= 1");

    GaussianSampler sampler(seed);
    std::vector<std::array<double, 2>> xs(samples);
    std::vector<int> vals(samples);
    std::vector<double> buf(2);
    for (std::size_t i = 0; i < samples; ++i) {
        sampler.point_into(buf.data(), 2);
        xs[i] = {buf[0], buf[1]};
        vals[i] = g.evaluate(buf) > 0.0 ? 1 : -1;
    }

    constexpr std::size_t kBins = 200;
    double best = 1.0;
    for (std::size_t d = 0; d < directions; ++d) {
        const double phi = std::numbers::pi * static_cast<double>(d) /
                           static_cast<double>(directions);
        const double ux = std::cos(phi), uy = std::sin(phi);
        std::array<std::uint32_t, kBins> plus{}, minus{};
        for (std::size_t i = 0; i < samples; ++i) {
            const double t = xs[i][0] * ux + xs[i][1] * uy;
            long b = static_cast<long>(std::floor((t + 4.0) / 8.0 * static_cast<double>(kBins)));
            b = std::clamp(b, 0L, static_cast<long>(kBins) - 1);
            (vals[i] > 0 ? plus : minus)[static_cast<std::size_t>(b)]++;
        }
        std::uint64_t disagree = 0;
        for (std::size_t b = 0; b < kBins; ++b) disagree += std::min(plus[b], minus[b]);
        best = std::min(best, static_cast<double>(disagree) / static_cast<double>(samples));
    }
    return best;
}

}  // namespace jp
