// junta-probe: query-model experiments for linear-junta testing and learning
// under the Gaussian measure. Subcommands: test, learn, structure-test,
// lowerbound, bench-estimators. All randomness derives from --seed.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jp/closed_forms.hpp"
#include "jp/estimators.hpp"
#include "jp/learner.hpp"
#include "jp/lowerbound.hpp"
#include "jp/rank_test.hpp"
#include "jp/report.hpp"
#include "jp/zoo.hpp"

namespace {

using jp::RunConfig;
using njson = nlohmann::json;

/// Known config keys (shared across subcommands; unknown env vars ignored).
const std::vector<std::string> kKeys = {
    "k",       "s",         "eps",     "dim",    "function",   "preset",  "seed",
    "out",     "hypotheses", "design",  "trials", "max-queries", "config",
    "directions", "samples", "agreement-points", "score-max",
};

/// One CLI option per config key, captured as a string; typed parsing happens
/// through RunConfig so config-file and env values share the same error paths.
struct FlagSet {
    std::map<std::string, std::pair<CLI::Option*, std::string>> slots;

    void add(CLI::App* cmd, const std::string& key, const std::string& desc) {
        auto& slot = slots[key];
        slot.first = cmd->add_option("--" + key, slot.second, desc);
    }

    /// Precedence: config file < JUNTA_PROBE_* env < explicit flags.
    RunConfig resolve() const {
        RunConfig cfg;
        auto it = slots.find("config");
        if (it != slots.end() && it->second.first->count() > 0)
            cfg = jp::load_config_file(it->second.second);
        jp::apply_env_overrides(cfg, kKeys, [](const char* name) { return std::getenv(name); });
        for (const auto& [key, slot] : slots)
            if (slot.first->count() > 0 && key != "config") cfg.set(key, slot.second);
        return cfg;
    }
};

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

/// --function accepts inline JSON ('{...}'), a .json file path, or a named
/// seeded generator: random-halfspace, random-intersection:K, random-rotated-sign:K.
njson resolve_function(const RunConfig& cfg) {
    const std::string spec = cfg.get_str("function");
    if (spec.empty()) throw std::invalid_argument("config field 'function' is required");
    if (!spec.empty() && spec.front() == '{') return njson::parse(spec);
    if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") {
        std::ifstream in(spec);
        if (!in) throw std::runtime_error("cannot open function file '" + spec + "'");
        return njson::parse(in);
    }
    const std::size_t dim = cfg.get_u64("dim", 16);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    jp::GaussianSampler gen(jp::mix64(seed ^ 0xfacefeedULL));
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::size_t arg =
        colon == std::string::npos ? 1 : std::stoul(spec.substr(colon + 1));
    if (name == "random-halfspace") {
        return jp::zoo_halfspace(gen.point(dim), 0.0);
    }
    if (name == "random-intersection") {
        std::vector<std::vector<double>> us;
        for (std::size_t i = 0; i < arg; ++i) us.push_back(gen.point(dim));
        return jp::zoo_intersection(us, std::vector<double>(arg, 0.0));
    }
    if (name == "random-rotated-sign") {
        auto rows = jp::random_orthonormal_rows(arg, dim, gen);
        std::vector<int> table;
        for (std::size_t m = 0; m < (1ULL << arg); ++m) table.push_back((m & 1ULL) ? 1 : -1);
        std::vector<std::size_t> coords(arg);
        for (std::size_t i = 0; i < arg; ++i) coords[i] = i;
        return jp::zoo_rotated_junta(rows, jp::zoo_sign_lifted_junta(coords, table, arg));
    }
    throw std::invalid_argument("config field 'function': unknown descriptor '" + spec + "'");
}

jp::ExperimentReport base_report(const RunConfig& cfg) {
    jp::ExperimentReport rep;
    rep.seed = cfg.get_u64("seed", 1);
    rep.config = cfg.echo();
    return rep;
}

int finish(const RunConfig& cfg, jp::ExperimentReport& rep, int code) {
    jp::append_report(cfg.get_str("out", "-"), rep);
    return code;
}

njson gate_json(const jp::GateVerdict& g) {
    return njson{{"yes", g.yes},
                 {"ns_estimate", g.ns_estimate},
                 {"ns_bound", g.ns_bound},
                 {"t0", g.t0},
                 {"queries", g.queries}};
}

njson rank_json(const jp::RankVerdict& r) {
    return njson{{"yes", r.yes},
                 {"sigma_k_plus_1", r.sigma_k_plus_1},
                 {"threshold", r.threshold},
                 {"singular_values", r.gram.singular_values},
                 {"t", r.params.t},
                 {"r", r.params.r},
                 {"kappa", r.params.kappa},
                 {"queries", r.queries}};
}

int cmd_test(const RunConfig& cfg) {
    auto rep = base_report(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const njson desc = resolve_function(cfg);
        jp::FunctionOracle f = jp::make_zoo_oracle(desc);
        const std::size_t k = cfg.get_u64("k", 1);
        const double s = cfg.get_double("s", 4.0);
        const double eps = cfg.get_double("eps", 0.25);
        const jp::Preset preset = jp::preset_from_name(cfg.get_str("preset", "practical"));
        const std::uint64_t cap = cfg.get_u64("max-queries", 2'000'000'000ULL);

        jp::RankTestParams params = jp::RankTestParams::derive(k, s, eps, preset);
        params.max_queries = cap;
        // The gate runs before the rank stage; project its pinned cost so a
        // tight cap fails before any queries are spent.
        const std::uint64_t gate_cost = preset == jp::Preset::Practical ? 2'000'000ULL : 0ULL;
        if (gate_cost > cap) throw jp::BudgetExceededError(gate_cost, cap);

        jp::GaussianSampler sampler(rep.seed);
        jp::GaussianSampler gate_stream = sampler.child(0);
        jp::JuntaVerdict v;
        v.gate = jp::surface_area_gate(f, s, eps, gate_stream, preset);
        v.queries = v.gate.queries;
        if (v.gate.yes) {
            jp::GaussianSampler rank_stream = sampler.child(1);
            v.rank = jp::test_rank(f, params, rank_stream);
            v.rank_ran = true;
            v.queries += v.rank.queries;
            v.yes = v.rank.yes;
        }
        rep.payload = {{"subcommand", "test"},
                       {"verdict", v.yes ? "yes" : "no"},
                       {"gate", gate_json(v.gate)},
                       {"preset", jp::preset_name(preset)},
                       {"function", desc},
                       {"queries", v.queries}};
        if (v.rank_ran) rep.payload["rank"] = rank_json(v.rank);
        rep.timings = {{"total_ms", elapsed_ms(t0)}};
        return finish(cfg, rep, 0);
    } catch (const jp::BudgetExceededError& e) {
        rep.payload = {{"subcommand", "test"},
                       {"error", "budget-exceeded"},
                       {"projected", e.projected},
                       {"cap", e.cap}};
        rep.timings = {{"total_ms", elapsed_ms(t0)}};
        return finish(cfg, rep, 2);
    }
}

njson learn_payload(const jp::LearnedHypothesis& h, double eps, std::size_t hypothesis_count) {
    const auto& b = h.bundle;
    const double mu = eps / static_cast<double>(hypothesis_count);
    return njson{{"anchors", b.anchors},
                 {"alpha", b.alpha},
                 {"beta", b.beta},
                 {"directions_found", b.l()},
                 {"t", b.t},
                 {"gamma", b.gamma},
                 {"xi", b.xi},
                 {"j_points", static_cast<std::uint64_t>(
                                  std::ceil(10.0 / (eps * eps) * std::log(1.0 / mu)))},
                 {"hypotheses", hypothesis_count},
                 {"chosen", h.g.desc},
                 {"score", h.score},
                 {"queries", h.queries}};
}

int cmd_learn(const RunConfig& cfg) {
    auto rep = base_report(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const njson desc = resolve_function(cfg);
    jp::FunctionOracle f = jp::make_zoo_oracle(desc);
    const std::size_t k = cfg.get_u64("k", 1);
    const double s = cfg.get_double("s", 2.0);
    const double eps = cfg.get_double("eps", 0.25);
    const jp::Preset preset = jp::preset_from_name(cfg.get_str("preset", "practical"));
    const jp::HypothesisFamily family =
        jp::named_hypothesis_family(cfg.get_str("hypotheses", "thresholds:200"));

    jp::GaussianSampler sampler(rep.seed);
    jp::GaussianSampler learn_stream = sampler.child(0);
    jp::LearnedHypothesis h = jp::find_invariant_structure(f, k, s, eps, learn_stream, family,
                                                           preset);
    rep.payload = {{"subcommand", "learn"},
                   {"preset", jp::preset_name(preset)},
                   {"function", desc},
                   {"result", learn_payload(h, eps, h.all_scores.size())}};

    // Fresh-sample sign agreement between the learned hypothesis and f.
    const std::uint64_t agree_pts = cfg.get_u64("agreement-points", 20);
    if (agree_pts > 0) {
        jp::GaussianSampler eval_stream = sampler.child(1);
        std::uint64_t agree = 0;
        for (std::uint64_t i = 0; i < agree_pts; ++i) {
            std::vector<double> x = eval_stream.point(f.dimension());
            jp::GaussianSampler work = eval_stream.child(1'000 + i);
            const double gx = jp::evaluate_learned(h, f, x, work);
            if (jp::sign_pm1(gx) == f.evaluate(x)) ++agree;
        }
        rep.payload["agreement"] =
            static_cast<double>(agree) / static_cast<double>(agree_pts);
    }
    rep.timings = {{"total_ms", elapsed_ms(t0)}};
    return finish(cfg, rep, 0);
}

int cmd_structure_test(const RunConfig& cfg) {
    auto rep = base_report(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const njson desc = resolve_function(cfg);
    jp::FunctionOracle f = jp::make_zoo_oracle(desc);
    const std::size_t k = cfg.get_u64("k", 1);
    const double s = cfg.get_double("s", 2.0);
    const double eps = cfg.get_double("eps", 0.25);
    const jp::Preset preset = jp::preset_from_name(cfg.get_str("preset", "practical"));
    const jp::HypothesisFamily family =
        jp::named_hypothesis_family(cfg.get_str("hypotheses", "thresholds:200"));
    // The score compares the hypothesis against the smoothed P_t f, so even a
    // perfect +-1 hypothesis scores ~0.5 at t = 0.5.
    const double score_max = cfg.get_double("score-max", 0.7);

    jp::GaussianSampler sampler(rep.seed);
    const auto checker = [score_max](const jp::LearnedHypothesis& h) {
        return h.score <= score_max;
    };
    jp::StructureClassVerdict v =
        jp::test_structure_class(f, checker, k, s, eps, sampler, family, preset);
    rep.payload = {{"subcommand", "structure-test"},
                   {"verdict", v.yes ? "yes" : "no"},
                   {"rank", rank_json(v.rank)},
                   {"checker_accepted", v.checker_accepted},
                   {"score_max", score_max},
                   {"preset", jp::preset_name(preset)},
                   {"function", desc},
                   {"queries", v.queries}};
    if (v.learned) rep.payload["result"] = learn_payload(*v.hypothesis, eps,
                                                         v.hypothesis->all_scores.size());
    rep.timings = {{"total_ms", elapsed_ms(t0)}};
    return finish(cfg, rep, 0);
}

int cmd_lowerbound(const RunConfig& cfg) {
    auto rep = base_report(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t s = cfg.get_u64("s", 10'000);
    const std::uint64_t trials = cfg.get_u64("trials", 100'000);
    const std::string design_spec = cfg.get_str("design", "grid:3x3");
    const jp::QueryDesign design = jp::design_from_spec(design_spec, rep.seed);

    const double fail_rate =
        jp::event_a_failure_rate(design, s, trials, jp::mix64(rep.seed ^ 0xa11ceULL));
    const jp::TvEstimate tv =
        jp::estimate_tv_distance(design, s, trials, jp::mix64(rep.seed ^ 0x7fULL));

    const std::string out = cfg.get_str("out", "-");
    std::ostringstream csv;
    csv << "s,n,tv,tv_ci,eventA_fail_rate\n"
        << s << "," << design.n() << "," << tv.tv << "," << tv.tv_ci << "," << fail_rate
        << "\n";
    if (out == "-" || out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream file(out);
        if (!file) throw std::runtime_error("cannot open output file '" + out + "'");
        file << csv.str();
    }

    rep.payload = {{"subcommand", "lowerbound"}, {"s", s},
                   {"n", design.n()},           {"design", design_spec},
                   {"trials", trials},          {"tv", tv.tv},
                   {"tv_ci", tv.tv_ci},         {"eventa_fail_rate", fail_rate}};
    rep.timings = {{"total_ms", elapsed_ms(t0)}};
    jp::append_report("-", rep);
    return 0;
}

int cmd_bench(const RunConfig& cfg) {
    auto rep = base_report(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t dim = cfg.get_u64("dim", 16);
    std::vector<double> u(dim, 0.0);
    u[0] = 1.0;
    jp::FunctionOracle half = jp::make_zoo_oracle(jp::zoo_halfspace(u, 1.0));
    jp::FunctionOracle half0 = jp::make_zoo_oracle(jp::zoo_halfspace(u, 0.0));
    jp::GaussianSampler sampler(rep.seed);
    const double t = 0.5;
    std::vector<double> y(dim, 0.0);
    y[0] = 0.7;

    njson table = njson::array();
    auto row = [&table](const std::string& name, double target, const jp::ScalarEstimate& e) {
        table.push_back({{"quantity", name},
                         {"target", target},
                         {"estimate", e.value},
                         {"error", std::abs(e.value - target)},
                         {"samples", e.samples_used}});
    };

    jp::EstimatorConfig mean_cfg;
    mean_cfg.epsilon = 0.01;
    mean_cfg.delta = 0.05;
    jp::GaussianSampler s0 = sampler.child(0);
    row("mean sign(x1-1)", jp::halfspace_mean(1.0), jp::estimate_mean(half, mean_cfg, s0));

    jp::EstimatorConfig pt_cfg = mean_cfg;
    pt_cfg.t = t;
    jp::GaussianSampler s1 = sampler.child(1);
    row("pt sign(x1) at 0.7", jp::halfspace_pt(0.7, t),
        jp::estimate_pt(half0, t, y, pt_cfg, s1));

    jp::EstimatorConfig d1_cfg = mean_cfg;
    d1_cfg.epsilon = 0.05;
    jp::GaussianSampler s2 = sampler.child(2);
    row("degree1 sign(x1) at 0.7 (eta=0.1)", jp::halfspace_degree1(0.7) / 1.0,
        jp::estimate_degree1_eval(half0, 0.1, y, d1_cfg, s2));

    jp::EstimatorConfig gi_cfg;
    gi_cfg.epsilon = 0.3;
    gi_cfg.delta = 0.1;
    gi_cfg.t = t;
    jp::GaussianSampler s3 = sampler.child(3);
    row("grad-inner diag sign(x1) at 0.7", jp::halfspace_grad_inner(0.7, 0.7, t),
        jp::estimate_grad_inner(half0, t, y, y, gi_cfg, s3));

    jp::EstimatorConfig ns_cfg = mean_cfg;
    ns_cfg.t = t;
    jp::GaussianSampler s4 = sampler.child(4);
    row("noise-sensitivity sign(x1) t=0.5", jp::halfspace_ns(t),
        jp::estimate_noise_sensitivity(half0, t, ns_cfg, s4));

    jp::FunctionOracle constant = jp::make_zoo_oracle(jp::zoo_constant(1, dim));
    jp::GaussianSampler s5 = sampler.child(5);
    jp::EstimatorConfig c_cfg = mean_cfg;
    row("mean constant(+1)", 1.0, jp::estimate_mean(constant, c_cfg, s5));

    rep.payload = {{"subcommand", "bench-estimators"}, {"table", table}};
    rep.timings = {{"total_ms", elapsed_ms(t0)}};
    return finish(cfg, rep, 0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"junta-probe: linear-junta testing/learning experiments under "
                 "the Gaussian measure"};
    app.require_subcommand(1);

    std::map<std::string, FlagSet> flags;
    const auto common = [&flags](CLI::App* cmd, const std::string& name) -> FlagSet& {
        FlagSet& fs = flags[name];
        fs.add(cmd, "config", "key-value config file (flags win)");
        fs.add(cmd, "seed", "master seed (all randomness derives from it)");
        fs.add(cmd, "out", "output path (JSONL report; '-' for stdout)");
        return fs;
    };

    CLI::App* t = app.add_subcommand("test", "test whether f is a k-junta of surface area <= s");
    FlagSet& tf = common(t, "test");
    tf.add(t, "k", "junta arity");
    tf.add(t, "s", "surface-area bound");
    tf.add(t, "eps", "distance parameter");
    tf.add(t, "dim", "ambient dimension for generated functions");
    tf.add(t, "function", "zoo JSON (inline/file) or generator name");
    tf.add(t, "preset", "practical | paper-faithful");
    tf.add(t, "max-queries", "query budget cap");

    CLI::App* l = app.add_subcommand("learn", "learn a low-dimensional structure for f");
    FlagSet& lf = common(l, "learn");
    for (const char* key : {"k", "s", "eps", "dim", "function", "preset", "hypotheses",
                            "agreement-points"})
        lf.add(l, key, key);

    CLI::App* st = app.add_subcommand("structure-test", "rank test + learner + class check");
    FlagSet& sf = common(st, "structure-test");
    for (const char* key : {"k", "s", "eps", "dim", "function", "preset", "hypotheses",
                            "score-max"})
        sf.add(st, key, key);

    CLI::App* lb = app.add_subcommand("lowerbound", "coupled-distribution distinguishability lab");
    FlagSet& bf = common(lb, "lowerbound");
    for (const char* key : {"s", "design", "trials"}) bf.add(lb, key, key);

    CLI::App* be = app.add_subcommand("bench-estimators",
                                      "estimator accuracy vs closed-form halfspace targets");
    FlagSet& ef = common(be, "bench-estimators");
    ef.add(be, "dim", "ambient dimension");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_test(tf.resolve());
        if (l->parsed()) return cmd_learn(lf.resolve());
        if (st->parsed()) return cmd_structure_test(sf.resolve());
        if (lb->parsed()) return cmd_lowerbound(bf.resolve());
        if (be->parsed()) return cmd_bench(ef.resolve());
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
