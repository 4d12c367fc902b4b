#include "jp/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace jp {

namespace {

double dot(std::span<const double> a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::vector<int> checked_table(const njson& j, std::size_t k) {
    std::vector<int> table = j.get<std::vector<int>>();
    require(table.size() == (std::size_t{1} << k), "zoo: table must have 2^k entries");
    for (int v : table) require(v == 1 || v == -1, "zoo: table entries must be +-1");
    return table;
}

double phi_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

njson zoo_constant(int c, std::size_t dim) {
    require(c == 1 || c == -1, "zoo_constant: c must be +-1");
    require(dim > 0, "zoo_constant: dim must be positive");
    return njson{{"kind", "constant"}, {"c", c}, {"dim", dim}};
}

njson zoo_halfspace(const std::vector<double>& u, double theta) {
    const double nu = norm2(u);
    require(nu > 0.0, "zoo_halfspace: zero vector u");
    std::vector<double> un(u);
    for (double& x : un) x /= nu;
    return njson{{"kind", "halfspace"}, {"u", un}, {"theta", theta}};
}

njson zoo_halfspace_combo(const std::vector<std::vector<double>>& us,
                          const std::vector<double>& thetas,
                          const std::vector<int>& table) {
    require(!us.empty() && us.size() == thetas.size(), "zoo_halfspace_combo: size mismatch");
    require(table.size() == (std::size_t{1} << us.size()),
            "zoo_halfspace_combo: table must have 2^k entries");
    njson hs = njson::array();
    for (std::size_t i = 0; i < us.size(); ++i) {
        njson h = zoo_halfspace(us[i], thetas[i]);
        hs.push_back(njson{{"u", h["u"]}, {"theta", h["theta"]}});
    }
    return njson{{"kind", "halfspace_combo"}, {"halfspaces", hs}, {"table", table}};
}

njson zoo_intersection(const std::vector<std::vector<double>>& us,
                       const std::vector<double>& thetas) {
    const std::size_t k = us.size();
    std::vector<int> table(std::size_t{1} << k, -1);
    table.back() = 1;  // +1 only when every halfspace bit is set
    return zoo_halfspace_combo(us, thetas, table);
}

njson zoo_sign_lifted_junta(const std::vector<std::size_t>& coords,
                            const std::vector<int>& table, std::size_t dim) {
    require(!coords.empty(), "zoo_sign_lifted_junta: empty coords");
    require(table.size() == (std::size_t{1} << coords.size()),
            "zoo_sign_lifted_junta: table must have 2^k entries");
    for (std::size_t c : coords) require(c < dim, "zoo_sign_lifted_junta: coord out of range");
    return njson{{"kind", "sign_lifted_junta"}, {"coords", coords}, {"table", table}, {"dim", dim}};
}

njson zoo_rotated_junta(const std::vector<std::vector<double>>& rows, const njson& inner) {
    require(!rows.empty(), "zoo_rotated_junta: empty rows");
    const std::size_t n = rows[0].size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i].size() == n, "zoo_rotated_junta: ragged rows");
        for (std::size_t j = 0; j <= i; ++j) {
            double d = 0.0;
            for (std::size_t c = 0; c < n; ++c) d += rows[i][c] * rows[j][c];
            const double want = (i == j) ? 1.0 : 0.0;
            require(std::abs(d - want) <= 1e-10, "zoo_rotated_junta: rows not orthonormal");
        }
    }
    require(zoo_dimension(inner) == rows.size(),
            "zoo_rotated_junta: inner dimension must equal row count");
    return njson{{"kind", "rotated_junta"}, {"rows", rows}, {"inner", inner}};
}

njson sample_d1(std::size_t s, GaussianSampler& sampler) {
    require(s >= 1, "sample_d1: s must be >= 1");
    const double ang = sampler.uniform(0.0, 2.0 * std::numbers::pi);
    std::vector<double> theta{std::cos(ang), std::sin(ang)};
    std::vector<double> breaks(s + 1);
    breaks.front() = -1.0;
    breaks.back() = 1.0;
    for (std::size_t i = 1; i < s; ++i) breaks[i] = sampler.uniform(-1.0, 1.0);
    std::sort(breaks.begin(), breaks.end());
    std::vector<int> bits(s);
    for (auto& b : bits) b = (sampler.next_u64() & 1ULL) ? 1 : -1;
    return njson{{"kind", "striped_one_junta"},
                 {"theta", theta},
                 {"breaks", breaks},
                 {"bits", bits}};
}

njson sample_d2(std::size_t s, GaussianSampler& sampler) {
    njson d1 = sample_d1(s, sampler);
    d1["kind"] = "cut_striped_two_junta";
    d1["z"] = sampler.uniform(-1.0, 1.0);
    return d1;
}

std::pair<njson, njson> sample_coupled_pair(std::size_t s, GaussianSampler& sampler) {
    njson f = sample_d1(s, sampler);
    njson g = f;
    g["kind"] = "cut_striped_two_junta";
    g["z"] = sampler.uniform(-1.0, 1.0);
    return {f, g};
}

std::size_t zoo_dimension(const njson& desc) {
    const std::string kind = desc.at("kind").get<std::string>();
    if (kind == "constant" || kind == "sign_lifted_junta")
        return desc.at("dim").get<std::size_t>();
    if (kind == "halfspace") return desc.at("u").size();
    if (kind == "halfspace_combo") return desc.at("halfspaces").at(0).at("u").size();
    if (kind == "rotated_junta") return desc.at("rows").at(0).size();
    if (kind == "striped_one_junta" || kind == "cut_striped_two_junta") return 2;
    throw std::invalid_argument("zoo: unknown kind '" + kind + "'");
}

FunctionOracle make_zoo_oracle(const njson& desc) {
    const std::string kind = desc.at("kind").get<std::string>();
    const std::size_t n = zoo_dimension(desc);

    if (kind == "constant") {
        const double c = desc.at("c").get<double>();
        require(c == 1.0 || c == -1.0, "zoo: constant c must be +-1");
        return FunctionOracle(n, [c](std::span<const double>) { return c; });
    }

    if (kind == "halfspace") {
        auto u = desc.at("u").get<std::vector<double>>();
        require(std::abs(norm2(u) - 1.0) <= 1e-12, "zoo: halfspace u must be a unit vector");
        const double theta = desc.at("theta").get<double>();
        return FunctionOracle(n, [u = std::move(u), theta](std::span<const double> x) {
            return sign_pm1(dot(x, u) - theta);
        });
    }

    if (kind == "halfspace_combo") {
        struct Combo {
            std::vector<std::vector<double>> us;
            std::vector<double> thetas;
            std::vector<int> table;
        };
        auto combo = std::make_shared<Combo>();
        for (const auto& h : desc.at("halfspaces")) {
            auto u = h.at("u").get<std::vector<double>>();
            require(std::abs(norm2(u) - 1.0) <= 1e-12, "zoo: halfspace u must be a unit vector");
            combo->us.push_back(std::move(u));
            combo->thetas.push_back(h.at("theta").get<double>());
        }
        combo->table = checked_table(desc.at("table"), combo->us.size());
        return FunctionOracle(n, [combo](std::span<const double> x) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < combo->us.size(); ++i)
                if (dot(x, combo->us[i]) - combo->thetas[i] >= 0.0) idx |= (std::size_t{1} << i);
            return static_cast<double>(combo->table[idx]);
        });
    }

    if (kind == "sign_lifted_junta") {
        auto coords = desc.at("coords").get<std::vector<std::size_t>>();
        auto table = checked_table(desc.at("table"), coords.size());
        return FunctionOracle(n, [coords = std::move(coords),
                                  table = std::move(table)](std::span<const double> x) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < coords.size(); ++i)
                if (x[coords[i]] >= 0.0) idx |= (std::size_t{1} << i);
            return static_cast<double>(table[idx]);
        });
    }

    if (kind == "rotated_junta") {
        auto rows = desc.at("rows").get<std::vector<std::vector<double>>>();
        FunctionOracle inner = make_zoo_oracle(desc.at("inner"));
        const std::size_t k = rows.size();
        // The inner oracle keeps its own (discarded) ledger, so the composed
        // oracle's ledger sees exactly one bump per outer call.
        auto inner_fn = std::make_shared<FunctionOracle>(std::move(inner));
        return FunctionOracle(n, [rows = std::move(rows), inner_fn, k](std::span<const double> x) {
            std::vector<double> y(k);
            for (std::size_t i = 0; i < k; ++i) y[i] = dot(x, rows[i]);
            return inner_fn->evaluate(y);
        });
    }

    if (kind == "striped_one_junta" || kind == "cut_striped_two_junta") {
        struct Stripes {
            double tx, ty;
            std::vector<double> breaks;
            std::vector<int> bits;
            double z = 0.0;
            bool cut = false;
        };
        auto p = std::make_shared<Stripes>();
        auto theta = desc.at("theta").get<std::vector<double>>();
        require(theta.size() == 2, "zoo: stripes live in R^2");
        p->tx = theta[0];
        p->ty = theta[1];
        p->breaks = desc.at("breaks").get<std::vector<double>>();
        require(p->breaks.size() >= 2 && p->breaks.front() == -1.0 && p->breaks.back() == 1.0,
                "zoo: breakpoints must run from -1 to 1");
        require(std::is_sorted(p->breaks.begin(), p->breaks.end()),
                "zoo: breakpoints must be sorted");
        p->bits = desc.at("bits").get<std::vector<int>>();
        require(p->bits.size() + 1 == p->breaks.size(), "zoo: need one bit per stripe");
        if (kind == "cut_striped_two_junta") {
            p->cut = true;
            p->z = desc.at("z").get<double>();
        }
        return FunctionOracle(2, [p](std::span<const double> x) {
            const double proj = x[0] * p->tx + x[1] * p->ty;
            if (proj <= -1.0 || proj > 1.0) return 1.0;  // value 1 outside the strip
            // Stripe i covers (a_{i-1}, a_i]; binary search for the upper break.
            const auto it = std::lower_bound(p->breaks.begin(), p->breaks.end(), proj);
            std::size_t idx = static_cast<std::size_t>(it - p->breaks.begin());
            if (idx == 0) idx = 1;  // proj == -1 handled above; defensive
            const double b = static_cast<double>(p->bits[idx - 1]);
            if (!p->cut) return b;
            // theta_perp: 90-degree clockwise rotation of theta.
            const double perp = x[0] * p->ty - x[1] * p->tx;
            return b * sign_pm1(perp - p->z);
        });
    }

    throw std::invalid_argument("zoo: unknown kind '" + kind + "'");
}

std::optional<std::vector<std::vector<double>>> zoo_true_subspace(const njson& desc) {
    const std::string kind = desc.at("kind").get<std::string>();
    const std::size_t n = zoo_dimension(desc);
    auto basis_vec = [n](std::size_t i) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        return e;
    };
    if (kind == "constant") return std::vector<std::vector<double>>{};
    if (kind == "halfspace")
        return std::vector<std::vector<double>>{desc.at("u").get<std::vector<double>>()};
    if (kind == "sign_lifted_junta") {
        std::vector<std::vector<double>> rows;
        for (std::size_t c : desc.at("coords").get<std::vector<std::size_t>>())
            rows.push_back(basis_vec(c));
        return rows;
    }
    if (kind == "rotated_junta")
        return desc.at("rows").get<std::vector<std::vector<double>>>();
    if (kind == "striped_one_junta")
        return std::vector<std::vector<double>>{desc.at("theta").get<std::vector<double>>()};
    if (kind == "cut_striped_two_junta") {
        auto t = desc.at("theta").get<std::vector<double>>();
        return std::vector<std::vector<double>>{{t[0], t[1]}, {t[1], -t[0]}};
    }
    if (kind == "halfspace_combo") {
        // Span of the (not necessarily orthogonal) normals; Gram-Schmidt it.
        std::vector<std::vector<double>> rows;
        for (const auto& h : desc.at("halfspaces")) {
            auto u = h.at("u").get<std::vector<double>>();
            for (const auto& r : rows) {
                double d = 0.0;
                for (std::size_t c = 0; c < n; ++c) d += u[c] * r[c];
                for (std::size_t c = 0; c < n; ++c) u[c] -= d * r[c];
            }
            const double nu = norm2(u);
            if (nu > 1e-10) {
                for (double& v : u) v /= nu;
                rows.push_back(std::move(u));
            }
        }
        return rows;
    }
    return std::nullopt;
}

std::optional<double> zoo_surface_area_bound(const njson& desc) {
    const std::string kind = desc.at("kind").get<std::string>();
    if (kind == "constant") return 0.0;
    if (kind == "halfspace") return phi_pdf(desc.at("theta").get<double>());
    if (kind == "halfspace_combo") {
        double s = 0.0;
        for (const auto& h : desc.at("halfspaces")) s += phi_pdf(h.at("theta").get<double>());
        return s;
    }
    if (kind == "sign_lifted_junta")
        return static_cast<double>(desc.at("coords").size()) * phi_pdf(0.0);
    if (kind == "rotated_junta") return zoo_surface_area_bound(desc.at("inner"));
    if (kind == "striped_one_junta" || kind == "cut_striped_two_junta") {
        // One boundary line per breakpoint (plus the cut for d2), each of
        // Gaussian length at most phi(a_i) along theta.
        double s = 0.0;
        for (double a : desc.at("breaks").get<std::vector<double>>()) s += phi_pdf(a);
        if (kind == "cut_striped_two_junta") s += phi_pdf(desc.at("z").get<double>());
        return s;
    }
    return std::nullopt;
}

std::vector<std::vector<double>> random_orthonormal_rows(std::size_t k, std::size_t n,
                                                         GaussianSampler& sampler) {
    require(k <= n, "random_orthonormal_rows: k must be <= n");
    std::vector<std::vector<double>> rows;
    while (rows.size() < k) {
        std::vector<double> v = sampler.point(n);
        for (const auto& r : rows) {
            double d = 0.0;
            for (std::size_t c = 0; c < n; ++c) d += v[c] * r[c];
            for (std::size_t c = 0; c < n; ++c) v[c] -= d * r[c];
        }
        const double nv = norm2(v);
        if (nv < 1e-6) continue;  // essentially impossible; redraw
        for (double& x : v) x /= nv;
        rows.push_back(std::move(v));
    }
    return rows;
}

}  // namespace jp
