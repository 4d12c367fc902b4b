#include "jp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace jp {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double off_diagonal_frobenius(const SymMatrix& A) {
    double s = 0.0;
    for (std::size_t i = 0; i < A.order(); ++i)
        for (std::size_t j = 0; j < A.order(); ++j)
            if (i != j) s += A.at(i, j) * A.at(i, j);
    return std::sqrt(s);
}

}  // namespace

SymMatrix::SymMatrix(std::size_t m, std::vector<double> entries) : m_(m), a_(std::move(entries)) {
    require(a_.size() == m_ * m_, "SymMatrix: entry count must be m*m");
    const double tol = 1e-12 * std::max(1e-300, max_abs());
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = i + 1; j < m_; ++j)
            require(std::abs(at(i, j) - at(j, i)) <= tol, "SymMatrix: input is not symmetric");
}

SymMatrix SymMatrix::symmetrized(std::size_t m, const std::vector<double>& entries) {
    require(entries.size() == m * m, "SymMatrix::symmetrized: entry count must be m*m");
    SymMatrix A(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            A.at(i, j) = 0.5 * (entries[i * m + j] + entries[j * m + i]);
    return A;
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
}

double SymMatrix::max_abs() const {
    double s = 0.0;
    for (double x : a_) s = std::max(s, std::abs(x));
    return s;
}

std::string SymMatrix::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) {
            if (j) out << ',';
            out << at(i, j);
        }
        out << '\n';
    }
    return out.str();
}

RankDeficientError::RankDeficientError(double lmin, double flr)
    : std::runtime_error("inv_sqrt_psd: rank-deficient input (lambda_min = " +
                         std::to_string(lmin) + " < floor = " + std::to_string(flr) + ")"),
      lambda_min(lmin),
      floor(flr) {}

PerturbationTooLargeError::PerturbationTooLargeError(double lmin)
    : std::runtime_error("orthonormalize_coeffs: Gram not PSD after symmetrization "
                         "(lambda_min = " + std::to_string(lmin) + ")"),
      lambda_min(lmin) {}

Spectrum eigh(const SymMatrix& A) {
    require(all_finite(A.data()), "eigh: non-finite entries");
    const std::size_t m = A.order();
    SymMatrix D = A;
    // V accumulates the rotations; starts as identity, columns end as eigenvectors.
    std::vector<std::vector<double>> V(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i) V[i][i] = 1.0;

    const double target = 1e-12 * std::max(1e-300, A.frobenius_norm());
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps && off_diagonal_frobenius(D) > target; ++sweep) {
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = D.at(p, q);
                if (apq == 0.0) continue;
                const double app = D.at(p, p);
                const double aqq = D.at(q, q);
                // Classic Jacobi rotation annihilating D(p,q).
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t r = 0; r < m; ++r) {
                    const double drp = D.at(r, p);
                    const double drq = D.at(r, q);
                    D.at(r, p) = c * drp - s * drq;
                    D.at(r, q) = s * drp + c * drq;
                }
                for (std::size_t r = 0; r < m; ++r) {
                    const double dpr = D.at(p, r);
                    const double dqr = D.at(q, r);
                    D.at(p, r) = c * dpr - s * dqr;
                    D.at(q, r) = s * dpr + c * dqr;
                }
                for (std::size_t r = 0; r < m; ++r) {
                    const double vrp = V[r][p];
                    const double vrq = V[r][q];
                    V[r][p] = c * vrp - s * vrq;
                    V[r][q] = s * vrp + c * vrq;
                }
            }
        }
    }

    // Sort eigenvalues descending; equal values keep their original index order.
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&D](std::size_t a, std::size_t b) {
        return D.at(a, a) > D.at(b, b);
    });

    Spectrum spec;
    spec.eigenvalues.resize(m);
    spec.eigenvectors.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        spec.eigenvalues[j] = D.at(idx[j], idx[j]);
        for (std::size_t r = 0; r < m; ++r) spec.eigenvectors[j][r] = V[r][idx[j]];
    }
    return spec;
}

std::vector<double> singular_values_sym(const SymMatrix& A) {
    Spectrum spec = eigh(A);
    std::vector<double> sv(spec.eigenvalues.size());
    for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = std::abs(spec.eigenvalues[i]);
    std::stable_sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

SymMatrix inv_sqrt_psd(const SymMatrix& A, double floor) {
    require(floor > 0.0, "inv_sqrt_psd: floor must be positive");
    Spectrum spec = eigh(A);
    const std::size_t m = A.order();
    const double lmin = spec.eigenvalues.empty() ? 0.0 : spec.eigenvalues.back();
    if (lmin < floor) throw RankDeficientError(lmin, floor);

    SymMatrix R(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < m; ++c)
                s += spec.eigenvectors[c][i] * spec.eigenvectors[c][j] /
                     std::sqrt(spec.eigenvalues[c]);
            R.at(i, j) = s;
            R.at(j, i) = s;
        }
    }
    return R;
}

SymMatrix orthonormalize_coeffs(const SymMatrix& beta, std::size_t l, double eta,
                                double gamma, double nu) {
    require(l >= 1 && beta.order() == l, "orthonormalize_coeffs: order mismatch");
    require(eta >= gamma && gamma > 0.0 && nu > 0.0,
            "orthonormalize_coeffs: need eta >= gamma > 0 and nu > 0");
    // An (eta,gamma)-independent set keeps the true Gram's smallest eigenvalue
    // above min_singular_lb^2; the certified entrywise perturbation keeps at
    // least half of that.
    const double sigma_lb = min_singular_lb(l, eta, gamma);
    const double floor = 0.5 * sigma_lb * sigma_lb;
    try {
        SymMatrix root = inv_sqrt_psd(beta, floor);
        // alpha_{i,j} = (beta^{-1/2})(j,i) — transpose-indexed; the inverse
        // square root of a symmetric matrix is itself symmetric, so this is a
        // plain transpose copy kept for clarity of the contract.
        SymMatrix alpha(l);
        for (std::size_t i = 0; i < l; ++i)
            for (std::size_t j = 0; j < l; ++j) alpha.at(i, j) = root.at(j, i);
        return alpha;
    } catch (const RankDeficientError& e) {
        throw PerturbationTooLargeError(e.lambda_min);
    }
}

double lambda_entry_tolerance(std::size_t l, double nu, double eta, double gamma) {
    const double ll = static_cast<double>(l);
    return 2.0 * nu / (ll * ll * eta) * std::pow(gamma / (2.0 * ll * eta), 3.0 * ll + 3.0);
}

double alpha_magnitude_bound(std::size_t l, double eta, double gamma) {
    const double ll = static_cast<double>(l);
    return std::sqrt(2.0 * ll) * std::pow(2.0 * ll * eta / gamma, ll + 1.0);
}

double min_singular_lb(std::size_t l, double eta, double gamma) {
    require(eta >= gamma && gamma > 0.0, "min_singular_lb: need eta >= gamma > 0");
    const double ll = static_cast<double>(l);
    return std::pow(gamma / (2.0 * ll * eta), ll + 1.0);
}

}  // namespace jp
