#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace jp {

/**
 * Dense symmetric matrix of small order (the Gram matrices here are at most a
 * few hundred rows). Row-major storage; construction enforces symmetry to
 * 1e-12 * max|A|.
 */
class SymMatrix {
public:
    explicit SymMatrix(std::size_t m) : m_(m), a_(m * m, 0.0) {}
    SymMatrix(std::size_t m, std::vector<double> entries);

    std::size_t order() const { return m_; }
    double& at(std::size_t i, std::size_t j) { return a_[i * m_ + j]; }
    double at(std::size_t i, std::size_t j) const { return a_[i * m_ + j]; }
    const std::vector<double>& data() const { return a_; }

    /// (A + A^T)/2 — estimated Grams are nearly but not exactly symmetric.
    static SymMatrix symmetrized(std::size_t m, const std::vector<double>& entries);

    double frobenius_norm() const;
    double max_abs() const;

    /// CSV (one row per line) for the harness's singular-value reports.
    std::string to_csv() const;

private:
    std::size_t m_;
    std::vector<double> a_;
};

/// Eigendecomposition result: eigenvalues sorted descending (ties broken by
/// original index), eigenvectors as columns of an orthonormal matrix.
struct Spectrum {
    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> eigenvectors;  // eigenvectors[j] pairs with eigenvalues[j]
};

/// Thrown by inv_sqrt_psd when the smallest eigenvalue sits below the floor.
class RankDeficientError : public std::runtime_error {
public:
    RankDeficientError(double lambda_min, double floor);
    double lambda_min;
    double floor;
};

/// Thrown by orthonormalize_coeffs when the symmetrized Gram is not PSD
/// beyond tolerance.
class PerturbationTooLargeError : public std::runtime_error {
public:
    explicit PerturbationTooLargeError(double lambda_min);
    double lambda_min;
};

/**
 * Cyclic Jacobi eigendecomposition, iterated until the off-diagonal Frobenius
 * norm is <= 1e-12 * ||A||_F. Deterministic sweep order (row by row), so
 * results are reproducible bit-for-bit.
 */
Spectrum eigh(const SymMatrix& A);

/// |eigenvalues| sorted descending — singular values of a symmetric matrix.
std::vector<double> singular_values_sym(const SymMatrix& A);

/**
 * V diag(lambda^{-1/2}) V^T for a PSD matrix with lambda_min >= floor > 0.
 * No clamping of small/negative eigenvalues: a Gram that fails the floor is a
 * certification failure and must surface as RankDeficientError.
 */
SymMatrix inv_sqrt_psd(const SymMatrix& A, double floor);

/**
 * Orthonormalization coefficients from a (noisy) Gram matrix: alpha_{i,j} is
 * the (j,i) entry of the inverse square root of the symmetrized Gram. Under
 * the entrywise-accuracy precondition (see lambda_entry_tolerance), the
 * reconstructed w_i = sum_j alpha_{i,j} v_j are within nu of an orthonormal
 * set and |alpha_{i,j}| <= alpha_magnitude_bound(l, eta, gamma).
 */
SymMatrix orthonormalize_coeffs(const SymMatrix& beta, std::size_t l, double eta,
                                double gamma, double nu);

/// Entrywise Gram tolerance under which orthonormalize_coeffs certifies:
/// 2 nu / (l^2 eta) * (gamma / (2 l eta))^{3l+3}.
double lambda_entry_tolerance(std::size_t l, double nu, double eta, double gamma);

/// Bound on |alpha_{i,j}|: sqrt(2l) * (2 l eta / gamma)^{l+1}.
double alpha_magnitude_bound(std::size_t l, double eta, double gamma);

/// Smallest-singular-value lower bound for an (eta,gamma)-linearly-independent
/// set: (gamma / (2 l eta))^{l+1}. Requires eta >= gamma > 0.
double min_singular_lb(std::size_t l, double eta, double gamma);

}  // namespace jp
