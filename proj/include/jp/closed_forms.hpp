#pragma once

#include <cmath>
#include <numbers>

namespace jp {

/**
 * Closed-form Gaussian quantities for origin-centered halfspaces
 * f = sign(<u, x>). These are the analytic reference targets used by the
 * benchmark subcommand and the test suite; every formula is additionally
 * cross-checked against brute-force Monte-Carlo in the tests before being
 * trusted as an expected value.
 */

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// E[sign(<u,x> - theta)] = 1 - 2 Phi(theta).
inline double halfspace_mean(double theta) { return 1.0 - 2.0 * norm_cdf(theta); }

/// P_t f(y) = 2 Phi(e^{-t} <u,y> / sqrt(1-e^{-2t})) - 1 for f = sign(<u,.>).
inline double halfspace_pt(double u_dot_y, double t) {
    const double rho = std::exp(-t);
    return 2.0 * norm_cdf(rho * u_dot_y / std::sqrt(1.0 - rho * rho)) - 1.0;
}

/// W1(sign(<u,.>)) = sqrt(2/pi) u, so <W1, x> = sqrt(2/pi) <u, x>.
inline double halfspace_degree1(double u_dot_x) {
    return std::sqrt(2.0 / std::numbers::pi) * u_dot_x;
}

/// ||D(P_t f)(y)|| = 2 e^{-t} phi(m) / sqrt(1-e^{-2t}), m = e^{-t}<u,y>/sqrt(1-e^{-2t});
/// the gradient points along u, so inner products are products of these scalars
/// signed by the (parallel) directions.
inline double halfspace_grad_norm(double u_dot_y, double t) {
    const double rho = std::exp(-t);
    const double sig = std::sqrt(1.0 - rho * rho);
    const double m = rho * u_dot_y / sig;
    return 2.0 * rho * norm_pdf(m) / sig;
}

inline double halfspace_grad_inner(double u_dot_y1, double u_dot_y2, double t) {
    return halfspace_grad_norm(u_dot_y1, t) * halfspace_grad_norm(u_dot_y2, t);
}

/// NS_t(sign(<u,.>)) = arccos(e^{-t}) / pi for a halfspace through the origin.
inline double halfspace_ns(double t) { return std::acos(std::exp(-t)) / std::numbers::pi; }

/// Prop-style pointwise bound ||D(P_t f)(y)||_2 <= (e^{2t}-1)^{-1/2}.
inline double grad_norm_bound(double t) { return 1.0 / std::sqrt(std::exp(2.0 * t) - 1.0); }

/// Ledoux-style noise-sensitivity bound: NS_t(f) <= 2 sqrt(t) / sqrt(pi) * surface_area.
inline double ns_ledoux_bound(double t, double surface_area) {
    return 2.0 * std::sqrt(t) / std::sqrt(std::numbers::pi) * surface_area;
}

}  // namespace jp
