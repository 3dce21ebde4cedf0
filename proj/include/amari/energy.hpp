#pragma once

// Energy Theta = -Phi + Psi on S and its H_{-1} gradient alpha u - K F(u).

#include <Eigen/Dense>

#include "amari/errors.hpp"
#include "amari/gain.hpp"
#include "amari/grid.hpp"
#include "amari/operator.hpp"

namespace amari {

inline Eigen::VectorXd nemytskii_F(const GainSpec& gain, const Eigen::VectorXd& u) {
  return u.unaryExpr([&](double s) { return gain.f(s); });
}

inline Field nemytskii_F(const GainSpec& gain, const Field& u) {
  return Field(u.grid, nemytskii_F(gain, u.values));
}

/// h sum_j phi(u_j)
inline double phi_functional(const GainSpec& gain, const Eigen::VectorXd& u, double h) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) sum += gain.phi(u(j));
  return h * sum;
}

inline double phi_functional(const GainSpec& gain, const Field& u) {
  return phi_functional(gain, u.values, u.grid.h());
}

/// (alpha / 2) ||u||_{-1}^2
inline double psi_functional(const SpectralDecomposition& dec, double alpha, const Field& u,
                             double membership_tol = 1e-6) {
  const double n = norm_hminus1(dec, u, membership_tol);
  return 0.5 * alpha * n * n;
}

inline double theta_functional(const SpectralDecomposition& dec, const GainSpec& gain,
                               double alpha, const Field& u, double membership_tol = 1e-6) {
  return -phi_functional(gain, u) + psi_functional(dec, alpha, u, membership_tol);
}

/// Theta at the field sum_i c_i e_i; Psi is evaluated directly from c.
inline double theta_modes(const SpectralDecomposition& dec, const GainSpec& gain, double alpha,
                          const Eigen::VectorXd& c) {
  const Eigen::VectorXd u = dec.synthesize(c);
  const auto N = c.size();
  const double psi = 0.5 * alpha * (c.array().square() / dec.lambdas().head(N).array()).sum();
  return -phi_functional(gain, u, dec.grid().h()) + psi;
}

/// -alpha u + K F(u), the deterministic drift.
inline Eigen::VectorXd amari_drift(const IntegralOperator& K, const GainSpec& gain, double alpha,
                                   const Eigen::VectorXd& u) {
  return -alpha * u + K.apply(nemytskii_F(gain, u));
}

/// alpha u - K F(u) with K applied by the given operator.
inline Field grad_theta(const IntegralOperator& K, const GainSpec& gain, double alpha,
                        const Field& u) {
  detail::require_same_grid(K.grid(), u.grid);
  return Field(u.grid, alpha * u.values - K.apply(nemytskii_F(gain, u.values)));
}

/// alpha u - K_S F(u), the H_{-1} Riesz representative of D Theta(u), with K
/// restricted to the retained spectrum. Requires u in S.
inline Field grad_theta(const SpectralDecomposition& dec, const GainSpec& gain, double alpha,
                        const Field& u, double membership_tol = 1e-6) {
  detail::require_same_grid(dec.grid(), u.grid);
  coefficients_in_S(dec, u.values, membership_tol);
  const Eigen::VectorXd fc = dec.coefficients(nemytskii_F(gain, u.values));
  return Field(u.grid, alpha * u.values - dec.synthesize(dec.lambdas().cwiseProduct(fc)));
}

/// (functional(u + t h) - functional(u - t h)) / (2 t)
template <class Functional>
double fd_directional(Functional&& functional, const Field& u, const Field& h, double t) {
  detail::require(t != 0.0, ErrorKind::InvalidArgument, "finite-difference step must be nonzero");
  detail::require_same_grid(u.grid, h.grid);
  const Field plus(u.grid, u.values + t * h.values);
  const Field minus(u.grid, u.values - t * h.values);
  return (functional(plus) - functional(minus)) / (2.0 * t);
}

}  // namespace amari
