#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's own code paths: plain loops, bisection, Jacobi rotations.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "amari/amari.hpp"

namespace oracle {

/// Bisection for a sign change of f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// The cubic gain (u + 1)(1 - u)(u - 0.1), written out independently.
inline double cubic(double u) { return -u * u * u + 0.1 * u * u + u - 0.1; }

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd A) {
  const auto n = A.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off < 1e-30 * std::max(1.0, A.squaredNorm())) break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = A(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Dense matvec by explicit double loop over kernel evaluations.
inline Eigen::VectorXd naive_apply(const amari::KernelSpec& J, const amari::Grid& grid,
                                   const Eigen::VectorXd& g) {
  const std::size_t n = grid.n();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = grid.node(i) - grid.node(j);
      if (grid.boundary() == amari::Boundary::Periodic) {
        const double L = grid.length();
        d -= L * std::round(d / L);
      }
      s += J(d) * g(static_cast<Eigen::Index>(j));
    }
    out(static_cast<Eigen::Index>(i)) = grid.h() * s;
  }
  return out;
}

/// (2 pi)^{-1/2} \int e^{i xi x} g(xi) d xi for an even density g, by
/// double-exponential / Ooura quadrature on [0, inf).
inline double invert_density(const std::function<double(double)>& g, double x,
                             double support = std::numeric_limits<double>::infinity()) {
  const double c = 2.0 / std::sqrt(2.0 * std::numbers::pi);
  if (std::isfinite(support)) {
    auto f = [&](double xi) { return g(xi) * std::cos(xi * x); };
    return c * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, support, 15, 1e-13);
  }
  if (x == 0.0) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return c * integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity());
  }
  boost::math::quadrature::ooura_fourier_cos<double> integrator;
  return c * integrator.integrate(g, std::abs(x)).first;
}

/// Points drawn uniformly from [lo, hi].
inline std::vector<double> uniform_points(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> pts(n);
  for (auto& p : pts) p = u(rng);
  return pts;
}

/// Random element of S: sum_i c_i e_i with c_i ~ N(0, 1) sqrt(lambda_i / lambda_1).
inline amari::Field random_in_S(const amari::SpectralDecomposition& dec, std::size_t modes,
                                std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd c(static_cast<Eigen::Index>(modes));
  for (Eigen::Index i = 0; i < c.size(); ++i)
    c(i) = amplitude * n(rng) * std::sqrt(dec.lambdas()(i) / dec.lambdas()(0));
  return amari::Field(dec.grid(), dec.synthesize(c));
}

}  // namespace oracle
