#pragma once

// The discretized integral operator (K g)(x_i) = h sum_j J(x_i - x_j) g_j, its
// symmetric eigendecomposition, and the nonlocal norms built from it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "amari/csv.hpp"
#include "amari/errors.hpp"
#include "amari/grid.hpp"
#include "amari/kernel.hpp"

namespace amari {

/// K_ij = h J(x_i - x_j), with the minimal-image difference on periodic grids.
/// Only the lower triangle is evaluated; the upper is a copy.
inline Eigen::MatrixXd build_operator_matrix(const KernelSpec& spec, const Grid& grid) {
  const auto n = grid.size();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      K(i, j) = K(j, i) = grid.h() * spec(grid.difference(static_cast<std::size_t>(i),
                                                           static_cast<std::size_t>(j)));
  return K;
}

/// Applies K by FFT: circular convolution on periodic grids, zero-padded linear
/// convolution on truncated ones. The kernel spectrum is computed once.
class ConvolutionOperator {
 public:
  ConvolutionOperator(const KernelSpec& spec, const Grid& grid) : grid_(grid) {
    const std::size_t n = grid.n();
    if (grid.boundary() == Boundary::Periodic) {
      length_ = n;
    } else {
      length_ = 1;
      while (length_ < 2 * n - 1) length_ *= 2;
    }
    std::vector<double> taps(length_, 0.0);
    if (grid.boundary() == Boundary::Periodic) {
      for (std::size_t k = 0; k < n; ++k) taps[k] = grid.h() * spec(grid.difference(k, 0));
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        const double d = static_cast<double>(k) * grid.h();
        taps[k] = grid.h() * spec(d);
        if (k > 0) taps[length_ - k] = grid.h() * spec(-d);
      }
    }
    auto spectrum = std::make_shared<std::vector<std::complex<double>>>();
    engine().fwd(*spectrum, taps);
    spectrum_ = std::move(spectrum);
  }

  const Grid& grid() const noexcept { return grid_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& g) const {
    detail::require(g.size() == grid_.size(), ErrorKind::GridMismatch,
                    "vector length does not match operator grid");
    thread_local std::vector<double> padded;
    thread_local std::vector<std::complex<double>> freq;
    thread_local std::vector<double> result;
    padded.assign(length_, 0.0);
    for (Eigen::Index j = 0; j < g.size(); ++j) padded[static_cast<std::size_t>(j)] = g(j);
    auto& fft = engine();
    fft.fwd(freq, padded);
    const auto& s = *spectrum_;
    for (std::size_t k = 0; k < length_; ++k) freq[k] *= s[k];
    fft.inv(result, freq);
    Eigen::VectorXd out(g.size());
    for (Eigen::Index j = 0; j < g.size(); ++j) out(j) = result[static_cast<std::size_t>(j)];
    return out;
  }

 private:
  static Eigen::FFT<double>& engine() {
    static thread_local Eigen::FFT<double> fft;
    return fft;
  }

  Grid grid_;
  std::size_t length_ = 0;
  std::shared_ptr<const std::vector<std::complex<double>>> spectrum_;
};

inline Field apply_K_fft(const KernelSpec& spec, const Grid& grid, const Field& g) {
  detail::require_same_grid(grid, g.grid);
  return Field(grid, ConvolutionOperator(spec, grid).apply(g.values));
}

/// Eigenpairs of K with eigenvalues above rel_tol * lambda_max. Eigenfields are
/// orthonormal in the h-weighted inner product: fields = V / sqrt(h) for the
/// Euclidean-orthonormal eigenvectors V of the matrix K.
class SpectralDecomposition {
 public:
  SpectralDecomposition(Grid grid, Eigen::VectorXd lambdas, Eigen::MatrixXd fields,
                        double threshold, double discarded_min)
      : grid_(std::move(grid)),
        lambdas_(std::move(lambdas)),
        fields_(std::move(fields)),
        threshold_(threshold),
        discarded_min_(discarded_min) {}

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& lambdas() const noexcept { return lambdas_; }
  double lambda(std::size_t i) const { return lambdas_(static_cast<Eigen::Index>(i)); }
  /// n x r matrix whose columns are the eigenfields.
  const Eigen::MatrixXd& fields() const noexcept { return fields_; }
  Field eigenfield(std::size_t i) const {
    return Field(grid_, fields_.col(static_cast<Eigen::Index>(i)));
  }
  std::size_t rank() const noexcept { return static_cast<std::size_t>(lambdas_.size()); }
  double threshold() const noexcept { return threshold_; }
  /// Smallest eigenvalue not retained; 0 when every eigenvalue was retained.
  double discarded_min() const noexcept { return discarded_min_; }

  /// <g, e_i>_H for i < N.
  Eigen::VectorXd coefficients(const Eigen::VectorXd& g, std::size_t N) const {
    detail::require(g.size() == grid_.size(), ErrorKind::GridMismatch,
                    "vector length does not match decomposition grid");
    return grid_.h() * (fields_.leftCols(static_cast<Eigen::Index>(N)).transpose() * g);
  }
  Eigen::VectorXd coefficients(const Eigen::VectorXd& g) const { return coefficients(g, rank()); }
  Eigen::VectorXd coefficients(const Field& g) const {
    detail::require_same_grid(grid_, g.grid);
    return coefficients(g.values);
  }

  /// sum_i c_i e_i over the first c.size() modes.
  Eigen::VectorXd synthesize(const Eigen::VectorXd& c) const {
    detail::require(static_cast<std::size_t>(c.size()) <= rank(), ErrorKind::RankExceeded,
                    "more coefficients than retained modes");
    return fields_.leftCols(c.size()) * c;
  }

 private:
  Grid grid_;
  Eigen::VectorXd lambdas_;
  Eigen::MatrixXd fields_;
  double threshold_;
  double discarded_min_;
};

inline SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& K, const Grid& grid,
                                                double rel_tol = 1e-10, double neg_tol = 1e-8) {
  detail::require(K.rows() == grid.size() && K.cols() == grid.size(), ErrorKind::GridMismatch,
                  "operator matrix does not match grid");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(K);
  detail::require(solver.info() == Eigen::Success, ErrorKind::InvalidArgument,
                  "eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const Eigen::Index n = ev.size();
  const double max_abs = ev.cwiseAbs().maxCoeff();
  const double lambda_max = ev(n - 1);
  if (ev(0) < -neg_tol * max_abs)
    throw Error(ErrorKind::NotNonnegative,
                "operator has eigenvalue " + format_double(ev(0)) + " below -" +
                    format_double(neg_tol) + " * " + format_double(max_abs));

  const double tau = std::max(rel_tol * lambda_max, 0.0);
  Eigen::Index r = 0;
  while (r < n && ev(n - 1 - r) > tau) ++r;
  const double discarded_min = r < n ? ev(0) : 0.0;

  const double inv_sqrt_h = 1.0 / std::sqrt(grid.h());
  Eigen::VectorXd lambdas(r);
  Eigen::MatrixXd fields(n, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    lambdas(k) = ev(n - 1 - k);
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    fields.col(k) = inv_sqrt_h * v;
  }
  return SpectralDecomposition(grid, std::move(lambdas), std::move(fields), tau, discarded_min);
}

inline SpectralDecomposition spectral_decompose(const KernelSpec& spec, const Grid& grid,
                                                double rel_tol = 1e-10, double neg_tol = 1e-8) {
  return spectral_decompose(build_operator_matrix(spec, grid), grid, rel_tol, neg_tol);
}

/// K applied to grid vectors through one of three interchangeable backends.
/// Spectral applies K_S = sum_i lambda_i e_i <e_i, .>_H over retained modes.
enum class OperatorBackend { Auto, Dense, Fft, Spectral };

class IntegralOperator {
 public:
  static IntegralOperator make(const KernelSpec& spec, const Grid& grid,
                               OperatorBackend backend = OperatorBackend::Auto) {
    if (backend == OperatorBackend::Auto)
      backend = grid.n() >= 64 ? OperatorBackend::Fft : OperatorBackend::Dense;
    detail::require(backend != OperatorBackend::Spectral, ErrorKind::InvalidArgument,
                    "spectral backend is built from a decomposition");
    if (backend == OperatorBackend::Fft) return IntegralOperator(ConvolutionOperator(spec, grid));
    return from_matrix(build_operator_matrix(spec, grid), grid);
  }

  static IntegralOperator from_matrix(Eigen::MatrixXd K, const Grid& grid) {
    detail::require(K.rows() == grid.size() && K.cols() == grid.size(), ErrorKind::GridMismatch,
                    "operator matrix does not match grid");
    return IntegralOperator(DenseImpl{grid, std::make_shared<const Eigen::MatrixXd>(std::move(K))});
  }

  static IntegralOperator spectral(const SpectralDecomposition& dec) {
    return IntegralOperator(SpectralImpl{std::make_shared<const SpectralDecomposition>(dec)});
  }

  OperatorBackend backend() const noexcept {
    if (std::holds_alternative<DenseImpl>(impl_)) return OperatorBackend::Dense;
    if (std::holds_alternative<ConvolutionOperator>(impl_)) return OperatorBackend::Fft;
    return OperatorBackend::Spectral;
  }

  const Grid& grid() const noexcept {
    return std::visit(
        detail::overloaded{
            [](const DenseImpl& d) -> const Grid& { return d.grid; },
            [](const ConvolutionOperator& c) -> const Grid& { return c.grid(); },
            [](const SpectralImpl& s) -> const Grid& { return s.dec->grid(); },
        },
        impl_);
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& g) const {
    return std::visit(
        detail::overloaded{
            [&](const DenseImpl& d) -> Eigen::VectorXd {
              detail::require(g.size() == d.grid.size(), ErrorKind::GridMismatch,
                              "vector length does not match operator grid");
              return (*d.matrix) * g;
            },
            [&](const ConvolutionOperator& c) -> Eigen::VectorXd { return c.apply(g); },
            [&](const SpectralImpl& s) -> Eigen::VectorXd {
              const Eigen::VectorXd c = s.dec->coefficients(g);
              return s.dec->synthesize(s.dec->lambdas().cwiseProduct(c));
            },
        },
        impl_);
  }

  Field apply(const Field& g) const {
    detail::require_same_grid(grid(), g.grid);
    return Field(g.grid, apply(g.values));
  }

 private:
  struct DenseImpl {
    Grid grid;
    std::shared_ptr<const Eigen::MatrixXd> matrix;
  };
  struct SpectralImpl {
    std::shared_ptr<const SpectralDecomposition> dec;
  };

  template <class Impl>
  explicit IntegralOperator(Impl impl) : impl_(std::move(impl)) {}

  std::variant<DenseImpl, ConvolutionOperator, SpectralImpl> impl_;
};

struct Projection {
  Field field;
  /// H-norm of g minus its projection.
  double residual;
};

inline Projection project_S(const SpectralDecomposition& dec, const Field& g) {
  detail::require_same_grid(dec.grid(), g.grid);
  Field p(g.grid, dec.synthesize(dec.coefficients(g.values)));
  const double residual = norm_h(g.values - p.values, g.grid.h());
  return {std::move(p), residual};
}

namespace detail {

inline void require_in_S(const SpectralDecomposition& dec, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& c, double membership_tol) {
  const double h = dec.grid().h();
  const double residual = norm_h(g - dec.synthesize(c), h);
  const double scale = norm_h(g, h);
  if (residual > membership_tol * scale)
    throw Error(ErrorKind::NotInS, "component outside S has H-norm " + format_double(residual) +
                                       " (field H-norm " + format_double(scale) + ")");
}

}  // namespace detail

/// Coefficients <g, e_i>_H after checking that g lies in S up to
/// membership_tol * ||g||_H.
inline Eigen::VectorXd coefficients_in_S(const SpectralDecomposition& dec,
                                         const Eigen::VectorXd& g, double membership_tol) {
  Eigen::VectorXd c = dec.coefficients(g);
  detail::require_in_S(dec, g, c, membership_tol);
  return c;
}

inline double inner_hminus1(const SpectralDecomposition& dec, const Field& f, const Field& g,
                            double membership_tol = 1e-6) {
  detail::require_same_grid(dec.grid(), f.grid);
  detail::require_same_grid(dec.grid(), g.grid);
  const Eigen::VectorXd cf = coefficients_in_S(dec, f.values, membership_tol);
  const Eigen::VectorXd cg = coefficients_in_S(dec, g.values, membership_tol);
  return (cf.array() * cg.array() / dec.lambdas().array()).sum();
}

inline double norm_hminus1(const SpectralDecomposition& dec, const Field& g,
                           double membership_tol = 1e-6) {
  detail::require_same_grid(dec.grid(), g.grid);
  const Eigen::VectorXd c = coefficients_in_S(dec, g.values, membership_tol);
  return std::sqrt((c.array().square() / dec.lambdas().array()).sum());
}

inline double norm_hplus1(const SpectralDecomposition& dec, const Field& g) {
  detail::require_same_grid(dec.grid(), g.grid);
  const Eigen::VectorXd c = dec.coefficients(g.values);
  return std::sqrt((c.array().square() * dec.lambdas().array()).sum());
}

struct Assumption5Report {
  /// sum_{i <= k} b_i^2 / lambda_i for k = 1..N.
  std::vector<double> partial_sums;
  /// Heuristic divergence flag: the second half of the first N terms adds at
  /// least half as much as the first half.
  bool growing = false;
};

inline Assumption5Report check_assumption5(std::span<const double> lambdas,
                                           std::span<const double> b_coeffs, std::size_t N) {
  detail::require(lambdas.size() >= N && b_coeffs.size() >= N, ErrorKind::InvalidArgument,
                  "check_assumption5 needs at least N eigenvalues and coefficients");
  Assumption5Report report;
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    detail::require(lambdas[i] > 0.0, ErrorKind::NonpositiveEigenvalue,
                    "eigenvalue " + std::to_string(i + 1) + " is " + format_double(lambdas[i]));
    sum += b_coeffs[i] * b_coeffs[i] / lambdas[i];
    report.partial_sums.push_back(sum);
  }
  if (N >= 2) {
    const double head = report.partial_sums[N / 2 - 1];
    const double tail = sum - head;
    report.growing = head > 0.0 && tail >= 0.5 * head;
  }
  return report;
}

inline void write_spectrum_csv(std::ostream& out, const SpectralDecomposition& dec) {
  CsvWriter csv(out, {"index", "lambda"});
  for (std::size_t i = 0; i < dec.rank(); ++i)
    csv.row({static_cast<double>(i + 1), dec.lambda(i)});
}

}  // namespace amari
