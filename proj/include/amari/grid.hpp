#pragma once

// Uniform midpoint grids on [a, b] and fields sampled on them.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "amari/errors.hpp"

namespace amari {

enum class Boundary { Truncated, Periodic };

constexpr std::string_view to_string(Boundary b) noexcept {
  return b == Boundary::Periodic ? "periodic" : "truncated";
}

/// Nodes x_j = a + (j + 1/2) h with h = (b - a) / n.
class Grid {
 public:
  Grid(double a, double b, std::size_t n, Boundary boundary = Boundary::Truncated)
      : a_(a), b_(b), n_(n), h_(0.0), boundary_(boundary) {
    detail::require(std::isfinite(a) && std::isfinite(b) && a < b, ErrorKind::InvalidDomain,
                    "grid requires finite a < b");
    detail::require(n >= 1, ErrorKind::InvalidDomain, "grid requires n >= 1");
    h_ = (b - a) / static_cast<double>(n);
  }

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t n() const noexcept { return n_; }
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(n_); }
  double h() const noexcept { return h_; }
  double length() const noexcept { return b_ - a_; }
  Boundary boundary() const noexcept { return boundary_; }

  double node(std::size_t j) const noexcept {
    return a_ + (static_cast<double>(j) + 0.5) * h_;
  }

  Eigen::VectorXd nodes() const {
    Eigen::VectorXd x(size());
    for (std::size_t j = 0; j < n_; ++j) x(static_cast<Eigen::Index>(j)) = node(j);
    return x;
  }

  /// Signed index offset i - j, wrapped to the minimal image on periodic grids.
  long offset(std::size_t i, std::size_t j) const noexcept {
    long k = static_cast<long>(i) - static_cast<long>(j);
    if (boundary_ == Boundary::Periodic) {
      const long n = static_cast<long>(n_);
      k %= n;
      if (k < 0) k += n;
      if (2 * k > n) k -= n;
    }
    return k;
  }

  /// x_i - x_j (wrapped when periodic), computed from the index offset so that
  /// it depends on i - j only.
  double difference(std::size_t i, std::size_t j) const noexcept {
    return static_cast<double>(offset(i, j)) * h_;
  }

  bool operator==(const Grid&) const = default;

 private:
  double a_;
  double b_;
  std::size_t n_;
  double h_;
  Boundary boundary_;
};

inline Grid build_grid(double a, double b, std::size_t n,
                       Boundary boundary = Boundary::Truncated) {
  return Grid(a, b, n, boundary);
}

/// A real function on a grid, stored by node value.
struct Field {
  Grid grid;
  Eigen::VectorXd values;

  explicit Field(const Grid& g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
  Field(const Grid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
    detail::require(values.size() == grid.size(), ErrorKind::GridMismatch,
                    "field length " + std::to_string(values.size()) + " does not match grid size " +
                        std::to_string(grid.n()));
  }

  static Field constant(const Grid& g, double c) {
    return Field(g, Eigen::VectorXd::Constant(g.size(), c));
  }

  template <class Fn>
  static Field from_function(const Grid& g, Fn&& fn) {
    Eigen::VectorXd v(g.size());
    for (std::size_t j = 0; j < g.n(); ++j) v(static_cast<Eigen::Index>(j)) = fn(g.node(j));
    return Field(g, std::move(v));
  }
};

namespace detail {

inline void require_same_grid(const Grid& a, const Grid& b) {
  require(a == b, ErrorKind::GridMismatch, "fields live on different grids");
}

}  // namespace detail

/// h * sum_j f_j g_j
inline double inner_h(const Field& f, const Field& g) {
  detail::require_same_grid(f.grid, g.grid);
  return f.grid.h() * f.values.dot(g.values);
}

inline double norm_h(const Field& f) { return std::sqrt(inner_h(f, f)); }

inline double norm_h(const Eigen::VectorXd& v, double h) { return std::sqrt(h * v.squaredNorm()); }

}  // namespace amari
