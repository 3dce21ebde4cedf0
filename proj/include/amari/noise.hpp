#pragma once

// Brownian increments, either per grid node or per eigenmode of K.
//
// WhiteOnGrid draws N(0, dt / h) per node, so that <dW, v>_H ~ N(0, dt ||v||_H^2).
// SpectralDiagonal draws N(0, dt) per retained mode; the increment added to
// the state is epsilon * sum_i b_i dW_i e_i.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "amari/errors.hpp"
#include "amari/operator.hpp"
#include "amari/rng.hpp"

namespace amari {

enum class NoiseMode { WhiteOnGrid, SpectralDiagonal };
enum class NoiseRule { B_eq_K, B_sq_eq_K, Custom };

constexpr std::string_view to_string(NoiseMode m) noexcept {
  return m == NoiseMode::WhiteOnGrid ? "white" : "spectral";
}

constexpr std::string_view to_string(NoiseRule r) noexcept {
  switch (r) {
    case NoiseRule::B_eq_K: return "b_eq_k";
    case NoiseRule::B_sq_eq_K: return "b_sq_eq_k";
    case NoiseRule::Custom: return "custom";
  }
  return "unknown";
}

struct NoiseSpec {
  NoiseMode mode = NoiseMode::SpectralDiagonal;
  NoiseRule rule = NoiseRule::B_eq_K;
  std::vector<double> custom;
  std::uint64_t seed = 1;

  static NoiseSpec white(std::uint64_t seed) {
    return {NoiseMode::WhiteOnGrid, NoiseRule::B_eq_K, {}, seed};
  }
  static NoiseSpec spectral(NoiseRule rule, std::uint64_t seed) {
    return {NoiseMode::SpectralDiagonal, rule, {}, seed};
  }
  static NoiseSpec custom_rule(std::vector<double> b, std::uint64_t seed) {
    return {NoiseMode::SpectralDiagonal, NoiseRule::Custom, std::move(b), seed};
  }

  NoiseSpec with_seed(std::uint64_t s) const {
    NoiseSpec copy = *this;
    copy.seed = s;
    return copy;
  }

  /// Diagonal coefficients b_1..b_r of B in the eigenbasis.
  Eigen::VectorXd coefficients(const SpectralDecomposition& dec) const {
    const auto r = static_cast<Eigen::Index>(dec.rank());
    switch (rule) {
      case NoiseRule::B_eq_K: return dec.lambdas();
      case NoiseRule::B_sq_eq_K: return dec.lambdas().cwiseSqrt();
      case NoiseRule::Custom: {
        detail::require(static_cast<Eigen::Index>(custom.size()) >= r, ErrorKind::InvalidArgument,
                        "custom noise list shorter than the retained rank " +
                            std::to_string(dec.rank()));
        Eigen::VectorXd b(r);
        for (Eigen::Index i = 0; i < r; ++i) {
          const double v = custom[static_cast<std::size_t>(i)];
          detail::require(v >= 0.0 && std::isfinite(v), ErrorKind::RangeError,
                          "custom noise coefficients must be >= 0");
          b(i) = v;
        }
        return b;
      }
    }
    return {};
  }

  bool operator==(const NoiseSpec&) const = default;
};

/// Draws increments one step at a time: `dim` independent N(0, variance)
/// values per step, in a fixed order determined by the seed.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, Eigen::Index dim, double variance)
      : rng_(seed), dim_(dim), stddev_(std::sqrt(variance)) {
    detail::require(variance >= 0.0, ErrorKind::InvalidArgument, "noise variance must be >= 0");
  }

  Eigen::Index dim() const noexcept { return dim_; }

  void next(Eigen::VectorXd& out) {
    out.resize(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) out(i) = stddev_ * normal_(rng_);
  }

 private:
  Rng rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Eigen::Index dim_;
  double stddev_;
};

/// The stream a simulation uses for the given noise spec: n node values of
/// variance dt / h, or r mode values of variance dt.
inline NoiseStream make_noise_stream(const NoiseSpec& noise, const Grid& grid, std::size_t rank,
                                     double dt) {
  detail::require(dt > 0.0, ErrorKind::InvalidArgument, "dt must be > 0");
  if (noise.mode == NoiseMode::WhiteOnGrid) return NoiseStream(noise.seed, grid.size(), dt / grid.h());
  return NoiseStream(noise.seed, static_cast<Eigen::Index>(rank), dt);
}

/// A pre-sampled path: column k holds the increment over [t_k, t_{k+1}).
struct NoisePath {
  NoiseMode mode = NoiseMode::SpectralDiagonal;
  double dt = 0.0;
  Eigen::MatrixXd increments;

  std::size_t steps() const noexcept { return static_cast<std::size_t>(increments.cols()); }

  /// The same Brownian path seen at step m * dt: sums of m consecutive increments.
  NoisePath coarsen(std::size_t m) const {
    detail::require(m >= 1 && steps() % m == 0, ErrorKind::InvalidArgument,
                    "coarsening factor must divide the step count");
    NoisePath out{mode, dt * static_cast<double>(m),
                  Eigen::MatrixXd::Zero(increments.rows(), static_cast<Eigen::Index>(steps() / m))};
    for (Eigen::Index k = 0; k < increments.cols(); ++k)
      out.increments.col(k / static_cast<Eigen::Index>(m)) += increments.col(k);
    return out;
  }
};

inline NoisePath sample_noise_increments(const NoiseSpec& noise, const Grid& grid,
                                         std::size_t rank, double dt, std::size_t steps) {
  NoiseStream stream = make_noise_stream(noise, grid, rank, dt);
  NoisePath path{noise.mode, dt, Eigen::MatrixXd(stream.dim(), static_cast<Eigen::Index>(steps))};
  Eigen::VectorXd buf;
  for (std::size_t k = 0; k < steps; ++k) {
    stream.next(buf);
    path.increments.col(static_cast<Eigen::Index>(k)) = buf;
  }
  return path;
}

inline NoisePath sample_noise_increments(const NoiseSpec& noise, const SpectralDecomposition& dec,
                                         double dt, std::size_t steps) {
  return sample_noise_increments(noise, dec.grid(), dec.rank(), dt, steps);
}

}  // namespace amari
