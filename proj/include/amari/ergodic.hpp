#pragma once

// Finite-mode Gibbs density exp(-2 eps^-2 Theta_N), random-walk Metropolis,
// batch-means moment estimates and two-sample moment comparison.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "amari/csv.hpp"
#include "amari/energy.hpp"
#include "amari/errors.hpp"
#include "amari/gain.hpp"
#include "amari/operator.hpp"
#include "amari/rng.hpp"
#include "amari/sde.hpp"

namespace amari {

class GibbsTarget {
 public:
  GibbsTarget(std::shared_ptr<const SpectralDecomposition> dec, GainSpec gain, double alpha,
              double epsilon, std::size_t N)
      : dec_(std::move(dec)), gain_(gain), alpha_(alpha), epsilon_(epsilon), N_(N) {
    detail::require(dec_ != nullptr, ErrorKind::InvalidArgument, "Gibbs target needs a decomposition");
    detail::require(alpha > 0.0, ErrorKind::RangeError, "alpha must be > 0");
    detail::require(epsilon > 0.0, ErrorKind::RangeError, "the Gibbs measure needs epsilon > 0");
    detail::require(N >= 1 && N <= dec_->rank(), ErrorKind::RankExceeded,
                    "N = " + std::to_string(N) + " exceeds the retained rank " +
                        std::to_string(dec_->rank()));
  }

  const SpectralDecomposition& dec() const noexcept { return *dec_; }
  const GainSpec& gain() const noexcept { return gain_; }
  double alpha() const noexcept { return alpha_; }
  double epsilon() const noexcept { return epsilon_; }
  std::size_t N() const noexcept { return N_; }

 private:
  std::shared_ptr<const SpectralDecomposition> dec_;
  GainSpec gain_;
  double alpha_;
  double epsilon_;
  std::size_t N_;
};

namespace detail {

inline void require_modes(const GibbsTarget& target, const Eigen::VectorXd& c) {
  require(static_cast<std::size_t>(c.size()) == target.N(), ErrorKind::DimensionMismatch,
          "expected " + std::to_string(target.N()) + " mode coefficients");
}

}  // namespace detail

/// -2 eps^-2 Theta(sum_i c_i e_i), unnormalized.
inline double gibbs_log_density(const GibbsTarget& target, const Eigen::VectorXd& c) {
  detail::require_modes(target, c);
  const double eps2 = target.epsilon() * target.epsilon();
  return -2.0 / eps2 * theta_modes(target.dec(), target.gain(), target.alpha(), c);
}

/// Gradient of gibbs_log_density in the mode coordinates:
///   -2 eps^-2 (alpha c_i / lambda_i - <F(E c), e_i>_H).
inline Eigen::VectorXd gibbs_grad_log_density(const GibbsTarget& target, const Eigen::VectorXd& c) {
  detail::require_modes(target, c);
  const auto& dec = target.dec();
  const auto N = c.size();
  const Eigen::VectorXd u = dec.synthesize(c);
  const Eigen::VectorXd fc = dec.coefficients(nemytskii_F(target.gain(), u), target.N());
  const double eps2 = target.epsilon() * target.epsilon();
  return -2.0 / eps2 *
         (target.alpha() * c.cwiseQuotient(dec.lambdas().head(N)) - fc);
}

/// Galerkin drift -alpha c_i + lambda_i <F(E c), e_i>_H.
inline Eigen::VectorXd galerkin_drift(const GibbsTarget& target, const Eigen::VectorXd& c) {
  detail::require_modes(target, c);
  const auto& dec = target.dec();
  const Eigen::VectorXd u = dec.synthesize(c);
  const Eigen::VectorXd fc = dec.coefficients(nemytskii_F(target.gain(), u), target.N());
  return -target.alpha() * c + dec.lambdas().head(c.size()).cwiseProduct(fc);
}

/// Variance eps^2 lambda_i / (2 alpha) of the Gaussian reference measure in
/// mode i (0-based).
inline double gamma_cov(const GibbsTarget& target, std::size_t i) {
  detail::require(i < target.N(), ErrorKind::IndexOutOfRange,
                  "mode index " + std::to_string(i) + " not below N = " + std::to_string(target.N()));
  return target.epsilon() * target.epsilon() * target.dec().lambda(i) / (2.0 * target.alpha());
}

struct McmcResult {
  /// One row per retained (post-burn-in) step.
  Eigen::MatrixXd samples;
  double acceptance_rate = 0.0;
};

/// Random-walk Metropolis started at c = 0 with per-mode proposal standard
/// deviation step_scale * sqrt(gamma_cov(i)). The first burn_in states are
/// dropped; the acceptance rate counts all steps.
inline McmcResult rw_metropolis(const GibbsTarget& target, std::size_t steps, double step_scale,
                                std::uint64_t seed, std::size_t burn_in) {
  detail::require(steps >= 1, ErrorKind::InvalidArgument, "steps must be >= 1");
  detail::require(step_scale > 0.0, ErrorKind::InvalidArgument, "step_scale must be > 0");
  detail::require(burn_in < steps, ErrorKind::InsufficientData, "burn_in must be below steps");
  const auto N = static_cast<Eigen::Index>(target.N());
  Eigen::VectorXd sd(N);
  for (Eigen::Index i = 0; i < N; ++i)
    sd(i) = step_scale * std::sqrt(gamma_cov(target, static_cast<std::size_t>(i)));

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  double logp = gibbs_log_density(target, x);
  Eigen::VectorXd y(N);
  std::size_t accepted = 0;

  McmcResult result;
  result.samples.resize(static_cast<Eigen::Index>(steps - burn_in), N);
  for (std::size_t k = 0; k < steps; ++k) {
    for (Eigen::Index i = 0; i < N; ++i) y(i) = x(i) + sd(i) * normal(rng);
    const double logq = gibbs_log_density(target, y);
    const double u = uniform(rng);
    if (std::log(u) < logq - logp) {
      x = y;
      logp = logq;
      ++accepted;
    }
    if (k >= burn_in) result.samples.row(static_cast<Eigen::Index>(k - burn_in)) = x.transpose();
  }
  result.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  return result;
}

inline McmcResult rw_metropolis(const GibbsTarget& target, std::size_t steps, double step_scale,
                                std::uint64_t seed) {
  return rw_metropolis(target, steps, step_scale, seed, steps / 10);
}

struct ModeMoments {
  Eigen::VectorXd mean;
  Eigen::VectorXd var;
  Eigen::VectorXd se_mean;
  Eigen::VectorXd se_var;
  std::size_t samples = 0;
  std::size_t batches = 0;

  std::size_t modes() const noexcept { return static_cast<std::size_t>(mean.size()); }
};

/// Per-column mean and variance with batch-means standard errors. Leading
/// rows that do not fill a whole batch are dropped for the error estimate.
inline ModeMoments sample_moments(const Eigen::MatrixXd& x, std::size_t batches = 100) {
  const auto n = static_cast<std::size_t>(x.rows());
  detail::require(batches >= 2, ErrorKind::InvalidArgument, "need at least 2 batches");
  detail::require(n >= 2 * batches, ErrorKind::InsufficientData,
                  std::to_string(n) + " samples are too few for " + std::to_string(batches) +
                      " batches");
  const auto d = x.cols();
  ModeMoments m;
  m.samples = n;
  m.batches = batches;
  m.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  const Eigen::MatrixXd sq = centered.array().square().matrix();
  m.var = sq.colwise().sum().transpose() / static_cast<double>(n - 1);

  const std::size_t size = n / batches;
  const auto offset = static_cast<Eigen::Index>(n - size * batches);
  auto batch_se = [&](const Eigen::MatrixXd& series) {
    Eigen::MatrixXd means(static_cast<Eigen::Index>(batches), d);
    for (std::size_t b = 0; b < batches; ++b)
      means.row(static_cast<Eigen::Index>(b)) =
          series.middleRows(offset + static_cast<Eigen::Index>(b * size),
                            static_cast<Eigen::Index>(size))
              .colwise()
              .mean();
    const Eigen::RowVectorXd mu = means.colwise().mean();
    const Eigen::MatrixXd dev = means.rowwise() - mu;
    const double B = static_cast<double>(batches);
    return Eigen::VectorXd((dev.array().square().colwise().sum() / ((B - 1.0) * B)).sqrt().transpose());
  };
  m.se_mean = batch_se(x);
  m.se_var = batch_se(sq);
  return m;
}

/// Time-average moments of a mode trajectory after dropping burn_in
/// snapshots. Throws InsufficientData when a standard error is zero.
inline ModeMoments ergodic_moments(const TrajectoryRecord& traj, std::size_t burn_in,
                                   std::size_t batches = 100) {
  detail::require(traj.kind == StateKind::Modes, ErrorKind::InvalidArgument,
                  "ergodic_moments needs a mode trajectory");
  detail::require(burn_in < traj.size(), ErrorKind::InsufficientData,
                  "burn_in leaves no snapshots");
  const auto rows = static_cast<Eigen::Index>(traj.size() - burn_in);
  const auto d = traj.states.front().size();
  Eigen::MatrixXd x(rows, d);
  for (Eigen::Index k = 0; k < rows; ++k)
    x.row(k) = traj.states[static_cast<std::size_t>(k) + burn_in].transpose();
  ModeMoments m = sample_moments(x, batches);
  detail::require((m.se_mean.array() > 0.0).all() && (m.se_var.array() > 0.0).all(),
                  ErrorKind::InsufficientData, "degenerate batches: zero standard error");
  return m;
}

struct MomentReport {
  ModeMoments a;
  ModeMoments b;
  Eigen::VectorXd z_mean;
  Eigen::VectorXd z_var;
  double max_abs_z = 0.0;
  bool pass = false;
};

/// Standardized differences (m_a - m_b) / sqrt(se_a^2 + se_b^2) per mode for
/// mean and variance; pass when every |z| <= threshold.
inline MomentReport compare_measures(const ModeMoments& a, const ModeMoments& b,
                                     double threshold = 3.0) {
  detail::require(a.modes() == b.modes(), ErrorKind::DimensionMismatch,
                  "moment sets have different mode counts");
  MomentReport r{a, b, {}, {}, 0.0, false};
  const Eigen::ArrayXd se_m = (a.se_mean.array().square() + b.se_mean.array().square()).sqrt();
  const Eigen::ArrayXd se_v = (a.se_var.array().square() + b.se_var.array().square()).sqrt();
  detail::require((se_m > 0.0).all() && (se_v > 0.0).all(), ErrorKind::InsufficientData,
                  "zero standard error in moment comparison");
  r.z_mean = ((a.mean - b.mean).array() / se_m).matrix();
  r.z_var = ((a.var - b.var).array() / se_v).matrix();
  r.max_abs_z = std::max(r.z_mean.cwiseAbs().maxCoeff(), r.z_var.cwiseAbs().maxCoeff());
  r.pass = r.max_abs_z <= threshold;
  return r;
}

inline MomentReport compare_measures(const McmcResult& mcmc, const ModeMoments& sde,
                                     std::size_t batches = 100, double threshold = 3.0) {
  return compare_measures(sample_moments(mcmc.samples, batches), sde, threshold);
}

/// Exact moments as a zero-error ModeMoments, for comparison against a
/// closed form.
inline ModeMoments exact_moments(Eigen::VectorXd mean, Eigen::VectorXd var) {
  ModeMoments m;
  const auto d = mean.size();
  m.mean = std::move(mean);
  m.var = std::move(var);
  m.se_mean = Eigen::VectorXd::Zero(d);
  m.se_var = Eigen::VectorXd::Zero(d);
  return m;
}

/// Mean lambda_i c <1, e_i>_H / alpha of the Gibbs measure for a constant gain c.
inline Eigen::VectorXd constant_gain_gibbs_mean(const GibbsTarget& target) {
  const auto& dec = target.dec();
  const auto N = static_cast<Eigen::Index>(target.N());
  const Eigen::VectorXd ones_c =
      dec.coefficients(Eigen::VectorXd::Ones(dec.grid().size()), target.N());
  return target.gain().c() * dec.lambdas().head(N).cwiseProduct(ones_c) / target.alpha();
}

inline Eigen::VectorXd gamma_cov_vector(const GibbsTarget& target) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(target.N()));
  for (std::size_t i = 0; i < target.N(); ++i) v(static_cast<Eigen::Index>(i)) = gamma_cov(target, i);
  return v;
}

inline void write_samples_csv(std::ostream& out, const McmcResult& mcmc) {
  std::vector<std::string> header{"step"};
  for (Eigen::Index i = 0; i < mcmc.samples.cols(); ++i) header.push_back("c_" + std::to_string(i + 1));
  CsvWriter csv(out, header);
  std::vector<double> row;
  for (Eigen::Index k = 0; k < mcmc.samples.rows(); ++k) {
    row.assign(1, static_cast<double>(k));
    for (Eigen::Index i = 0; i < mcmc.samples.cols(); ++i) row.push_back(mcmc.samples(k, i));
    csv.row(row);
  }
}

/// One JSON object per mode, then one summary object.
inline void write_moment_report_jsonl(std::ostream& out, const MomentReport& r,
                                      const nlohmann::ordered_json& extra = nlohmann::ordered_json::object(),
                                      const std::string& label_a = "mcmc",
                                      const std::string& label_b = "sde") {
  for (std::size_t i = 0; i < r.a.modes(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    nlohmann::ordered_json j = extra;
    j["mode"] = i + 1;
    j["mean_" + label_a] = r.a.mean(k);
    j["se_mean_" + label_a] = r.a.se_mean(k);
    j["var_" + label_a] = r.a.var(k);
    j["se_var_" + label_a] = r.a.se_var(k);
    j["mean_" + label_b] = r.b.mean(k);
    j["se_mean_" + label_b] = r.b.se_mean(k);
    j["var_" + label_b] = r.b.var(k);
    j["se_var_" + label_b] = r.b.se_var(k);
    j["z_mean"] = r.z_mean(k);
    j["z_var"] = r.z_var(k);
    out << j.dump() << '\n';
  }
  nlohmann::ordered_json s = extra;
  s["summary"] = true;
  s["max_abs_z"] = r.max_abs_z;
  s["pass"] = r.pass;
  out << s.dump() << '\n';
}

}  // namespace amari
