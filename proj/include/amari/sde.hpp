#pragma once

// Integrators for dU = (-alpha U + K F(U)) dt + epsilon B dW:
//   * Euler-Maruyama on the grid,
//   * spectral Galerkin on the leading N modes,
//   * Doss-Sussmann: explicit Euler for Y' = -grad Theta(Y + epsilon B W_t),
//     V = Y + epsilon B W with piecewise-constant W,
// plus trajectory diagnostics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "amari/csv.hpp"
#include "amari/energy.hpp"
#include "amari/errors.hpp"
#include "amari/gain.hpp"
#include "amari/grid.hpp"
#include "amari/noise.hpp"
#include "amari/operator.hpp"
#include "amari/rng.hpp"

namespace amari {

struct SimConfig {
  double alpha = 1.0;
  double epsilon = 0.0;
  double dt = 0.01;
  double T = 1.0;
  /// Initial state as grid values.
  Eigen::VectorXd u0;
  std::size_t record_every = 1;
  bool allow_non_lipschitz = false;
  /// Abort with BlowUp once any |u_j| exceeds this.
  double clamp = 1e3;
  double membership_tol = 1e-6;

  std::size_t steps() const {
    validate();
    return static_cast<std::size_t>(std::llround(T / dt));
  }

  /// T / dt - steps(); the horizon actually integrated is steps() * dt.
  double rounding() const { return T / dt - static_cast<double>(steps()); }

  void validate() const {
    auto check = [](bool ok, const std::string& m) { detail::require(ok, ErrorKind::RangeError, m); };
    check(alpha > 0.0 && std::isfinite(alpha), "alpha must be > 0");
    check(epsilon >= 0.0 && std::isfinite(epsilon), "epsilon must be >= 0");
    check(dt > 0.0 && std::isfinite(dt), "dt must be > 0");
    check(dt < 2.0 / alpha, "dt must be < 2 / alpha for a stable explicit scheme");
    check(T > 0.0 && std::isfinite(T), "T must be > 0");
    check(std::llround(T / dt) >= 1, "T / dt rounds to zero steps");
    check(record_every >= 1, "record_every must be >= 1");
    check(clamp > 0.0, "clamp must be > 0");
    check(membership_tol >= 0.0, "membership_tol must be >= 0");
  }
};

enum class StateKind { Grid, Modes };

struct TrajectoryRecord {
  std::string integrator;
  StateKind kind = StateKind::Grid;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  double alpha = 0.0;
  std::vector<double> times;
  /// Grid values (kind Grid) or mode coefficients c_1..c_N (kind Modes).
  std::vector<Eigen::VectorXd> states;
  std::vector<double> theta;
  std::vector<double> norm_h;
  /// NaN where the state is not in S within the membership tolerance.
  std::vector<double> norm_hm1;
  /// H-norm of the part of u0 outside the integrated subspace.
  double projection_residual = 0.0;

  std::size_t size() const noexcept { return times.size(); }
};

namespace detail {

inline void check_gain(const GainSpec& gain, const SimConfig& cfg) {
  require(gain.lipschitz().has_value() || cfg.allow_non_lipschitz, ErrorKind::InvalidArgument,
          std::string(to_string(gain.family())) +
              " gain is not globally Lipschitz; set allow_non_lipschitz to simulate it");
}

inline void check_finite_bounded(const Eigen::VectorXd& u, double clamp, double t) {
  if (!(u.array().abs() <= clamp).all())
    throw Error(ErrorKind::BlowUp, "state left |u| <= " + format_double(clamp) + " at t = " +
                                       format_double(t));
}

inline bool should_record(std::size_t k, std::size_t steps, std::size_t every) {
  return k % every == 0 || k == steps;
}

/// Diagnostics of a grid state; theta and norm_hm1 are NaN without a
/// decomposition or when u is not in S.
inline void record_grid(TrajectoryRecord& rec, const SpectralDecomposition* dec,
                        const GainSpec& gain, double alpha, double tol, double t,
                        const Eigen::VectorXd& u, double h) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rec.times.push_back(t);
  rec.states.push_back(u);
  const double nh = norm_h(u, h);
  rec.norm_h.push_back(nh);
  double theta = nan;
  double hm1 = nan;
  if (dec != nullptr) {
    const Eigen::VectorXd c = dec->coefficients(u);
    if (norm_h(u - dec->synthesize(c), h) <= tol * nh) {
      hm1 = std::sqrt((c.array().square() / dec->lambdas().array()).sum());
      theta = -phi_functional(gain, u, h) + 0.5 * alpha * hm1 * hm1;
    }
  }
  rec.theta.push_back(theta);
  rec.norm_hm1.push_back(hm1);
}

inline void record_modes(TrajectoryRecord& rec, const SpectralDecomposition& dec,
                         const GainSpec& gain, double alpha, double t, const Eigen::VectorXd& c) {
  rec.times.push_back(t);
  rec.states.push_back(c);
  rec.norm_h.push_back(c.norm());
  const double hm1 = std::sqrt((c.array().square() / dec.lambdas().head(c.size()).array()).sum());
  rec.norm_hm1.push_back(hm1);
  rec.theta.push_back(theta_modes(dec, gain, alpha, c));
}

/// Maps a raw increment to the grid: identity (white) or E diag(b) (spectral).
class NoiseMap {
 public:
  NoiseMap(const NoiseSpec& noise, const SpectralDecomposition* dec) : mode_(noise.mode) {
    if (mode_ == NoiseMode::SpectralDiagonal) {
      require(dec != nullptr, ErrorKind::InvalidArgument,
              "spectral noise needs a spectral decomposition");
      EB_ = dec->fields() * noise.coefficients(*dec).asDiagonal();
    }
  }

  Eigen::VectorXd operator()(const Eigen::VectorXd& dW) const {
    if (mode_ == NoiseMode::WhiteOnGrid) return dW;
    return EB_ * dW;
  }

 private:
  NoiseMode mode_;
  Eigen::MatrixXd EB_;
};

template <class NextIncrement>
TrajectoryRecord em_core(const IntegralOperator& K, const SpectralDecomposition* dec,
                         const GainSpec& gain, const NoiseSpec& noise, const SimConfig& cfg,
                         NextIncrement&& next_increment, std::string tag) {
  cfg.validate();
  check_gain(gain, cfg);
  const Grid& grid = K.grid();
  require(cfg.u0.size() == grid.size(), ErrorKind::GridMismatch,
          "u0 length does not match the grid");
  if (dec != nullptr) require_same_grid(dec->grid(), grid);
  const std::size_t steps = cfg.steps();
  const NoiseMap map(noise, dec);

  TrajectoryRecord rec;
  rec.integrator = std::move(tag);
  rec.kind = StateKind::Grid;
  rec.seed = noise.seed;
  rec.dt = cfg.dt;
  rec.steps = steps;
  rec.alpha = cfg.alpha;

  Eigen::VectorXd u = cfg.u0;
  Eigen::VectorXd dW;
  check_finite_bounded(u, cfg.clamp, 0.0);
  record_grid(rec, dec, gain, cfg.alpha, cfg.membership_tol, 0.0, u, grid.h());
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    Eigen::VectorXd next = u + cfg.dt * amari_drift(K, gain, cfg.alpha, u);
    next_increment(k - 1, dW);
    if (cfg.epsilon != 0.0) next += cfg.epsilon * map(dW);
    u = std::move(next);
    check_finite_bounded(u, cfg.clamp, t);
    if (should_record(k, steps, cfg.record_every))
      record_grid(rec, dec, gain, cfg.alpha, cfg.membership_tol, t, u, grid.h());
  }
  return rec;
}

inline void require_path(const NoisePath& path, const NoiseSpec& noise, const SimConfig& cfg,
                         Eigen::Index dim) {
  require(path.mode == noise.mode, ErrorKind::InvalidArgument, "noise path mode mismatch");
  require(path.steps() == cfg.steps(), ErrorKind::InvalidArgument,
          "noise path has " + std::to_string(path.steps()) + " steps, run needs " +
              std::to_string(cfg.steps()));
  require(path.increments.rows() == dim, ErrorKind::DimensionMismatch,
          "noise path dimension mismatch");
  require(std::abs(path.dt - cfg.dt) <= 1e-12 * cfg.dt, ErrorKind::InvalidArgument,
          "noise path dt differs from run dt");
}

}  // namespace detail

/// Euler-Maruyama on the grid with noise drawn from the seed in `noise`.
/// `dec` may be null for white noise; diagnostics needing S are then NaN.
inline TrajectoryRecord em_simulate_full(const IntegralOperator& K,
                                         const SpectralDecomposition* dec, const GainSpec& gain,
                                         const NoiseSpec& noise, const SimConfig& cfg) {
  cfg.validate();
  const std::size_t rank = dec != nullptr ? dec->rank() : 0;
  NoiseStream stream = make_noise_stream(noise, K.grid(), rank, cfg.dt);
  return detail::em_core(
      K, dec, gain, noise, cfg, [&](std::size_t, Eigen::VectorXd& out) { stream.next(out); }, "em");
}

inline TrajectoryRecord em_simulate_full(const KernelSpec& spec, const Grid& grid,
                                         const SpectralDecomposition& dec, const GainSpec& gain,
                                         const NoiseSpec& noise, const SimConfig& cfg) {
  return em_simulate_full(IntegralOperator::make(spec, grid), &dec, gain, noise, cfg);
}

/// Euler-Maruyama driven by a pre-sampled path.
inline TrajectoryRecord em_simulate_full(const IntegralOperator& K,
                                         const SpectralDecomposition* dec, const GainSpec& gain,
                                         const NoiseSpec& noise, const NoisePath& path,
                                         const SimConfig& cfg) {
  const Eigen::Index dim = noise.mode == NoiseMode::WhiteOnGrid
                               ? K.grid().size()
                               : static_cast<Eigen::Index>(dec != nullptr ? dec->rank() : 0);
  detail::require_path(path, noise, cfg, dim);
  return detail::em_core(
      K, dec, gain, noise, cfg,
      [&](std::size_t k, Eigen::VectorXd& out) {
        out = path.increments.col(static_cast<Eigen::Index>(k));
      },
      "em");
}

/// Galerkin system on the leading N modes:
///   c_i += dt (-alpha c_i + lambda_i <F(E_N c), e_i>_H) + epsilon b_i dbeta_i.
/// With white noise, dbeta_i = <dW, e_i>_H and b_i = 1. The noise stream is
/// the full-rank one, so runs with different N share increments mode by mode.
inline TrajectoryRecord galerkin_simulate(const SpectralDecomposition& dec, const GainSpec& gain,
                                          const NoiseSpec& noise, const SimConfig& cfg,
                                          std::size_t N) {
  cfg.validate();
  detail::check_gain(gain, cfg);
  detail::require(N >= 1 && N <= dec.rank(), ErrorKind::RankExceeded,
                  "N = " + std::to_string(N) + " exceeds the retained rank " +
                      std::to_string(dec.rank()));
  const Grid& grid = dec.grid();
  detail::require(cfg.u0.size() == grid.size(), ErrorKind::GridMismatch,
                  "u0 length does not match the grid");
  const auto n_modes = static_cast<Eigen::Index>(N);
  const std::size_t steps = cfg.steps();
  const double h = grid.h();
  const auto E = dec.fields().leftCols(n_modes);
  const Eigen::VectorXd lambda = dec.lambdas().head(n_modes);
  const bool white = noise.mode == NoiseMode::WhiteOnGrid;
  const Eigen::VectorXd b =
      white ? Eigen::VectorXd::Ones(n_modes) : Eigen::VectorXd(noise.coefficients(dec).head(n_modes));
  NoiseStream stream = make_noise_stream(noise, grid, dec.rank(), cfg.dt);

  TrajectoryRecord rec;
  rec.integrator = "galerkin";
  rec.kind = StateKind::Modes;
  rec.seed = noise.seed;
  rec.dt = cfg.dt;
  rec.steps = steps;
  rec.alpha = cfg.alpha;

  Eigen::VectorXd c = dec.coefficients(cfg.u0, N);
  rec.projection_residual = norm_h(cfg.u0 - E * c, h);
  Eigen::VectorXd dW;
  Eigen::VectorXd dbeta(n_modes);
  detail::record_modes(rec, dec, gain, cfg.alpha, 0.0, c);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const Eigen::VectorXd u = E * c;
    const Eigen::VectorXd fc = h * (E.transpose() * nemytskii_F(gain, u));
    Eigen::VectorXd next = c + cfg.dt * (-cfg.alpha * c + lambda.cwiseProduct(fc));
    stream.next(dW);
    if (white)
      dbeta = h * (E.transpose() * dW);
    else
      dbeta = dW.head(n_modes);
    if (cfg.epsilon != 0.0) next += cfg.epsilon * b.cwiseProduct(dbeta);
    c = std::move(next);
    detail::check_finite_bounded(c, cfg.clamp, t);
    if (detail::should_record(k, steps, cfg.record_every))
      detail::record_modes(rec, dec, gain, cfg.alpha, t, c);
  }
  return rec;
}

/// Doss-Sussmann integrator on a given spectral noise path. Returns V = Y + Z
/// with Z_t = epsilon sum_i b_i W_i(t) e_i held constant on each step.
inline TrajectoryRecord doss_sussmann_simulate(const IntegralOperator& K,
                                               const SpectralDecomposition& dec,
                                               const GainSpec& gain, const NoiseSpec& noise,
                                               const NoisePath& path, const SimConfig& cfg) {
  cfg.validate();
  detail::check_gain(gain, cfg);
  detail::require(noise.mode == NoiseMode::SpectralDiagonal, ErrorKind::InvalidArgument,
                  "the pathwise integrator needs spectral noise");
  detail::require_path(path, noise, cfg, static_cast<Eigen::Index>(dec.rank()));
  const Grid& grid = K.grid();
  detail::require_same_grid(dec.grid(), grid);
  detail::require(cfg.u0.size() == grid.size(), ErrorKind::GridMismatch,
                  "u0 length does not match the grid");
  const std::size_t steps = cfg.steps();
  const detail::NoiseMap map(noise, &dec);

  TrajectoryRecord rec;
  rec.integrator = "doss_sussmann";
  rec.kind = StateKind::Grid;
  rec.seed = noise.seed;
  rec.dt = cfg.dt;
  rec.steps = steps;
  rec.alpha = cfg.alpha;

  Eigen::VectorXd W = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dec.rank()));
  Eigen::VectorXd Z = Eigen::VectorXd::Zero(grid.size());
  Eigen::VectorXd Y = cfg.u0;
  detail::check_finite_bounded(Y, cfg.clamp, 0.0);
  detail::record_grid(rec, &dec, gain, cfg.alpha, cfg.membership_tol, 0.0, Y, grid.h());
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    // -grad Theta(Y + Z) is the Amari drift at Y + Z.
    Y = Y + cfg.dt * amari_drift(K, gain, cfg.alpha, Y + Z);
    W += path.increments.col(static_cast<Eigen::Index>(k - 1));
    if (cfg.epsilon != 0.0) Z = cfg.epsilon * map(W);
    const Eigen::VectorXd V = Y + Z;
    detail::check_finite_bounded(V, cfg.clamp, t);
    if (detail::should_record(k, steps, cfg.record_every))
      detail::record_grid(rec, &dec, gain, cfg.alpha, cfg.membership_tol, t, V, grid.h());
  }
  return rec;
}

/// Pre-samples the path from the seed in `noise`, then integrates.
inline TrajectoryRecord doss_sussmann_simulate(const IntegralOperator& K,
                                               const SpectralDecomposition& dec,
                                               const GainSpec& gain, const NoiseSpec& noise,
                                               const SimConfig& cfg) {
  cfg.validate();
  detail::require(noise.mode == NoiseMode::SpectralDiagonal, ErrorKind::InvalidArgument,
                  "the pathwise integrator needs spectral noise");
  const NoisePath path = sample_noise_increments(noise, dec, cfg.dt, cfg.steps());
  return doss_sussmann_simulate(K, dec, gain, noise, path, cfg);
}

inline TrajectoryRecord doss_sussmann_simulate(const SpectralDecomposition& dec,
                                               const GainSpec& gain, const NoiseSpec& noise,
                                               const SimConfig& cfg) {
  return doss_sussmann_simulate(IntegralOperator::spectral(dec), dec, gain, noise, cfg);
}

/// sup over recorded times of ||a_t - b_t||_H for two grid records with
/// identical time stamps.
inline double sup_h_distance(const TrajectoryRecord& a, const TrajectoryRecord& b, double h) {
  detail::require(a.size() == b.size(), ErrorKind::DimensionMismatch,
                  "records have different lengths");
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    detail::require(std::abs(a.times[k] - b.times[k]) <= 1e-9 * std::max(1.0, a.times[k]),
                    ErrorKind::DimensionMismatch, "records have different time stamps");
    sup = std::max(sup, norm_h(a.states[k] - b.states[k], h));
  }
  return sup;
}

struct DsStudy {
  /// Step sizes dt_0 / 2^k, k = 0..halvings.
  std::vector<double> dts;
  /// sup over the coarse time grid of ||V - U_ref||_H.
  std::vector<double> discrepancies;
  /// discrepancies[k - 1] / discrepancies[k].
  std::vector<double> ratios;
  /// max_k discrepancies[k] / dts[k].
  double constant = 0.0;
  double reference_dt = 0.0;
};

/// Pathwise integrator at dt_0 / 2^k against Euler-Maruyama on the same
/// Brownian path at dt_0 / (2^halvings fine_factor). At equal step sizes the
/// two schemes coincide algebraically, hence the finer reference.
inline DsStudy doss_sussmann_study(const IntegralOperator& K, const SpectralDecomposition& dec,
                                   const GainSpec& gain, const NoiseSpec& noise,
                                   const SimConfig& cfg, std::size_t halvings = 3,
                                   std::size_t fine_factor = 8) {
  cfg.validate();
  detail::require(fine_factor >= 2, ErrorKind::InvalidArgument, "fine_factor must be >= 2");
  const std::size_t steps0 = cfg.steps();
  const std::size_t finest = std::size_t{1} << halvings;
  const std::size_t refine = finest * fine_factor;

  SimConfig ref_cfg = cfg;
  ref_cfg.dt = cfg.dt / static_cast<double>(refine);
  ref_cfg.T = ref_cfg.dt * static_cast<double>(steps0 * refine);
  ref_cfg.record_every = fine_factor;
  const NoisePath fine = sample_noise_increments(noise, dec, ref_cfg.dt, steps0 * refine);
  const TrajectoryRecord ref = em_simulate_full(K, &dec, gain, noise, fine, ref_cfg);
  const double h = dec.grid().h();

  DsStudy study;
  study.reference_dt = ref_cfg.dt;
  for (std::size_t k = 0; k <= halvings; ++k) {
    const std::size_t level = std::size_t{1} << k;
    const std::size_t coarsen = refine / level;
    SimConfig ds_cfg = cfg;
    ds_cfg.dt = cfg.dt / static_cast<double>(level);
    ds_cfg.T = ds_cfg.dt * static_cast<double>(steps0 * level);
    ds_cfg.record_every = 1;
    const TrajectoryRecord ds =
        doss_sussmann_simulate(K, dec, gain, noise, fine.coarsen(coarsen), ds_cfg);
    const std::size_t stride = finest / level;
    double sup = 0.0;
    for (std::size_t j = 0; j < ds.size(); ++j)
      sup = std::max(sup, norm_h(ds.states[j] - ref.states[j * stride], h));
    study.dts.push_back(ds_cfg.dt);
    study.discrepancies.push_back(sup);
    study.constant = std::max(study.constant, sup / ds_cfg.dt);
    if (k > 0) study.ratios.push_back(study.discrepancies[k - 1] / sup);
  }
  return study;
}

struct InvarianceReport {
  double sup_norm_sq = 0.0;
  std::vector<double> per_time;
};

/// ||U_t||_{-1}^2 along a trajectory. Grid states must lie in S.
inline InvarianceReport invariance_monitor(const SpectralDecomposition& dec,
                                           const TrajectoryRecord& traj,
                                           double membership_tol = 1e-6) {
  InvarianceReport report;
  for (const auto& s : traj.states) {
    double v = 0.0;
    if (traj.kind == StateKind::Grid) {
      const Eigen::VectorXd c = coefficients_in_S(dec, s, membership_tol);
      v = (c.array().square() / dec.lambdas().array()).sum();
    } else {
      detail::require(static_cast<std::size_t>(s.size()) <= dec.rank(), ErrorKind::RankExceeded,
                      "mode state longer than the retained rank");
      v = (s.array().square() / dec.lambdas().head(s.size()).array()).sum();
    }
    report.per_time.push_back(v);
    report.sup_norm_sq = std::max(report.sup_norm_sq, v);
  }
  return report;
}

struct ConvergenceRow {
  std::size_t N = 0;
  double sup_error = 0.0;
};

/// Galerkin error against the full-grid run with K restricted to the retained
/// spectrum and the same noise realization.
inline std::vector<ConvergenceRow> convergence_table(const SpectralDecomposition& dec,
                                                     const GainSpec& gain, const NoiseSpec& noise,
                                                     const SimConfig& cfg,
                                                     const std::vector<std::size_t>& N_list) {
  for (std::size_t N : N_list)
    detail::require(N >= 1 && N <= dec.rank(), ErrorKind::RankExceeded,
                    "N = " + std::to_string(N) + " exceeds the retained rank " +
                        std::to_string(dec.rank()));
  const TrajectoryRecord full = em_simulate_full(IntegralOperator::spectral(dec), &dec, gain, noise, cfg);
  const double h = dec.grid().h();
  std::vector<ConvergenceRow> rows;
  for (std::size_t N : N_list) {
    const TrajectoryRecord gal = galerkin_simulate(dec, gain, noise, cfg, N);
    double sup = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k)
      sup = std::max(sup, norm_h(full.states[k] - dec.synthesize(gal.states[k]), h));
    rows.push_back({N, sup});
  }
  return rows;
}

struct SwitchEvent {
  double time = 0.0;
  /// +1 for a crossing from below `lower` to above `upper`, -1 for the reverse.
  int direction = 0;
};

/// Hysteresis detector on a scalar series.
inline std::vector<SwitchEvent> detect_switches(const std::vector<double>& times,
                                                const std::vector<double>& values, double lower,
                                                double upper) {
  detail::require(lower < upper, ErrorKind::InvalidArgument, "switch thresholds need lower < upper");
  detail::require(times.size() == values.size(), ErrorKind::DimensionMismatch,
                  "times and values differ in length");
  std::vector<SwitchEvent> events;
  int state = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double v = values[k];
    if (v > upper) {
      if (state == -1) events.push_back({times[k], +1});
      state = +1;
    } else if (v < lower) {
      if (state == +1) events.push_back({times[k], -1});
      state = -1;
    }
  }
  return events;
}

inline std::vector<double> spatial_means(const TrajectoryRecord& traj) {
  detail::require(traj.kind == StateKind::Grid, ErrorKind::InvalidArgument,
                  "spatial means need grid states");
  std::vector<double> means;
  means.reserve(traj.size());
  for (const auto& s : traj.states) means.push_back(s.mean());
  return means;
}

/// Hysteresis detector on the spatial mean of the recorded grid states.
inline std::vector<SwitchEvent> detect_switches(const TrajectoryRecord& traj, double lower,
                                                double upper) {
  return detect_switches(traj.times, spatial_means(traj), lower, upper);
}

/// Runs fn(member, derive_seed(seed, member)) for member = 0..members-1 on up
/// to `threads` workers (0: hardware concurrency). Results are in member
/// order; the first exception thrown by any member is rethrown.
template <class Fn>
auto run_ensemble(std::size_t members, std::uint64_t seed, Fn&& fn, unsigned threads = 0)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t, std::uint64_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t, std::uint64_t>;
  std::vector<std::optional<Result>> slots(members);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(members, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t m = next.fetch_add(1);
      if (m >= members) return;
      try {
        slots[m].emplace(fn(m, derive_seed(seed, m)));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  std::vector<Result> out;
  out.reserve(members);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// CSV with columns t, theta, norm_h, norm_hm1, then u_0..u_{n-1} or c_1..c_N.
inline void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& rec) {
  std::vector<std::string> header{"t", "theta", "norm_h", "norm_hm1"};
  const std::size_t width = rec.states.empty() ? 0 : static_cast<std::size_t>(rec.states[0].size());
  for (std::size_t j = 0; j < width; ++j)
    header.push_back(rec.kind == StateKind::Grid ? "u_" + std::to_string(j)
                                                 : "c_" + std::to_string(j + 1));
  CsvWriter csv(out, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    row.assign({rec.times[k], rec.theta[k], rec.norm_h[k], rec.norm_hm1[k]});
    row.insert(row.end(), rec.states[k].data(), rec.states[k].data() + rec.states[k].size());
    csv.row(row);
  }
}

}  // namespace amari
