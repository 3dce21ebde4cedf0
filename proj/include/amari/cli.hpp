#pragma once

// Subcommand pipelines behind the command-line tool. Each writes its artifacts
// into an output directory and returns 0 (success), 1 (invalid input) or 2
// (numerical failure), printing a one-line JSON reason on failure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>
#include <nlohmann/json.hpp>

#include "amari/config.hpp"
#include "amari/csv.hpp"
#include "amari/energy.hpp"
#include "amari/ergodic.hpp"
#include "amari/errors.hpp"
#include "amari/kernel.hpp"
#include "amari/operator.hpp"
#include "amari/rng.hpp"
#include "amari/sde.hpp"

namespace amari {

inline const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{
      "check-kernel", "spectrum",      "simulate", "galerkin-compare", "energy-trace",
      "doss-sussmann-compare", "gibbs-compare", "fig1"};
  return names;
}

/// The config a subcommand starts from before the config file and overrides.
inline ExperimentConfig base_config(std::string_view subcommand) {
  return subcommand == "fig1" ? fig1_preset() : ExperimentConfig{};
}

namespace cli_detail {

using json = nlohmann::ordered_json;

class Outputs {
 public:
  Outputs(const std::filesystem::path& dir, std::string prefix)
      : dir_(dir), prefix_(std::move(prefix)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  }

  std::ofstream open(const std::string& name) const {
    return open_output((dir_ / (prefix_ + name)).string());
  }

 private:
  std::filesystem::path dir_;
  std::string prefix_;
};

struct Setup {
  KernelSpec kernel;
  Grid grid;
  GainSpec gain;
  NoiseSpec noise;
  std::shared_ptr<const SpectralDecomposition> dec;
};

inline Setup setup(const ExperimentConfig& cfg) {
  KernelSpec kernel = make_kernel(cfg);
  Grid grid = make_grid(cfg);
  auto dec = std::make_shared<const SpectralDecomposition>(
      spectral_decompose(kernel, grid, cfg.sim.rel_tol, cfg.sim.neg_tol));
  return {std::move(kernel), grid, make_gain(cfg), make_noise(cfg), std::move(dec)};
}

inline IntegralOperator make_operator(const ExperimentConfig& cfg, const Setup& s) {
  const OperatorBackend backend = make_backend(cfg);
  if (backend == OperatorBackend::Spectral) return IntegralOperator::spectral(*s.dec);
  return IntegralOperator::make(s.kernel, s.grid, backend);
}

inline Eigen::VectorXd initial_state(const ExperimentConfig& cfg, const Grid& grid,
                                     const SpectralDecomposition& dec) {
  if (cfg.sim.u0 == "constant") return Eigen::VectorXd::Constant(grid.size(), cfg.sim.u0_value);
  const auto& m = cfg.sim.u0_modes;
  detail::require(m.size() <= dec.rank(), ErrorKind::RankExceeded,
                  "sim.u0_modes has " + std::to_string(m.size()) + " entries, rank is " +
                      std::to_string(dec.rank()));
  return dec.synthesize(Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size())));
}

inline SimConfig sim_config(const ExperimentConfig& cfg, Eigen::VectorXd u0) {
  SimConfig s;
  s.alpha = cfg.sim.alpha;
  s.epsilon = cfg.sim.epsilon;
  s.dt = cfg.sim.dt;
  s.T = cfg.sim.T;
  s.u0 = std::move(u0);
  s.record_every = cfg.sim.record_every;
  s.allow_non_lipschitz = cfg.gain.allow_non_lipschitz;
  s.clamp = cfg.sim.clamp;
  s.membership_tol = cfg.sim.membership_tol;
  s.validate();
  return s;
}

inline json classification_json(const Classification& c) {
  json j;
  j["verdict"] = std::string(to_string(c.verdict));
  if (c.witness) {
    j["witness"] = *c.witness;
  } else {
    j["witness"] = nullptr;
  }
  j["value"] = c.witness_value;
  return j;
}

inline json kernel_params_json(const ExperimentConfig& cfg) {
  const auto& k = cfg.kernel;
  json p;
  p["scale"] = k.scale;
  if (k.family == "gaussian") p["width"] = k.width;
  if (k.family == "exponential") p["rate"] = k.rate;
  if (k.family == "cauchy_exp" || k.family == "laplace") p["m"] = k.m;
  if (k.family == "mexican_hat_gauss") {
    p["A"] = k.A;
    p["s"] = k.s;
  }
  if (k.family == "mexican_hat_exp") {
    p["Gamma"] = k.Gamma;
    p["gamma1"] = k.gamma1;
    p["gamma2"] = k.gamma2;
  }
  if (k.family == "damped_cosine") p["b"] = k.b;
  if (k.family == "cosine_sum") {
    p["weights"] = k.weights;
    p["frequencies"] = k.frequencies;
  }
  return p;
}

inline int check_kernel(const ExperimentConfig& cfg, const Outputs& out) {
  const KernelSpec kernel = make_kernel(cfg);
  json report;
  report["family"] = cfg.kernel.family;
  report["parameters"] = kernel_params_json(cfg);
  report["analytic"] = classification_json(classify_kernel(kernel));
  BochnerOptions opts;
  opts.xi_max = cfg.kernel.xi_max;
  opts.n_xi = cfg.kernel.n_xi;
  opts.tol = cfg.kernel.tol;
  opts.quadrature_fallback = cfg.kernel.quadrature_fallback;
  opts.window = cfg.kernel.window;
  try {
    report["numeric"] = classification_json(bochner_numeric_check(kernel, opts));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AtomicSpectrum) throw;
    json j;
    j["verdict"] = nullptr;
    j["error"] = std::string(to_string(e.kind()));
    report["numeric"] = j;
  }
  json thresholds = json::object();
  for (const auto& [name, value] : analytic_thresholds(kernel).values) thresholds[name] = value;
  report["thresholds"] = thresholds;
  out.open("kernel_report.json") << report.dump(2) << '\n';
  return 0;
}

inline int spectrum(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  {
    auto f = out.open("spectrum.csv");
    write_spectrum_csv(f, *s.dec);
  }
  const std::size_t r = s.dec->rank();
  json summary;
  summary["rank"] = r;
  summary["threshold"] = s.dec->threshold();
  summary["discarded_min"] = s.dec->discarded_min();
  if (r > 0) {
    const Eigen::VectorXd b = s.noise.coefficients(*s.dec);
    const std::vector<double> lambdas(s.dec->lambdas().data(), s.dec->lambdas().data() + r);
    const std::vector<double> bs(b.data(), b.data() + r);
    const Assumption5Report a5 = check_assumption5(lambdas, bs, r);
    auto f = out.open("noise_partial_sums.csv");
    CsvWriter csv(f, {"k", "lambda", "b", "partial_sum"});
    for (std::size_t k = 0; k < r; ++k)
      csv.row({static_cast<double>(k + 1), lambdas[k], bs[k], a5.partial_sums[k]});
    summary["noise_rule"] = cfg.noise.rule;
    summary["noise_partial_sums_growing"] = a5.growing;
  }
  out.open("spectrum_summary.json") << summary.dump(2) << '\n';
  return 0;
}

inline int simulate(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  const SimConfig sim = sim_config(cfg, initial_state(cfg, s.grid, *s.dec));
  const TrajectoryRecord rec = em_simulate_full(make_operator(cfg, s), s.dec.get(), s.gain, s.noise, sim);
  auto f = out.open("trajectory.csv");
  write_trajectory_csv(f, rec);
  return 0;
}

inline int energy_trace(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  const SimConfig sim = sim_config(cfg, initial_state(cfg, s.grid, *s.dec));
  const TrajectoryRecord rec = em_simulate_full(make_operator(cfg, s), s.dec.get(), s.gain, s.noise, sim);
  auto f = out.open("energy.csv");
  CsvWriter csv(f, {"t", "theta", "norm_h", "norm_hm1"});
  for (std::size_t k = 0; k < rec.size(); ++k)
    csv.row({rec.times[k], rec.theta[k], rec.norm_h[k], rec.norm_hm1[k]});
  return 0;
}

inline int galerkin_compare(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  const SimConfig sim = sim_config(cfg, initial_state(cfg, s.grid, *s.dec));
  std::vector<std::size_t> N_list = cfg.galerkin.n_list;
  if (cfg.galerkin.include_full_rank &&
      std::find(N_list.begin(), N_list.end(), s.dec->rank()) == N_list.end())
    N_list.push_back(s.dec->rank());
  const auto rows = convergence_table(*s.dec, s.gain, s.noise, sim, N_list);
  auto f = out.open("convergence.csv");
  CsvWriter csv(f, {"N", "sup_error"});
  for (const auto& r : rows) csv.row({static_cast<double>(r.N), r.sup_error});
  return 0;
}

inline int doss_sussmann_compare(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  const SimConfig sim = sim_config(cfg, initial_state(cfg, s.grid, *s.dec));
  const DsStudy study = doss_sussmann_study(make_operator(cfg, s), *s.dec, s.gain, s.noise, sim,
                                            cfg.sim.ds_halvings, cfg.sim.ds_fine_factor);
  auto f = out.open("ds_study.csv");
  CsvWriter csv(f, {"dt", "discrepancy", "ratio"});
  for (std::size_t k = 0; k < study.dts.size(); ++k)
    csv.row({study.dts[k], study.discrepancies[k],
             k == 0 ? std::numeric_limits<double>::quiet_NaN() : study.ratios[k - 1]});
  json summary;
  summary["reference_dt"] = study.reference_dt;
  summary["constant"] = study.constant;
  summary["ratios"] = study.ratios;
  out.open("ds_summary.json") << summary.dump(2) << '\n';
  return 0;
}

inline int gibbs_compare(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  const auto& g = cfg.gibbs;
  const GibbsTarget target(s.dec, s.gain, cfg.sim.alpha, cfg.sim.epsilon, g.modes);
  SimConfig sim = sim_config(cfg, Eigen::VectorXd::Zero(s.grid.size()));
  sim.T = g.sde_T;
  sim.validate();
  const auto burn = static_cast<std::size_t>(
      std::llround(g.sde_burn_in_time / (sim.dt * static_cast<double>(sim.record_every))));

  auto moments = out.open("moments.jsonl");
  std::size_t passes = 0;
  for (std::size_t r = 0; r < g.repetitions; ++r) {
    const std::uint64_t seed = derive_seed(cfg.noise.seed, r);
    const McmcResult mcmc = rw_metropolis(target, g.mcmc_steps, g.step_scale, derive_seed(seed, 0), g.burn_in);
    const TrajectoryRecord traj =
        galerkin_simulate(*s.dec, s.gain, s.noise.with_seed(derive_seed(seed, 1)), sim, g.modes);
    const MomentReport report = compare_measures(mcmc, ergodic_moments(traj, burn, g.batches), g.batches);
    passes += report.pass ? 1 : 0;
    json extra;
    extra["repetition"] = r;
    extra["acceptance_rate"] = mcmc.acceptance_rate;
    write_moment_report_jsonl(moments, report, extra);
    if (r == 0) {
      auto f = out.open("samples.csv");
      write_samples_csv(f, mcmc);
    }
  }
  json summary;
  summary["repetitions"] = g.repetitions;
  summary["passes"] = passes;
  summary["gamma_cov"] = std::vector<double>(gamma_cov_vector(target).data(),
                                             gamma_cov_vector(target).data() + g.modes);
  out.open("gibbs_summary.json") << summary.dump(2) << '\n';
  return 0;
}

}  // namespace cli_detail

/// Positive root of alpha u = c f(u) on [lo, hi] for the homogeneous state
/// of a kernel with row sum c; bracketing must hold.
inline double homogeneous_root(const GainSpec& gain, double alpha, double row_sum, double lo,
                               double hi) {
  auto g = [&](double u) { return alpha * u - row_sum * gain.f(u); };
  detail::require(g(lo) * g(hi) < 0.0, ErrorKind::InvalidArgument, "root is not bracketed");
  boost::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.5 * (a + b);
}

namespace cli_detail {

inline int fig1(const ExperimentConfig& cfg, const Outputs& out) {
  const Setup s = setup(cfg);
  const IntegralOperator K = make_operator(cfg, s);
  const Eigen::VectorXd u0 = initial_state(cfg, s.grid, *s.dec);

  SimConfig det = sim_config(cfg, u0);
  det.epsilon = 0.0;
  const TrajectoryRecord det_rec = em_simulate_full(K, s.dec.get(), s.gain, s.noise, det);
  {
    auto f = out.open("fig1_deterministic.csv");
    CsvWriter csv(f, {"t", "mean", "min", "max", "theta"});
    for (std::size_t k = 0; k < det_rec.size(); ++k) {
      const auto& u = det_rec.states[k];
      csv.row({det_rec.times[k], u.mean(), u.minCoeff(), u.maxCoeff(), det_rec.theta[k]});
    }
  }
  const Eigen::VectorXd row_sums = K.apply(Eigen::VectorXd::Ones(s.grid.size()));
  const double center_sum = row_sums(s.grid.size() / 2);
  const Eigen::VectorXd& final_state = det_rec.states.back();

  const SimConfig sim = sim_config(cfg, u0);
  struct Member {
    std::uint64_t seed;
    std::vector<double> means;
    std::vector<SwitchEvent> events;
    TrajectoryRecord record;
  };
  const bool keep_states = cfg.output.write_states;
  auto members = run_ensemble(cfg.sim.members, cfg.noise.seed, [&](std::size_t m, std::uint64_t seed) {
    TrajectoryRecord rec = em_simulate_full(K, s.dec.get(), s.gain, s.noise.with_seed(seed), sim);
    Member out_m{seed, spatial_means(rec), {}, {}};
    out_m.events = detect_switches(rec.times, out_m.means, cfg.sim.switch_lower, cfg.sim.switch_upper);
    if (m == 0 && keep_states) out_m.record = std::move(rec);
    else out_m.record.times = std::move(rec.times);
    return out_m;
  });

  {
    auto f = out.open("fig1_means.csv");
    std::vector<std::string> header{"t"};
    for (std::size_t m = 0; m < members.size(); ++m) header.push_back("mean_" + std::to_string(m));
    CsvWriter csv(f, header);
    std::vector<double> row;
    for (std::size_t k = 0; k < members[0].means.size(); ++k) {
      row.assign(1, members[0].record.times[k]);
      for (const auto& m : members) row.push_back(m.means[k]);
      csv.row(row);
    }
  }
  if (keep_states) {
    auto f = out.open("fig1_trajectory.csv");
    write_trajectory_csv(f, members[0].record);
  }
  json summary;
  summary["row_sum_center"] = center_sum;
  try {
    summary["oracle_root"] = homogeneous_root(s.gain, cfg.sim.alpha, center_sum, 0.5, 1.5);
  } catch (const Error&) {
    summary["oracle_root"] = nullptr;
  }
  summary["deterministic_final_min"] = final_state.minCoeff();
  summary["deterministic_final_max"] = final_state.maxCoeff();
  summary["deterministic_in_band"] = final_state.minCoeff() > 0.9 && final_state.maxCoeff() < 1.0;
  {
    auto f = out.open("fig1_switches.csv");
    CsvWriter csv(f, {"member", "seed", "time", "direction"});
    json list = json::array();
    std::size_t total = 0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      for (const auto& e : members[m].events)
        csv.row({static_cast<double>(m), static_cast<double>(members[m].seed), e.time,
                 static_cast<double>(e.direction)});
      const auto [lo, hi] = std::minmax_element(members[m].means.begin(), members[m].means.end());
      json j;
      j["member"] = m;
      j["seed"] = members[m].seed;
      j["events"] = members[m].events.size();
      j["mean_min"] = *lo;
      j["mean_max"] = *hi;
      list.push_back(j);
      total += members[m].events.size();
    }
    summary["members"] = list;
    summary["total_events"] = total;
    summary["any_switch"] = total > 0;
  }
  out.open("fig1_summary.json") << summary.dump(2) << '\n';
  return 0;
}

}  // namespace cli_detail

/// Runs a subcommand; never throws. Failures print one JSON line to `err`.
inline int run_subcommand(std::string_view name, const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir, std::ostream& err) {
  using namespace cli_detail;
  auto fail = [&](int code, std::string_view kind, const std::string& message) {
    json j;
    j["status"] = "error";
    j["subcommand"] = std::string(name);
    j["kind"] = std::string(kind);
    j["message"] = message;
    err << j.dump() << '\n';
    return code;
  };
  try {
    validate_config(cfg);
    const Outputs out(out_dir, cfg.output.prefix);
    if (name == "check-kernel") return check_kernel(cfg, out);
    if (name == "spectrum") return spectrum(cfg, out);
    if (name == "simulate") return simulate(cfg, out);
    if (name == "galerkin-compare") return galerkin_compare(cfg, out);
    if (name == "energy-trace") return energy_trace(cfg, out);
    if (name == "doss-sussmann-compare") return doss_sussmann_compare(cfg, out);
    if (name == "gibbs-compare") return gibbs_compare(cfg, out);
    if (name == "fig1") return fig1(cfg, out);
    return fail(1, "UnknownSubcommand", "unknown subcommand '" + std::string(name) + "'");
  } catch (const Error& e) {
    return fail(is_numerical(e.kind()) ? 2 : 1, to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail(1, "Internal", e.what());
  }
}

}  // namespace amari
