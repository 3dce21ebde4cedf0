// Acceptance gate. One [PASS]/[FAIL] line per criterion; exit status is 0
// only when every selected criterion passes.
//
//   amari_acceptance [--criterion k]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"

using namespace amari;
using namespace amari::kernels;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  const char* label;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Configuration {
  std::string name;
  KernelSpec kernel;
  GainSpec gain;
};

std::vector<Configuration> gradient_configurations() {
  std::vector<Configuration> out;
  for (const auto& [kname, kernel] : {std::pair{"gaussian", KernelSpec(Gaussian{1.0})},
                                      std::pair{"exponential", KernelSpec(Exponential{1.0})}})
    for (const auto& [gname, gain] :
         {std::pair{"sigmoid", GainSpec::sigmoid()}, std::pair{"tanh", GainSpec::tanh()}})
      out.push_back({std::string(kname) + "/" + gname, kernel, gain});
  return out;
}

// 1. Central differences of Theta against <grad Theta(u), v>_{-1}.
Outcome gradient_structure() {
  const Grid grid(-5.0, 5.0, 128);
  const double t = 1e-4, alpha = 1.0;
  double worst = 0.0;
  std::size_t min_rank = std::numeric_limits<std::size_t>::max();
  for (const auto& c : gradient_configurations()) {
    const auto dec = spectral_decompose(c.kernel, grid);
    min_rank = std::min(min_rank, dec.rank());
    const std::size_t modes = std::min<std::size_t>(dec.rank(), 8);
    std::mt19937_64 rng(2024);
    for (int pair = 0; pair < 50; ++pair) {
      const Field u = oracle::random_in_S(dec, modes, rng);
      const Field v = oracle::random_in_S(dec, modes, rng);
      auto theta = [&](const Field& w) { return theta_functional(dec, c.gain, alpha, w); };
      const double fd = fd_directional(theta, u, v, t);
      const double exact = inner_hminus1(dec, grad_theta(dec, c.gain, alpha, u), v);
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
  }
  return {worst <= 1e-5 && min_rank >= 8,
          "max relative error " + fmt(worst) + " over 4 x 50 pairs, min rank " +
              std::to_string(min_rank)};
}

// 2. Theta is nonincreasing along the deterministic flow.
Outcome energy_decay() {
  std::vector<Configuration> configs = gradient_configurations();
  configs.push_back({"mexican_hat_gauss/sigmoid", KernelSpec(MexicanHatGauss{0.5, 2.0}),
                     GainSpec::sigmoid()});
  configs.push_back({"wizard_hat/tanh", KernelSpec(WizardHat{}), GainSpec::tanh()});
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t runs = 0;
  for (const auto& c : configs)
    for (auto boundary : {Boundary::Truncated, Boundary::Periodic}) {
      // Minimal-image wrapping needs J(L/2) negligible to stay nonnegative definite.
      const bool periodic = boundary == Boundary::Periodic;
      const Grid grid(periodic ? -20.0 : -5.0, periodic ? 20.0 : 5.0, periodic ? 256 : 128, boundary);
      const auto dec = spectral_decompose(c.kernel, grid);
      std::mt19937_64 rng(7);
      SimConfig cfg;
      cfg.u0 = oracle::random_in_S(dec, std::min<std::size_t>(dec.rank(), 8), rng, 2.0).values;
      cfg.epsilon = 0.0;
      cfg.dt = 0.01;
      cfg.T = 10.0;
      const auto rec = em_simulate_full(IntegralOperator::spectral(dec), &dec, c.gain,
                                        NoiseSpec::spectral(NoiseRule::B_eq_K, 1), cfg);
      if (rec.steps != 1000 || rec.theta.size() != 1001) return {false, "unexpected step count"};
      for (std::size_t k = 1; k < rec.theta.size(); ++k) {
        const double increase = rec.theta[k] - rec.theta[k - 1];
        if (!std::isfinite(increase)) return {false, c.name + ": non-finite energy"};
        worst = std::max(worst, increase);
      }
      ++runs;
    }
  return {worst <= 1e-12,
          "max step increase " + fmt(worst) + " over " + std::to_string(runs) + " runs x 1000 steps"};
}

// 3. Galerkin error against the full-grid run on a shared noise path.
Outcome galerkin_convergence() {
  const Grid grid(-5.0, 5.0, 128);
  const auto dec = spectral_decompose(KernelSpec(Gaussian{1.0}), grid);
  SimConfig cfg;
  cfg.u0 = dec.synthesize(Eigen::Vector3d(1.0, 0.5, -0.3));
  cfg.epsilon = 0.2;
  cfg.dt = 0.01;
  cfg.T = 5.0;
  bool pass = true;
  std::ostringstream detail;
  for (auto rule : {NoiseRule::B_eq_K, NoiseRule::B_sq_eq_K}) {
    const auto rows = convergence_table(dec, GainSpec::sigmoid(), NoiseSpec::spectral(rule, 31), cfg,
                                        {1, 2, 4, 8, dec.rank()});
    detail << to_string(rule) << ":";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      detail << " N=" << rows[k].N << " " << fmt(rows[k].sup_error);
      if (k > 0 && rows[k].sup_error > rows[k - 1].sup_error + 1e-12) pass = false;
    }
    if (rows.back().sup_error > 1e-8) pass = false;
    detail << "; ";
  }
  return {pass, detail.str()};
}

// 4. First-order agreement of the pathwise integrator.
Outcome doss_sussmann() {
  const Grid grid(-5.0, 5.0, 128);
  const auto dec = spectral_decompose(KernelSpec(Gaussian{1.0}), grid);
  SimConfig cfg;
  cfg.u0 = dec.synthesize(Eigen::Vector2d(0.8, 0.4));
  cfg.epsilon = 0.3;
  cfg.dt = 0.04;
  cfg.T = 2.0;
  bool pass = true;
  std::ostringstream detail;
  const std::vector<std::pair<std::string, GainSpec>> gains{{"tanh", GainSpec::tanh()},
                                                            {"sigmoid", GainSpec::sigmoid()}};
  for (const auto& [name, gain] : gains) {
    const auto study = doss_sussmann_study(IntegralOperator::make(KernelSpec(Gaussian{1.0}), grid), dec,
                                           gain, NoiseSpec::spectral(NoiseRule::B_eq_K, 12), cfg, 3, 8);
    detail << name << " ratios";
    for (double r : study.ratios) {
      detail << " " << fmt(r);
      if (!(r >= 1.5 && r <= 3.0)) pass = false;
    }
    if (study.ratios.size() != 3) pass = false;
    detail << "; ";
  }
  return {pass, detail.str()};
}

// 5. Ensembles stay in S and the mean sup H_{-1} norm grows with epsilon.
Outcome hminus1_invariance() {
  const Grid grid(-5.0, 5.0, 128);
  const KernelSpec kernel(Gaussian{1.0});
  const auto dec = spectral_decompose(kernel, grid);
  const auto K = IntegralOperator::make(kernel, grid);
  SimConfig cfg;
  cfg.u0 = dec.synthesize(Eigen::Vector3d(1.0, -0.5, 0.25));
  cfg.dt = 0.01;
  cfg.T = 10.0;
  cfg.record_every = 1;
  std::vector<double> means;
  for (double eps : {0.0, 0.1, 0.2}) {
    cfg.epsilon = eps;
    std::vector<double> sups;
    try {
      sups = run_ensemble(20, 505, [&](std::size_t, std::uint64_t seed) {
        const auto rec = em_simulate_full(K, &dec, GainSpec::sigmoid(),
                                          NoiseSpec::spectral(NoiseRule::B_eq_K, seed), cfg);
        return invariance_monitor(dec, rec).sup_norm_sq;
      });
    } catch (const Error& e) {
      return {false, "eps = " + fmt(eps) + ": " + e.what()};
    }
    double sum = 0.0;
    for (double s : sups) sum += s;
    means.push_back(sum / static_cast<double>(sups.size()));
  }
  const bool monotone = means[0] <= means[1] && means[1] <= means[2];
  return {monotone, "mean sup ||U||_{-1}^2 at eps 0, 0.1, 0.2: " + fmt(means[0]) + ", " +
                        fmt(means[1]) + ", " + fmt(means[2])};
}

// 6. MCMC on exp(-2 Theta / eps^2) against long-run Galerkin SDE moments.
Outcome gibbs_invariance() {
  const Grid grid(-5.0, 5.0, 64);
  auto dec = std::make_shared<const SpectralDecomposition>(
      spectral_decompose(KernelSpec(Gaussian{1.0}), grid));
  const double alpha = 1.0, eps = 0.5;
  const std::size_t N = 2, batches = 100;
  const GibbsTarget target(dec, GainSpec::sigmoid(), alpha, eps, N);
  const NoiseSpec noise = NoiseSpec::spectral(NoiseRule::B_sq_eq_K, 0);
  SimConfig cfg;
  cfg.u0 = Eigen::VectorXd::Zero(grid.size());
  cfg.epsilon = eps;
  cfg.alpha = alpha;
  cfg.dt = 0.01;
  cfg.T = 2000.0;
  cfg.record_every = 10;
  const std::size_t sde_burn_in = 500;  // snapshots, 50 time units

  const auto reports = run_ensemble(20, 6006, [&](std::size_t, std::uint64_t seed) {
    const auto mcmc = rw_metropolis(target, 200000, 1.0, derive_seed(seed, 0), 20000);
    const auto traj = galerkin_simulate(*dec, GainSpec::sigmoid(), noise.with_seed(derive_seed(seed, 1)),
                                        cfg, N);
    return compare_measures(mcmc, ergodic_moments(traj, sde_burn_in, batches), batches, 3.0);
  });
  std::size_t passed = 0;
  double worst = 0.0;
  for (const auto& r : reports) {
    passed += r.pass ? 1 : 0;
    worst = std::max(worst, r.max_abs_z);
  }

  const GibbsTarget flat(dec, GainSpec::zero(), alpha, eps, N);
  const auto m = sample_moments(rw_metropolis(flat, 200000, 1.0, 77, 20000).samples, batches);
  bool zero_ok = true;
  std::ostringstream zero_detail;
  for (std::size_t i = 0; i < N; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double ref = eps * eps * dec->lambda(i) / (2.0 * alpha);
    const double z = (m.var(k) - ref) / m.se_var(k);
    zero_detail << " z_" << i + 1 << "=" << fmt(z);
    if (std::abs(z) > 3.0) zero_ok = false;
  }
  return {passed >= 19 && zero_ok, std::to_string(passed) + "/20 repetitions with max|z| <= 3 (worst " +
                                       fmt(worst) + "); zero-gain variance" + zero_detail.str()};
}

// 7. Analytic thresholds, numeric Bochner agreement and Gram checks.
Outcome kernel_classification() {
  const double r2 = std::sqrt(2.0);
  std::size_t analytic_mismatch = 0, numeric_mismatch = 0, compared = 0, banded = 0;
  BochnerOptions opts;
  opts.xi_max = 40.0;
  opts.n_xi = 4000;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double A = (i + 0.5) / 20.0;
      const double s = 1.0 + 3.0 * (j + 1) / 20.0;
      const KernelSpec spec(MexicanHatGauss{A, s});
      const bool nnd = s >= r2 && s <= r2 / A;
      const Verdict expected = nnd ? Verdict::NonnegativeDefinite : Verdict::Indefinite;
      if (classify_kernel(spec).verdict != expected) ++analytic_mismatch;
      if (std::abs(s - r2) <= 1e-3 || std::abs(s - r2 / A) <= 1e-3) {
        ++banded;
        continue;
      }
      ++compared;
      if (bochner_numeric_check(spec, opts).verdict != expected) ++numeric_mismatch;
    }
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double Gamma = (i + 0.5) / 20.0;
      const double gamma2 = 1.0;
      const double gamma1 = 1.0 + 4.0 * (j + 1) / 20.0;
      const KernelSpec spec(MexicanHatExp{Gamma, gamma1, gamma2});
      const Verdict expected =
          Gamma <= gamma2 / gamma1 ? Verdict::NonnegativeDefinite : Verdict::Indefinite;
      if (classify_kernel(spec).verdict != expected) ++analytic_mismatch;
      if (std::abs(Gamma - gamma2 / gamma1) <= 1e-3) {
        ++banded;
        continue;
      }
      ++compared;
      if (bochner_numeric_check(spec, opts).verdict != expected) ++numeric_mismatch;
    }

  const std::vector<KernelSpec> named{KernelSpec(Gaussian{1.0}), KernelSpec(WizardHat{}),
                                      KernelSpec(DampedCosine{1.0}), KernelSpec(Sinc{}),
                                      KernelSpec(CosineSum{{1.0, 0.5, 0.25}, {0.5, 1.5, 3.0}})};
  std::size_t named_fail = 0;
  double worst_gram = std::numeric_limits<double>::infinity();
  for (const auto& spec : named) {
    if (classify_kernel(spec).verdict != Verdict::NonnegativeDefinite) ++named_fail;
    for (unsigned seed = 0; seed < 5; ++seed) {
      const auto pts = oracle::uniform_points(100, -20.0, 20.0, 700 + seed);
      const double rel = gram_min_eigenvalue(spec, pts) / spec(0.0);
      worst_gram = std::min(worst_gram, rel);
      if (rel < -1e-8) ++named_fail;
    }
  }
  return {analytic_mismatch == 0 && numeric_mismatch == 0 && named_fail == 0,
          std::to_string(analytic_mismatch) + " analytic and " + std::to_string(numeric_mismatch) +
              " numeric mismatches (" + std::to_string(compared) + " compared, " +
              std::to_string(banded) + " in band); named kernels: " + std::to_string(named_fail) +
              " failures, worst relative Gram eigenvalue " + fmt(worst_gram)};
}

// 8. Metastability experiment through the fig1 pipeline.
Outcome cubic_metastability() {
  const auto dir = std::filesystem::temp_directory_path() / "amari_acceptance_fig1";
  std::filesystem::remove_all(dir);
  const ExperimentConfig cfg = fig1_preset();
  std::ostringstream err;
  if (run_subcommand("fig1", cfg, dir, err) != 0) return {false, "fig1 failed: " + err.str()};

  const KernelSpec kernel = make_kernel(cfg);
  const Grid grid = make_grid(cfg);
  const std::size_t c = grid.n() / 2;
  double row_sum = 0.0;
  for (std::size_t j = 0; j < grid.n(); ++j) row_sum += grid.h() * kernel(grid.node(c) - grid.node(j));
  const double root = oracle::bisect(
      [&](double u) { return cfg.sim.alpha * u - row_sum * oracle::cubic(u); }, 0.5, 1.5);

  const auto det = read_csv_file((dir / "fig1_deterministic.csv").string());
  const auto& last = det.rows.back();
  const double lo = last[det.column("min")], hi = last[det.column("max")];
  const double centre = last[det.column("mean")];
  const bool root_in_band = root > 0.9 && root < 1.0;
  const bool converged = lo > 0.9 && hi < 1.0 && std::abs(centre - root) < 1e-2;

  std::ifstream in(dir / "fig1_summary.json");
  const auto summary = nlohmann::json::parse(in);
  const std::size_t events = summary["total_events"].get<std::size_t>();
  std::ostringstream detail;
  detail << "oracle root " << fmt(root) << ", deterministic final [" << fmt(lo) << ", " << fmt(hi)
         << "] mean " << fmt(centre) << (converged ? " (converged)" : " (not converged)")
         << "; switching events across 5 seeds: " << events << " (mean ranges";
  for (const auto& m : summary["members"])
    detail << " [" << fmt(m["mean_min"].get<double>()) << ", " << fmt(m["mean_max"].get<double>()) << "]";
  detail << ")";
  return {root_in_band && converged && events >= 1, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: amari_acceptance [--criterion k]\n";
      return 2;
    }
  }
  const std::vector<Criterion> criteria{
      {1, "gradient_structure", 10, gradient_structure},
      {2, "energy_decay", 10, energy_decay},
      {3, "galerkin_convergence", 30, galerkin_convergence},
      {4, "doss_sussmann", 30, doss_sussmann},
      {5, "hminus1_invariance", 60, hminus1_invariance},
      {6, "gibbs_invariance", 120, gibbs_invariance},
      {7, "kernel_classification", 30, kernel_classification},
      {8, "cubic_metastability", 300, cubic_metastability},
  };
  bool all = true;
  bool matched = false;
  for (const auto& c : criteria) {
    if (only != 0 && c.number != only) continue;
    matched = true;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    all = all && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.number << " " << c.label << ": " << o.detail
              << "; runtime " << fmt(secs) << " s (limit " << fmt(c.limit_seconds) << " s"
              << (in_time ? "" : ", exceeded") << ")" << std::endl;
  }
  if (!matched) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  return all ? 0 : 1;
}
