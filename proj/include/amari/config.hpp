#pragma once

// Sectioned `key = value` experiment configuration.
//
//   # comment
//   [kernel]
//   family = mexican_hat_gauss
//   A = 0.5
//
// Lists are comma separated. Unknown sections or keys, duplicate keys and
// out-of-range values are errors that carry line and column.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "amari/csv.hpp"
#include "amari/errors.hpp"
#include "amari/gain.hpp"
#include "amari/grid.hpp"
#include "amari/kernel.hpp"
#include "amari/noise.hpp"

namespace amari {

struct KernelSection {
  std::string family = "gaussian";
  double scale = 1.0;
  double width = 1.0;
  double rate = 1.0;
  double m = 1.0;
  double A = 0.5;
  double s = 2.0;
  double Gamma = 0.3;
  double gamma1 = 2.0;
  double gamma2 = 1.0;
  double b = 1.0;
  std::vector<double> weights{1.0};
  std::vector<double> frequencies{1.0};
  double xi_max = 20.0;
  std::size_t n_xi = 2000;
  double tol = 1e-8;
  bool quadrature_fallback = false;
  double window = 100.0;
  bool operator==(const KernelSection&) const = default;
};

struct GridSection {
  double a = -5.0;
  double b = 5.0;
  std::size_t n = 128;
  std::string boundary = "truncated";
  bool operator==(const GridSection&) const = default;
};

struct GainSection {
  std::string family = "sigmoid";
  double c = 1.0;
  bool allow_non_lipschitz = false;
  bool operator==(const GainSection&) const = default;
};

struct NoiseSection {
  std::string mode = "spectral";
  std::string rule = "b_eq_k";
  std::vector<double> custom;
  std::uint64_t seed = 1;
  bool operator==(const NoiseSection&) const = default;
};

struct SimSection {
  double alpha = 1.0;
  double epsilon = 0.1;
  double dt = 0.01;
  double T = 10.0;
  /// constant: u0 = u0_value everywhere; modes: u0 = sum_i u0_modes[i] e_{i+1}.
  std::string u0 = "modes";
  double u0_value = 0.0;
  std::vector<double> u0_modes{1.0};
  std::size_t record_every = 10;
  std::string backend = "auto";
  double clamp = 1e3;
  double rel_tol = 1e-10;
  double neg_tol = 1e-8;
  double membership_tol = 1e-6;
  std::size_t members = 1;
  double switch_lower = -0.5;
  double switch_upper = 0.5;
  std::size_t ds_halvings = 3;
  std::size_t ds_fine_factor = 8;
  bool operator==(const SimSection&) const = default;
};

struct GalerkinSection {
  std::vector<std::size_t> n_list{1, 2, 4, 8};
  bool include_full_rank = true;
  bool operator==(const GalerkinSection&) const = default;
};

struct GibbsSection {
  std::size_t modes = 2;
  std::size_t mcmc_steps = 200000;
  double step_scale = 1.0;
  std::size_t burn_in = 20000;
  double sde_T = 2000.0;
  double sde_burn_in_time = 50.0;
  std::size_t batches = 100;
  std::size_t repetitions = 1;
  bool operator==(const GibbsSection&) const = default;
};

struct OutputSection {
  std::string prefix;
  bool write_states = true;
  bool operator==(const OutputSection&) const = default;
};

struct SourceLocation {
  std::string source;
  std::size_t line = 0;
  std::size_t column = 0;

  std::string str() const {
    return source + ":" + std::to_string(line) + ":" + std::to_string(column);
  }
};

struct ExperimentConfig {
  KernelSection kernel;
  GridSection grid;
  GainSection gain;
  NoiseSection noise;
  SimSection sim;
  GalerkinSection galerkin;
  GibbsSection gibbs;
  OutputSection output;

  /// Where each `section.key` was last set; not part of the value.
  std::map<std::string, SourceLocation> locations;

  bool operator==(const ExperimentConfig& o) const {
    return kernel == o.kernel && grid == o.grid && gain == o.gain && noise == o.noise &&
           sim == o.sim && galerkin == o.galerkin && gibbs == o.gibbs && output == o.output;
  }
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view s) {
  s = trim(s);
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw Error(ErrorKind::ParseError, "not a nonnegative integer: '" + std::string(s) + "'");
  return v;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorKind::ParseError, "not a boolean: '" + std::string(s) + "'");
}

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "," : "") + parts[i];
  return out;
}

struct Key {
  std::string section;
  std::string name;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class Section>
using SectionOf = Section ExperimentConfig::*;

template <class Section>
Key real_key(std::string section, std::string name, SectionOf<Section> sec, double Section::*field) {
  return {std::move(section), std::move(name),
          [=](ExperimentConfig& c, std::string_view v) {
            const double x = parse_double(v);
            if (!std::isfinite(x)) throw Error(ErrorKind::RangeError, "value must be finite");
            (c.*sec).*field = x;
          },
          [=](const ExperimentConfig& c) { return format_double((c.*sec).*field); }};
}

template <class Section, class Int>
Key int_key(std::string section, std::string name, SectionOf<Section> sec, Int Section::*field) {
  return {std::move(section), std::move(name),
          [=](ExperimentConfig& c, std::string_view v) { (c.*sec).*field = parse_int<Int>(v); },
          [=](const ExperimentConfig& c) { return std::to_string((c.*sec).*field); }};
}

template <class Section>
Key bool_key(std::string section, std::string name, SectionOf<Section> sec, bool Section::*field) {
  return {std::move(section), std::move(name),
          [=](ExperimentConfig& c, std::string_view v) { (c.*sec).*field = parse_bool(v); },
          [=](const ExperimentConfig& c) { return std::string((c.*sec).*field ? "true" : "false"); }};
}

template <class Section>
Key choice_key(std::string section, std::string name, SectionOf<Section> sec,
               std::string Section::*field, std::vector<std::string> allowed) {
  return {std::move(section), std::move(name),
          [=](ExperimentConfig& c, std::string_view v) {
            const std::string s(trim(v));
            bool ok = allowed.empty();
            for (const auto& a : allowed) ok = ok || a == s;
            if (!ok)
              throw Error(ErrorKind::RangeError,
                          "'" + s + "' is not one of {" + join(allowed) + "}");
            (c.*sec).*field = s;
          },
          [=](const ExperimentConfig& c) { return (c.*sec).*field; }};
}

template <class Section>
Key real_list_key(std::string section, std::string name, SectionOf<Section> sec,
                  std::vector<double> Section::*field) {
  return {std::move(section), std::move(name),
          [=](ExperimentConfig& c, std::string_view v) {
            std::vector<double> out;
            for (auto item : split_list(v)) out.push_back(parse_double(item));
            (c.*sec).*field = std::move(out);
          },
          [=](const ExperimentConfig& c) {
            std::vector<std::string> parts;
            for (double x : (c.*sec).*field) parts.push_back(format_double(x));
            return join(parts);
          }};
}

template <class Section>
Key size_list_key(std::string section, std::string name, SectionOf<Section> sec,
                  std::vector<std::size_t> Section::*field) {
  return {std::move(section), std::move(name),
          [=](ExperimentConfig& c, std::string_view v) {
            std::vector<std::size_t> out;
            for (auto item : split_list(v)) out.push_back(parse_int<std::size_t>(item));
            (c.*sec).*field = std::move(out);
          },
          [=](const ExperimentConfig& c) {
            std::vector<std::string> parts;
            for (auto x : (c.*sec).*field) parts.push_back(std::to_string(x));
            return join(parts);
          }};
}

inline const std::vector<Key>& keys() {
  using C = ExperimentConfig;
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    const SectionOf<KernelSection> ks = &C::kernel;
    k.push_back(choice_key("kernel", "family", ks, &KernelSection::family,
                           {"gaussian", "exponential", "cauchy_exp", "laplace", "sinc", "cosine_sum",
                            "mexican_hat_poly", "mexican_hat_gauss", "mexican_hat_exp", "wizard_hat",
                            "damped_cosine", "zero"}));
    k.push_back(real_key("kernel", "scale", ks, &KernelSection::scale));
    k.push_back(real_key("kernel", "width", ks, &KernelSection::width));
    k.push_back(real_key("kernel", "rate", ks, &KernelSection::rate));
    k.push_back(real_key("kernel", "m", ks, &KernelSection::m));
    k.push_back(real_key("kernel", "A", ks, &KernelSection::A));
    k.push_back(real_key("kernel", "s", ks, &KernelSection::s));
    k.push_back(real_key("kernel", "Gamma", ks, &KernelSection::Gamma));
    k.push_back(real_key("kernel", "gamma1", ks, &KernelSection::gamma1));
    k.push_back(real_key("kernel", "gamma2", ks, &KernelSection::gamma2));
    k.push_back(real_key("kernel", "b", ks, &KernelSection::b));
    k.push_back(real_list_key("kernel", "weights", ks, &KernelSection::weights));
    k.push_back(real_list_key("kernel", "frequencies", ks, &KernelSection::frequencies));
    k.push_back(real_key("kernel", "xi_max", ks, &KernelSection::xi_max));
    k.push_back(int_key("kernel", "n_xi", ks, &KernelSection::n_xi));
    k.push_back(real_key("kernel", "tol", ks, &KernelSection::tol));
    k.push_back(bool_key("kernel", "quadrature_fallback", ks, &KernelSection::quadrature_fallback));
    k.push_back(real_key("kernel", "window", ks, &KernelSection::window));

    const SectionOf<GridSection> gs = &C::grid;
    k.push_back(real_key("grid", "a", gs, &GridSection::a));
    k.push_back(real_key("grid", "b", gs, &GridSection::b));
    k.push_back(int_key("grid", "n", gs, &GridSection::n));
    k.push_back(choice_key("grid", "boundary", gs, &GridSection::boundary, {"truncated", "periodic"}));

    const SectionOf<GainSection> fs = &C::gain;
    k.push_back(choice_key("gain", "family", fs, &GainSection::family,
                           {"sigmoid", "tanh", "cubic", "constant", "zero"}));
    k.push_back(real_key("gain", "c", fs, &GainSection::c));
    k.push_back(bool_key("gain", "allow_non_lipschitz", fs, &GainSection::allow_non_lipschitz));

    const SectionOf<NoiseSection> ns = &C::noise;
    k.push_back(choice_key("noise", "mode", ns, &NoiseSection::mode, {"white", "spectral"}));
    k.push_back(choice_key("noise", "rule", ns, &NoiseSection::rule, {"b_eq_k", "b_sq_eq_k", "custom"}));
    k.push_back(real_list_key("noise", "custom", ns, &NoiseSection::custom));
    k.push_back(int_key("noise", "seed", ns, &NoiseSection::seed));

    const SectionOf<SimSection> ss = &C::sim;
    k.push_back(real_key("sim", "alpha", ss, &SimSection::alpha));
    k.push_back(real_key("sim", "epsilon", ss, &SimSection::epsilon));
    k.push_back(real_key("sim", "dt", ss, &SimSection::dt));
    k.push_back(real_key("sim", "T", ss, &SimSection::T));
    k.push_back(choice_key("sim", "u0", ss, &SimSection::u0, {"constant", "modes"}));
    k.push_back(real_key("sim", "u0_value", ss, &SimSection::u0_value));
    k.push_back(real_list_key("sim", "u0_modes", ss, &SimSection::u0_modes));
    k.push_back(int_key("sim", "record_every", ss, &SimSection::record_every));
    k.push_back(choice_key("sim", "backend", ss, &SimSection::backend,
                           {"auto", "dense", "fft", "spectral"}));
    k.push_back(real_key("sim", "clamp", ss, &SimSection::clamp));
    k.push_back(real_key("sim", "rel_tol", ss, &SimSection::rel_tol));
    k.push_back(real_key("sim", "neg_tol", ss, &SimSection::neg_tol));
    k.push_back(real_key("sim", "membership_tol", ss, &SimSection::membership_tol));
    k.push_back(int_key("sim", "members", ss, &SimSection::members));
    k.push_back(real_key("sim", "switch_lower", ss, &SimSection::switch_lower));
    k.push_back(real_key("sim", "switch_upper", ss, &SimSection::switch_upper));
    k.push_back(int_key("sim", "ds_halvings", ss, &SimSection::ds_halvings));
    k.push_back(int_key("sim", "ds_fine_factor", ss, &SimSection::ds_fine_factor));

    const SectionOf<GalerkinSection> ls = &C::galerkin;
    k.push_back(size_list_key("galerkin", "n_list", ls, &GalerkinSection::n_list));
    k.push_back(bool_key("galerkin", "include_full_rank", ls, &GalerkinSection::include_full_rank));

    const SectionOf<GibbsSection> bs = &C::gibbs;
    k.push_back(int_key("gibbs", "modes", bs, &GibbsSection::modes));
    k.push_back(int_key("gibbs", "mcmc_steps", bs, &GibbsSection::mcmc_steps));
    k.push_back(real_key("gibbs", "step_scale", bs, &GibbsSection::step_scale));
    k.push_back(int_key("gibbs", "burn_in", bs, &GibbsSection::burn_in));
    k.push_back(real_key("gibbs", "sde_T", bs, &GibbsSection::sde_T));
    k.push_back(real_key("gibbs", "sde_burn_in_time", bs, &GibbsSection::sde_burn_in_time));
    k.push_back(int_key("gibbs", "batches", bs, &GibbsSection::batches));
    k.push_back(int_key("gibbs", "repetitions", bs, &GibbsSection::repetitions));

    const SectionOf<OutputSection> os = &C::output;
    k.push_back(choice_key("output", "prefix", os, &OutputSection::prefix, {}));
    k.push_back(bool_key("output", "write_states", os, &OutputSection::write_states));
    return k;
  }();
  return table;
}

inline const Key* find_key(std::string_view section, std::string_view name) {
  for (const auto& k : keys())
    if (k.section == section && k.name == name) return &k;
  return nullptr;
}

inline bool known_section(std::string_view section) {
  for (const auto& k : keys())
    if (k.section == section) return true;
  return false;
}

inline Error located(const SourceLocation& loc, ErrorKind kind, const std::string& message) {
  return Error(kind, loc.str() + ": " + message);
}

inline void assign(ExperimentConfig& cfg, const Key& key, std::string_view value,
                   const SourceLocation& loc) {
  try {
    key.set(cfg, value);
  } catch (const Error& e) {
    throw located(loc, e.kind(), key.section + "." + key.name + ": " + e.what());
  }
  cfg.locations[key.section + "." + key.name] = loc;
}

}  // namespace config_detail

/// Checks ranges that involve more than one key, reporting the location of
/// the offending key when it was set explicitly.
inline void validate_config(const ExperimentConfig& cfg) {
  auto fail_at = [&](const std::string& key, const std::string& message) {
    const auto it = cfg.locations.find(key);
    const std::string where = it != cfg.locations.end() ? it->second.str() + ": " : std::string();
    throw Error(ErrorKind::RangeError, where + key + ": " + message);
  };
  auto check = [&](bool ok, const std::string& key, const std::string& message) {
    if (!ok) fail_at(key, message);
  };
  const auto& k = cfg.kernel;
  check(k.scale > 0.0, "kernel.scale", "must be > 0");
  if (k.family == "gaussian") check(k.width > 0.0, "kernel.width", "must be > 0");
  if (k.family == "exponential") check(k.rate > 0.0, "kernel.rate", "must be > 0");
  if (k.family == "cauchy_exp" || k.family == "laplace") check(k.m >= 0.0, "kernel.m", "must be >= 0");
  if (k.family == "mexican_hat_gauss") {
    check(k.A > 0.0 && k.A < 1.0, "kernel.A", "must lie in (0, 1)");
    check(k.s > 1.0, "kernel.s", "must be > 1");
  }
  if (k.family == "mexican_hat_exp") {
    check(k.Gamma > 0.0 && k.Gamma < 1.0, "kernel.Gamma", "must lie in (0, 1)");
    check(k.gamma2 > 0.0, "kernel.gamma2", "must be > 0");
    check(k.gamma1 > k.gamma2, "kernel.gamma1", "must exceed gamma2");
  }
  if (k.family == "damped_cosine") check(k.b > 0.0, "kernel.b", "must be > 0");
  if (k.family == "cosine_sum") {
    check(!k.weights.empty() && k.weights.size() == k.frequencies.size(), "kernel.frequencies",
          "needs as many entries as kernel.weights");
    for (double w : k.weights) check(w >= 0.0, "kernel.weights", "entries must be >= 0");
  }
  check(k.xi_max > 0.0, "kernel.xi_max", "must be > 0");
  check(k.n_xi >= 2, "kernel.n_xi", "must be >= 2");
  check(k.tol >= 0.0, "kernel.tol", "must be >= 0");
  check(k.window > 0.0, "kernel.window", "must be > 0");

  check(cfg.grid.a < cfg.grid.b, "grid.b", "must exceed grid.a");
  check(cfg.grid.n >= 1, "grid.n", "must be >= 1");

  for (double v : cfg.noise.custom) check(v >= 0.0, "noise.custom", "entries must be >= 0");

  const auto& s = cfg.sim;
  check(s.alpha > 0.0, "sim.alpha", "must be > 0");
  check(s.epsilon >= 0.0, "sim.epsilon", "must be >= 0");
  check(s.dt > 0.0, "sim.dt", "must be > 0");
  check(s.dt < 2.0 / s.alpha, "sim.dt", "must be < 2 / alpha");
  check(s.T > 0.0, "sim.T", "must be > 0");
  check(s.record_every >= 1, "sim.record_every", "must be >= 1");
  check(s.clamp > 0.0, "sim.clamp", "must be > 0");
  check(s.rel_tol >= 0.0, "sim.rel_tol", "must be >= 0");
  check(s.neg_tol >= 0.0, "sim.neg_tol", "must be >= 0");
  check(s.membership_tol >= 0.0, "sim.membership_tol", "must be >= 0");
  check(s.members >= 1, "sim.members", "must be >= 1");
  check(s.switch_lower < s.switch_upper, "sim.switch_upper", "must exceed sim.switch_lower");
  check(s.ds_fine_factor >= 2, "sim.ds_fine_factor", "must be >= 2");
  check(s.ds_halvings <= 10, "sim.ds_halvings", "must be <= 10");

  for (auto N : cfg.galerkin.n_list) check(N >= 1, "galerkin.n_list", "entries must be >= 1");

  const auto& g = cfg.gibbs;
  check(g.modes >= 1, "gibbs.modes", "must be >= 1");
  check(g.mcmc_steps >= 1, "gibbs.mcmc_steps", "must be >= 1");
  check(g.burn_in < g.mcmc_steps, "gibbs.burn_in", "must be below gibbs.mcmc_steps");
  check(g.step_scale > 0.0, "gibbs.step_scale", "must be > 0");
  check(g.sde_T > 0.0, "gibbs.sde_T", "must be > 0");
  check(g.sde_burn_in_time >= 0.0 && g.sde_burn_in_time < g.sde_T, "gibbs.sde_burn_in_time",
        "must lie in [0, gibbs.sde_T)");
  check(g.batches >= 2, "gibbs.batches", "must be >= 2");
  check(g.repetitions >= 1, "gibbs.repetitions", "must be >= 1");
}

/// Parses `text` on top of `base`. `source` names the input in diagnostics.
inline ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base,
                                     const std::string& source = "<config>") {
  using namespace config_detail;
  ExperimentConfig cfg = base;
  std::map<std::string, SourceLocation> seen;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view raw = text.substr(pos, end == std::string_view::npos ? end : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    const auto hash = raw.find('#');
    std::string_view line = hash == std::string_view::npos ? raw : raw.substr(0, hash);
    const std::size_t indent = line.find_first_not_of(" \t");
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t col = indent + 1;
    const SourceLocation here{source, line_no, col};

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw located(here, ErrorKind::ParseError, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_section(section))
        throw located(here, ErrorKind::UnknownKey, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw located(here, ErrorKind::ParseError, "expected `key = value`");
    if (section.empty())
      throw located(here, ErrorKind::ParseError, "key outside of any [section]");
    const std::string name(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (name.empty()) throw located(here, ErrorKind::ParseError, "empty key");
    const std::string full = section + "." + name;
    const Key* key = find_key(section, name);
    if (key == nullptr) throw located(here, ErrorKind::UnknownKey, "unknown key " + full);
    if (const auto it = seen.find(full); it != seen.end())
      throw located(here, ErrorKind::ParseError,
                    "duplicate key " + full + " (first set at " + it->second.str() + ")");
    seen[full] = here;
    assign(cfg, *key, value, here);
  }
  validate_config(cfg);
  return cfg;
}

inline ExperimentConfig parse_config(std::string_view text) {
  return parse_config(text, ExperimentConfig{});
}

/// Applies `section.key=value`.
inline void apply_override(ExperimentConfig& cfg, std::string_view assignment,
                           const std::string& source = "<override>") {
  using namespace config_detail;
  const SourceLocation here{source, 1, 1};
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw located(here, ErrorKind::ParseError, "override must look like section.key=value");
  const std::string full(trim(assignment.substr(0, eq)));
  const auto dot = full.find('.');
  if (dot == std::string::npos)
    throw located(here, ErrorKind::ParseError, "override key must be section.key");
  const Key* key = find_key(full.substr(0, dot), full.substr(dot + 1));
  if (key == nullptr) throw located(here, ErrorKind::UnknownKey, "unknown key " + full);
  assign(cfg, *key, trim(assignment.substr(eq + 1)), here);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string section;
  for (const auto& k : config_detail::keys()) {
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.name << " = " << k.get(cfg) << '\n';
  }
  return out.str();
}

/// Preset reproducing the metastability experiment: cubic gain, normalized
/// Gaussian kernel of width 0.05, alpha = 0.1, epsilon = 0.5, white noise,
/// u0 = 0.8 on [-20, 20] with n = 400.
inline ExperimentConfig fig1_preset() {
  ExperimentConfig cfg;
  cfg.kernel.family = "gaussian";
  cfg.kernel.width = 0.05;
  cfg.kernel.scale = 1.0 / (0.05 * std::sqrt(2.0 * std::numbers::pi));
  cfg.grid = {-20.0, 20.0, 400, "truncated"};
  cfg.gain = {"cubic", 1.0, true};
  cfg.noise.mode = "white";
  cfg.noise.seed = 1;
  cfg.sim.alpha = 0.1;
  cfg.sim.epsilon = 0.5;
  cfg.sim.dt = 0.01;
  cfg.sim.T = 2500.0;
  cfg.sim.u0 = "constant";
  cfg.sim.u0_value = 0.8;
  cfg.sim.record_every = 100;
  cfg.sim.members = 5;
  return cfg;
}

// Builders from a validated config.

inline KernelSpec make_kernel(const ExperimentConfig& cfg) {
  const auto& k = cfg.kernel;
  using namespace kernels;
  KernelFamily family = Zero{};
  if (k.family == "gaussian") family = Gaussian{k.width};
  else if (k.family == "exponential") family = Exponential{k.rate};
  else if (k.family == "cauchy_exp") family = CauchyExp{k.m};
  else if (k.family == "laplace") family = Laplace{k.m};
  else if (k.family == "sinc") family = Sinc{};
  else if (k.family == "cosine_sum") family = CosineSum{k.weights, k.frequencies};
  else if (k.family == "mexican_hat_poly") family = MexicanHatPoly{};
  else if (k.family == "mexican_hat_gauss") family = MexicanHatGauss{k.A, k.s};
  else if (k.family == "mexican_hat_exp") family = MexicanHatExp{k.Gamma, k.gamma1, k.gamma2};
  else if (k.family == "wizard_hat") family = WizardHat{};
  else if (k.family == "damped_cosine") family = DampedCosine{k.b};
  return KernelSpec(std::move(family), k.scale);
}

inline Grid make_grid(const ExperimentConfig& cfg) {
  return Grid(cfg.grid.a, cfg.grid.b, cfg.grid.n,
              cfg.grid.boundary == "periodic" ? Boundary::Periodic : Boundary::Truncated);
}

inline GainSpec make_gain(const ExperimentConfig& cfg) {
  const auto& g = cfg.gain.family;
  if (g == "tanh") return GainSpec::tanh();
  if (g == "cubic") return GainSpec::cubic();
  if (g == "constant") return GainSpec::constant(cfg.gain.c);
  if (g == "zero") return GainSpec::zero();
  return GainSpec::sigmoid();
}

inline NoiseSpec make_noise(const ExperimentConfig& cfg) {
  NoiseSpec n;
  n.mode = cfg.noise.mode == "white" ? NoiseMode::WhiteOnGrid : NoiseMode::SpectralDiagonal;
  n.rule = cfg.noise.rule == "b_sq_eq_k" ? NoiseRule::B_sq_eq_K
           : cfg.noise.rule == "custom"  ? NoiseRule::Custom
                                         : NoiseRule::B_eq_K;
  n.custom = cfg.noise.custom;
  n.seed = cfg.noise.seed;
  return n;
}

inline OperatorBackend make_backend(const ExperimentConfig& cfg) {
  const auto& b = cfg.sim.backend;
  if (b == "dense") return OperatorBackend::Dense;
  if (b == "fft") return OperatorBackend::Fft;
  if (b == "spectral") return OperatorBackend::Spectral;
  return OperatorBackend::Auto;
}

}  // namespace amari
