#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amari/amari.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Stochastic neural field toolkit"};
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool print_config = false;

  app.add_option("subcommand", subcommand, "Pipeline to run")
      ->required()
      ->check(CLI::IsMember(amari::subcommand_names()));
  app.add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Noise seed (overrides noise.seed)");
  app.add_option("--override", overrides, "section.key=value, applied after the config file");
  app.add_flag("--print-config", print_config, "Print the effective config and exit");
  CLI11_PARSE(app, argc, argv);

  amari::ExperimentConfig cfg;
  try {
    cfg = amari::base_config(subcommand);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw amari::Error(amari::ErrorKind::IoError, "cannot read " + config_path);
      std::stringstream text;
      text << in.rdbuf();
      cfg = amari::parse_config(text.str(), cfg, config_path);
    }
    for (std::size_t i = 0; i < overrides.size(); ++i)
      amari::apply_override(cfg, overrides[i], "--override[" + std::to_string(i) + "]");
    if (seed) cfg.noise.seed = *seed;
    amari::validate_config(cfg);
  } catch (const amari::Error& e) {
    nlohmann::ordered_json j;
    j["status"] = "error";
    j["subcommand"] = subcommand;
    j["kind"] = std::string(amari::to_string(e.kind()));
    j["message"] = e.what();
    std::cerr << j.dump() << '\n';
    return 1;
  }
  if (print_config) {
    std::cout << amari::serialize_config(cfg);
    return 0;
  }
  return amari::run_subcommand(subcommand, cfg, out_dir, std::cerr);
}
