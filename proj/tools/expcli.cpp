// Experiment-runner CLI: declarative configs in, CSV/JSON artifacts out.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qme/coupling.hpp"
#include "qme/experiment.hpp"
#include "qme/threading.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

#ifndef QMESIM_CONFIG_DIR
#define QMESIM_CONFIG_DIR "configs"
#endif

namespace {

fs::path resolve_config(const std::string& name, const std::string& configs_dir) {
  if (fs::exists(name)) return name;
  const fs::path bundled = fs::path(configs_dir) / (name + ".json");
  if (fs::exists(bundled)) return bundled;
  const fs::path bundled_as_is = fs::path(configs_dir) / name;
  if (fs::exists(bundled_as_is)) return bundled_as_is;
  throw std::runtime_error("config '" + name + "' not found (looked in " + configs_dir + ")");
}

int cmd_validate(const std::string& config, const std::string& configs_dir) {
  const auto cfg = qme::ExperimentConfig::load(resolve_config(config, configs_dir));
  const auto errors = cfg.validate();
  if (errors.empty()) {
    std::cout << "ok: " << cfg.name << "\n";
    return 0;
  }
  for (const auto& e : errors) std::cout << "error: " << e << "\n";
  return 1;
}

int cmd_list(const std::string& configs_dir) {
  std::vector<fs::path> paths;
  if (fs::exists(configs_dir))
    for (const auto& entry : fs::directory_iterator(configs_dir))
      if (entry.path().extension() == ".json") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    try {
      const auto cfg = qme::ExperimentConfig::load(p);
      if (cfg.name.empty()) continue;  // parameter files, not experiments
      std::cout << cfg.name << "  -  " << cfg.description << "\n";
    } catch (const std::exception& e) {
      std::cout << p.filename().string() << "  -  (unreadable: " << e.what() << ")\n";
    }
  }
  return 0;
}

qme::CircuitParams circuit_from_json(const json& j) {
  qme::CircuitParams p;
  p.c1_fF = j.at("c1_fF").get<double>();
  p.c2_fF = j.at("c2_fF").get<double>();
  p.c1r_fF = j.at("c1r_fF").get<double>();
  p.c2r_fF = j.at("c2r_fF").get<double>();
  p.c12_fF = j.at("c12_fF").get<double>();
  p.cr1_fF = j.at("cr1_fF").get<double>();
  p.cr2_fF = j.at("cr2_fF").get<double>();
  p.k_sign = j.value("k_sign", 1);
  p.omega1_GHz = j.at("omega1_GHz").get<double>();
  p.omega2_GHz = j.at("omega2_GHz").get<double>();
  p.omega_r_GHz = j.at("omega_r_GHz").get<double>();
  if (j.contains("coupler")) {
    qme::CouplerParams c;
    c.c1c_fF = j["coupler"].at("c1c_fF").get<double>();
    c.c2c_fF = j["coupler"].at("c2c_fF").get<double>();
    c.cc_fF = j["coupler"].at("cc_fF").get<double>();
    c.omega_c_GHz = j["coupler"].at("omega_c_GHz").get<double>();
    p.coupler = c;
  }
  return p;
}

int cmd_coupling_calc(const std::string& params_path, const std::string& sweep,
                      const std::string& sweep_out) {
  std::ifstream in(params_path);
  if (!in) throw std::runtime_error("cannot open " + params_path);
  json j = json::parse(in);
  const auto params = circuit_from_json(j);

  const auto bare = qme::bare_couplings(params);
  const auto eff = qme::effective_coupling(params);
  const auto dressed = qme::dressed_frequencies(params);

  json out;
  out["g1r_GHz"] = bare.g1r_GHz;
  out["g2r_GHz"] = bare.g2r_GHz;
  out["g12_GHz"] = bare.g12_GHz;
  out["eta"] = bare.eta;
  if (params.coupler) {
    out["g1c_GHz"] = bare.g1c_GHz;
    out["g2c_GHz"] = bare.g2c_GHz;
  }
  out["g12_eff_MHz"] = eff.total_MHz;
  out["g12_eff_resonator_MHz"] = eff.resonator_term_MHz;
  out["g12_eff_coupler_MHz"] = eff.coupler_term_MHz;
  out["g12_eff_direct_MHz"] = eff.direct_MHz;
  out["omega1_dressed_GHz"] = dressed.omega1_GHz;
  out["omega2_dressed_GHz"] = dressed.omega2_GHz;
  out["warnings"] = eff.warnings;
  std::cout << out.dump(2) << "\n";

  if (!sweep.empty()) {
    // sweep "<mode>:<lo>:<hi>:<n>" with mode in {omega_r, omega_c}
    std::stringstream ss(sweep);
    std::string mode, lo_s, hi_s, n_s;
    std::getline(ss, mode, ':');
    std::getline(ss, lo_s, ':');
    std::getline(ss, hi_s, ':');
    std::getline(ss, n_s, ':');
    const double lo = std::stod(lo_s), hi = std::stod(hi_s);
    const int n = std::stoi(n_s);
    if (n < 2 || hi <= lo) throw std::runtime_error("bad sweep range");
    if (mode == "omega_c" && !params.coupler)
      throw std::runtime_error("omega_c sweep needs coupler parameters");
    std::ostringstream csv;
    csv << "omega_GHz,g12_eff_MHz,resonator_MHz,coupler_MHz,direct_MHz\n";
    for (int i = 0; i < n; ++i) {
      auto p = params;
      const double w = lo + (hi - lo) * i / (n - 1);
      if (mode == "omega_r")
        p.omega_r_GHz = w;
      else if (mode == "omega_c")
        p.coupler->omega_c_GHz = w;
      else
        throw std::runtime_error("unknown sweep mode '" + mode + "'");
      const auto e = qme::effective_coupling(p);
      csv.precision(17);
      csv << w << ',' << e.total_MHz << ',' << e.resonator_term_MHz << ',' << e.coupler_term_MHz
          << ',' << e.direct_MHz << '\n';
    }
    std::ofstream f(sweep_out.empty() ? "coupling_sweep.csv" : sweep_out, std::ios::binary);
    f << csv.str();
    std::cerr << "sweep written to " << (sweep_out.empty() ? "coupling_sweep.csv" : sweep_out)
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setenv("OPENBLAS_NUM_THREADS", "1", 0);  // task-level threading only

  CLI::App app{"spin-1/2 quantum Mpemba experiment runner"};
  app.require_subcommand(1);

  std::string config, out_dir, configs_dir = QMESIM_CONFIG_DIR;
  int threads = 0;
  std::uint64_t seed_override = 0;
  bool have_seed_override = false;

  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config, "config name or path")->required();
  run->add_option("--out", out_dir, "output root (default: $QMESIM_OUT_ROOT or ./results)");
  run->add_option("--threads", threads, "worker threads (default: hardware)");
  run->add_option("--seed-override", seed_override, "replace every seed in the config")
      ->each([&](const std::string&) { have_seed_override = true; });
  run->add_option("--configs-dir", configs_dir, "bundled config directory");

  auto* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("--config", config, "config name or path")->required();
  validate->add_option("--configs-dir", configs_dir, "bundled config directory");

  auto* list = app.add_subcommand("list", "list bundled experiment configs");
  list->add_option("--configs-dir", configs_dir, "bundled config directory");

  std::string circuit_params, sweep_spec, sweep_out;
  auto* calc = app.add_subcommand("coupling-calc", "circuit-quantization coupling calculator");
  calc->add_option("--params", circuit_params, "circuit parameter JSON file")->required();
  calc->add_option("--sweep", sweep_spec, "sweep 'omega_r:lo:hi:n' or 'omega_c:lo:hi:n' (GHz)");
  calc->add_option("--sweep-out", sweep_out, "sweep CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return cmd_validate(config, configs_dir);
    if (app.got_subcommand(list)) return cmd_list(configs_dir);
    if (app.got_subcommand(calc)) return cmd_coupling_calc(circuit_params, sweep_spec, sweep_out);

    const auto cfg = qme::ExperimentConfig::load(resolve_config(config, configs_dir));
    qme::RunOptions options;
    options.out_root = out_dir;
    options.n_threads = threads;
    if (have_seed_override) options.seed_override = seed_override;
    const auto result = qme::run_experiment(cfg, options);
    std::cout << "wrote " << result.files.size() << " files to " << result.out_dir.string()
              << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
