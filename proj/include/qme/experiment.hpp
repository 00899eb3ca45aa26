#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qme/analysis.hpp"
#include "qme/decoherence.hpp"
#include "qme/model.hpp"
#include "qme/observables.hpp"

namespace qme {

inline constexpr const char* kVersion = "0.1.0";

// Declarative experiment description. The JSON schema (version 1) maps
// one-to-one onto these fields; validate() reports every violation with its
// field path and never executes any physics.
struct ExperimentConfig {
  int schema_version = 1;
  std::string name;
  std::string description;

  // model
  std::string preset;  // "strong_short_range" | "intermediate" | "" (file)
  double g_nn_mhz = 0.0;
  double g_lr_mhz = 0.0;
  double g_bar_mhz = 0.0;
  std::string coupling_file;
  double coupling_spread = 0.0;  // relative, 0 disables
  std::uint64_t coupling_spread_seed = 0;
  int n_qubits = 0;
  PotentialProfile potential;

  // state & grid
  StateFamily family = StateFamily::neel;
  std::vector<double> thetas;
  double t_end_ns = 0.0;
  int n_points = 0;

  std::vector<int> subsystem{0, 1, 2};
  std::vector<std::string> observables;  // ea_vn, ea_r2, ee, imbalance, q_function, level_stats
  std::string method = "eigendecomposition";

  // optional noise block
  bool has_noise = false;
  std::vector<double> t1_us, t2star_us;  // broadcast when size 1
  TrajectoryConfig trajectories;

  // optional disorder ensemble
  int realizations = 1;
  std::uint64_t ensemble_seed = 0;

  // analysis
  double dwell_ns = 20.0;

  // q-function settings
  std::vector<double> q_times_ns;
  SphereGrid q_grid;

  // level statistics settings
  std::vector<double> w_values_mhz;
  int level_sector = -1;  // -1: N/2
  int level_smoothing = 10;

  // integrability sweep mode
  std::vector<double> sweep_g_values;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);

  // field-path diagnostics; empty means valid
  std::vector<std::string> validate() const;

  HamiltonianSpec build_spec() const;  // base spec without disorder realization
  NoiseSpec noise_spec() const;
};

struct RunOptions {
  std::filesystem::path out_root;  // default: env QMESIM_OUT_ROOT or "./results"
  int n_threads = 0;               // 0: hardware concurrency
  std::optional<std::uint64_t> seed_override;
};

struct RunResult {
  std::filesystem::path out_dir;
  std::vector<std::string> files;  // relative names, manifest order
};

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

// 64-bit FNV-1a, hex encoded; the manifest's content hash.
std::string fnv1a64_hex(const std::string& data);

void write_curve_csv(const std::filesystem::path& path, const EACurve& curve);

}  // namespace qme
