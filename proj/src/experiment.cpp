#include "qme/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qme/evolution.hpp"
#include "qme/lmg.hpp"
#include "qme/states.hpp"
#include "qme/threading.hpp"
#include "qme/units.hpp"

namespace qme {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownObservables = {"ea_vn",     "ea_r2",      "ee",
                                                 "imbalance", "q_function", "level_stats"};

double jget_num(const json& j, const char* key, double fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw std::invalid_argument(path + "." + key + ": expected a number");
  return j[key].get<double>();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string theta_tag(double theta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "theta%.4f", theta);
  for (char& c : buf)
    if (c == '.') c = 'p';
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.schema_version = static_cast<int>(jget_num(j, "schema_version", 1, "config"));
  c.name = j.value("name", "");
  c.description = j.value("description", "");

  if (j.contains("model")) {
    const auto& m = j["model"];
    c.preset = m.value("preset", "");
    c.g_nn_mhz = jget_num(m, "g_nn_mhz", 0.0, "model");
    c.g_lr_mhz = jget_num(m, "g_lr_mhz", 0.0, "model");
    c.g_bar_mhz = jget_num(m, "g_bar_mhz", 0.0, "model");
    c.coupling_file = m.value("coupling_file", "");
    c.coupling_spread = jget_num(m, "coupling_spread", 0.0, "model");
    c.coupling_spread_seed =
        static_cast<std::uint64_t>(jget_num(m, "coupling_spread_seed", 0.0, "model"));
    c.n_qubits = static_cast<int>(jget_num(m, "n_qubits", 0, "model"));
    if (m.contains("potential")) {
      const auto& p = m["potential"];
      const std::string kind = p.value("kind", "resonant");
      if (kind == "resonant") {
        c.potential = PotentialProfile::resonant();
      } else if (kind == "linear") {
        c.potential = PotentialProfile::linear(jget_num(p, "w_mhz", 0.0, "model.potential"));
      } else if (kind == "disorder") {
        c.potential = PotentialProfile::disorder(
            jget_num(p, "delta_z", 0.0, "model.potential"),
            jget_num(p, "g_bar_mhz", c.g_bar_mhz != 0.0 ? c.g_bar_mhz : c.g_nn_mhz,
                     "model.potential"),
            static_cast<std::uint64_t>(jget_num(p, "seed", 0.0, "model.potential")));
      } else {
        throw std::invalid_argument("model.potential.kind: unknown kind '" + kind + "'");
      }
    }
  }

  if (j.contains("state")) {
    const auto& s = j["state"];
    c.family = state_family_from_string(s.value("family", "neel"));
    if (s.contains("thetas"))
      for (const auto& t : s["thetas"]) c.thetas.push_back(t.get<double>());
  }
  if (j.contains("grid")) {
    c.t_end_ns = jget_num(j["grid"], "t_end_ns", 0.0, "grid");
    c.n_points = static_cast<int>(jget_num(j["grid"], "n_points", 0, "grid"));
  }
  if (j.contains("subsystem")) {
    c.subsystem.clear();
    for (const auto& q : j["subsystem"]) c.subsystem.push_back(q.get<int>());
  }
  if (j.contains("observables"))
    for (const auto& o : j["observables"]) c.observables.push_back(o.get<std::string>());
  c.method = j.value("method", "eigendecomposition");

  if (j.contains("noise")) {
    c.has_noise = true;
    const auto& nj = j["noise"];
    auto read_times = [&](const char* key, std::vector<double>& out) {
      if (!nj.contains(key)) return;
      if (nj[key].is_number()) {
        out.push_back(nj[key].get<double>());
      } else {
        for (const auto& v : nj[key]) out.push_back(v.get<double>());
      }
    };
    read_times("t1_us", c.t1_us);
    read_times("t2star_us", c.t2star_us);
    if (nj.contains("trajectories")) {
      const auto& tj = nj["trajectories"];
      c.trajectories.dt_natural = jget_num(tj, "dt_natural", 0.15, "noise.trajectories");
      c.trajectories.n_trajectories = static_cast<int>(jget_num(tj, "m", 100, "noise.trajectories"));
      c.trajectories.seed =
          static_cast<std::uint64_t>(jget_num(tj, "seed", 0.0, "noise.trajectories"));
    }
  }

  if (j.contains("ensemble")) {
    c.realizations = static_cast<int>(jget_num(j["ensemble"], "realizations", 1, "ensemble"));
    c.ensemble_seed = static_cast<std::uint64_t>(jget_num(j["ensemble"], "seed", 0.0, "ensemble"));
  }
  if (j.contains("analysis")) c.dwell_ns = jget_num(j["analysis"], "dwell_ns", 20.0, "analysis");

  if (j.contains("q_function")) {
    const auto& q = j["q_function"];
    if (q.contains("times_ns"))
      for (const auto& t : q["times_ns"]) c.q_times_ns.push_back(t.get<double>());
    c.q_grid.n_theta = static_cast<int>(jget_num(q, "n_theta", 64, "q_function"));
    c.q_grid.n_phi = static_cast<int>(jget_num(q, "n_phi", 128, "q_function"));
  }

  if (j.contains("level_stats")) {
    const auto& l = j["level_stats"];
    if (l.contains("w_values_mhz"))
      for (const auto& w : l["w_values_mhz"]) c.w_values_mhz.push_back(w.get<double>());
    c.level_sector = static_cast<int>(jget_num(l, "sector", -1, "level_stats"));
    c.level_smoothing = static_cast<int>(jget_num(l, "smoothing_realizations", 10, "level_stats"));
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (s.contains("g_values"))
      for (const auto& g : s["g_values"]) c.sweep_g_values.push_back(g.get<double>());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> errs;
  auto err = [&](const std::string& m) { errs.push_back(m); };

  if (schema_version != 1) err("schema_version: unsupported version " + std::to_string(schema_version));
  if (name.empty()) err("name: required");
  for (const char ch : name)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-')
      err("name: must be alphanumeric/underscore/dash, got '" + name + "'");

  const bool has_preset = !preset.empty();
  const bool has_file = !coupling_file.empty();
  if (has_preset == has_file)
    err("model: exactly one of preset or coupling_file is required");
  if (has_preset && preset != "strong_short_range" && preset != "intermediate")
    err("model.preset: unknown preset '" + preset + "'");
  if (preset == "strong_short_range" && g_nn_mhz == 0.0)
    err("model.g_nn_mhz: must be nonzero for strong_short_range");
  if (preset == "intermediate" && g_bar_mhz == 0.0)
    err("model.g_bar_mhz: must be nonzero for intermediate");
  if (n_qubits < 1) err("model.n_qubits: required and positive");
  const int dense_cap = 14, krylov_cap = 16;
  if (method == "eigendecomposition" && n_qubits > dense_cap)
    err("model.n_qubits: " + std::to_string(n_qubits) + " exceeds the dense-method bound of " +
        std::to_string(dense_cap) + " (use method = krylov)");
  if (method == "krylov" && n_qubits > krylov_cap)
    err("model.n_qubits: " + std::to_string(n_qubits) + " exceeds the krylov bound of " +
        std::to_string(krylov_cap));
  if (method != "eigendecomposition" && method != "krylov")
    err("method: unknown method '" + method + "'");
  if (coupling_spread < 0.0 || coupling_spread >= 1.0)
    err("model.coupling_spread: must lie in [0, 1)");

  const bool sweep_mode = !sweep_g_values.empty();
  if (sweep_mode) {
    for (std::size_t i = 0; i < sweep_g_values.size(); ++i)
      if (sweep_g_values[i] < 0.0 || sweep_g_values[i] > 1.0)
        err("sweep.g_values[" + std::to_string(i) + "]: must lie in [0, 1]");
    if (thetas.size() != 2) err("state.thetas: sweep mode needs exactly two tilt angles");
  }

  if (thetas.empty() && !sweep_mode && observables.empty() == false &&
      !(observables.size() == 1 && observables[0] == "level_stats"))
    err("state.thetas: at least one tilt angle is required");
  for (std::size_t i = 0; i < thetas.size(); ++i)
    if (thetas[i] < 0.0 || thetas[i] > units::kPi + 1e-12)
      err("state.thetas[" + std::to_string(i) + "]: " + format_double(thetas[i]) +
          " outside [0, pi]");

  const bool needs_grid =
      !observables.empty() && !(observables.size() == 1 && observables[0] == "level_stats");
  if (needs_grid || sweep_mode) {
    if (n_points == 0 && !sweep_mode) err("grid.n_points: required");
    if (n_points < 0 || (n_points == 1)) err("grid.n_points: need at least 2 points");
    if (n_points > 1 && t_end_ns <= 0.0) err("grid.t_end_ns: must be positive");
  }

  std::set<int> seen;
  for (std::size_t i = 0; i < subsystem.size(); ++i) {
    if (subsystem[i] < 0 || subsystem[i] >= n_qubits)
      err("subsystem[" + std::to_string(i) + "]: qubit index out of range");
    if (!seen.insert(subsystem[i]).second)
      err("subsystem[" + std::to_string(i) + "]: duplicate qubit index");
  }
  if (subsystem.empty() || subsystem.size() > 8)
    err("subsystem: size must lie in [1, 8]");

  for (const auto& o : observables)
    if (!kKnownObservables.count(o)) err("observables: unknown observable '" + o + "'");
  const bool wants_q =
      std::find(observables.begin(), observables.end(), "q_function") != observables.end();
  if (wants_q) {
    if (q_times_ns.empty()) err("q_function.times_ns: required when q_function is requested");
    for (std::size_t i = 0; i < q_times_ns.size(); ++i)
      if (q_times_ns[i] < 0.0 || q_times_ns[i] > t_end_ns)
        err("q_function.times_ns[" + std::to_string(i) + "]: outside the time grid");
    if (has_noise) err("q_function: not available together with noise trajectories");
  }
  const bool wants_levels =
      std::find(observables.begin(), observables.end(), "level_stats") != observables.end();
  if (wants_levels) {
    if (w_values_mhz.empty()) err("level_stats.w_values_mhz: required when level_stats is requested");
    if (level_sector >= 0 && level_sector > n_qubits)
      err("level_stats.sector: out of range");
    if (level_smoothing < 1) err("level_stats.smoothing_realizations: must be >= 1");
  }

  if (has_noise) {
    auto check_times = [&](const std::vector<double>& v, const char* key) {
      if (v.empty()) {
        err(std::string("noise.") + key + ": required");
        return;
      }
      if (v.size() != 1 && static_cast<int>(v.size()) != n_qubits)
        err(std::string("noise.") + key + ": size must be 1 or n_qubits");
      for (double x : v)
        if (x <= 0.0) err(std::string("noise.") + key + ": entries must be positive");
    };
    check_times(t1_us, "t1_us");
    check_times(t2star_us, "t2star_us");
    if (trajectories.n_trajectories < 1) err("noise.trajectories.m: must be >= 1");
    if (trajectories.dt_natural <= 0.0) err("noise.trajectories.dt_natural: must be positive");
  }

  if (realizations < 1) err("ensemble.realizations: must be >= 1");
  if (realizations > 1 && potential.kind != PotentialProfile::Kind::disorder)
    err("ensemble.realizations: > 1 requires a disorder potential");
  if (potential.kind == PotentialProfile::Kind::disorder && potential.g_bar_mhz == 0.0)
    err("model.potential.g_bar_mhz: disorder needs a reference coupling scale");
  if (dwell_ns < 0.0) err("analysis.dwell_ns: must be nonnegative");
  return errs;
}

HamiltonianSpec ExperimentConfig::build_spec() const {
  HamiltonianSpec spec;
  if (!coupling_file.empty()) {
    Eigen::MatrixXd g = load_matrix(coupling_file);
    spec = HamiltonianSpec::make(std::move(g), Eigen::VectorXd::Zero(n_qubits), "from_file");
  } else if (preset == "strong_short_range") {
    spec = preset_strong_short_range(g_nn_mhz, g_lr_mhz, n_qubits);
  } else {
    spec = preset_intermediate(g_bar_mhz, n_qubits);
  }
  if (coupling_spread > 0.0) spec = perturb_couplings(spec, coupling_spread, coupling_spread_seed);
  if (potential.kind != PotentialProfile::Kind::disorder)
    spec = spec.with_onsite(onsite_profile(potential, n_qubits));
  return spec;
}

NoiseSpec ExperimentConfig::noise_spec() const {
  if (!has_noise) return NoiseSpec::none(n_qubits);
  auto broadcast = [&](const std::vector<double>& v) {
    Eigen::VectorXd out(n_qubits);
    for (int i = 0; i < n_qubits; ++i) out(i) = v.size() == 1 ? v[0] : v[i];
    return out;
  };
  return NoiseSpec{broadcast(t1_us), broadcast(t2star_us)};
}

std::string fnv1a64_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_curve_csv(const std::filesystem::path& path, const EACurve& curve) {
  std::string out = "t_ns,value";
  const bool with_err = !curve.std_errors.empty();
  if (with_err) out += ",stderr";
  out += '\n';
  for (std::size_t i = 0; i < curve.times_ns.size(); ++i) {
    out += format_double(curve.times_ns[i]);
    out += ',';
    out += format_double(curve.values[i]);
    if (with_err) {
      out += ',';
      out += format_double(curve.std_errors[i]);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  f << out;
}

namespace {

struct FileCollector {
  std::filesystem::path dir;
  std::vector<std::pair<std::string, std::string>> entries;  // name, hash

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    entries.emplace_back(name, fnv1a64_hex(content));
  }
  void write_curve(const std::string& name, const EACurve& curve) {
    std::string out = "t_ns,value";
    if (!curve.std_errors.empty()) out += ",stderr";
    out += '\n';
    for (std::size_t i = 0; i < curve.times_ns.size(); ++i) {
      out += format_double(curve.times_ns[i]) + "," + format_double(curve.values[i]);
      if (!curve.std_errors.empty()) out += "," + format_double(curve.std_errors[i]);
      out += '\n';
    }
    write(name, out);
  }
};

struct ScalarObservableSet {
  std::vector<std::string> names;  // subset of ea_vn, ea_r2, ee, imbalance
  bool needs_rho = false;

  Eigen::VectorXd evaluate(const StateVector& psi, int n_qubits,
                           const std::vector<int>& subsystem) const {
    Eigen::VectorXd out(names.size());
    Eigen::MatrixXcd rho;
    if (needs_rho) rho = partial_trace(psi, n_qubits, subsystem).rho;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (names[k] == "ea_vn")
        out(k) = entanglement_asymmetry(rho, EntropyKind::von_neumann);
      else if (names[k] == "ea_r2")
        out(k) = entanglement_asymmetry(rho, EntropyKind::renyi2);
      else if (names[k] == "ee")
        out(k) = von_neumann_entropy(rho);
      else
        out(k) = imbalance(psi, n_qubits);
    }
    return out;
  }
};

// canonical re-serialization of the parsed config; the manifest hashes this,
// so semantically identical configs hash identically
json config_to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["name"] = c.name;
  json model;
  model["preset"] = c.preset;
  model["g_nn_mhz"] = c.g_nn_mhz;
  model["g_lr_mhz"] = c.g_lr_mhz;
  model["g_bar_mhz"] = c.g_bar_mhz;
  model["coupling_file"] = c.coupling_file;
  model["coupling_spread"] = c.coupling_spread;
  model["coupling_spread_seed"] = c.coupling_spread_seed;
  model["n_qubits"] = c.n_qubits;
  model["potential"] = {{"kind", static_cast<int>(c.potential.kind)},
                        {"w_mhz", c.potential.gradient_mhz},
                        {"delta_z", c.potential.delta_z},
                        {"g_bar_mhz", c.potential.g_bar_mhz},
                        {"seed", c.potential.seed}};
  j["model"] = model;
  j["state"] = {{"family", to_string(c.family)}, {"thetas", c.thetas}};
  j["grid"] = {{"t_end_ns", c.t_end_ns}, {"n_points", c.n_points}};
  j["subsystem"] = c.subsystem;
  j["observables"] = c.observables;
  j["method"] = c.method;
  if (c.has_noise)
    j["noise"] = {{"t1_us", c.t1_us},
                  {"t2star_us", c.t2star_us},
                  {"trajectories",
                   {{"dt_natural", c.trajectories.dt_natural},
                    {"m", c.trajectories.n_trajectories},
                    {"seed", c.trajectories.seed}}}};
  j["ensemble"] = {{"realizations", c.realizations}, {"seed", c.ensemble_seed}};
  j["analysis"] = {{"dwell_ns", c.dwell_ns}};
  if (!c.q_times_ns.empty())
    j["q_function"] = {{"times_ns", c.q_times_ns},
                       {"n_theta", c.q_grid.n_theta},
                       {"n_phi", c.q_grid.n_phi}};
  if (!c.w_values_mhz.empty())
    j["level_stats"] = {{"w_values_mhz", c.w_values_mhz},
                        {"sector", c.level_sector},
                        {"smoothing_realizations", c.level_smoothing}};
  if (!c.sweep_g_values.empty()) j["sweep"] = {{"g_values", c.sweep_g_values}};
  return j;
}

json crossover_to_json(const CrossoverReport& rep, const std::string& observable,
                       double theta_small, double theta_large) {
  json j;
  j["observable"] = observable;
  j["theta_small"] = theta_small;
  j["theta_large"] = theta_large;
  j["initial_ordering"] = rep.initial_ordering;
  j["crossing_times_ns"] = rep.crossing_times_ns;
  j["dwell_ns"] = rep.dwell_ns;
  j["verdict"] = to_string(rep.verdict);
  j["criterion"] =
      "crossover with reversal persisting >= dwell (reconstruction; the source "
      "reads crossovers off plots)";
  if (rep.reversal_window_ns)
    j["reversal_window_ns"] = {rep.reversal_window_ns->first, rep.reversal_window_ns->second};
  return j;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config_in, const RunOptions& options) {
  ExperimentConfig config = config_in;
  if (options.seed_override) {
    config.ensemble_seed = *options.seed_override;
    config.trajectories.seed = *options.seed_override;
    config.potential.seed = *options.seed_override;
  }
  const auto errors = config.validate();
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }

  std::filesystem::path root = options.out_root;
  if (root.empty()) {
    if (const char* env = std::getenv("QMESIM_OUT_ROOT")) root = env;
    else root = "results";
  }
  const int threads = options.n_threads > 0 ? options.n_threads : default_thread_count();

  FileCollector files;
  files.dir = root / config.name;
  std::filesystem::create_directories(files.dir);

  const EvolveMethod method =
      config.method == "krylov" ? EvolveMethod::krylov : EvolveMethod::eigendecomposition;

  // ---- integrability sweep mode -------------------------------------------
  if (!config.sweep_g_values.empty()) {
    IntegrabilitySweepSettings s;
    s.n_qubits = config.n_qubits;
    s.subsystem = config.subsystem;
    s.theta_small = std::min(config.thetas[0], config.thetas[1]);
    s.theta_large = std::max(config.thetas[0], config.thetas[1]);
    s.g_nn_mhz = config.preset == "strong_short_range" && config.g_nn_mhz != 0.0 ? config.g_nn_mhz
                                                                                 : -5.0;
    if (config.n_points >= 2)
      s.grid = TimeGrid::uniform(0.0, config.t_end_ns, config.n_points);
    s.dwell_ns = config.dwell_ns;
    s.n_threads = threads;
    const auto points = sweep_integrability(config.sweep_g_values, s);

    json report = json::array();
    for (const auto& p : points) {
      char gtag[32];
      std::snprintf(gtag, sizeof(gtag), "g%.3f", p.g);
      for (char& c : gtag)
        if (c == '.') c = 'p';
      files.write_curve(std::string("ea_vn_") + gtag + "_" + theta_tag(s.theta_small) + ".csv",
                        p.curve_small_theta);
      files.write_curve(std::string("ea_vn_") + gtag + "_" + theta_tag(s.theta_large) + ".csv",
                        p.curve_large_theta);
      json entry = crossover_to_json(p.report, "ea_vn", s.theta_small, s.theta_large);
      entry["g"] = p.g;
      report.push_back(entry);
    }
    files.write("sweep_report.json", report.dump(2) + "\n");
  }

  // ---- curve runs ----------------------------------------------------------
  ScalarObservableSet scalars;
  for (const auto& o : config.observables)
    if (o == "ea_vn" || o == "ea_r2" || o == "ee" || o == "imbalance") {
      scalars.names.push_back(o);
      if (o != "imbalance") scalars.needs_rho = true;
    }

  const bool wants_q =
      std::find(config.observables.begin(), config.observables.end(), "q_function") !=
      config.observables.end();

  if (!scalars.names.empty() || wants_q) {
    const TimeGrid grid = TimeGrid::uniform(0.0, config.t_end_ns, config.n_points);
    const auto base_spec = config.build_spec();
    const int n_real = config.realizations;

    // curves[r][theta_idx][obs_idx]
    std::vector<std::vector<std::vector<EACurve>>> curves(
        n_real, std::vector<std::vector<EACurve>>(
                    config.thetas.size(), std::vector<EACurve>(scalars.names.size())));
    std::vector<std::vector<Eigen::MatrixXd>> qfuncs(config.thetas.size());

    auto run_realization = [&](int r, int inner_threads) {
      HamiltonianSpec spec = base_spec;
      if (config.potential.kind == PotentialProfile::Kind::disorder) {
        PotentialProfile prof = config.potential;
        prof.seed = config.ensemble_seed ^ config.potential.seed;
        spec = spec.with_onsite(sample_disorder(prof, config.n_qubits, r));
      }
      if (config.has_noise) {
        const auto noise = config.noise_spec();
        for (std::size_t ti = 0; ti < config.thetas.size(); ++ti) {
          const auto psi0 = tilted_product(config.family, config.thetas[ti], config.n_qubits);
          TrajectoryConfig tcfg = config.trajectories;
          tcfg.seed = tcfg.seed + 1000003ULL * r;
          const auto stats = trajectory_average(
              psi0, spec, noise, tcfg, grid,
              [&](const StateVector& psi, double) {
                return scalars.evaluate(psi, config.n_qubits, config.subsystem);
              },
              inner_threads);
          for (std::size_t k = 0; k < scalars.names.size(); ++k) {
            EACurve& c = curves[r][ti][k];
            c.times_ns = stats.times_ns;
            c.values.assign(grid.n_points, 0.0);
            c.std_errors.assign(grid.n_points, 0.0);
            for (int p = 0; p < grid.n_points; ++p) {
              c.values[p] = stats.mean(p, k);
              c.std_errors[p] = stats.std_error(p, k);
            }
          }
        }
        return;
      }
      const auto prop = Propagator::build(spec, method, inner_threads);
      for (std::size_t ti = 0; ti < config.thetas.size(); ++ti) {
        const auto psi0 = tilted_product(config.family, config.thetas[ti], config.n_qubits);
        for (std::size_t k = 0; k < scalars.names.size(); ++k) {
          curves[r][ti][k].times_ns = grid.times();
          curves[r][ti][k].values.assign(grid.n_points, 0.0);
        }
        prop.evolve_observe(
            psi0, grid,
            [&](int p, double, const StateVector& psi) {
              if (!scalars.names.empty()) {
                const auto v = scalars.evaluate(psi, config.n_qubits, config.subsystem);
                for (std::size_t k = 0; k < scalars.names.size(); ++k)
                  curves[r][ti][k].values[p] = v(k);
              }
            },
            inner_threads);
        if (wants_q && r == 0) {
          for (const double tq : config.q_times_ns) {
            const auto rho =
                partial_trace(prop.apply(psi0, tq), config.n_qubits, config.subsystem).rho;
            qfuncs[ti].push_back(q_function(rho, config.q_grid));
          }
        }
      }
    };

    // realizations first, then inner parallelism
    if (n_real > 1) {
      parallel_for(n_real, threads, [&](int r) { run_realization(r, 1); });
    } else {
      run_realization(0, threads);
    }

    // metadata + per-realization files + ensemble summaries
    std::map<std::string, std::vector<EACurve>> means;  // key: obs|theta
    for (std::size_t ti = 0; ti < config.thetas.size(); ++ti) {
      for (std::size_t k = 0; k < scalars.names.size(); ++k) {
        std::vector<EACurve> reals;
        for (int r = 0; r < n_real; ++r) {
          EACurve& c = curves[r][ti][k];
          c.entropy_kind = scalars.names[k] == "ea_r2" ? EntropyKind::renyi2
                                                       : EntropyKind::von_neumann;
          c.metadata["observable"] = scalars.names[k];
          c.metadata["theta"] = format_double(config.thetas[ti]);
          c.metadata["family"] = to_string(config.family);
          reals.push_back(c);
          char rtag[16];
          std::snprintf(rtag, sizeof(rtag), "r%03d", r);
          if (n_real > 1)
            files.write_curve(scalars.names[k] + "_" + theta_tag(config.thetas[ti]) + "_" + rtag +
                                  ".csv",
                              c);
        }
        const auto mean = n_real > 1 ? ensemble_average(reals) : reals.front();
        files.write_curve(scalars.names[k] + "_" + theta_tag(config.thetas[ti]) +
                              (n_real > 1 ? "_mean" : "") + ".csv",
                          mean);
        means[scalars.names[k]].push_back(mean);
      }
      if (wants_q && !qfuncs[ti].empty()) {
        for (std::size_t qi = 0; qi < config.q_times_ns.size(); ++qi) {
          char ttag[32];
          std::snprintf(ttag, sizeof(ttag), "t%.1f", config.q_times_ns[qi]);
          for (char& ch : ttag)
            if (ch == '.') ch = 'p';
          std::string out = "# rows: theta midpoints (0, pi); cols: phi midpoints (0, 2 pi)\n";
          const auto& q = qfuncs[ti][qi];
          for (Eigen::Index a = 0; a < q.rows(); ++a) {
            for (Eigen::Index b = 0; b < q.cols(); ++b) {
              if (b) out += ',';
              out += format_double(q(a, b));
            }
            out += '\n';
          }
          files.write("qfun_" + theta_tag(config.thetas[ti]) + "_" + ttag + ".csv", out);
        }
      }
    }

    // crossover reports on the extreme tilt pair
    if (config.thetas.size() >= 2) {
      const auto mm = std::minmax_element(config.thetas.begin(), config.thetas.end());
      const std::size_t i_small = mm.first - config.thetas.begin();
      const std::size_t i_large = mm.second - config.thetas.begin();
      for (const auto& key : {std::string("ea_vn"), std::string("ea_r2")}) {
        if (!means.count(key)) continue;
        const auto rep =
            detect_crossover(means[key][i_large], means[key][i_small], config.dwell_ns);
        files.write("crossover_" + key + ".json",
                    crossover_to_json(rep, key, *mm.first, *mm.second).dump(2) + "\n");
      }
    }
  }

  // ---- level statistics -----------------------------------------------------
  const bool wants_levels =
      std::find(config.observables.begin(), config.observables.end(), "level_stats") !=
      config.observables.end();
  if (wants_levels) {
    const int sector = config.level_sector >= 0 ? config.level_sector : config.n_qubits / 2;
    const int n_smooth = config.level_smoothing;
    const auto base = config.build_spec();
    std::vector<std::vector<double>> ratios(config.w_values_mhz.size(),
                                            std::vector<double>(n_smooth));
    std::vector<int> task_w, task_s;
    for (std::size_t wi = 0; wi < config.w_values_mhz.size(); ++wi)
      for (int s = 0; s < n_smooth; ++s) {
        task_w.push_back(static_cast<int>(wi));
        task_s.push_back(s);
      }
    parallel_for(static_cast<int>(task_w.size()), threads, [&](int t) {
      const double w = config.w_values_mhz[task_w[t]];
      HamiltonianSpec spec = base;
      if (n_smooth > 1 || config.coupling_spread > 0.0) {
        const double spread = config.coupling_spread > 0.0 ? config.coupling_spread : 0.15;
        spec = perturb_couplings(spec, spread, config.ensemble_seed + 7919ULL * task_s[t]);
      }
      spec = spec.with_onsite(onsite_profile(PotentialProfile::linear(w), config.n_qubits));
      ratios[task_w[t]][task_s[t]] = level_spacing_ratio(spec, sector).mean_ratio;
    });
    std::string out = "w_mhz,mean_r,stderr\n";
    for (std::size_t wi = 0; wi < config.w_values_mhz.size(); ++wi) {
      double mean = 0.0;
      for (double v : ratios[wi]) mean += v;
      mean /= n_smooth;
      double var = 0.0;
      for (double v : ratios[wi]) var += (v - mean) * (v - mean);
      const double se = n_smooth > 1 ? std::sqrt(var / (n_smooth * (n_smooth - 1.0))) : 0.0;
      out += format_double(config.w_values_mhz[wi]) + "," + format_double(mean) + "," +
             format_double(se) + "\n";
    }
    files.write("rstat_vs_w.csv", out);
  }

  // ---- manifest -------------------------------------------------------------
  json manifest;
  manifest["name"] = config.name;
  manifest["version"] = kVersion;
  manifest["config_hash"] = fnv1a64_hex(config_to_json(config).dump());
  manifest["seeds"] = {{"ensemble", config.ensemble_seed},
                       {"trajectories", config.trajectories.seed},
                       {"potential", config.potential.seed},
                       {"coupling_spread", config.coupling_spread_seed}};
  json flist = json::array();
  for (const auto& [fname, fhash] : files.entries) flist.push_back({{"name", fname}, {"hash", fhash}});
  manifest["files"] = flist;
  {
    const std::string text = manifest.dump(2) + "\n";
    std::ofstream f(files.dir / "manifest.json", std::ios::binary);
    f << text;
  }

  RunResult result;
  result.out_dir = files.dir;
  for (const auto& [fname, fhash] : files.entries) result.files.push_back(fname);
  result.files.push_back("manifest.json");
  return result;
}

}  // namespace qme
