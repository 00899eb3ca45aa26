#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace qme {

// System definition for H = sum_{i<j} g_ij (s_i^+ s_j^- + s_i^- s_j^+)
//                          + sum_i h_i s_i^+ s_i^-.
// Couplings and on-site potentials are stored as f/2pi in MHz; the built
// operator is in angular units (rad/ns).
struct HamiltonianSpec {
  int n_qubits = 0;
  Eigen::MatrixXd coupling_mhz;  // symmetric, zero diagonal
  Eigen::VectorXd onsite_mhz;
  std::string label;
  // |g_N/g_L| bookkeeping; never enters numerics. Empty in the g_L = 0
  // integrable limit and for loaded matrices.
  std::optional<double> coupling_ratio;

  // Validates symmetry/zero-diagonal/dimensions; throws std::invalid_argument.
  static HamiltonianSpec make(Eigen::MatrixXd coupling_mhz, Eigen::VectorXd onsite_mhz,
                              std::string label = {});

  HamiltonianSpec with_onsite(Eigen::VectorXd onsite_mhz) const;

  // True when every off-diagonal coupling equals the same value (bit-exact);
  // enables the collective-operator fast path in the Krylov propagator.
  bool coupling_is_uniform(double* value = nullptr) const;
};

// Nearest-neighbor chain g_N with uniform long-range background g_L
// (open boundaries). g_L = 0 is the integrable open XX chain.
HamiltonianSpec preset_strong_short_range(double g_nn_mhz, double g_lr_mhz, int n_qubits);

// Uniform all-to-all coupling g_bar (the r = 1 regime).
HamiltonianSpec preset_intermediate(double g_bar_mhz, int n_qubits);

// Multiplies every coupling by (1 + u_ij), u_ij uniform in
// [-relative_spread, +relative_spread], symmetric, deterministic in the seed.
// Models the device's position-dependent coupling inhomogeneity, which is
// what breaks the collective (LMG) structure of the exactly uniform preset
// and lets the r = 1 regime thermalize.
HamiltonianSpec perturb_couplings(const HamiltonianSpec& spec, double relative_spread,
                                  std::uint64_t seed);

struct PotentialProfile {
  enum class Kind { resonant, linear, disorder };
  Kind kind = Kind::resonant;
  double gradient_mhz = 0.0;  // W, linear kind
  double delta_z = 0.0;       // disorder half-width in units of |g_bar|
  double g_bar_mhz = 0.0;     // reference coupling scale for disorder bounds
  std::uint64_t seed = 0;

  static PotentialProfile resonant();
  static PotentialProfile linear(double w_mhz);
  static PotentialProfile disorder(double delta_z, double g_bar_mhz, std::uint64_t seed);
};

// h_j/2pi for the resonant and linear kinds; linear is W*(  (N+1)/2 - j ),
// j = 1..N, i.e. W*(7.5 - j) for N = 14.
Eigen::VectorXd onsite_profile(const PotentialProfile& profile, int n_qubits);

// One uniform disorder realization in [-delta_z*|g_bar|, +delta_z*|g_bar|] MHz,
// deterministic given (seed, realization_index).
Eigen::VectorXd sample_disorder(const PotentialProfile& profile, int n_qubits,
                                std::uint64_t realization_index);

// Full-space sparse operator in rad/ns. Real symmetric by construction.
Eigen::SparseMatrix<double> build_hamiltonian(const HamiltonianSpec& spec);

// Plain-text matrix I/O (row-major, whitespace separated, MHz).
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);

}  // namespace qme
