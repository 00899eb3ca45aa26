#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qme/model.hpp"
#include "qme/states.hpp"

namespace qme {

enum class EntropyKind { von_neumann, renyi2 };

std::string to_string(EntropyKind kind);
EntropyKind entropy_kind_from_string(const std::string& s);

// Reduced state of an ordered subsystem A: bit k of the row/column index
// carries qubit subsystem[k] (0-based qubit indices).
struct ReducedDensityMatrix {
  std::vector<int> subsystem;
  Eigen::MatrixXcd rho;
};

ReducedDensityMatrix partial_trace(const StateVector& psi, int n_qubits,
                                   const std::vector<int>& subsystem);

// Charge projection rho_{A,Q} = sum_q Pi_q rho Pi_q with Q_A = sum_{i in A}
// sigma_z^i: zeroes every element between different-popcount basis states.
Eigen::MatrixXcd charge_project(const Eigen::MatrixXcd& rho);

// Entropies in nats. Eigenvalues in [-1e-10, 0) are clipped to zero; more
// negative ones reject the input as non-PSD.
double von_neumann_entropy(const Eigen::MatrixXcd& rho);
double renyi2_entropy(const Eigen::MatrixXcd& rho);
double entropy(const Eigen::MatrixXcd& rho, EntropyKind kind);

// Entanglement asymmetry S(rho_{A,Q}) - S(rho_A).
double entanglement_asymmetry(const Eigen::MatrixXcd& rho_a, EntropyKind kind);

// Leading-order Page estimate ln(d_A) - d_A / (2 d_B) for an N_A-qubit
// subsystem of an N-qubit random pure state.
double page_value(int n_a, int n);

// Staggered magnetization normalized so the theta = 0 Neel state gives 1:
// I = (1/N) sum_j epsilon_j <sigma_z^j>, epsilon_j = -1 on odd j (1-based).
double imbalance(const StateVector& psi, int n_qubits);

// <sigma_z^j> for every qubit.
Eigen::VectorXd sigma_z_expectations(const StateVector& psi, int n_qubits);

struct LevelSpacingResult {
  double mean_ratio = 0.0;
  int n_spacings = 0;
  int n_dropped = 0;  // spacings below the degeneracy cutoff
};

// <r> = mean of min(d_n, d_{n+1}) / max(d_n, d_{n+1}) over consecutive gaps.
LevelSpacingResult level_spacing_ratio(const Eigen::VectorXd& sorted_energies);

// Spectrum restricted to one excitation sector (S_z fixed).
LevelSpacingResult level_spacing_ratio(const HamiltonianSpec& spec, int sector);

// Half the trace norm of (a - b).
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Spin Q-function Q(theta, phi) = <theta,phi| rho |theta,phi> on a midpoint
// grid; rows run over theta in (0, pi), columns over phi in (0, 2pi).
struct SphereGrid {
  int n_theta = 64;
  int n_phi = 128;
};
Eigen::MatrixXd q_function(const Eigen::MatrixXcd& rho_a, const SphereGrid& grid = {});

// Theta-averaged azimuthal profile and its variance across phi; the
// flattening metric for U(1) symmetry restoration.
Eigen::VectorXd azimuthal_profile(const Eigen::MatrixXd& q);
double azimuthal_variance(const Eigen::MatrixXd& q);

// Number of connected arcs of the azimuthal profile above the half-range
// threshold, treating phi as periodic.
int azimuthal_peak_count(const Eigen::MatrixXd& q);

}  // namespace qme
