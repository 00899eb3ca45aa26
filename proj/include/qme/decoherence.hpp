#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "qme/evolution.hpp"
#include "qme/model.hpp"
#include "qme/states.hpp"

namespace qme {

// Per-qubit relaxation (T1) and Ramsey dephasing (T2*) times. The pure
// dephasing rate gamma_phi = 1/T2* - 1/(2 T1) must be nonnegative.
//
// Dephasing enters the stochastic Schroedinger equation through per-qubit
// measurement operators X_i = sigma_z^i with strength kappa_i; the ensemble
// average obeys drho = -i[H,rho]dt - sum_i kappa_i [X_i,[X_i,rho]] dt, whose
// single-qubit coherence decays as e^{-4 kappa t}. Matching e^{-gamma_phi t}
// pins kappa = gamma_phi / 4.
struct NoiseSpec {
  Eigen::VectorXd t1_us;      // per qubit; inf for no relaxation
  Eigen::VectorXd t2star_us;  // per qubit; inf for no dephasing

  static NoiseSpec none(int n_qubits);
  static NoiseSpec uniform(double t1_us, double t2star_us, int n_qubits);
  static NoiseSpec dephasing_only(double t2star_us, int n_qubits);

  // Validates sizes and gamma_phi >= 0; throws std::invalid_argument.
  void validate(int n_qubits) const;

  Eigen::VectorXd kappa_per_ns(int n_qubits) const;   // gamma_phi / 4, 1/ns
  Eigen::VectorXd gamma1_per_ns(int n_qubits) const;  // 1/T1, 1/ns
  bool is_zero() const;
};

struct TrajectoryConfig {
  double dt_natural = 0.15;   // step in units of 1/|g_bar|
  double dt_ns_override = 0;  // > 0 bypasses the natural-units conversion
  int n_trajectories = 100;
  std::uint64_t seed = 0;
};

// dt in ns for a spec: dt_natural / |g_bar| with g_bar the mean magnitude of
// the nonzero couplings (or the override when set).
double trajectory_dt_ns(const TrajectoryConfig& cfg, const HamiltonianSpec& spec);

// Exact Lindblad propagation (RK4 on the dense density matrix), N <= 8.
// Returns rho at every grid point.
std::vector<Eigen::MatrixXcd> lindblad_oracle(const StateVector& psi0, const HamiltonianSpec& spec,
                                              const NoiseSpec& noise, const TimeGrid& grid);

// One diffusive/jump trajectory: exact unitary substeps interleaved with the
// Euler-Maruyama dephasing update and Monte-Carlo jumps for T1, renormalized
// each step. Returns snapshots at the grid points. Deterministic given seed.
std::vector<StateVector> sse_trajectory(const StateVector& psi0, const Propagator& prop,
                                        const NoiseSpec& noise, double dt_ns, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t stream = 0);

// Per-time-point observable vector extracted from a pure state.
using ObservableExtractor = std::function<Eigen::VectorXd(const StateVector&, double)>;

struct TrajectoryCurves {
  std::vector<double> times_ns;
  Eigen::MatrixXd mean;       // n_points x n_observables
  Eigen::MatrixXd std_error;  // same shape; zero for M = 1
};

TrajectoryCurves trajectory_average(const StateVector& psi0, const HamiltonianSpec& spec,
                                    const NoiseSpec& noise, const TrajectoryConfig& cfg,
                                    const TimeGrid& grid, const ObservableExtractor& extract,
                                    int n_threads = 1);

// Trajectory-averaged reduced density matrices (pass all qubits to average
// the full projector rho_bar = (1/M) sum |psi_i><psi_i|).
std::vector<Eigen::MatrixXcd> trajectory_average_density(
    const StateVector& psi0, const HamiltonianSpec& spec, const NoiseSpec& noise,
    const TrajectoryConfig& cfg, const TimeGrid& grid, const std::vector<int>& subsystem,
    int n_threads = 1);

}  // namespace qme
