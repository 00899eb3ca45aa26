#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qme/observables.hpp"
#include "qme/states.hpp"

namespace qme {

// Exact solution of the uniform all-to-all quench from tilted ferromagnetic
// states in the collective-spin picture. Within the maximal-spin sector the
// Hamiltonian acts as g_bar (S^2 - S_z^2 - N/2); all closed forms below keep
// only the nontrivial +g_bar*t*m^2 phases (constants drop out of every
// density matrix and fidelity).
//
// Magnetic quantum numbers are passed as twice-m integers so the half-integer
// ladder stays exact.

// C^N_m(theta) = cos^{N/2+m}(theta/2) sin^{N/2-m}(theta/2) sqrt(binom(N, N/2-m)).
double lmg_coefficient(int n, int twice_m, double theta);

// Product-basis amplitudes of e^{-iHt}|theta>_F in
// |S_A = N_A/2, m_1> (x) |S_Abar = (N-N_A)/2, m_2>; amp(i1, i2) belongs to
// m_1 = N_A/2 - i1, m_2 = (N-N_A)/2 - i2.
struct CollectiveState {
  int n_qubits = 0;
  int n_a = 0;
  double g_bar_ang = 0.0;  // rad/ns
  Eigen::MatrixXcd amp;
};

CollectiveState lmg_evolve_state(double theta, int n, int n_a, double g_bar_ang, double t_ns);

// Initial-state constant C(theta) = -ln sum_n cos^{4(N_A-n)} sin^{4n} binom^2.
double lmg_c_constant(double theta, int n_a);

// Reduced density matrix element rho^A_{m1, m1'} of the evolved state.
std::complex<double> lmg_reduced_offdiagonal(double theta, int n, int n_a, double g_bar_ang,
                                             double t_ns, int twice_m1, int twice_m1p);

// Full (N_A+1) x (N_A+1) reduced matrix in the collective basis, index
// i1 = N_A/2 - m1.
Eigen::MatrixXcd lmg_reduced_density(double theta, int n, int n_a, double g_bar_ang, double t_ns);

// Closed-form Renyi-2 EA through the coherence factor C(m1, m1').
double lmg_renyi2_ea(double theta, int n, int n_a, double g_bar_ang, double t_ns);

// Map a collective-basis reduced matrix to the 2^{N_A} computational basis
// through the Dicke-state isometry.
Eigen::MatrixXcd lmg_to_computational(const Eigen::MatrixXcd& rho_collective);

// Max over the grid of |Delta S_A(t) - (C - S_A(t))| where C is the entropy
// of the (time-independent) charge-projected state at t = 0.
double lmg_ea_identity_residual(double theta, int n, int n_a, double g_bar_ang,
                                const std::vector<double>& times_ns, EntropyKind kind);

}  // namespace qme
