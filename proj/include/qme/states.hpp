#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>

namespace qme {

using StateVector = Eigen::VectorXcd;

enum class StateFamily { neel, ferromagnetic };

std::string to_string(StateFamily family);
StateFamily state_family_from_string(const std::string& s);

// |theta>_N = prod_j R_y(theta)|s_j>, s_j = |0> on odd j, |1> on even j
// (Q_1 is odd), with R_y(theta) = exp(-i theta sigma_y / 2).
StateVector tilted_neel(double theta, int n_qubits);

// |theta>_F = (cos(theta/2)|0> + sin(theta/2)|1>)^{tensor N}.
StateVector tilted_ferromagnet(double theta, int n_qubits);

StateVector tilted_product(StateFamily family, double theta, int n_qubits);

// Components of psi per excitation number, returned as full-length vectors;
// summing them reproduces psi exactly.
std::map<int, StateVector> charge_sector_decompose(const StateVector& psi);

// Squared sector norms indexed by excitation number.
Eigen::VectorXd charge_sector_weights(const StateVector& psi);

}  // namespace qme
