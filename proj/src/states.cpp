#include "qme/states.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qme/basis.hpp"

namespace qme {

namespace {

// Product state from per-qubit amplitude pairs (a0_j, a1_j), qubit Q_j on bit j-1.
StateVector product_state(const std::vector<std::array<std::complex<double>, 2>>& site_amps) {
  const int n = static_cast<int>(site_amps.size());
  const std::int32_t dim = std::int32_t{1} << n;
  StateVector psi(dim);
  for (std::int32_t b = 0; b < dim; ++b) {
    std::complex<double> a = 1.0;
    for (int j = 0; j < n; ++j) a *= site_amps[j][(b >> j) & 1];
    psi(b) = a;
  }
  return psi;
}

}  // namespace

std::string to_string(StateFamily family) {
  return family == StateFamily::neel ? "neel" : "ferromagnetic";
}

StateFamily state_family_from_string(const std::string& s) {
  if (s == "neel") return StateFamily::neel;
  if (s == "ferromagnetic" || s == "ferro") return StateFamily::ferromagnetic;
  throw std::invalid_argument("unknown state family: " + s);
}

StateVector tilted_neel(double theta, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("tilted_neel: n_qubits must be >= 1");
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  std::vector<std::array<std::complex<double>, 2>> amps(n_qubits);
  for (int j = 1; j <= n_qubits; ++j) {
    // R_y(theta)|0> = (c, s); R_y(theta)|1> = (-s, c)
    amps[j - 1] = (j % 2 == 1) ? std::array<std::complex<double>, 2>{c, s}
                               : std::array<std::complex<double>, 2>{-s, c};
  }
  return product_state(amps);
}

StateVector tilted_ferromagnet(double theta, int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("tilted_ferromagnet: n_qubits must be >= 1");
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  std::vector<std::array<std::complex<double>, 2>> amps(
      n_qubits, std::array<std::complex<double>, 2>{c, s});
  return product_state(amps);
}

StateVector tilted_product(StateFamily family, double theta, int n_qubits) {
  return family == StateFamily::neel ? tilted_neel(theta, n_qubits)
                                     : tilted_ferromagnet(theta, n_qubits);
}

std::map<int, StateVector> charge_sector_decompose(const StateVector& psi) {
  const auto dim = psi.size();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim)
    throw std::invalid_argument("charge_sector_decompose: dimension is not a power of two");
  std::map<int, StateVector> out;
  for (Eigen::Index b = 0; b < dim; ++b) {
    if (psi(b) == std::complex<double>(0.0, 0.0)) continue;
    const int k = popcount32(static_cast<std::uint32_t>(b));
    auto [it, inserted] = out.try_emplace(k);
    if (inserted) it->second = StateVector::Zero(dim);
    it->second(b) = psi(b);
  }
  return out;
}

Eigen::VectorXd charge_sector_weights(const StateVector& psi) {
  const auto dim = psi.size();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index b = 0; b < dim; ++b)
    w(popcount32(static_cast<std::uint32_t>(b))) += std::norm(psi(b));
  return w;
}

}  // namespace qme
