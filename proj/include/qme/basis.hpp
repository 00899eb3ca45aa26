#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace qme {

// Computational-basis conventions: basis index b encodes qubit Q_j (1-based)
// at bit position j-1; |0> is ground, |1> excited, sigma^+ = |1><0|,
// sigma_z = |1><1| - |0><0|.

inline int popcount32(std::uint32_t x) { return std::popcount(x); }

// Charge-sector bookkeeping for the U(1) blocks of an excitation-conserving
// Hamiltonian: for each excitation number k, the ascending list of basis
// indices with popcount k, plus the inverse map.
struct SectorBasis {
  int n_qubits = 0;
  std::vector<std::vector<std::int32_t>> states;  // states[k]: global indices, ascending
  std::vector<std::int32_t> local_index;          // global index -> position in its sector

  explicit SectorBasis(int n);
  int sector_of(std::int32_t global) const { return popcount32(static_cast<std::uint32_t>(global)); }
  int dim(int k) const { return static_cast<int>(states[k].size()); }

  // Cached instance per qubit count (immutable once built, safe to share).
  static const SectorBasis& get(int n_qubits);
};

// Binomial coefficient through a log-space ladder; exact for the small
// arguments used here, safe up to n = 64 without overflow.
double log_binomial(int n, int k);
double binomial(int n, int k);

}  // namespace qme
