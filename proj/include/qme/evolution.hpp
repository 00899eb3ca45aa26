#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "qme/model.hpp"
#include "qme/states.hpp"

namespace qme {

struct TimeGrid {
  double t_start_ns = 0.0;
  double t_end_ns = 0.0;
  int n_points = 1;

  static TimeGrid uniform(double t_start_ns, double t_end_ns, int n_points);
  std::vector<double> times() const;
  double step_ns() const { return n_points > 1 ? (t_end_ns - t_start_ns) / (n_points - 1) : 0.0; }
};

enum class EvolveMethod {
  eigendecomposition,  // one-time per-sector dense diagonalization, exact phases
  krylov,              // Lanczos short-time stepping on the sparse operator
};

// Snapshot observer: (time index, t_ns, state). Called in ascending index
// order regardless of worker count.
using SnapshotObserver = std::function<void(int, double, const StateVector&)>;

// Charge-sector-blocked propagator for e^{-iHt}. Immutable after build and
// shareable across threads.
class Propagator {
 public:
  static Propagator build(const HamiltonianSpec& spec,
                          EvolveMethod method = EvolveMethod::eigendecomposition,
                          int n_threads = 1);

  StateVector apply(const StateVector& psi0, double t_ns) const;

  void evolve_observe(const StateVector& psi0, const TimeGrid& grid,
                      const SnapshotObserver& observer, int n_threads = 1) const;

  int n_qubits() const;
  EvolveMethod method() const;

  // Largest absolute sector eigenvalue (eigendecomposition method only).
  double spectral_radius() const;

  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

std::vector<StateVector> evolve(const StateVector& psi0, const HamiltonianSpec& spec,
                                const TimeGrid& grid,
                                EvolveMethod method = EvolveMethod::eigendecomposition,
                                int n_threads = 1);

// Full 2^N x 2^N dense matrix-exponential evolution; independent of the
// sector-blocked path, N <= 10. The Hamiltonian is assembled by Kronecker
// products rather than bit arithmetic so the two routes share no code.
std::vector<StateVector> evolve_dense_oracle(const StateVector& psi0, const HamiltonianSpec& spec,
                                             const TimeGrid& grid);

}  // namespace qme
