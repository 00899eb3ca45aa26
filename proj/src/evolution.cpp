#include "qme/evolution.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qme/basis.hpp"
#include "qme/threading.hpp"
#include "qme/units.hpp"

namespace qme {

using Complex = std::complex<double>;

TimeGrid TimeGrid::uniform(double t_start_ns, double t_end_ns, int n_points) {
  if (t_start_ns < 0.0) throw std::invalid_argument("TimeGrid: t_start must be >= 0");
  if (n_points < 1) throw std::invalid_argument("TimeGrid: need at least one point");
  if (n_points > 1 && t_end_ns <= t_start_ns)
    throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
  return TimeGrid{t_start_ns, t_end_ns, n_points};
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> t(n_points);
  for (int i = 0; i < n_points; ++i) t[i] = t_start_ns + i * step_ns();
  return t;
}

namespace {

struct EigSector {
  const std::vector<std::int32_t>* idx = nullptr;  // global basis indices
  Eigen::VectorXd evals;                           // rad/ns
  Eigen::MatrixXd evecs;                           // columns are eigenvectors
};

inline Eigen::VectorXcd phase_vector(const Eigen::VectorXd& evals, double t_ns) {
  Eigen::VectorXcd ph(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    const double a = -evals(i) * t_ns;
    ph(i) = Complex(std::cos(a), std::sin(a));
  }
  return ph;
}

// Dense sector block of the Hamiltonian in rad/ns.
Eigen::MatrixXd sector_matrix(const HamiltonianSpec& spec, const SectorBasis& basis, int sector) {
  const auto& states = basis.states[sector];
  const int d = static_cast<int>(states.size());
  const int n = spec.n_qubits;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < d; ++a) {
    const std::int32_t s = states[a];
    double diag = 0.0;
    for (int i = 0; i < n; ++i)
      if ((s >> i) & 1) diag += units::mhz_to_angular(spec.onsite_mhz(i));
    m(a, a) = diag;
    for (int i = 0; i < n; ++i) {
      if (!((s >> i) & 1)) continue;
      for (int j = 0; j < n; ++j) {
        if (((s >> j) & 1) || i == j) continue;
        const double g = spec.coupling_mhz(i, j);
        if (g == 0.0) continue;
        const std::int32_t s2 = s - (std::int32_t{1} << i) + (std::int32_t{1} << j);
        m(basis.local_index[s2], a) += units::mhz_to_angular(g);
      }
    }
  }
  return m;
}

void diagonalize_in_place(Eigen::MatrixXd& m, Eigen::VectorXd& evals) {
  const int d = static_cast<int>(m.rows());
  evals.resize(d);
  const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', d, m.data(), d, evals.data());
  if (info != 0) throw std::runtime_error("dsyevd failed with info = " + std::to_string(info));
}

}  // namespace

struct Propagator::Impl {
  int n_qubits = 0;
  EvolveMethod method = EvolveMethod::eigendecomposition;

  // eigendecomposition method
  std::vector<EigSector> sectors;

  // krylov method
  Eigen::SparseMatrix<Complex> h_sparse;
  bool uniform_fast_path = false;
  double g_bar_ang = 0.0;                             // uniform coupling, rad/ns
  Eigen::VectorXd diag_ang;                           // onsite minus g_bar * n_exc per state
  std::vector<std::vector<std::int32_t>> excited_of;  // per qubit: states with that bit set
  double norm_bound = 0.0;                            // spectral-radius bound, rad/ns

  void apply_hamiltonian(const StateVector& x, StateVector& y) const;
  StateVector krylov_step(const StateVector& psi, double dt_ns) const;
  StateVector krylov_propagate(StateVector psi, double dt_ns) const;
};

void Propagator::Impl::apply_hamiltonian(const StateVector& x, StateVector& y) const {
  if (!uniform_fast_path) {
    y.noalias() = h_sparse * x;
    return;
  }
  // uniform all-to-all hopping: H = g_bar (S+ S-) + diag, with the -g_bar N
  // counting term already folded into diag.
  const Eigen::Index dim = x.size();
  StateVector phi = StateVector::Zero(dim);
  for (int i = 0; i < n_qubits; ++i) {
    const std::int32_t mask = std::int32_t{1} << i;
    for (const std::int32_t s : excited_of[i]) phi(s - mask) += x(s);  // S- sweep
  }
  y.resize(dim);
  for (Eigen::Index b = 0; b < dim; ++b) y(b) = diag_ang(b) * x(b);
  for (int i = 0; i < n_qubits; ++i) {
    const std::int32_t mask = std::int32_t{1} << i;
    for (const std::int32_t s : excited_of[i]) y(s) += g_bar_ang * phi(s - mask);  // S+ sweep
  }
}

// Lanczos approximation of e^{-iH dt} psi. The caller keeps |H| dt <= 4, for
// which a 40-dimensional Krylov space is exact to machine precision.
StateVector Propagator::Impl::krylov_step(const StateVector& psi, double dt_ns) const {
  constexpr int kMaxKrylov = 40;
  const Eigen::Index dim = psi.size();
  const double nrm = psi.norm();
  if (nrm == 0.0) return psi;

  Eigen::MatrixXcd v(dim, kMaxKrylov);
  Eigen::VectorXd alpha(kMaxKrylov), beta(kMaxKrylov - 1);
  v.col(0) = psi / nrm;
  StateVector w(dim), hv(dim);
  apply_hamiltonian(v.col(0), hv);
  w = hv;
  alpha(0) = std::real(v.col(0).dot(w));
  w -= alpha(0) * v.col(0);
  int m = kMaxKrylov;
  for (int k = 1; k < kMaxKrylov; ++k) {
    const double b = w.norm();
    if (b < 1e-14) {  // happy breakdown: exact in the current span
      m = k;
      break;
    }
    beta(k - 1) = b;
    v.col(k) = w / b;
    apply_hamiltonian(v.col(k), hv);
    w = hv - beta(k - 1) * v.col(k - 1);
    alpha(k) = std::real(v.col(k).dot(w));
    w -= alpha(k) * v.col(k);
  }

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) t(k, k) = alpha(k);
  for (int k = 0; k + 1 < m; ++k) t(k, k + 1) = t(k + 1, k) = beta(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const Eigen::VectorXcd ph = phase_vector(es.eigenvalues(), dt_ns);
  Eigen::VectorXcd small =
      es.eigenvectors().cast<Complex>() *
      ph.cwiseProduct(es.eigenvectors().row(0).transpose().cast<Complex>());
  return nrm * (v.leftCols(m) * small);
}

StateVector Propagator::Impl::krylov_propagate(StateVector psi, double dt_ns) const {
  if (dt_ns == 0.0) return psi;
  const int n_sub = std::max(1, static_cast<int>(std::ceil(std::abs(dt_ns) * norm_bound / 4.0)));
  const double h = dt_ns / n_sub;
  for (int k = 0; k < n_sub; ++k) psi = krylov_step(psi, h);
  return psi;
}

Propagator Propagator::build(const HamiltonianSpec& spec, EvolveMethod method, int n_threads) {
  auto impl = std::make_shared<Impl>();
  impl->n_qubits = spec.n_qubits;
  impl->method = method;
  const auto& basis = SectorBasis::get(spec.n_qubits);

  if (method == EvolveMethod::eigendecomposition) {
    const int n_sectors = spec.n_qubits + 1;
    impl->sectors.resize(n_sectors);
    // largest blocks first so the dynamic queue balances
    std::vector<int> order(n_sectors);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return basis.dim(a) > basis.dim(b); });
    parallel_for(n_sectors, n_threads, [&](int task) {
      const int k = order[task];
      EigSector sec;
      sec.idx = &basis.states[k];
      sec.evecs = sector_matrix(spec, basis, k);
      diagonalize_in_place(sec.evecs, sec.evals);
      impl->sectors[k] = std::move(sec);
    });
    Propagator p;
    p.impl_ = std::move(impl);
    return p;
  }

  const Eigen::Index dim = Eigen::Index{1} << spec.n_qubits;
  double g_bar = 0.0;
  if (spec.coupling_is_uniform(&g_bar) && spec.n_qubits >= 2) {
    impl->uniform_fast_path = true;
    impl->g_bar_ang = units::mhz_to_angular(g_bar);
    impl->diag_ang.resize(dim);
    impl->excited_of.assign(spec.n_qubits, {});
    for (int i = 0; i < spec.n_qubits; ++i) impl->excited_of[i].reserve(dim / 2);
    double max_diag = 0.0;
    for (Eigen::Index b = 0; b < dim; ++b) {
      double d = 0.0;
      int n_exc = 0;
      for (int i = 0; i < spec.n_qubits; ++i) {
        if ((b >> i) & 1) {
          d += units::mhz_to_angular(spec.onsite_mhz(i));
          ++n_exc;
          impl->excited_of[i].push_back(static_cast<std::int32_t>(b));
        }
      }
      impl->diag_ang(b) = d - impl->g_bar_ang * n_exc;
      max_diag = std::max(max_diag, std::abs(impl->diag_ang(b)));
    }
    // |g| S+S- is bounded by |g| (N/2)(N/2 + 1) on N spins
    const double half = spec.n_qubits / 2.0;
    impl->norm_bound = std::abs(impl->g_bar_ang) * half * (half + 1.0) + max_diag;
  } else {
    impl->h_sparse = build_hamiltonian(spec).cast<Complex>();
    // exact Gershgorin bound from the assembled operator
    double bound = 0.0;
    for (int k = 0; k < impl->h_sparse.outerSize(); ++k) {
      double row = 0.0;
      for (Eigen::SparseMatrix<Complex>::InnerIterator it(impl->h_sparse, k); it; ++it)
        row += std::abs(it.value());
      bound = std::max(bound, row);
    }
    impl->norm_bound = bound;
  }
  Propagator p;
  p.impl_ = std::move(impl);
  return p;
}

int Propagator::n_qubits() const { return impl_->n_qubits; }
EvolveMethod Propagator::method() const { return impl_->method; }

double Propagator::spectral_radius() const {
  double r = 0.0;
  for (const auto& s : impl_->sectors)
    if (s.evals.size())
      r = std::max({r, std::abs(s.evals(0)), std::abs(s.evals(s.evals.size() - 1))});
  return r;
}

StateVector Propagator::apply(const StateVector& psi0, double t_ns) const {
  const Eigen::Index dim = Eigen::Index{1} << impl_->n_qubits;
  if (psi0.size() != dim) throw std::invalid_argument("Propagator::apply: state dimension mismatch");
  if (impl_->method == EvolveMethod::krylov) return impl_->krylov_propagate(psi0, t_ns);

  StateVector out(dim);
  for (const auto& sec : impl_->sectors) {
    const auto& idx = *sec.idx;
    const int d = static_cast<int>(idx.size());
    Eigen::VectorXd re(d), im(d);
    for (int a = 0; a < d; ++a) {
      re(a) = psi0(idx[a]).real();
      im(a) = psi0(idx[a]).imag();
    }
    Eigen::VectorXcd c(d);
    c.real() = sec.evecs.transpose() * re;
    c.imag() = sec.evecs.transpose() * im;
    c.array() *= phase_vector(sec.evals, t_ns).array();
    const Eigen::VectorXd cr = c.real();
    const Eigen::VectorXd ci = c.imag();
    Eigen::VectorXd rr = sec.evecs * cr;
    Eigen::VectorXd ri = sec.evecs * ci;
    for (int a = 0; a < d; ++a) out(idx[a]) = Complex(rr(a), ri(a));
  }
  return out;
}

void Propagator::evolve_observe(const StateVector& psi0, const TimeGrid& grid,
                                const SnapshotObserver& observer, int n_threads) const {
  const Eigen::Index dim = Eigen::Index{1} << impl_->n_qubits;
  if (psi0.size() != dim) throw std::invalid_argument("evolve_observe: state dimension mismatch");
  const auto times = grid.times();

  if (impl_->method == EvolveMethod::krylov) {
    StateVector psi = impl_->krylov_propagate(psi0, times[0]);
    observer(0, times[0], psi);
    for (std::size_t i = 1; i < times.size(); ++i) {
      psi = impl_->krylov_propagate(std::move(psi), times[i] - times[i - 1]);
      observer(static_cast<int>(i), times[i], psi);
    }
    return;
  }

  // Coefficients of psi0 in each sector eigenbasis, computed once.
  const int n_sectors = static_cast<int>(impl_->sectors.size());
  std::vector<Eigen::VectorXcd> coeffs(n_sectors);
  for (int k = 0; k < n_sectors; ++k) {
    const auto& sec = impl_->sectors[k];
    const auto& idx = *sec.idx;
    const int d = static_cast<int>(idx.size());
    Eigen::VectorXd re(d), im(d);
    for (int a = 0; a < d; ++a) {
      re(a) = psi0(idx[a]).real();
      im(a) = psi0(idx[a]).imag();
    }
    coeffs[k].resize(d);
    coeffs[k].real() = sec.evecs.transpose() * re;
    coeffs[k].imag() = sec.evecs.transpose() * im;
  }

  // Batch the time axis so per-sector work runs as a pair of GEMMs.
  constexpr int kChunk = 48;
  std::vector<StateVector> buffer(std::min(kChunk, grid.n_points));
  for (auto& b : buffer) b.resize(dim);
  for (int base = 0; base < grid.n_points; base += kChunk) {
    const int nt = std::min(kChunk, grid.n_points - base);
    parallel_for(n_sectors, n_threads, [&](int k) {
      const auto& sec = impl_->sectors[k];
      const auto& idx = *sec.idx;
      const int d = static_cast<int>(idx.size());
      Eigen::MatrixXd pre(d, nt), pim(d, nt);
      for (int t = 0; t < nt; ++t) {
        const Eigen::VectorXcd ph = phase_vector(sec.evals, times[base + t]);
        for (int a = 0; a < d; ++a) {
          const Complex z = coeffs[k](a) * ph(a);
          pre(a, t) = z.real();
          pim(a, t) = z.imag();
        }
      }
      const Eigen::MatrixXd rr = sec.evecs * pre;
      const Eigen::MatrixXd ri = sec.evecs * pim;
      for (int t = 0; t < nt; ++t)
        for (int a = 0; a < d; ++a) buffer[t](idx[a]) = Complex(rr(a, t), ri(a, t));
    });
    for (int t = 0; t < nt; ++t) observer(base + t, times[base + t], buffer[t]);
  }
}

std::vector<StateVector> evolve(const StateVector& psi0, const HamiltonianSpec& spec,
                                const TimeGrid& grid, EvolveMethod method, int n_threads) {
  if (std::abs(psi0.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("evolve: initial state must be unit norm");
  auto prop = Propagator::build(spec, method, n_threads);
  std::vector<StateVector> snaps(grid.n_points);
  prop.evolve_observe(
      psi0, grid, [&](int i, double, const StateVector& psi) { snaps[i] = psi; }, n_threads);
  return snaps;
}

namespace {

// Kronecker-product assembly used only by the dense oracle.
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Eigen::MatrixXcd site_operator(int n, const std::vector<std::pair<int, Eigen::Matrix2cd>>& ops) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(1, 1);
  for (int j = n - 1; j >= 0; --j) {  // qubit on bit j-1: high qubits first
    Eigen::Matrix2cd local = Eigen::Matrix2cd::Identity();
    for (const auto& [site, op] : ops)
      if (site == j) local = op;
    acc = kron(acc, local);
  }
  return acc;
}

}  // namespace

std::vector<StateVector> evolve_dense_oracle(const StateVector& psi0, const HamiltonianSpec& spec,
                                             const TimeGrid& grid) {
  const int n = spec.n_qubits;
  if (n > 10) throw std::invalid_argument("evolve_dense_oracle: N > 10 not supported");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (psi0.size() != dim) throw std::invalid_argument("evolve_dense_oracle: dimension mismatch");

  Eigen::Matrix2cd sp, sm, num;
  sp << 0, 0, 1, 0;  // |1><0|
  sm << 0, 1, 0, 0;
  num << 0, 0, 0, 1;

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    if (spec.onsite_mhz(i) != 0.0)
      h += units::mhz_to_angular(spec.onsite_mhz(i)) * site_operator(n, {{i, num}});
    for (int j = i + 1; j < n; ++j) {
      const double g = spec.coupling_mhz(i, j);
      if (g == 0.0) continue;
      h += units::mhz_to_angular(g) *
           (site_operator(n, {{i, sp}, {j, sm}}) + site_operator(n, {{i, sm}, {j, sp}}));
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  const Eigen::VectorXcd c = es.eigenvectors().adjoint() * psi0;
  std::vector<StateVector> snaps;
  snaps.reserve(grid.n_points);
  for (double t : grid.times()) {
    const Eigen::VectorXcd phased = c.cwiseProduct(phase_vector(es.eigenvalues(), t));
    snaps.push_back(es.eigenvectors() * phased);
  }
  return snaps;
}

}  // namespace qme
