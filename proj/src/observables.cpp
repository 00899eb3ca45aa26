#include "qme/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qme/basis.hpp"
#include "qme/evolution.hpp"
#include "qme/units.hpp"

namespace qme {

std::string to_string(EntropyKind kind) {
  return kind == EntropyKind::von_neumann ? "von_neumann" : "renyi2";
}

EntropyKind entropy_kind_from_string(const std::string& s) {
  if (s == "von_neumann" || s == "vn") return EntropyKind::von_neumann;
  if (s == "renyi2" || s == "r2") return EntropyKind::renyi2;
  throw std::invalid_argument("unknown entropy kind: " + s);
}

ReducedDensityMatrix partial_trace(const StateVector& psi, int n_qubits,
                                   const std::vector<int>& subsystem) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (psi.size() != dim) throw std::invalid_argument("partial_trace: state dimension mismatch");
  const int n_a = static_cast<int>(subsystem.size());
  if (n_a == 0 || n_a > n_qubits) throw std::invalid_argument("partial_trace: bad subsystem size");
  std::uint32_t seen = 0;
  for (int q : subsystem) {
    if (q < 0 || q >= n_qubits) throw std::invalid_argument("partial_trace: qubit index out of range");
    if (seen & (1u << q)) throw std::invalid_argument("partial_trace: duplicate qubit index");
    seen |= 1u << q;
  }

  // Gather the environment bit positions; iterate env x A, accumulating
  // rho[a,a'] = sum_e psi[(a,e)] conj(psi[(a',e)]).
  std::vector<int> env;
  for (int q = 0; q < n_qubits; ++q)
    if (!(seen & (1u << q))) env.push_back(q);
  const Eigen::Index da = Eigen::Index{1} << n_a;
  const Eigen::Index de = Eigen::Index{1} << env.size();

  std::vector<Eigen::Index> a_mask(da), e_mask(de);
  for (Eigen::Index a = 0; a < da; ++a) {
    Eigen::Index b = 0;
    for (int k = 0; k < n_a; ++k)
      if ((a >> k) & 1) b |= Eigen::Index{1} << subsystem[k];
    a_mask[a] = b;
  }
  for (Eigen::Index e = 0; e < de; ++e) {
    Eigen::Index b = 0;
    for (std::size_t k = 0; k < env.size(); ++k)
      if ((e >> k) & 1) b |= Eigen::Index{1} << env[k];
    e_mask[e] = b;
  }

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(da, da);
  Eigen::VectorXcd col(da);
  for (Eigen::Index e = 0; e < de; ++e) {
    for (Eigen::Index a = 0; a < da; ++a) col(a) = psi(a_mask[a] | e_mask[e]);
    rho.noalias() += col * col.adjoint();
  }
  return ReducedDensityMatrix{subsystem, std::move(rho)};
}

Eigen::MatrixXcd charge_project(const Eigen::MatrixXcd& rho) {
  const Eigen::Index d = rho.rows();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (popcount32(static_cast<std::uint32_t>(i)) == popcount32(static_cast<std::uint32_t>(j)))
        out(i, j) = rho(i, j);
  return out;
}

namespace {

Eigen::VectorXd density_eigenvalues(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  Eigen::VectorXd w = es.eigenvalues();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) < -1e-10)
      throw std::invalid_argument("entropy: density matrix not PSD, worst eigenvalue " +
                                  std::to_string(w(i)));
    if (w(i) < 0.0) w(i) = 0.0;
  }
  return w;
}

}  // namespace

double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  const Eigen::VectorXd w = density_eigenvalues(rho);
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    if (w(i) > 0.0) s -= w(i) * std::log(w(i));
  return s;
}

double renyi2_entropy(const Eigen::MatrixXcd& rho) {
  density_eigenvalues(rho);  // PSD check with the same tolerance policy
  const double purity = rho.squaredNorm();  // tr rho^2 for Hermitian rho
  return -std::log(purity);
}

double entropy(const Eigen::MatrixXcd& rho, EntropyKind kind) {
  return kind == EntropyKind::von_neumann ? von_neumann_entropy(rho) : renyi2_entropy(rho);
}

double entanglement_asymmetry(const Eigen::MatrixXcd& rho_a, EntropyKind kind) {
  return entropy(charge_project(rho_a), kind) - entropy(rho_a, kind);
}

double page_value(int n_a, int n) {
  if (n_a < 0 || n_a > n) throw std::invalid_argument("page_value: bad subsystem size");
  if (n_a == 0) return 0.0;
  const double da = std::pow(2.0, n_a);
  const double db = std::pow(2.0, n - n_a);
  return n_a * std::log(2.0) - da / (2.0 * db);
}

Eigen::VectorXd sigma_z_expectations(const StateVector& psi, int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  if (psi.size() != dim) throw std::invalid_argument("sigma_z_expectations: dimension mismatch");
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n_qubits);
  for (Eigen::Index b = 0; b < dim; ++b) {
    const double p = std::norm(psi(b));
    if (p == 0.0) continue;
    for (int i = 0; i < n_qubits; ++i) z(i) += ((b >> i) & 1) ? p : -p;
  }
  return z;
}

double imbalance(const StateVector& psi, int n_qubits) {
  const Eigen::VectorXd z = sigma_z_expectations(psi, n_qubits);
  double s = 0.0;
  for (int j = 1; j <= n_qubits; ++j) s += (j % 2 == 1 ? -1.0 : 1.0) * z(j - 1);
  return s / n_qubits;
}

LevelSpacingResult level_spacing_ratio(const Eigen::VectorXd& sorted_energies) {
  const Eigen::Index n = sorted_energies.size();
  if (n < 3) throw std::invalid_argument("level_spacing_ratio: need at least 3 levels");
  constexpr double kDegenerate = 1e-12;
  std::vector<double> gaps;
  gaps.reserve(n - 1);
  int dropped = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    const double d = sorted_energies(i) - sorted_energies(i - 1);
    if (d < -kDegenerate) throw std::invalid_argument("level_spacing_ratio: spectrum not sorted");
    if (d < kDegenerate) {
      ++dropped;
      continue;
    }
    gaps.push_back(d);
  }
  if (gaps.size() < 2)
    throw std::invalid_argument("level_spacing_ratio: too few nondegenerate spacings");
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
    sum += std::min(gaps[i], gaps[i + 1]) / std::max(gaps[i], gaps[i + 1]);
  return LevelSpacingResult{sum / static_cast<double>(gaps.size() - 1),
                            static_cast<int>(gaps.size() - 1), dropped};
}

LevelSpacingResult level_spacing_ratio(const HamiltonianSpec& spec, int sector) {
  const auto& basis = SectorBasis::get(spec.n_qubits);
  if (sector < 0 || sector > spec.n_qubits)
    throw std::invalid_argument("level_spacing_ratio: bad sector");
  if (basis.dim(sector) < 3)
    throw std::invalid_argument("level_spacing_ratio: sector dimension below 3");
  // eigenvalues only; reuse the evolution module's block assembly via a
  // one-sector propagator would pay for eigenvectors, so assemble here
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(basis.dim(sector), basis.dim(sector));
  {
    const auto& states = basis.states[sector];
    const int n = spec.n_qubits;
    for (std::size_t a = 0; a < states.size(); ++a) {
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
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return level_spacing_ratio(es.eigenvalues());
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Eigen::MatrixXd q_function(const Eigen::MatrixXcd& rho_a, const SphereGrid& grid) {
  const Eigen::Index d = rho_a.rows();
  int n_a = 0;
  while ((Eigen::Index{1} << n_a) < d) ++n_a;
  if ((Eigen::Index{1} << n_a) != d)
    throw std::invalid_argument("q_function: dimension is not a power of two");

  Eigen::MatrixXd q(grid.n_theta, grid.n_phi);
  Eigen::VectorXcd v(d);
  for (int it = 0; it < grid.n_theta; ++it) {
    const double theta = (it + 0.5) * units::kPi / grid.n_theta;
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    for (int ip = 0; ip < grid.n_phi; ++ip) {
      const double phi = (ip + 0.5) * 2.0 * units::kPi / grid.n_phi;
      // coherent spin state e^{-i phi Sz} e^{-i theta Sy} |0...0>
      const std::complex<double> a0 = std::polar(c, -phi / 2);
      const std::complex<double> a1 = std::polar(s, phi / 2);
      for (Eigen::Index b = 0; b < d; ++b) {
        std::complex<double> amp = 1.0;
        for (int k = 0; k < n_a; ++k) amp *= ((b >> k) & 1) ? a1 : a0;
        v(b) = amp;
      }
      q(it, ip) = std::real(v.dot(rho_a * v));
    }
  }
  return q;
}

Eigen::VectorXd azimuthal_profile(const Eigen::MatrixXd& q) { return q.colwise().mean(); }

double azimuthal_variance(const Eigen::MatrixXd& q) {
  const Eigen::VectorXd m = azimuthal_profile(q);
  const double mean = m.mean();
  return (m.array() - mean).square().mean();
}

int azimuthal_peak_count(const Eigen::MatrixXd& q) {
  const Eigen::VectorXd m = azimuthal_profile(q);
  const Eigen::Index n = m.size();
  if (m.maxCoeff() - m.minCoeff() <= 1e-9 * std::max(1e-300, m.maxCoeff()))
    return 0;  // flat to numerical precision
  const double thr = 0.5 * (m.maxCoeff() + m.minCoeff());
  int arcs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool above = m(i) > thr;
    const bool prev_above = m((i + n - 1) % n) > thr;
    if (above && !prev_above) ++arcs;
  }
  return arcs;
}

}  // namespace qme
