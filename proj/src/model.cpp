#include "qme/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qme/basis.hpp"
#include "qme/rng.hpp"
#include "qme/units.hpp"

namespace qme {

HamiltonianSpec HamiltonianSpec::make(Eigen::MatrixXd coupling_mhz, Eigen::VectorXd onsite_mhz,
                                      std::string label) {
  const auto n = coupling_mhz.rows();
  if (n < 1) throw std::invalid_argument("HamiltonianSpec: empty coupling matrix");
  if (coupling_mhz.cols() != n)
    throw std::invalid_argument("HamiltonianSpec: coupling matrix must be square");
  if (onsite_mhz.size() != n)
    throw std::invalid_argument("HamiltonianSpec: onsite vector length " +
                                std::to_string(onsite_mhz.size()) + " does not match n_qubits " +
                                std::to_string(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (coupling_mhz(i, i) != 0.0)
      throw std::invalid_argument("HamiltonianSpec: nonzero diagonal coupling at index " +
                                  std::to_string(i));
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (coupling_mhz(i, j) != coupling_mhz(j, i))
        throw std::invalid_argument("HamiltonianSpec: coupling matrix not symmetric at (" +
                                    std::to_string(i) + "," + std::to_string(j) + ")");
    }
  }
  HamiltonianSpec spec;
  spec.n_qubits = static_cast<int>(n);
  spec.coupling_mhz = std::move(coupling_mhz);
  spec.onsite_mhz = std::move(onsite_mhz);
  spec.label = std::move(label);
  return spec;
}

HamiltonianSpec HamiltonianSpec::with_onsite(Eigen::VectorXd onsite) const {
  HamiltonianSpec out = *this;
  if (onsite.size() != n_qubits)
    throw std::invalid_argument("with_onsite: wrong vector length");
  out.onsite_mhz = std::move(onsite);
  return out;
}

bool HamiltonianSpec::coupling_is_uniform(double* value) const {
  if (n_qubits < 2) return false;
  const double g = coupling_mhz(0, 1);
  for (int i = 0; i < n_qubits; ++i)
    for (int j = i + 1; j < n_qubits; ++j)
      if (coupling_mhz(i, j) != g) return false;
  if (value) *value = g;
  return true;
}

HamiltonianSpec preset_strong_short_range(double g_nn_mhz, double g_lr_mhz, int n_qubits) {
  if (g_nn_mhz == 0.0) throw std::invalid_argument("preset_strong_short_range: g_N must be nonzero");
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(n_qubits, n_qubits, g_lr_mhz);
  g.diagonal().setZero();
  for (int i = 0; i + 1 < n_qubits; ++i) g(i, i + 1) = g(i + 1, i) = g_nn_mhz;
  auto spec = HamiltonianSpec::make(std::move(g), Eigen::VectorXd::Zero(n_qubits),
                                    g_lr_mhz == 0.0 ? "open_xx_chain" : "strong_short_range");
  if (g_lr_mhz != 0.0) spec.coupling_ratio = std::abs(g_nn_mhz / g_lr_mhz);
  return spec;
}

HamiltonianSpec preset_intermediate(double g_bar_mhz, int n_qubits) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(n_qubits, n_qubits, g_bar_mhz);
  g.diagonal().setZero();
  auto spec =
      HamiltonianSpec::make(std::move(g), Eigen::VectorXd::Zero(n_qubits), "uniform_all_to_all");
  spec.coupling_ratio = 1.0;
  return spec;
}

HamiltonianSpec perturb_couplings(const HamiltonianSpec& spec, double relative_spread,
                                  std::uint64_t seed) {
  if (relative_spread < 0.0 || relative_spread >= 1.0)
    throw std::invalid_argument("perturb_couplings: spread must lie in [0, 1)");
  Rng rng(seed);
  HamiltonianSpec out = spec;
  for (int i = 0; i < spec.n_qubits; ++i)
    for (int j = i + 1; j < spec.n_qubits; ++j) {
      const double f = 1.0 + rng.uniform(-relative_spread, relative_spread);
      out.coupling_mhz(i, j) *= f;
      out.coupling_mhz(j, i) = out.coupling_mhz(i, j);
    }
  out.label = spec.label.empty() ? "perturbed" : spec.label + "_perturbed";
  return out;
}

PotentialProfile PotentialProfile::resonant() { return {}; }

PotentialProfile PotentialProfile::linear(double w_mhz) {
  PotentialProfile p;
  p.kind = Kind::linear;
  p.gradient_mhz = w_mhz;
  return p;
}

PotentialProfile PotentialProfile::disorder(double delta_z, double g_bar_mhz, std::uint64_t seed) {
  PotentialProfile p;
  p.kind = Kind::disorder;
  p.delta_z = delta_z;
  p.g_bar_mhz = g_bar_mhz;
  p.seed = seed;
  return p;
}

Eigen::VectorXd onsite_profile(const PotentialProfile& profile, int n_qubits) {
  switch (profile.kind) {
    case PotentialProfile::Kind::resonant:
      return Eigen::VectorXd::Zero(n_qubits);
    case PotentialProfile::Kind::linear: {
      Eigen::VectorXd h(n_qubits);
      const double mid = 0.5 * (n_qubits + 1);
      for (int j = 1; j <= n_qubits; ++j) h(j - 1) = profile.gradient_mhz * (mid - j);
      return h;
    }
    case PotentialProfile::Kind::disorder:
      throw std::invalid_argument("onsite_profile: disorder kind requires sample_disorder");
  }
  throw std::logic_error("onsite_profile: bad kind");
}

Eigen::VectorXd sample_disorder(const PotentialProfile& profile, int n_qubits,
                                std::uint64_t realization_index) {
  if (profile.kind != PotentialProfile::Kind::disorder)
    throw std::invalid_argument("sample_disorder: profile kind is not disorder");
  const double half_width = profile.delta_z * std::abs(profile.g_bar_mhz);
  Rng rng(profile.seed, realization_index);
  Eigen::VectorXd h(n_qubits);
  for (int i = 0; i < n_qubits; ++i) h(i) = rng.uniform(-half_width, half_width);
  return h;
}

Eigen::SparseMatrix<double> build_hamiltonian(const HamiltonianSpec& spec) {
  const int n = spec.n_qubits;
  const std::int32_t dim = std::int32_t{1} << n;
  std::vector<Eigen::Triplet<double>> trip;
  // hopping g_ij moves one excitation from i to j; on-site term counts excitations
  for (std::int32_t b = 0; b < dim; ++b) {
    double diag = 0.0;
    for (int i = 0; i < n; ++i)
      if ((b >> i) & 1) diag += units::mhz_to_angular(spec.onsite_mhz(i));
    if (diag != 0.0) trip.emplace_back(b, b, diag);
    for (int i = 0; i < n; ++i) {
      if (!((b >> i) & 1)) continue;
      for (int j = 0; j < n; ++j) {
        if (i == j || ((b >> j) & 1)) continue;
        const double g = spec.coupling_mhz(i, j);
        if (g == 0.0) continue;
        const std::int32_t b2 = b - (std::int32_t{1} << i) + (std::int32_t{1} << j);
        trip.emplace_back(b2, b, units::mhz_to_angular(g));
      }
    }
  }
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(trip.begin(), trip.end());
  h.makeCompressed();
  return h;
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_matrix: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_matrix: no data in " + path.string());
  const std::size_t cols = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != cols) throw std::runtime_error("load_matrix: ragged rows in " + path.string());
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << m(i, j);
    }
    out << '\n';
  }
}

}  // namespace qme
