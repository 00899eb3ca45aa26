#include "qme/basis.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace qme {

SectorBasis::SectorBasis(int n) : n_qubits(n) {
  if (n < 1 || n > 24) throw std::invalid_argument("SectorBasis: n_qubits out of range [1, 24]");
  const std::int32_t dim = std::int32_t{1} << n;
  states.assign(n + 1, {});
  local_index.assign(dim, 0);
  for (std::int32_t b = 0; b < dim; ++b) {
    const int k = popcount32(static_cast<std::uint32_t>(b));
    local_index[b] = static_cast<std::int32_t>(states[k].size());
    states[k].push_back(b);
  }
}

const SectorBasis& SectorBasis::get(int n_qubits) {
  static std::mutex mu;
  static std::map<int, SectorBasis> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n_qubits);
  if (it == cache.end()) it = cache.emplace(n_qubits, SectorBasis(n_qubits)).first;
  return it->second;
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (k == 0 || k == n) return 0.0;
  double s = 0.0;
  for (int i = 1; i <= k; ++i) s += std::log(static_cast<double>(n - k + i)) - std::log(static_cast<double>(i));
  return s;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(std::exp(log_binomial(n, k)));
}

}  // namespace qme
