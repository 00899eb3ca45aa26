#include "qme/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qme/states.hpp"
#include "qme/units.hpp"

namespace qme {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::qme: return "QME";
    case Verdict::no_qme: return "no-QME";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

void require_same_grid(const EACurve& a, const EACurve& b) {
  if (a.times_ns.size() != b.times_ns.size())
    throw std::invalid_argument("curves have different grid lengths");
  for (std::size_t i = 0; i < a.times_ns.size(); ++i)
    if (a.times_ns[i] != b.times_ns[i])
      throw std::invalid_argument("curves have mismatched time grids");
}

}  // namespace

CrossoverReport detect_crossover(const EACurve& a, const EACurve& b, double dwell_ns) {
  require_same_grid(a, b);
  const std::size_t n = a.times_ns.size();
  if (n < 2) throw std::invalid_argument("detect_crossover: need at least two samples");

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = a.values[i] - b.values[i];

  CrossoverReport rep;
  rep.dwell_ns = dwell_ns;
  rep.initial_ordering = sign_of(diff[0]);

  // sign changes between consecutive nonzero samples; exact zeros in between
  // collapse onto the interpolated root
  std::size_t last = n;  // index of the last nonzero sample
  for (std::size_t i = 0; i < n; ++i) {
    if (diff[i] == 0.0) continue;
    if (last < n && sign_of(diff[last]) != sign_of(diff[i])) {
      const double t = a.times_ns[last] + (a.times_ns[i] - a.times_ns[last]) * diff[last] /
                                              (diff[last] - diff[i]);
      rep.crossing_times_ns.push_back(t);
    }
    last = i;
  }

  if (rep.initial_ordering == 0) {
    rep.verdict = Verdict::inconclusive;
    return rep;
  }

  // a reversal window is a maximal stretch with sign == -initial ordering
  const int flipped = -rep.initial_ordering;
  std::vector<double> bounds = rep.crossing_times_ns;
  bounds.push_back(a.times_ns.back());
  for (std::size_t c = 0; c < rep.crossing_times_ns.size(); ++c) {
    const double lo = rep.crossing_times_ns[c];
    const double hi = bounds[c + 1];
    if (hi - lo < dwell_ns) continue;
    bool all_flipped = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (a.times_ns[i] <= lo || a.times_ns[i] >= hi) continue;
      if (sign_of(diff[i]) == -flipped) {  // grazing zeros inside the window are fine
        all_flipped = false;
        break;
      }
    }
    if (all_flipped) {
      rep.reversal_window_ns = std::make_pair(lo, hi);
      rep.verdict = Verdict::qme;
      return rep;
    }
  }
  rep.verdict = Verdict::no_qme;
  return rep;
}

EACurve ensemble_average(const std::vector<EACurve>& curves, const std::vector<double>& weights) {
  if (curves.empty()) throw std::invalid_argument("ensemble_average: empty curve set");
  for (const auto& c : curves) require_same_grid(curves.front(), c);
  if (!weights.empty() && weights.size() != curves.size())
    throw std::invalid_argument("ensemble_average: weight count mismatch");

  const std::size_t n = curves.front().times_ns.size();
  const std::size_t m = curves.size();
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  if (!weights.empty()) {
    double total = 0.0;
    for (double x : weights) {
      if (x < 0.0) throw std::invalid_argument("ensemble_average: negative weight");
      total += x;
    }
    if (total <= 0.0) throw std::invalid_argument("ensemble_average: zero total weight");
    for (std::size_t k = 0; k < m; ++k) w[k] = weights[k] / total;
  }

  EACurve out;
  out.times_ns = curves.front().times_ns;
  out.entropy_kind = curves.front().entropy_kind;
  out.metadata = curves.front().metadata;
  out.metadata["ensemble_size"] = std::to_string(m);
  out.values.assign(n, 0.0);
  out.std_errors.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t k = 0; k < m; ++k) mean += w[k] * curves[k].values[i];
    out.values[i] = mean;
    if (m > 1) {
      double var = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double d = curves[k].values[i] - mean;
        var += w[k] * d * d;
      }
      // standard error of the (weighted) mean with the unbiased correction
      out.std_errors[i] = std::sqrt(var / static_cast<double>(m - 1));
    }
  }
  return out;
}

TimeGrid default_sweep_window(double g_nn_mhz) {
  // four units of dimensionless time in the convention where the
  // nearest-neighbor XX term has unit coefficient (hopping coefficient 2)
  const double t_end = 8.0 * units::natural_time_ns(g_nn_mhz);
  const int n_points = static_cast<int>(std::floor(t_end / 2.0)) + 1;  // 2 ns sampling
  return TimeGrid::uniform(0.0, t_end, n_points);
}

std::vector<IntegrabilitySweepPoint> sweep_integrability(const std::vector<double>& g_values,
                                                         IntegrabilitySweepSettings s) {
  for (double g : g_values)
    if (g < 0.0 || g > 1.0)
      throw std::invalid_argument("sweep_integrability: g values must lie in [0, 1]");
  if (s.grid.n_points <= 1) s.grid = default_sweep_window(s.g_nn_mhz);

  std::vector<IntegrabilitySweepPoint> out;
  out.reserve(g_values.size());
  for (const double g : g_values) {
    const auto spec = preset_strong_short_range(s.g_nn_mhz, s.g_nn_mhz * g, s.n_qubits);
    const auto prop = Propagator::build(spec, EvolveMethod::eigendecomposition, s.n_threads);
    IntegrabilitySweepPoint point;
    point.g = g;
    auto run = [&](double theta) {
      EACurve curve;
      curve.times_ns = s.grid.times();
      curve.values.resize(s.grid.n_points);
      curve.entropy_kind = s.entropy_kind;
      curve.metadata["theta"] = std::to_string(theta);
      curve.metadata["g_over_gn"] = std::to_string(g);
      const auto psi0 = tilted_neel(theta, s.n_qubits);
      prop.evolve_observe(
          psi0, s.grid,
          [&](int i, double, const StateVector& psi) {
            curve.values[i] = entanglement_asymmetry(
                partial_trace(psi, s.n_qubits, s.subsystem).rho, s.entropy_kind);
          },
          s.n_threads);
      return curve;
    };
    point.curve_small_theta = run(s.theta_small);
    point.curve_large_theta = run(s.theta_large);
    point.report = detect_crossover(point.curve_large_theta, point.curve_small_theta, s.dwell_ns);
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace qme
