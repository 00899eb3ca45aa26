#include <cmath>

#include "doctest.h"
#include "qme/analysis.hpp"
#include "qme/lmg.hpp"
#include "qme/units.hpp"

using namespace qme;

namespace {

EACurve line(const std::vector<double>& t, double a, double b) {
  EACurve c;
  c.times_ns = t;
  for (double x : t) c.values.push_back(a + b * x);
  return c;
}

std::vector<double> grid_ns(double t_end, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t_end * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("identical curves are inconclusive") {
  const auto t = grid_ns(200.0, 41);
  const auto a = line(t, 1.0, -0.001);
  const auto rep = detect_crossover(a, a, 20.0);
  CHECK(rep.verdict == Verdict::inconclusive);
  CHECK(rep.crossing_times_ns.empty());
  CHECK(rep.initial_ordering == 0);
}

TEST_CASE("straight lines cross exactly under linear interpolation") {
  const auto t = grid_ns(200.0, 41);
  const auto a = line(t, 2.0, -0.01);  // falls
  const auto b = line(t, 1.0, 0.0);    // flat
  const auto rep = detect_crossover(a, b, 20.0);
  REQUIRE(rep.crossing_times_ns.size() == 1);
  CHECK(rep.crossing_times_ns[0] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(rep.initial_ordering == 1);
  CHECK(rep.verdict == Verdict::qme);
  REQUIRE(rep.reversal_window_ns.has_value());
  CHECK(rep.reversal_window_ns->first == doctest::Approx(100.0));

  // swapping the inputs flips the ordering, keeps the crossing times
  const auto swapped = detect_crossover(b, a, 20.0);
  CHECK(swapped.initial_ordering == -1);
  CHECK(swapped.crossing_times_ns == rep.crossing_times_ns);
  CHECK(swapped.verdict == Verdict::qme);
}

TEST_CASE("short-lived reversals are rejected by the dwell") {
  // cross down at 100 ns and recross up at 112 ns
  const auto t = grid_ns(300.0, 301);
  EACurve a;
  a.times_ns = t;
  EACurve b = line(t, 0.0, 0.0);
  for (double x : t) a.values.push_back(x < 100.0 ? 1.0 : (x < 112.0 ? -1.0 : 1.0));
  CHECK(detect_crossover(a, b, 20.0).verdict == Verdict::no_qme);
  CHECK(detect_crossover(a, b, 5.0).verdict == Verdict::qme);
}

TEST_CASE("grids must match") {
  const auto a = line(grid_ns(100.0, 11), 1.0, 0.0);
  const auto b = line(grid_ns(100.0, 21), 0.0, 0.0);
  CHECK_THROWS_AS(detect_crossover(a, b, 10.0), std::invalid_argument);
}

TEST_CASE("lmg closed-form curves give a qme verdict") {
  const double g_ang = units::mhz_to_angular(-2.0);
  const double t_ea = units::kPi / std::abs(g_ang);
  const auto t = grid_ns(2.0 * t_ea, 501);
  EACurve big, small;
  big.times_ns = small.times_ns = t;
  for (double x : t) {
    big.values.push_back(lmg_renyi2_ea(units::kPi / 2, 14, 3, g_ang, x));
    small.values.push_back(lmg_renyi2_ea(units::kPi / 4, 14, 3, g_ang, x));
  }
  const auto rep = detect_crossover(big, small, 20.0);
  CHECK(rep.verdict == Verdict::qme);
  REQUIRE(!rep.crossing_times_ns.empty());
  CHECK(rep.crossing_times_ns.front() > 0.0);
  CHECK(rep.crossing_times_ns.front() < t_ea / 2.0);
}

TEST_CASE("verdict is stable under grid refinement") {
  const double g_ang = units::mhz_to_angular(-2.0);
  const double t_ea = units::kPi / std::abs(g_ang);
  auto curves_at = [&](int n) {
    const auto t = grid_ns(2.0 * t_ea, n);
    EACurve big, small;
    big.times_ns = small.times_ns = t;
    for (double x : t) {
      big.values.push_back(lmg_renyi2_ea(units::kPi / 2, 12, 3, g_ang, x));
      small.values.push_back(lmg_renyi2_ea(units::kPi / 4, 12, 3, g_ang, x));
    }
    return detect_crossover(big, small, 20.0);
  };
  const auto coarse = curves_at(251);
  const auto fine = curves_at(501);
  CHECK(coarse.verdict == fine.verdict);
  const double coarse_step = 2.0 * t_ea / 250.0;
  CHECK(std::abs(coarse.crossing_times_ns.front() - fine.crossing_times_ns.front()) < coarse_step);
}

TEST_CASE("ensemble averaging") {
  const auto t = grid_ns(100.0, 11);
  const auto zero = line(t, 0.0, 0.0);
  const auto one = line(t, 1.0, 0.0);

  const auto single = ensemble_average({one});
  CHECK(single.values == one.values);
  for (double e : single.std_errors) CHECK(e == 0.0);

  const auto mean = ensemble_average({zero, one});
  for (double v : mean.values) CHECK(v == doctest::Approx(0.5));
  for (double e : mean.std_errors) CHECK(e == doctest::Approx(0.5));  // sd/sqrt(2) of {0,1}

  // permutation invariance (bit-identical)
  const auto ab = ensemble_average({zero, one});
  const auto ba = ensemble_average({one, zero});
  for (std::size_t i = 0; i < ab.values.size(); ++i) CHECK(ab.values[i] == ba.values[i]);

  // weighted average
  const auto weighted = ensemble_average({zero, one}, {1.0, 3.0});
  for (double v : weighted.values) CHECK(v == doctest::Approx(0.75));

  CHECK_THROWS_AS(ensemble_average({}), std::invalid_argument);
  CHECK_THROWS_AS(ensemble_average({zero, one}, {1.0}), std::invalid_argument);
}

TEST_CASE("integrability sweep on a small chain") {
  // N = 8 keeps this fast; the physics mirrors the N = 14 acceptance run:
  // integrable limit shows the crossover, strong mixing does not
  IntegrabilitySweepSettings s;
  s.n_qubits = 8;
  s.theta_small = units::kPi / 4;
  s.theta_large = units::kPi / 2;
  s.n_threads = 2;
  const auto points = sweep_integrability({0.0, 0.25}, s);
  REQUIRE(points.size() == 2);
  CHECK(points[0].report.verdict == Verdict::qme);
  CHECK(points[0].report.initial_ordering == 1);
  CHECK(points[1].report.initial_ordering == 1);

  CHECK_THROWS_AS(sweep_integrability({1.5}, s), std::invalid_argument);
}
