#include <cmath>
#include <complex>

#include "doctest.h"
#include "qme/decoherence.hpp"
#include "qme/evolution.hpp"
#include "qme/model.hpp"
#include "qme/observables.hpp"
#include "qme/rng.hpp"
#include "qme/states.hpp"
#include "qme/units.hpp"

using namespace qme;
using Complex = std::complex<double>;

TEST_CASE("noise spec validation and rates") {
  CHECK_THROWS_AS(NoiseSpec::uniform(1.0, 3.0, 2).validate(2), std::invalid_argument);  // T2* > 2 T1
  CHECK_THROWS_AS(NoiseSpec::uniform(-1.0, 0.5, 2).validate(2), std::invalid_argument);
  CHECK_THROWS_AS(NoiseSpec::uniform(1.0, 1.0, 2).validate(3), std::invalid_argument);

  auto noise = NoiseSpec::uniform(20.0, 1.0, 3);
  // gamma_phi = 1/T2* - 1/(2 T1) in 1/us; kappa = gamma_phi/4 in 1/ns
  const double gamma_phi = (1.0 / 1.0 - 0.5 / 20.0) * 1e-3;
  CHECK(noise.kappa_per_ns(3)(0) == doctest::Approx(gamma_phi / 4.0).epsilon(1e-12));
  CHECK(noise.gamma1_per_ns(3)(1) == doctest::Approx(1.0 / 20.0e3).epsilon(1e-12));
  CHECK(!noise.is_zero());
  CHECK(NoiseSpec::none(3).is_zero());
}

TEST_CASE("wiener increments have the contracted mean and variance") {
  Rng rng(99);
  const int n = 10000;
  const double dt = 0.37;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dw = std::sqrt(dt) * rng.normal();
    sum += dw;
    sumsq += dw * dw;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 3.0 * std::sqrt(dt / n));
  CHECK(var == doctest::Approx(dt).epsilon(0.05));
}

TEST_CASE("lindblad oracle: single-qubit pure dephasing decays coherence at gamma_phi") {
  // d rho = -kappa [Z,[Z,rho]] gives rho01(t) = rho01(0) e^{-4 kappa t}; with
  // kappa = gamma_phi/4 that is e^{-gamma_phi t}
  const double t2 = 0.4;  // us
  auto noise = NoiseSpec::dephasing_only(t2, 1);
  auto spec = HamiltonianSpec::make(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  const auto psi0 = tilted_ferromagnet(units::kPi / 2, 1);
  const auto grid = TimeGrid::uniform(0.0, 300.0, 4);
  const auto rhos = lindblad_oracle(psi0, spec, noise, grid);
  const double gamma_phi = 1e-3 / t2;
  const double kappa = noise.kappa_per_ns(1)(0);
  for (int p = 0; p < 4; ++p) {
    const double t = grid.times()[p];
    CHECK(std::abs(rhos[p](0, 1)) == doctest::Approx(0.5 * std::exp(-gamma_phi * t)).epsilon(1e-6));
    CHECK(std::abs(rhos[p](0, 1)) == doctest::Approx(0.5 * std::exp(-4.0 * kappa * t)).epsilon(1e-6));
    CHECK(std::abs(rhos[p].trace().real() - 1.0) < 1e-10);
  }
}

TEST_CASE("lindblad oracle: single-qubit relaxation empties the excited state") {
  const double t1 = 15.0;  // us
  auto noise = NoiseSpec{Eigen::VectorXd::Constant(1, t1),
                         Eigen::VectorXd::Constant(1, 2.0 * t1)};  // no pure dephasing
  auto spec = HamiltonianSpec::make(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  StateVector excited = StateVector::Zero(2);
  excited(1) = 1.0;
  const auto grid = TimeGrid::uniform(0.0, 2000.0, 3);
  const auto rhos = lindblad_oracle(excited, spec, noise, grid);
  for (int p = 0; p < 3; ++p) {
    const double t = grid.times()[p];
    CHECK(rhos[p](1, 1).real() == doctest::Approx(std::exp(-t / (t1 * 1e3))).epsilon(1e-7));
  }
}

TEST_CASE("lindblad oracle reduces to unitary evolution without noise") {
  auto spec = preset_intermediate(-2.0, 4);
  const auto psi0 = tilted_neel(0.9, 4);
  const auto grid = TimeGrid::uniform(0.0, 150.0, 4);
  const auto rhos = lindblad_oracle(psi0, spec, NoiseSpec::none(4), grid);
  const auto snaps = evolve_dense_oracle(psi0, spec, grid);
  for (int p = 0; p < 4; ++p) {
    const Eigen::MatrixXcd pure = snaps[p] * snaps[p].adjoint();
    CHECK((rhos[p] - pure).norm() < 1e-9);
  }
  CHECK_THROWS_AS(lindblad_oracle(tilted_neel(0.1, 9), preset_intermediate(-2.0, 9),
                                  NoiseSpec::none(9), grid),
                  std::invalid_argument);
}

TEST_CASE("sse trajectory: kappa = 0 path equals unitary evolution") {
  auto spec = preset_strong_short_range(-5.0, 0.5, 4);
  const auto prop = Propagator::build(spec);
  const auto psi0 = tilted_neel(units::kPi / 4, 4);
  const auto grid = TimeGrid::uniform(0.0, 120.0, 5);
  const auto traj = sse_trajectory(psi0, prop, NoiseSpec::none(4), 2.0, grid, 7);
  const auto exact = evolve(psi0, spec, grid);
  for (int p = 0; p < 5; ++p) CHECK((traj[p] - exact[p]).norm() < 1e-9);
}

TEST_CASE("single-qubit dephasing trajectories average to the analytic decay") {
  const double t2 = 0.25;  // us, strong dephasing
  auto noise = NoiseSpec::dephasing_only(t2, 1);
  auto spec = HamiltonianSpec::make(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  const auto psi0 = tilted_ferromagnet(units::kPi / 2, 1);
  const auto grid = TimeGrid::uniform(0.0, 200.0, 3);
  TrajectoryConfig cfg;
  cfg.n_trajectories = 600;
  cfg.seed = 12;
  cfg.dt_ns_override = 2.0;  // no coupling scale on a single qubit
  const auto rhos = trajectory_average_density(psi0, spec, noise, cfg, grid, {0}, 2);
  const double gamma_phi = 1e-3 / t2;
  for (int p = 0; p < 3; ++p) {
    const double t = grid.times()[p];
    const double expected = 0.5 * std::exp(-gamma_phi * t);
    CHECK(std::abs(rhos[p](0, 1)) == doctest::Approx(expected).epsilon(0.12));
    CHECK(std::abs(rhos[p].trace().real() - 1.0) < 1e-8);
  }
}

TEST_CASE("trajectory averages converge to the lindblad oracle") {
  auto spec = preset_intermediate(-2.0, 3);
  auto noise = NoiseSpec::dephasing_only(0.6, 3);
  const auto psi0 = tilted_ferromagnet(units::kPi / 2, 3);
  const auto grid = TimeGrid::uniform(0.0, 150.0, 2);
  const auto oracle = lindblad_oracle(psi0, spec, noise, grid).back();
  const std::vector<int> all{0, 1, 2};
  double prev = 1e9;
  for (const int m : {8, 64, 512}) {
    TrajectoryConfig cfg;
    cfg.n_trajectories = m;
    cfg.seed = 5;
    cfg.dt_natural = 0.05;
    const auto rho = trajectory_average_density(psi0, spec, noise, cfg, grid, all, 2).back();
    const double dist = trace_distance(rho, oracle);
    CHECK(dist < prev + 0.02);  // shrinking up to Monte-Carlo noise
    prev = dist;
    // physicality of the averaged state
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-6);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-8);
  }
  CHECK(prev < 0.06);
}

TEST_CASE("trajectory averaging is deterministic across worker counts") {
  auto spec = preset_intermediate(-2.0, 3);
  auto noise = NoiseSpec::uniform(18.0, 1.2, 3);
  const auto psi0 = tilted_neel(units::kPi / 2, 3);
  const auto grid = TimeGrid::uniform(0.0, 100.0, 6);
  TrajectoryConfig cfg;
  cfg.n_trajectories = 24;
  cfg.seed = 31;
  auto extract = [](const StateVector& psi, double) {
    Eigen::VectorXd v(1);
    v(0) = entanglement_asymmetry(partial_trace(psi, 3, {0, 1}).rho, EntropyKind::von_neumann);
    return v;
  };
  const auto a = trajectory_average(psi0, spec, noise, cfg, grid, extract, 1);
  const auto b = trajectory_average(psi0, spec, noise, cfg, grid, extract, 4);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.std_error - b.std_error).cwiseAbs().maxCoeff() == 0.0);
  // M = 1 with no noise reproduces the closed-system observable exactly
  TrajectoryConfig single;
  single.n_trajectories = 1;
  const auto c =
      trajectory_average(psi0, spec, NoiseSpec::none(3), single, grid, extract, 1);
  const auto exact = evolve(psi0, spec, grid);
  for (int p = 0; p < grid.n_points; ++p)
    CHECK(c.mean(p, 0) == doctest::Approx(extract(exact[p], 0.0)(0)).epsilon(1e-9));
  CHECK(c.std_error.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("oversized noise step is rejected") {
  // kappa dt of order one breaks the first-order update; must throw
  auto spec = HamiltonianSpec::make(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  auto noise = NoiseSpec::dephasing_only(0.0005, 1);  // gamma_phi = 2/ns
  const auto prop = Propagator::build(spec);
  const auto psi0 = tilted_ferromagnet(units::kPi / 2, 1);
  CHECK_THROWS_AS(
      sse_trajectory(psi0, prop, noise, 50.0, TimeGrid::uniform(0.0, 100.0, 2), 3),
      std::invalid_argument);
}

TEST_CASE("natural time step conversion") {
  TrajectoryConfig cfg;  // dt = 0.15 natural units
  auto spec = preset_intermediate(-2.0, 4);
  CHECK(trajectory_dt_ns(cfg, spec) ==
        doctest::Approx(0.15 / units::mhz_to_angular(2.0)).epsilon(1e-12));
  cfg.dt_natural = 0.0;
  CHECK_THROWS_AS(trajectory_dt_ns(cfg, spec), std::invalid_argument);
}
