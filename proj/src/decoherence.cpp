#include "qme/decoherence.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qme/basis.hpp"
#include "qme/observables.hpp"
#include "qme/rng.hpp"
#include "qme/threading.hpp"
#include "qme/units.hpp"

namespace qme {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUsToNs = 1.0e3;
}  // namespace

NoiseSpec NoiseSpec::none(int n_qubits) {
  return NoiseSpec{Eigen::VectorXd::Constant(n_qubits, kInf),
                   Eigen::VectorXd::Constant(n_qubits, kInf)};
}

NoiseSpec NoiseSpec::uniform(double t1_us, double t2star_us, int n_qubits) {
  return NoiseSpec{Eigen::VectorXd::Constant(n_qubits, t1_us),
                   Eigen::VectorXd::Constant(n_qubits, t2star_us)};
}

NoiseSpec NoiseSpec::dephasing_only(double t2star_us, int n_qubits) {
  return NoiseSpec{Eigen::VectorXd::Constant(n_qubits, kInf),
                   Eigen::VectorXd::Constant(n_qubits, t2star_us)};
}

void NoiseSpec::validate(int n_qubits) const {
  if (t1_us.size() != n_qubits || t2star_us.size() != n_qubits)
    throw std::invalid_argument("NoiseSpec: per-qubit arrays must match n_qubits");
  for (int i = 0; i < n_qubits; ++i) {
    if (t1_us(i) <= 0.0 || t2star_us(i) <= 0.0)
      throw std::invalid_argument("NoiseSpec: times must be positive");
    const double gamma_phi = 1.0 / t2star_us(i) - 0.5 / t1_us(i);
    if (gamma_phi < -1e-12)
      throw std::invalid_argument("NoiseSpec: T2* > 2 T1 at qubit " + std::to_string(i) +
                                  " (negative pure dephasing rate)");
  }
}

Eigen::VectorXd NoiseSpec::kappa_per_ns(int n_qubits) const {
  validate(n_qubits);
  Eigen::VectorXd kappa(n_qubits);
  for (int i = 0; i < n_qubits; ++i) {
    const double gamma_phi_us = std::max(0.0, 1.0 / t2star_us(i) - 0.5 / t1_us(i));
    kappa(i) = 0.25 * gamma_phi_us / kUsToNs;
  }
  return kappa;
}

Eigen::VectorXd NoiseSpec::gamma1_per_ns(int n_qubits) const {
  validate(n_qubits);
  Eigen::VectorXd g(n_qubits);
  for (int i = 0; i < n_qubits; ++i) g(i) = t1_us(i) == kInf ? 0.0 : 1.0 / (t1_us(i) * kUsToNs);
  return g;
}

bool NoiseSpec::is_zero() const {
  for (Eigen::Index i = 0; i < t1_us.size(); ++i)
    if (t1_us(i) != kInf || t2star_us(i) != kInf) return false;
  return true;
}

double trajectory_dt_ns(const TrajectoryConfig& cfg, const HamiltonianSpec& spec) {
  if (cfg.dt_ns_override > 0.0) return cfg.dt_ns_override;
  if (cfg.dt_natural <= 0.0) throw std::invalid_argument("TrajectoryConfig: dt must be positive");
  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < spec.n_qubits; ++i)
    for (int j = i + 1; j < spec.n_qubits; ++j)
      if (spec.coupling_mhz(i, j) != 0.0) {
        sum += std::abs(spec.coupling_mhz(i, j));
        ++count;
      }
  if (count == 0) throw std::invalid_argument("trajectory_dt_ns: spec has no couplings");
  return cfg.dt_natural / units::mhz_to_angular(sum / count);
}

// ---------------------------------------------------------------------------
// Lindblad oracle

namespace {

struct LindbladGenerator {
  Eigen::SparseMatrix<std::complex<double>> h;
  Eigen::MatrixXd decay_weights;  // elementwise: dephasing + anticommutator parts
  Eigen::VectorXd gamma1;
  int n_qubits = 0;

  // L(rho) = -i[H, rho] - decay_weights .* rho + sum_i gamma_i sm_i rho sp_i
  Eigen::MatrixXcd operator()(const Eigen::MatrixXcd& rho) const {
    Eigen::MatrixXcd out = std::complex<double>(0, -1) * (h * rho - rho * h);
    out.array() -= decay_weights.array() * rho.array();
    const Eigen::Index dim = rho.rows();
    for (int i = 0; i < n_qubits; ++i) {
      if (gamma1(i) == 0.0) continue;
      const Eigen::Index mask = Eigen::Index{1} << i;
      for (Eigen::Index a = 0; a < dim; ++a) {
        if (!(a & mask)) continue;
        for (Eigen::Index b = 0; b < dim; ++b)
          if (b & mask) out(a - mask, b - mask) += gamma1(i) * rho(a, b);
      }
    }
    return out;
  }
};

}  // namespace

std::vector<Eigen::MatrixXcd> lindblad_oracle(const StateVector& psi0, const HamiltonianSpec& spec,
                                              const NoiseSpec& noise, const TimeGrid& grid) {
  const int n = spec.n_qubits;
  if (n > 8) throw std::invalid_argument("lindblad_oracle: N > 8 exceeds the density-matrix bound");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (psi0.size() != dim) throw std::invalid_argument("lindblad_oracle: dimension mismatch");
  noise.validate(n);

  LindbladGenerator gen;
  gen.h = build_hamiltonian(spec).cast<std::complex<double>>();
  gen.gamma1 = noise.gamma1_per_ns(n);
  gen.n_qubits = n;
  const Eigen::VectorXd kappa = noise.kappa_per_ns(n);
  gen.decay_weights.resize(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a) {
    for (Eigen::Index b = 0; b < dim; ++b) {
      double w = 0.0;
      for (int i = 0; i < n; ++i) {
        const double za = ((a >> i) & 1) ? 1.0 : -1.0;
        const double zb = ((b >> i) & 1) ? 1.0 : -1.0;
        w += kappa(i) * (za - zb) * (za - zb);
        w += 0.5 * gen.gamma1(i) * ((((a >> i) & 1) ? 1.0 : 0.0) + (((b >> i) & 1) ? 1.0 : 0.0));
      }
      gen.decay_weights(a, b) = w;
    }
  }

  // RK4 step from a total error budget: local error ~ (lambda dt)^5/120 per
  // step accumulates to T lambda^5 dt^4 / 120 over the run
  double rate = 0.0;
  for (int i = 0; i < n; ++i) rate = std::max({rate, 4.0 * kappa(i), gen.gamma1(i)});
  double hnorm = 0.0;
  for (int k = 0; k < gen.h.outerSize(); ++k) {
    double row = 0.0;
    for (Eigen::SparseMatrix<std::complex<double>>::InnerIterator it(gen.h, k); it; ++it)
      row += std::abs(it.value());
    hnorm = std::max(hnorm, row);
  }
  const double lambda = std::max(1e-12, 2.0 * hnorm + rate);
  const double span_total = std::max(grid.t_end_ns, 1.0);
  constexpr double kErrorBudget = 1e-10;
  const double dt_target = std::clamp(
      std::pow(kErrorBudget * 120.0 / (span_total * std::pow(lambda, 5)), 0.25), 1e-3, 2.0);

  std::vector<Eigen::MatrixXcd> out;
  out.reserve(grid.n_points);
  Eigen::MatrixXcd rho = psi0 * psi0.adjoint();
  const auto times = grid.times();
  double t = 0.0;
  for (int p = 0; p < grid.n_points; ++p) {
    const double span = times[p] - t;
    if (span > 0.0) {
      const int n_sub = std::max(1, static_cast<int>(std::ceil(span / dt_target)));
      const double h = span / n_sub;
      for (int s = 0; s < n_sub; ++s) {
        const Eigen::MatrixXcd k1 = gen(rho);
        const Eigen::MatrixXcd k2 = gen(rho + 0.5 * h * k1);
        const Eigen::MatrixXcd k3 = gen(rho + 0.5 * h * k2);
        const Eigen::MatrixXcd k4 = gen(rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      t = times[p];
    }
    out.push_back(rho);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stochastic trajectories

namespace {

struct TrajectoryEngine {
  const Propagator* prop = nullptr;
  int n_qubits = 0;
  Eigen::VectorXd kappa;   // 1/ns, per qubit (dephasing strength)
  Eigen::VectorXd gamma1;  // 1/ns, per qubit
  std::vector<int> dephasing_qubits;
  std::vector<int> damping_qubits;

  // largest per-step rate; the first-order noise update needs rate * dt small
  double max_rate() const {
    double r = 0.0;
    for (const int i : dephasing_qubits) r = std::max(r, 4.0 * kappa(i));
    for (const int i : damping_qubits) r = std::max(r, gamma1(i));
    return r;
  }

  // one fixed-size step: exact unitary substep, then the noise update
  void step(StateVector& psi, double h, Rng& rng) const {
    psi = prop->apply(psi, h);
    const Eigen::Index dim = psi.size();

    if (!dephasing_qubits.empty()) {
      // Euler-Maruyama factors 1 - kappa (z - <z>)^2 h + sqrt(2 kappa h)(z - <z>) dW
      Eigen::VectorXd zbar(n_qubits);
      for (const int i : dephasing_qubits) {
        double z = 0.0;
        for (Eigen::Index b = 0; b < dim; ++b)
          z += (((b >> i) & 1) ? 1.0 : -1.0) * std::norm(psi(b));
        zbar(i) = z;
      }
      // factor_b = 1 + c0 + sum_i c_i z_{ib}, accumulated bitwise
      double c0 = 0.0;
      Eigen::VectorXd ci = Eigen::VectorXd::Zero(n_qubits);
      for (const int i : dephasing_qubits) {
        const double xi = rng.normal();
        const double amp = std::sqrt(2.0 * kappa(i) * h) * xi;
        c0 += -kappa(i) * h * (1.0 + zbar(i) * zbar(i)) - amp * zbar(i);
        ci(i) = 2.0 * kappa(i) * h * zbar(i) + amp;
      }
      for (Eigen::Index b = 0; b < dim; ++b) {
        double f = 1.0 + c0;
        for (const int i : dephasing_qubits) f += ((b >> i) & 1) ? ci(i) : -ci(i);
        psi(b) *= f;
      }
    }

    if (!damping_qubits.empty()) {
      for (const int i : damping_qubits) {
        const Eigen::Index mask = Eigen::Index{1} << i;
        double pop = 0.0;
        for (Eigen::Index b = 0; b < dim; ++b)
          if (b & mask) pop += std::norm(psi(b));
        const double nrm2 = psi.squaredNorm();
        const double p_jump = gamma1(i) * h * (nrm2 > 0 ? pop / nrm2 : 0.0);
        if (rng.uniform() < p_jump) {
          // quantum jump: sigma^- on qubit i
          for (Eigen::Index b = 0; b < dim; ++b)
            if (!(b & mask)) psi(b) = psi(b + mask);
          for (Eigen::Index b = 0; b < dim; ++b)
            if (b & mask) psi(b) = 0.0;
        } else {
          // no-jump weight e^{-gamma h / 2} on the excited half, first order
          const double w = 1.0 - 0.5 * gamma1(i) * h;
          for (Eigen::Index b = 0; b < dim; ++b)
            if (b & mask) psi(b) *= w;
        }
      }
    }

    psi.normalize();
  }
};

TrajectoryEngine make_engine(const Propagator& prop, const NoiseSpec& noise) {
  TrajectoryEngine eng;
  eng.prop = &prop;
  eng.n_qubits = prop.n_qubits();
  eng.kappa = noise.kappa_per_ns(eng.n_qubits);
  eng.gamma1 = noise.gamma1_per_ns(eng.n_qubits);
  for (int i = 0; i < eng.n_qubits; ++i) {
    if (eng.kappa(i) > 0.0) eng.dephasing_qubits.push_back(i);
    if (eng.gamma1(i) > 0.0) eng.damping_qubits.push_back(i);
  }
  return eng;
}

}  // namespace

std::vector<StateVector> sse_trajectory(const StateVector& psi0, const Propagator& prop,
                                        const NoiseSpec& noise, double dt_ns, const TimeGrid& grid,
                                        std::uint64_t seed, std::uint64_t stream) {
  if (dt_ns <= 0.0) throw std::invalid_argument("sse_trajectory: dt must be positive");
  const TrajectoryEngine eng = make_engine(prop, noise);
  // the diffusive term wanders the norm by O(sqrt(2 kappa dt)) per step by
  // construction; what must stay small for the first-order update is rate*dt
  if (eng.max_rate() * dt_ns > 0.1)
    throw std::invalid_argument("sse_trajectory: rate*dt = " +
                                std::to_string(eng.max_rate() * dt_ns) +
                                " exceeds 0.1; reduce dt");
  Rng rng(seed, stream);
  StateVector psi = psi0;
  std::vector<StateVector> out;
  out.reserve(grid.n_points);
  const auto times = grid.times();
  double t = 0.0;
  for (int p = 0; p < grid.n_points; ++p) {
    const double span = times[p] - t;
    if (span > 0.0) {
      const int n_sub = std::max(1, static_cast<int>(std::ceil(span / dt_ns)));
      const double h = span / n_sub;
      for (int s = 0; s < n_sub; ++s) eng.step(psi, h, rng);
      t = times[p];
    }
    out.push_back(psi);
  }
  return out;
}

namespace {

// Fixed-chunk accumulation: chunk boundaries depend only on M, so the
// reduction order (and the bits of the result) are independent of the
// worker count.
constexpr int kTrajChunk = 8;

}  // namespace

TrajectoryCurves trajectory_average(const StateVector& psi0, const HamiltonianSpec& spec,
                                    const NoiseSpec& noise, const TrajectoryConfig& cfg,
                                    const TimeGrid& grid, const ObservableExtractor& extract,
                                    int n_threads) {
  if (cfg.n_trajectories < 1) throw std::invalid_argument("trajectory_average: M >= 1 required");
  const auto prop = Propagator::build(spec, EvolveMethod::eigendecomposition, n_threads);
  const double dt = trajectory_dt_ns(cfg, spec);
  const auto times = grid.times();

  // probe the observable width
  const Eigen::Index width = extract(psi0, times.front()).size();
  const int n_chunks = (cfg.n_trajectories + kTrajChunk - 1) / kTrajChunk;
  std::vector<Eigen::MatrixXd> sums(n_chunks), sqsums(n_chunks);

  parallel_for(n_chunks, n_threads, [&](int chunk) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(grid.n_points, width);
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(grid.n_points, width);
    const int lo = chunk * kTrajChunk;
    const int hi = std::min(cfg.n_trajectories, lo + kTrajChunk);
    for (int m = lo; m < hi; ++m) {
      const auto snaps = sse_trajectory(psi0, prop, noise, dt, grid, cfg.seed, m);
      for (int p = 0; p < grid.n_points; ++p) {
        const Eigen::VectorXd v = extract(snaps[p], times[p]);
        sum.row(p) += v.transpose();
        sq.row(p) += v.array().square().matrix().transpose();
      }
    }
    sums[chunk] = std::move(sum);
    sqsums[chunk] = std::move(sq);
  });

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(grid.n_points, width);
  Eigen::MatrixXd total_sq = Eigen::MatrixXd::Zero(grid.n_points, width);
  for (int c = 0; c < n_chunks; ++c) {
    total += sums[c];
    total_sq += sqsums[c];
  }
  const double m = cfg.n_trajectories;
  TrajectoryCurves out;
  out.times_ns = times;
  out.mean = total / m;
  if (cfg.n_trajectories > 1) {
    const Eigen::MatrixXd var =
        ((total_sq - total.cwiseProduct(total) / m) / (m - 1.0)).cwiseMax(0.0);
    out.std_error = (var / m).cwiseSqrt();
  } else {
    out.std_error = Eigen::MatrixXd::Zero(grid.n_points, width);
  }
  return out;
}

std::vector<Eigen::MatrixXcd> trajectory_average_density(
    const StateVector& psi0, const HamiltonianSpec& spec, const NoiseSpec& noise,
    const TrajectoryConfig& cfg, const TimeGrid& grid, const std::vector<int>& subsystem,
    int n_threads) {
  if (cfg.n_trajectories < 1) throw std::invalid_argument("trajectory_average_density: M >= 1");
  const auto prop = Propagator::build(spec, EvolveMethod::eigendecomposition, n_threads);
  const double dt = trajectory_dt_ns(cfg, spec);
  const Eigen::Index da = Eigen::Index{1} << subsystem.size();
  const int n_chunks = (cfg.n_trajectories + kTrajChunk - 1) / kTrajChunk;
  std::vector<std::vector<Eigen::MatrixXcd>> partial(n_chunks);

  parallel_for(n_chunks, n_threads, [&](int chunk) {
    std::vector<Eigen::MatrixXcd> acc(grid.n_points, Eigen::MatrixXcd::Zero(da, da));
    const int lo = chunk * kTrajChunk;
    const int hi = std::min(cfg.n_trajectories, lo + kTrajChunk);
    for (int m = lo; m < hi; ++m) {
      const auto snaps = sse_trajectory(psi0, prop, noise, dt, grid, cfg.seed, m);
      for (int p = 0; p < grid.n_points; ++p)
        acc[p] += partial_trace(snaps[p], spec.n_qubits, subsystem).rho;
    }
    partial[chunk] = std::move(acc);
  });

  std::vector<Eigen::MatrixXcd> out(grid.n_points, Eigen::MatrixXcd::Zero(da, da));
  for (int c = 0; c < n_chunks; ++c)
    for (int p = 0; p < grid.n_points; ++p) out[p] += partial[c][p];
  for (auto& rho : out) rho /= static_cast<double>(cfg.n_trajectories);
  return out;
}

}  // namespace qme
