#include "qme/coupling.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace qme {

namespace {

constexpr double kDispersiveThreshold = 0.3;  // warn above |g/Delta| = 0.3

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string("CircuitParams: ") + name + " must be positive");
}

}  // namespace

std::vector<std::string> CircuitParams::validate() const {
  require_positive(c1_fF, "c1");
  require_positive(c2_fF, "c2");
  require_positive(c1r_fF, "c1r");
  require_positive(c2r_fF, "c2r");
  require_positive(c12_fF, "c12");
  require_positive(cr1_fF, "cr1");
  require_positive(cr2_fF, "cr2");
  require_positive(omega1_GHz, "omega1");
  require_positive(omega2_GHz, "omega2");
  require_positive(omega_r_GHz, "omega_r");
  if (k_sign != 1 && k_sign != -1)
    throw std::invalid_argument("CircuitParams: k_sign must be +1 or -1");
  if (coupler) {
    require_positive(coupler->c1c_fF, "c1c");
    require_positive(coupler->c2c_fF, "c2c");
    require_positive(coupler->cc_fF, "cc");
    require_positive(coupler->omega_c_GHz, "omega_c");
  }
  std::vector<std::string> warnings;
  const double big = std::min({c1_fF, c2_fF, cr1_fF, cr2_fF});
  const double mid = std::max(c1r_fF, c2r_fF);
  if (!(big > 3.0 * mid))
    warnings.push_back("capacitance hierarchy C_j, C_r >> C_jr is weak; formulas assume it");
  if (!(std::min(c1r_fF, c2r_fF) > 3.0 * c12_fF))
    warnings.push_back("capacitance hierarchy C_jr >> C_12 is weak; formulas assume it");
  return warnings;
}

BareCouplings bare_couplings(const CircuitParams& p) {
  p.validate();
  BareCouplings g;
  const double k_over_abs = static_cast<double>(p.k_sign);
  g.g1r_GHz = 0.5 * p.c1r_fF / std::sqrt(p.c1_fF * p.cr1_fF) * std::sqrt(p.omega1_GHz * p.omega_r_GHz);
  g.g2r_GHz = 0.5 * k_over_abs * p.c2r_fF / std::sqrt(p.c2_fF * p.cr2_fF) *
              std::sqrt(p.omega2_GHz * p.omega_r_GHz);
  g.eta = k_over_abs * p.c1r_fF * p.c2r_fF / (p.c12_fF * std::sqrt(p.cr1_fF * p.cr2_fF));
  if (p.coupler) {
    // same capacitive form as the qubit-resonator couplings, no position sign
    g.g1c_GHz = 0.5 * p.coupler->c1c_fF / std::sqrt(p.c1_fF * p.coupler->cc_fF) *
                std::sqrt(p.omega1_GHz * p.coupler->omega_c_GHz);
    g.g2c_GHz = 0.5 * p.coupler->c2c_fF / std::sqrt(p.c2_fF * p.coupler->cc_fF) *
                std::sqrt(p.omega2_GHz * p.coupler->omega_c_GHz);
    // three-path direct coupling: resonator, coupler, and plain C12 routes
    const double num = k_over_abs * p.c1r_fF * p.c2r_fF / std::sqrt(p.cr1_fF * p.cr2_fF) +
                       p.coupler->c1c_fF * p.coupler->c2c_fF / p.coupler->cc_fF + p.c12_fF;
    g.g12_GHz = 0.5 * num / std::sqrt(p.c1_fF * p.c2_fF) * std::sqrt(p.omega1_GHz * p.omega2_GHz);
  } else {
    g.g12_GHz = 0.5 * (1.0 + g.eta) * p.c12_fF / std::sqrt(p.c1_fF * p.c2_fF) *
                std::sqrt(p.omega1_GHz * p.omega2_GHz);
  }
  return g;
}

namespace {

struct ModePath {
  double g1 = 0.0, g2 = 0.0;  // qubit-mediator couplings, GHz
  double omega = 0.0;         // mediator frequency, GHz
};

double dispersive_sum(const ModePath& m, double w1, double w2, std::vector<std::string>* warnings,
                      const char* label) {
  const double d1 = w1 - m.omega, d2 = w2 - m.omega;
  const double s1 = w1 + m.omega, s2 = w2 + m.omega;
  if (d1 == 0.0 || d2 == 0.0)
    throw std::invalid_argument(std::string("effective_coupling: zero detuning to ") + label);
  if (warnings) {
    if (std::abs(m.g1 / d1) > kDispersiveThreshold || std::abs(m.g2 / d2) > kDispersiveThreshold)
      warnings->push_back(std::string("dispersive approximation unreliable: |g/Delta| > 0.3 for ") +
                          label);
  }
  return 0.5 * m.g1 * m.g2 * (1.0 / d1 + 1.0 / d2 - 1.0 / s1 - 1.0 / s2);
}

double lamb_shift(double g, double omega_q, double omega_m) {
  const double d = omega_q - omega_m, s = omega_q + omega_m;
  if (d == 0.0) throw std::invalid_argument("dressed_frequencies: zero detuning");
  return g * g * (1.0 / d - 1.0 / s);
}

}  // namespace

EffectiveCoupling effective_coupling(const CircuitParams& p) {
  auto warnings = p.validate();
  const BareCouplings g = bare_couplings(p);
  EffectiveCoupling out;
  out.resonator_term_MHz =
      1.0e3 * dispersive_sum({g.g1r_GHz, g.g2r_GHz, p.omega_r_GHz}, p.omega1_GHz, p.omega2_GHz,
                             &warnings, "bus resonator");
  if (p.coupler)
    out.coupler_term_MHz =
        1.0e3 * dispersive_sum({g.g1c_GHz, g.g2c_GHz, p.coupler->omega_c_GHz}, p.omega1_GHz,
                               p.omega2_GHz, &warnings, "coupler");
  out.direct_MHz = 1.0e3 * g.g12_GHz;
  out.total_MHz = out.resonator_term_MHz + out.coupler_term_MHz + out.direct_MHz;
  out.warnings = std::move(warnings);
  return out;
}

DressedFrequencies dressed_frequencies(const CircuitParams& p) {
  auto warnings = p.validate();
  const BareCouplings g = bare_couplings(p);
  DressedFrequencies out;
  out.omega1_GHz = p.omega1_GHz + lamb_shift(g.g1r_GHz, p.omega1_GHz, p.omega_r_GHz);
  out.omega2_GHz = p.omega2_GHz + lamb_shift(g.g2r_GHz, p.omega2_GHz, p.omega_r_GHz);
  if (p.coupler) {
    out.omega1_GHz += lamb_shift(g.g1c_GHz, p.omega1_GHz, p.coupler->omega_c_GHz);
    out.omega2_GHz += lamb_shift(g.g2c_GHz, p.omega2_GHz, p.coupler->omega_c_GHz);
  }
  out.warnings = std::move(warnings);
  return out;
}

std::vector<double> normal_mode_frequencies(const CircuitParams& p) {
  p.validate();
  const BareCouplings g = bare_couplings(p);
  // Quadratic-form model: H = sum w (q^2 + p^2)/2 + 2 sum g p_l p_m, so the
  // squared normal frequencies are the eigenvalues of D^(1/2) B D^(1/2) with
  // B = D + 2G. Modes ordered (qubit1, qubit2, resonator[, coupler]).
  const int n = p.coupler ? 4 : 3;
  Eigen::VectorXd w(n);
  w(0) = p.omega1_GHz;
  w(1) = p.omega2_GHz;
  w(2) = p.omega_r_GHz;
  if (p.coupler) w(3) = p.coupler->omega_c_GHz;
  Eigen::MatrixXd gmat = Eigen::MatrixXd::Zero(n, n);
  gmat(0, 1) = gmat(1, 0) = g.g12_GHz;
  gmat(0, 2) = gmat(2, 0) = g.g1r_GHz;
  gmat(1, 2) = gmat(2, 1) = g.g2r_GHz;
  if (p.coupler) {
    gmat(0, 3) = gmat(3, 0) = g.g1c_GHz;
    gmat(1, 3) = gmat(3, 1) = g.g2c_GHz;
  }
  const Eigen::VectorXd sq = w.cwiseSqrt();
  Eigen::MatrixXd b = w.asDiagonal();
  b += 2.0 * gmat;
  const Eigen::MatrixXd sym = sq.asDiagonal() * b * sq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  std::vector<double> modes(n);
  for (int i = 0; i < n; ++i) {
    const double v = es.eigenvalues()(i);
    if (v <= 0.0) throw std::runtime_error("normal_mode_frequencies: unstable quadratic form");
    modes[i] = std::sqrt(v);
  }
  return modes;
}

}  // namespace qme
