#pragma once

#include <optional>
#include <string>
#include <vector>

namespace qme {

// Circuit parameters for two transmons coupled through a shared bus
// resonator, an optional tunable coupler, and a direct capacitance.
// Capacitances in fF, mode frequencies as f/2pi in GHz.
struct CouplerParams {
  double c1c_fF = 0.0;
  double c2c_fF = 0.0;
  double cc_fF = 0.0;
  double omega_c_GHz = 0.0;
};

struct CircuitParams {
  double c1_fF = 0.0;
  double c2_fF = 0.0;
  double c1r_fF = 0.0;
  double c2r_fF = 0.0;
  double c12_fF = 0.0;
  double cr1_fF = 0.0;  // effective resonator capacitance at position 1
  double cr2_fF = 0.0;
  int k_sign = +1;      // sign of cos(beta x_1)/cos(beta x_2); |k| = sqrt(cr1/cr2)
  double omega1_GHz = 0.0;
  double omega2_GHz = 0.0;
  double omega_r_GHz = 0.0;
  std::optional<CouplerParams> coupler;

  // Positivity and k_sign checks (throws); returns hierarchy warnings
  // (C_j, C_r >> C_jr >> C_12) without failing.
  std::vector<std::string> validate() const;
};

struct BareCouplings {
  double g1r_GHz = 0.0;
  double g2r_GHz = 0.0;  // carries the k/|k| sign
  double g12_GHz = 0.0;  // direct coupling, (1 + eta) enhanced
  double eta = 0.0;
  double g1c_GHz = 0.0;  // zero without a coupler
  double g2c_GHz = 0.0;
};

BareCouplings bare_couplings(const CircuitParams& p);

struct EffectiveCoupling {
  double total_MHz = 0.0;
  double resonator_term_MHz = 0.0;
  double coupler_term_MHz = 0.0;
  double direct_MHz = 0.0;
  std::vector<std::string> warnings;  // dispersive-validity notes
};

// Schrieffer-Wolff effective qubit-qubit coupling
// g12_eff = g1r g2r / 2 (1/D1r + 1/D2r - 1/S1r - 1/S2r) + coupler term + g12.
EffectiveCoupling effective_coupling(const CircuitParams& p);

struct DressedFrequencies {
  double omega1_GHz = 0.0;
  double omega2_GHz = 0.0;
  std::vector<std::string> warnings;
};

DressedFrequencies dressed_frequencies(const CircuitParams& p);

// Exact normal-mode frequencies of the quadratic (harmonic) circuit model,
// ascending. Used as the brute-force check of the dispersive formulas: the
// qubit-qubit splitting at omega1 = omega2 equals 2 |g12_eff| in the
// dispersive regime.
std::vector<double> normal_mode_frequencies(const CircuitParams& p);

}  // namespace qme
