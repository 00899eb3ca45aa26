#pragma once

#include <cmath>
#include <numbers>

namespace qme::units {

// All configuration values are frequencies f/2pi in MHz; all dynamics run in
// angular units of rad/ns. 1 MHz of f/2pi corresponds to 2pi*1e-3 rad/ns.
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kAngularPerMhz = 2.0e-3 * kPi;

constexpr double mhz_to_angular(double f_mhz) { return f_mhz * kAngularPerMhz; }
constexpr double angular_to_mhz(double w_rad_per_ns) { return w_rad_per_ns / kAngularPerMhz; }

// Full population-exchange period of a resonant two-qubit swap,
// 1/(2|g/2pi|) expressed in ns: 100 ns at g/2pi = -5 MHz.
inline double swap_period_ns(double g_mhz) { return 1.0e3 / (2.0 * std::abs(g_mhz)); }

// Natural (dimensionless) time unit of a coupling scale, 1/|g| in ns.
inline double natural_time_ns(double g_mhz) { return 1.0 / mhz_to_angular(std::abs(g_mhz)); }

}  // namespace qme::units
