#pragma once

#include <algorithm>
#include <cmath>

namespace ndcharge {

// Fermi-Dirac occupancy 1 / (1 + exp((E - E_F)/kT)), overflow-safe: the
// exponential is always taken of a non-positive argument, so arguments of
// thousands of kT saturate cleanly to 0 or 1.
inline double fermi_occupancy(double level_minus_fermi_ev, double kt_ev) {
  const double x = level_minus_fermi_ev / kt_ev;
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  const double e = std::exp(x);
  return 1.0 / (1.0 + e);
}

// exp with the argument capped to keep intermediate charge densities finite
// while the solver is far from the solution.
inline double boltzmann_factor(double exponent) {
  return std::exp(std::min(exponent, 700.0));
}

}  // namespace ndcharge
