#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace ndcharge {

// Three-state charge model under illumination at power P (mW):
//
//   d[NV-]/dt = beta P^2 [NV0] + gamma P tau [NV0] - alpha P^2 [NV-]
//   d tau /dt = alpha P^2 [NV-] (1 - tau/C) - gamma P tau [NV0] - delta tau
//
// with [NV0] = 1 - [NV-] and tau the filled-trap reservoir (in units of the
// NV population, capacity C).  Two-photon ionization and recombination scale
// as P^2, the one-photon-assisted trap-to-NV transfer as P, and delta is the
// dark trap release rate.

struct KineticParams {
  double alpha = 1.0;         // ionization, s^-1 mW^-2
  double beta = 0.02;         // recombination, s^-1 mW^-2
  double gamma = 30.0;        // trap->NV transfer, s^-1 mW^-1
  double delta = 5.0;         // dark trap release, s^-1
  double trap_capacity = 1.0; // reservoir size relative to the NV population

  void validate() const {
    if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || delta < 0.0)
      throw std::invalid_argument("rate coefficients must be non-negative");
    if (!(trap_capacity > 0.0))
      throw std::invalid_argument("trap capacity must be > 0");
  }

  std::array<double, 5> to_array() const {
    return {alpha, beta, gamma, delta, trap_capacity};
  }
  static KineticParams from_array(const std::array<double, 5>& a) {
    return {a[0], a[1], a[2], a[3], a[4]};
  }
};

struct KineticState {
  double nv_minus = 0.0;
  double trap = 0.0;
};

/// Measured NV^- fraction versus laser power, acquisition order preserved.
struct PowerCurve {
  std::vector<double> power_mw;
  std::vector<double> fraction;
  double dwell_s = 1.0;

  std::size_t size() const { return power_mw.size(); }
  void validate() const;
};

/// Rate equations and their Jacobian at state (nv_minus, trap).
std::array<double, 2> kinetic_rhs(const std::array<double, 2>& y,
                                  double power_mw, const KineticParams& p);
std::array<std::array<double, 2>, 2> kinetic_jacobian(
    const std::array<double, 2>& y, double power_mw, const KineticParams& p);

struct SteadyState {
  double fraction = 0.0;
  double trap = 0.0;
};

/// Joint stationary point of the rate system at fixed power, from the
/// closed-form quadratic with a Newton polish.
SteadyState steady_state(double power_mw, const KineticParams& params);
double steady_state_fraction(double power_mw, const KineticParams& params);

struct SweepResult {
  std::vector<double> fractions;  // NV^- fraction at the end of each dwell
  std::vector<double> traps;
  KineticState final_state;
};

/// Integrates the rate system through the power sequence, holding each
/// power for `dwell_s`; state carries over between steps, which is what
/// produces the memory effect.
SweepResult simulate_sweep(std::span<const double> powers_mw, double dwell_s,
                           const KineticParams& params,
                           KineticState initial = {}, double rel_tol = 1e-8);

/// Loop area between the descending and ascending branches of a
/// non-monotone power sequence (positive when the descending branch lies
/// above); 0 for monotone sequences.
double hysteresis_area(std::span<const double> powers_mw,
                       std::span<const double> fractions);

}  // namespace ndcharge
