#pragma once

#include <array>
#include <limits>

#include "ndcharge/kinetics.hpp"

namespace ndcharge {

struct KineticBounds {
  KineticParams lower{0.0, 0.0, 0.0, 0.0, 1e-9};
  KineticParams upper{std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};

  bool contains(const KineticParams& p) const {
    const auto x = p.to_array(), lo = lower.to_array(), hi = upper.to_array();
    for (int i = 0; i < 5; ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }
};

struct FitOptions {
  KineticState initial_state{};  // state entering the first dwell
  int max_iterations = 200;
  double ftol = 1e-14;     // relative SSR decrease
  double xtol = 1e-12;     // relative parameter step
  double gtol = 1e-10;     // gradient max-norm, scaled
  double integrator_rel_tol = 1e-8;
  bool parallel_jacobian = true;
};

struct KineticFitResult {
  KineticParams params;
  double residual_rms = 0.0;
  std::array<std::array<double, 5>, 5> covariance{};
  bool converged = false;
  bool singular_jacobian = false;
  int iterations = 0;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of the rate parameters to a
/// measured power curve, simulated in the curve's acquisition order.  The
/// Jacobian uses central finite differences; its columns are independent
/// simulations and run under OpenMP.
KineticFitResult fit_kinetics(const PowerCurve& curve,
                              const KineticParams& init,
                              const KineticBounds& bounds = {},
                              const FitOptions& options = {});

}  // namespace ndcharge
