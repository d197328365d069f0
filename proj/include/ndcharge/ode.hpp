#pragma once

#include <array>
#include <functional>

namespace ndcharge {

/// Adaptive TR-BDF2 integrator for small stiff systems (dimension 2).
/// L-stable one-step method; the error estimate comes from step doubling.
struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  double min_step_fraction = 1e-12;  // of the interval length
};

using Rhs2 = std::function<std::array<double, 2>(const std::array<double, 2>&)>;
using Jac2 =
    std::function<std::array<std::array<double, 2>, 2>(const std::array<double, 2>&)>;

/// Integrates y' = f(y) from t=0 to t=duration.  Throws std::runtime_error
/// on step failure (step size underflow or Newton breakdown).
std::array<double, 2> integrate_trbdf2(const Rhs2& f, const Jac2& jac,
                                       std::array<double, 2> y0,
                                       double duration,
                                       const OdeOptions& opts = {});

}  // namespace ndcharge
