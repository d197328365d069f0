#include "ndcharge/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ndcharge {

namespace {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

constexpr double kGamma = 2.0 - 1.4142135623730951;  // 2 - sqrt(2)

Vec2 solve2(const Mat2& a, const Vec2& b) {
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (det == 0.0) throw std::runtime_error("singular stage system");
  return {(b[0] * a[1][1] - b[1] * a[0][1]) / det,
          (b[1] * a[0][0] - b[0] * a[1][0]) / det};
}

// Solves y - c*f(y) = rhs by Newton iteration.
bool implicit_stage(const Rhs2& f, const Jac2& jac, double c, const Vec2& rhs,
                    Vec2& y) {
  for (int it = 0; it < 30; ++it) {
    const Vec2 fy = f(y);
    const Vec2 g = {y[0] - c * fy[0] - rhs[0], y[1] - c * fy[1] - rhs[1]};
    const Mat2 jf = jac(y);
    const Mat2 jg = {{{1.0 - c * jf[0][0], -c * jf[0][1]},
                      {-c * jf[1][0], 1.0 - c * jf[1][1]}}};
    Vec2 step;
    try {
      step = solve2(jg, g);
    } catch (const std::runtime_error&) {
      return false;
    }
    y[0] -= step[0];
    y[1] -= step[1];
    const double scale = 1.0 + std::max(std::abs(y[0]), std::abs(y[1]));
    if (std::max(std::abs(step[0]), std::abs(step[1])) < 1e-13 * scale)
      return true;
  }
  return false;
}

// One TR-BDF2 step of size h from y; returns false on Newton failure.
bool trbdf2_step(const Rhs2& f, const Jac2& jac, const Vec2& y, double h,
                 Vec2& out) {
  const double g = kGamma;
  const Vec2 fy = f(y);
  // Trapezoidal substep to t + g*h.
  Vec2 yg = y;
  const double c1 = 0.5 * g * h;
  const Vec2 rhs1 = {y[0] + c1 * fy[0], y[1] + c1 * fy[1]};
  if (!implicit_stage(f, jac, c1, rhs1, yg)) return false;
  // BDF2 substep to t + h.
  const double w0 = 1.0 / (g * (2.0 - g));
  const double w1 = (1.0 - g) * (1.0 - g) * w0;
  const double c2 = (1.0 - g) / (2.0 - g) * h;
  const Vec2 rhs2 = {w0 * yg[0] - w1 * y[0], w0 * yg[1] - w1 * y[1]};
  Vec2 y1 = yg;
  if (!implicit_stage(f, jac, c2, rhs2, y1)) return false;
  out = y1;
  return true;
}

}  // namespace

std::array<double, 2> integrate_trbdf2(const Rhs2& f, const Jac2& jac,
                                       std::array<double, 2> y0,
                                       double duration,
                                       const OdeOptions& opts) {
  if (!(duration > 0.0)) return y0;
  const double h_min = duration * opts.min_step_fraction;
  double t = 0.0;
  double h = duration / 16.0;
  Vec2 y = y0;
  long steps = 0;
  while (t < duration) {
    h = std::min(h, duration - t);
    Vec2 full, half, half2;
    const bool ok = trbdf2_step(f, jac, y, h, full) &&
                    trbdf2_step(f, jac, y, 0.5 * h, half) &&
                    trbdf2_step(f, jac, half, 0.5 * h, half2);
    double err = 0.0;
    if (ok) {
      for (int i = 0; i < 2; ++i) {
        const double scale =
            opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(half2[i]));
        err = std::max(err, std::abs(half2[i] - full[i]) / (3.0 * scale));
      }
    }
    if (ok && err <= 1.0) {
      y = half2;
      t += h;
      const double growth = (err > 0.0) ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
      h *= std::clamp(growth, 0.2, 5.0);
    } else {
      h *= ok ? std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 0.5) : 0.25;
      if (h < h_min)
        throw std::runtime_error("integrator failure: step size underflow at t=" +
                                 std::to_string(t));
    }
    if (++steps > 100000000L)
      throw std::runtime_error("integrator failure: step budget exhausted");
  }
  return y;
}

}  // namespace ndcharge
