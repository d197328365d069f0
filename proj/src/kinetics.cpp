#include "ndcharge/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ndcharge/ode.hpp"

namespace ndcharge {

void PowerCurve::validate() const {
  if (power_mw.size() != fraction.size())
    throw std::invalid_argument("power and fraction lengths differ");
  if (power_mw.empty()) throw std::invalid_argument("power curve is empty");
  if (!(dwell_s > 0.0)) throw std::invalid_argument("dwell must be > 0");
  for (std::size_t i = 0; i < power_mw.size(); ++i) {
    if (!(power_mw[i] > 0.0))
      throw std::invalid_argument("powers must be > 0");
    if (fraction[i] < 0.0 || fraction[i] > 1.0)
      throw std::invalid_argument("fractions must lie in [0, 1]");
  }
}

std::array<double, 2> kinetic_rhs(const std::array<double, 2>& y,
                                  double power_mw, const KineticParams& p) {
  const double a = p.alpha * power_mw * power_mw;
  const double b = p.beta * power_mw * power_mw;
  const double g = p.gamma * power_mw;
  const double nv = y[0], tau = y[1];
  const double nv0 = 1.0 - nv;
  return {b * nv0 + g * tau * nv0 - a * nv,
          a * nv * (1.0 - tau / p.trap_capacity) - g * tau * nv0 -
              p.delta * tau};
}

std::array<std::array<double, 2>, 2> kinetic_jacobian(
    const std::array<double, 2>& y, double power_mw, const KineticParams& p) {
  const double a = p.alpha * power_mw * power_mw;
  const double b = p.beta * power_mw * power_mw;
  const double g = p.gamma * power_mw;
  const double nv = y[0], tau = y[1];
  return {{{-b - g * tau - a, g * (1.0 - nv)},
           {a * (1.0 - tau / p.trap_capacity) + g * tau,
            -a * nv / p.trap_capacity - g * (1.0 - nv) - p.delta}}};
}

namespace {

// Stationary trap occupancy for a given NV^- fraction.
double stationary_trap(double nv, double a, double g, double delta, double c) {
  const double denom = a * nv / c + g * (1.0 - nv) + delta;
  if (denom == 0.0) return 0.0;  // trap equation degenerates to 0 = 0
  return a * nv / denom;
}

double rhs_norm(const std::array<double, 2>& y, double power,
                const KineticParams& p) {
  const auto r = kinetic_rhs(y, power, p);
  return std::max(std::abs(r[0]), std::abs(r[1]));
}

}  // namespace

SteadyState steady_state(double power_mw, const KineticParams& params) {
  params.validate();
  if (!(power_mw > 0.0)) throw std::invalid_argument("power must be > 0");
  if (params.alpha == 0.0 && params.beta == 0.0)
    throw std::domain_error(
        "indeterminate steady state: no ionization or recombination channel");

  const double a = params.alpha * power_mw * power_mw;
  const double b = params.beta * power_mw * power_mw;
  const double g = params.gamma * power_mw;
  const double d = params.delta;
  const double c = params.trap_capacity;

  // Eliminating the trap balance leaves a quadratic in the NV^- fraction y:
  // (A y - B (1-y)) (delta + A y / C) = G B (1-y)^2.
  const double a2 = (a + b) * a / c - g * b;
  const double a1 = (a + b) * d - a * b / c + 2.0 * g * b;
  const double a0 = -b * (d + g);

  std::vector<double> candidates;
  const double scale = std::max({std::abs(a2), std::abs(a1), std::abs(a0)});
  if (std::abs(a2) <= 1e-14 * scale) {
    if (a1 != 0.0) candidates.push_back(-a0 / a1);
  } else {
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (a1 + std::copysign(sq, a1));
      if (q != 0.0) {
        candidates.push_back(q / a2);
        candidates.push_back(a0 / q);
      } else {
        candidates.push_back(0.0);
      }
    }
  }

  const double rate_scale = std::max({a, b, g, d, 1.0});
  SteadyState best;
  double best_norm = std::numeric_limits<double>::infinity();
  for (double y : candidates) {
    if (y < -1e-9 || y > 1.0 + 1e-9) continue;
    y = std::clamp(y, 0.0, 1.0);
    const double tau = stationary_trap(y, a, g, d, c);
    const double norm = rhs_norm({y, tau}, power_mw, params);
    if (norm < best_norm) {
      best_norm = norm;
      best = {y, tau};
    }
  }

  // Robust fallback: the combined residual h(y) = dy/dt at (y, tau*(y)) is
  // continuous with h(0) >= 0 >= h(1), so bisection always has a root.
  if (!(best_norm < 1e-6 * rate_scale)) {
    double lo = 0.0, hi = 1.0;
    const auto h_of = [&](double y) {
      const double tau = stationary_trap(y, a, g, d, c);
      return kinetic_rhs({y, tau}, power_mw, params)[0];
    };
    for (int it = 0; it < 200; ++it) {
      const double midy = 0.5 * (lo + hi);
      if (h_of(midy) > 0.0)
        lo = midy;
      else
        hi = midy;
    }
    const double y = 0.5 * (lo + hi);
    best = {y, stationary_trap(y, a, g, d, c)};
    best_norm = rhs_norm({y, best.trap}, power_mw, params);
  }

  // Newton polish to machine-level stationarity.
  std::array<double, 2> y{best.fraction, best.trap};
  for (int it = 0; it < 4; ++it) {
    const auto r = kinetic_rhs(y, power_mw, params);
    const auto j = kinetic_jacobian(y, power_mw, params);
    const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if (det == 0.0) break;
    const double dy0 = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
    const double dy1 = (r[1] * j[0][0] - r[0] * j[1][0]) / det;
    y[0] -= dy0;
    y[1] -= dy1;
  }
  y[0] = std::clamp(y[0], 0.0, 1.0);
  y[1] = std::clamp(y[1], 0.0, params.trap_capacity);
  if (rhs_norm(y, power_mw, params) <= best_norm)
    best = {y[0], y[1]};
  return best;
}

double steady_state_fraction(double power_mw, const KineticParams& params) {
  return steady_state(power_mw, params).fraction;
}

SweepResult simulate_sweep(std::span<const double> powers_mw, double dwell_s,
                           const KineticParams& params, KineticState initial,
                           double rel_tol) {
  params.validate();
  if (powers_mw.empty()) throw std::invalid_argument("power sequence is empty");
  if (!(dwell_s > 0.0)) throw std::invalid_argument("dwell must be > 0");

  SweepResult out;
  out.fractions.reserve(powers_mw.size());
  out.traps.reserve(powers_mw.size());
  std::array<double, 2> y{initial.nv_minus, initial.trap};
  OdeOptions opts;
  opts.rel_tol = rel_tol;
  for (std::size_t i = 0; i < powers_mw.size(); ++i) {
    const double power = powers_mw[i];
    if (!(power > 0.0)) throw std::invalid_argument("powers must be > 0");
    const Rhs2 f = [&](const std::array<double, 2>& s) {
      return kinetic_rhs(s, power, params);
    };
    const Jac2 jac = [&](const std::array<double, 2>& s) {
      return kinetic_jacobian(s, power, params);
    };
    try {
      y = integrate_trbdf2(f, jac, y, dwell_s, opts);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("step " + std::to_string(i) + ": " + e.what());
    }
    y[0] = std::clamp(y[0], 0.0, 1.0);
    y[1] = std::clamp(y[1], 0.0, params.trap_capacity);
    out.fractions.push_back(y[0]);
    out.traps.push_back(y[1]);
  }
  out.final_state = {y[0], y[1]};
  return out;
}

double hysteresis_area(std::span<const double> powers_mw,
                       std::span<const double> fractions) {
  if (powers_mw.size() != fractions.size())
    throw std::invalid_argument("power and fraction lengths differ");
  if (powers_mw.size() < 3) return 0.0;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < powers_mw.size(); ++i)
    if (powers_mw[i] > powers_mw[peak]) peak = i;
  if (peak == 0 || peak + 1 == powers_mw.size()) return 0.0;  // monotone

  // Interpolate a branch at power p (branch given as ordered points).
  struct Branch {
    std::vector<double> p, f;
  };
  const auto make_branch = [&](std::size_t begin, std::size_t end, bool reverse) {
    Branch b;
    for (std::size_t i = begin; i < end; ++i) {
      b.p.push_back(powers_mw[i]);
      b.f.push_back(fractions[i]);
    }
    if (reverse) {
      std::reverse(b.p.begin(), b.p.end());
      std::reverse(b.f.begin(), b.f.end());
    }
    return b;
  };
  const Branch asc = make_branch(0, peak + 1, false);
  const Branch desc = make_branch(peak, powers_mw.size(), true);

  const double lo = std::max(asc.p.front(), desc.p.front());
  const double hi = std::min(asc.p.back(), desc.p.back());
  if (!(hi > lo)) return 0.0;

  std::vector<double> grid;
  for (double p : asc.p)
    if (p >= lo && p <= hi) grid.push_back(p);
  for (double p : desc.p)
    if (p >= lo && p <= hi) grid.push_back(p);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const auto interp = [](const Branch& b, double p) {
    const auto it = std::lower_bound(b.p.begin(), b.p.end(), p);
    const auto k = static_cast<std::size_t>(it - b.p.begin());
    if (k < b.p.size() && b.p[k] == p) return b.f[k];
    const double t = (p - b.p[k - 1]) / (b.p[k] - b.p[k - 1]);
    return (1.0 - t) * b.f[k - 1] + t * b.f[k];
  };

  double area = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double d0 = interp(desc, grid[i - 1]) - interp(asc, grid[i - 1]);
    const double d1 = interp(desc, grid[i]) - interp(asc, grid[i]);
    area += 0.5 * (d0 + d1) * (grid[i] - grid[i - 1]);
  }
  return area;
}

}  // namespace ndcharge
