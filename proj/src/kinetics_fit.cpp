#include "ndcharge/kinetics_fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ndcharge {

namespace {

constexpr int kNp = 5;

std::vector<double> residuals(const std::array<double, kNp>& theta,
                              const PowerCurve& curve,
                              const FitOptions& options) {
  const KineticParams p = KineticParams::from_array(theta);
  const SweepResult sim = simulate_sweep(curve.power_mw, curve.dwell_s, p,
                                         options.initial_state,
                                         options.integrator_rel_tol);
  std::vector<double> r(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i)
    r[i] = sim.fractions[i] - curve.fraction[i];
  return r;
}

double ssr_of(const std::vector<double>& r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

// Central finite-difference Jacobian, one-sided at an active bound.  The
// five columns are independent sweep simulations.
void jacobian(const std::array<double, kNp>& theta, const PowerCurve& curve,
              const KineticBounds& bounds, const FitOptions& options,
              const std::vector<double>& r0, std::vector<std::array<double, kNp>>& jac) {
  const auto lo = bounds.lower.to_array(), hi = bounds.upper.to_array();
  const auto n = static_cast<std::ptrdiff_t>(curve.size());
  jac.assign(curve.size(), {});
  std::array<std::vector<double>, kNp> columns;
  bool failed[kNp] = {};
#pragma omp parallel for schedule(static) if (options.parallel_jacobian)
  for (int k = 0; k < kNp; ++k) {
    try {
      const double h = std::max(1e-6 * std::abs(theta[k]), 1e-8);
      const bool up_ok = theta[k] + h <= hi[k];
      const bool down_ok = theta[k] - h >= lo[k];
      auto tp = theta;
      std::vector<double> rp, rm;
      if (up_ok) {
        tp[k] = theta[k] + h;
        rp = residuals(tp, curve, options);
      }
      if (down_ok) {
        tp = theta;
        tp[k] = theta[k] - h;
        rm = residuals(tp, curve, options);
      }
      std::vector<double> col(curve.size());
      if (up_ok && down_ok) {
        for (std::ptrdiff_t i = 0; i < n; ++i)
          col[i] = (rp[i] - rm[i]) / (2.0 * h);
      } else if (up_ok) {
        for (std::ptrdiff_t i = 0; i < n; ++i) col[i] = (rp[i] - r0[i]) / h;
      } else if (down_ok) {
        for (std::ptrdiff_t i = 0; i < n; ++i) col[i] = (r0[i] - rm[i]) / h;
      }
      columns[k] = std::move(col);
    } catch (const std::exception&) {
      failed[k] = true;
    }
  }
  for (int k = 0; k < kNp; ++k) {
    if (failed[k]) throw std::runtime_error("Jacobian evaluation failed");
    for (std::ptrdiff_t i = 0; i < n; ++i) jac[i][k] = columns[k][i];
  }
}

// Gaussian elimination with partial pivoting for the 5x5 damped system.
bool solve5(std::array<std::array<double, kNp>, kNp> a,
            std::array<double, kNp> b, std::array<double, kNp>& x) {
  for (int c = 0; c < kNp; ++c) {
    int pivot = c;
    for (int r = c + 1; r < kNp; ++r)
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    if (a[pivot][c] == 0.0) return false;
    std::swap(a[c], a[pivot]);
    std::swap(b[c], b[pivot]);
    for (int r = c + 1; r < kNp; ++r) {
      const double w = a[r][c] / a[c][c];
      for (int cc = c; cc < kNp; ++cc) a[r][cc] -= w * a[c][cc];
      b[r] -= w * b[c];
    }
  }
  for (int r = kNp - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < kNp; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return true;
}

bool invert5(const std::array<std::array<double, kNp>, kNp>& a,
             std::array<std::array<double, kNp>, kNp>& inv) {
  for (int c = 0; c < kNp; ++c) {
    std::array<double, kNp> e{};
    e[c] = 1.0;
    std::array<double, kNp> col{};
    if (!solve5(a, e, col)) return false;
    for (int r = 0; r < kNp; ++r) inv[r][c] = col[r];
  }
  return true;
}

}  // namespace

KineticFitResult fit_kinetics(const PowerCurve& curve,
                              const KineticParams& init,
                              const KineticBounds& bounds,
                              const FitOptions& options) {
  curve.validate();
  if (curve.size() < 5)
    throw std::invalid_argument("kinetics fit needs at least 5 data points");
  init.validate();
  if (!bounds.contains(init))
    throw std::invalid_argument("initial parameters violate the bounds");

  const auto lo = bounds.lower.to_array(), hi = bounds.upper.to_array();
  auto theta = init.to_array();
  std::vector<double> r = residuals(theta, curve, options);
  double ssr = ssr_of(r);

  KineticFitResult out;
  double lambda = 1e-3;
  std::vector<std::array<double, kNp>> jac;
  std::array<std::array<double, kNp>, kNp> jtj{};
  bool have_jtj = false;

  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    jacobian(theta, curve, bounds, options, r, jac);

    std::array<double, kNp> grad{};
    for (int a = 0; a < kNp; ++a)
      for (auto& row : jtj[a]) row = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (int a = 0; a < kNp; ++a) {
        grad[a] += jac[i][a] * r[i];
        for (int b = a; b < kNp; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
      }
    }
    for (int a = 0; a < kNp; ++a)
      for (int b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
    have_jtj = true;

    double gnorm = 0.0;
    for (int a = 0; a < kNp; ++a) gnorm = std::max(gnorm, std::abs(grad[a]));
    if (gnorm <= options.gtol * std::max(1.0, ssr)) {
      out.converged = true;
      break;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      auto damped = jtj;
      for (int a = 0; a < kNp; ++a)
        damped[a][a] += lambda * std::max(jtj[a][a], 1e-12);
      std::array<double, kNp> step{};
      std::array<double, kNp> rhs{};
      for (int a = 0; a < kNp; ++a) rhs[a] = -grad[a];
      if (!solve5(damped, rhs, step)) {
        out.singular_jacobian = true;
        lambda *= 10.0;
        continue;
      }
      auto trial = theta;
      double step_rel = 0.0;
      for (int a = 0; a < kNp; ++a) {
        trial[a] = std::clamp(theta[a] + step[a], lo[a], hi[a]);
        step_rel = std::max(step_rel, std::abs(trial[a] - theta[a]) /
                                          std::max(1.0, std::abs(theta[a])));
      }
      std::vector<double> r_trial;
      double ssr_trial = std::numeric_limits<double>::infinity();
      try {
        r_trial = residuals(trial, curve, options);
        ssr_trial = ssr_of(r_trial);
      } catch (const std::exception&) {
        // leave as rejected
      }
      if (ssr_trial < ssr) {
        const double decrease = (ssr - ssr_trial) / std::max(ssr, 1e-300);
        theta = trial;
        r = std::move(r_trial);
        ssr = ssr_trial;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (decrease < options.ftol || step_rel < options.xtol)
          out.converged = true;
      } else {
        lambda *= 4.0;
        if (lambda > 1e14) break;
      }
    }
    if (!accepted || out.converged) {
      if (!accepted && !out.converged) {
        // No downhill step found; treat a tiny gradient as convergence.
        out.converged = gnorm <= 1e-6 * std::max(1.0, ssr);
      }
      break;
    }
  }

  out.params = KineticParams::from_array(theta);
  out.residual_rms = std::sqrt(ssr / static_cast<double>(curve.size()));

  // Covariance estimate sigma^2 (J^T J)^-1 at the returned parameters.
  if (!have_jtj) {
    jacobian(theta, curve, bounds, options, r, jac);
    for (int a = 0; a < kNp; ++a)
      for (auto& v : jtj[a]) v = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      for (int a = 0; a < kNp; ++a)
        for (int b = 0; b < kNp; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
  }
  const auto dof = static_cast<double>(
      curve.size() > kNp ? curve.size() - kNp : 1);
  const double sigma2 = ssr / dof;
  std::array<std::array<double, kNp>, kNp> inv{};
  if (invert5(jtj, inv)) {
    for (int a = 0; a < kNp; ++a)
      for (int b = 0; b < kNp; ++b) out.covariance[a][b] = sigma2 * inv[a][b];
  } else {
    out.singular_jacobian = true;
  }
  return out;
}

}  // namespace ndcharge
