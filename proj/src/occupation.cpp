#include "ndcharge/occupation.hpp"

#include <cmath>
#include <stdexcept>

#include "ndcharge/statistics.hpp"

namespace ndcharge {

double nv_minus_occupancy(double level_minus_fermi_ev, double temperature_k) {
  if (!(temperature_k > 0.0))
    throw std::invalid_argument("temperature must be > 0");
  if (!std::isfinite(level_minus_fermi_ev))
    throw std::domain_error("level offset is not finite");
  return fermi_occupancy(level_minus_fermi_ev,
                         thermal_voltage_ev(temperature_k));
}

DensityProfile DensityProfile::custom(std::vector<double> g) {
  DensityProfile p;
  p.kind = DensityProfileKind::custom;
  p.weights = std::move(g);
  return p;
}

std::vector<double> DensityProfile::node_values(const RadialGrid& grid) const {
  const std::size_t n = grid.node_count();
  std::vector<double> g(n);
  switch (kind) {
    case DensityProfileKind::uniform_volume: {
      const double r3 = grid.radius_nm * grid.radius_nm * grid.radius_nm;
      for (std::size_t j = 0; j < n; ++j)
        g[j] = 3.0 * grid.nodes[j] * grid.nodes[j] / r3;
      break;
    }
    case DensityProfileKind::uniform_depth:
      for (std::size_t j = 0; j < n; ++j) g[j] = 1.0 / grid.radius_nm;
      break;
    case DensityProfileKind::custom:
      if (weights.size() != n)
        throw std::invalid_argument("custom profile size does not match grid");
      g = weights;
      break;
  }
  return g;
}

void DensityProfile::validate(const RadialGrid& grid) const {
  if (kind != DensityProfileKind::custom) return;
  if (weights.size() != grid.node_count())
    throw std::invalid_argument("custom profile size does not match grid");
  double integral = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] < 0.0)
      throw std::invalid_argument("density profile weights must be non-negative");
    const double w =
        (j == 0 || j + 1 == weights.size()) ? 0.5 * grid.step_nm : grid.step_nm;
    integral += w * weights[j];
  }
  if (std::abs(integral - 1.0) > 1e-9)
    throw std::invalid_argument("density profile must integrate to 1 over depth");
}

double nv_minus_fraction(const BandProfile& profile, const RadialGrid& grid,
                         const MaterialParams& params,
                         const DensityProfile& g) {
  if (!profile.converged)
    throw std::domain_error("NV- fraction requires a converged profile");
  if (profile.phi_ev.size() != grid.node_count())
    throw std::invalid_argument("profile size does not match grid");
  g.validate(grid);

  const std::vector<double> gv = g.node_values(grid);
  const double kt = params.kt_ev();
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < gv.size(); ++j) {
    const double w =
        ((j == 0 || j + 1 == gv.size()) ? 0.5 : 1.0) * grid.step_nm * gv[j];
    const double occ = fermi_occupancy(
        params.e_nv_transition_ev + profile.phi_ev[j] - profile.fermi_level_ev,
        kt);
    weighted += w * occ;
    weight_sum += w;
  }
  if (!(weight_sum > 0.0))
    throw std::invalid_argument("density profile has zero weight");
  return weighted / weight_sum;
}

namespace {

void sweep_point(std::size_t i, const std::vector<double>& densities,
                 const MaterialParams& params, const RadialGrid& grid,
                 const SurfaceModel& surface_template, const SweepOptions& opts,
                 FractionCurve& out) {
  SurfaceModel surface = surface_template;
  surface.acceptor_density_nm2 = densities[i];
  try {
    BandProfile profile = solve_selfconsistent(params, grid, surface, opts.solver);
    out.converged[i] = profile.converged ? 1 : 0;
    // Report the fraction from the last iterate even when unconverged; the
    // flag column marks it as diagnostic only.
    BandProfile usable = profile;
    usable.converged = true;
    out.fractions[i] = nv_minus_fraction(usable, grid, params, opts.g);
    if (opts.keep_profiles) out.profiles[i] = std::move(profile);
  } catch (const std::exception&) {
    out.converged[i] = 0;
    out.fractions[i] = std::nan("");
  }
}

void validate_densities(const std::vector<double>& densities) {
  if (densities.empty())
    throw std::invalid_argument("density list must not be empty");
  for (std::size_t i = 0; i < densities.size(); ++i) {
    if (densities[i] < 0.0)
      throw std::invalid_argument("densities must be non-negative");
    if (i > 0 && !(densities[i] > densities[i - 1]))
      throw std::invalid_argument("densities must be strictly increasing");
  }
}

FractionCurve make_result(const std::vector<double>& densities,
                          const SweepOptions& opts) {
  FractionCurve out;
  out.densities_nm2 = densities;
  out.fractions.assign(densities.size(), 0.0);
  out.converged.assign(densities.size(), 0);
  if (opts.keep_profiles) out.profiles.resize(densities.size());
  return out;
}

void check_any_converged(const FractionCurve& out) {
  for (auto c : out.converged)
    if (c) return;
  throw std::runtime_error("no sweep point converged");
}

}  // namespace

FractionCurve sweep_surface_density(const std::vector<double>& densities_nm2,
                                    const MaterialParams& params,
                                    const RadialGrid& grid,
                                    const SurfaceModel& surface_template,
                                    const SweepOptions& opts) {
  validate_densities(densities_nm2);
  FractionCurve out = make_result(densities_nm2, opts);
  const auto count = static_cast<std::ptrdiff_t>(densities_nm2.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    sweep_point(static_cast<std::size_t>(i), densities_nm2, params, grid,
                surface_template, opts, out);
  check_any_converged(out);
  return out;
}

FractionCurve sweep_surface_density_serial(
    const std::vector<double>& densities_nm2, const MaterialParams& params,
    const RadialGrid& grid, const SurfaceModel& surface_template,
    const SweepOptions& opts) {
  validate_densities(densities_nm2);
  FractionCurve out = make_result(densities_nm2, opts);
  for (std::size_t i = 0; i < densities_nm2.size(); ++i)
    sweep_point(i, densities_nm2, params, grid, surface_template, opts, out);
  check_any_converged(out);
  return out;
}

}  // namespace ndcharge
