#pragma once

#include <cstdint>
#include <vector>

#include "ndcharge/band_solver.hpp"
#include "ndcharge/grid.hpp"
#include "ndcharge/material.hpp"
#include "ndcharge/surface.hpp"

namespace ndcharge {

/// Probability that an NV defect sitting `level_minus_fermi_ev` above the
/// Fermi level holds the extra electron (is NV^-).
double nv_minus_occupancy(double level_minus_fermi_ev, double temperature_k);

enum class DensityProfileKind { uniform_volume, uniform_depth, custom };

/// Normalized NV density profile g(x) over depth.  uniform_volume weights
/// each node by its spherical shell volume (a physically uniform volume
/// density); uniform_depth is the literal flat-in-depth alternative.
struct DensityProfile {
  DensityProfileKind kind = DensityProfileKind::uniform_volume;
  std::vector<double> weights;  // g at each radial node, custom kind only

  static DensityProfile uniform_volume() { return {}; }
  static DensityProfile uniform_depth() {
    return {DensityProfileKind::uniform_depth, {}};
  }
  static DensityProfile custom(std::vector<double> g);

  /// g evaluated at every radial node of `grid`.
  std::vector<double> node_values(const RadialGrid& grid) const;
  void validate(const RadialGrid& grid) const;
};

/// Whole-particle NV^- fraction: Fermi-Dirac occupancy of the shifted
/// transition level integrated against g with the trapezoidal rule.  The
/// quadrature weights are normalized so a constant occupancy integrates to
/// itself exactly.
double nv_minus_fraction(const BandProfile& profile, const RadialGrid& grid,
                         const MaterialParams& params,
                         const DensityProfile& g = {});

/// NV^- fraction versus surface acceptor density (the simulated sensor
/// response curve).
struct FractionCurve {
  std::vector<double> densities_nm2;
  std::vector<double> fractions;
  std::vector<std::uint8_t> converged;
  std::vector<BandProfile> profiles;  // filled only when requested
};

struct SweepOptions {
  SolverOptions solver;
  DensityProfile g;
  bool keep_profiles = false;
};

/// OpenMP-parallel sweep; points are independent, results are written by
/// index, so the output is bit-identical to the serial reference.
FractionCurve sweep_surface_density(const std::vector<double>& densities_nm2,
                                    const MaterialParams& params,
                                    const RadialGrid& grid,
                                    const SurfaceModel& surface_template,
                                    const SweepOptions& opts = {});

/// Serial reference implementation, kept for testing and benchmarking.
FractionCurve sweep_surface_density_serial(
    const std::vector<double>& densities_nm2, const MaterialParams& params,
    const RadialGrid& grid, const SurfaceModel& surface_template,
    const SweepOptions& opts = {});

}  // namespace ndcharge
