#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ndcharge/band_solver.hpp"
#include "ndcharge/grid.hpp"
#include "ndcharge/kinetics.hpp"
#include "ndcharge/material.hpp"
#include "ndcharge/occupation.hpp"
#include "ndcharge/surface.hpp"

namespace ndcharge {

/// All tunables of a run, populated from a flat `section.key = value` file.
/// Unknown keys are rejected; referenced input paths must exist when the
/// file is loaded.
struct RunConfig {
  MaterialParams material;
  double grid_radius_nm = 20.0;
  double grid_step_nm = 0.5;
  SurfaceModel surface;
  SolverOptions solver;
  DensityProfileKind g_profile = DensityProfileKind::uniform_volume;

  std::string ref_nv_minus;  // path to the NV- reference spectrum
  std::string ref_nv_zero;   // path to the NV0 reference spectrum

  double fit_window_min_nm = 560.0;
  double fit_window_max_nm = 750.0;
  bool fit_exclude_raman = false;  // exclude 572-574 nm (diamond Raman line)
  bool fit_cap_700nm = false;      // cap the window at 700 nm (CCD etaloning)

  KineticParams kinetics_init;
  double kinetics_dwell_s = 1.0;

  std::vector<double> sweep_densities;

  RadialGrid make_grid() const { return RadialGrid(grid_radius_nm, grid_step_nm); }
};

/// Applies one key/value pair; throws std::invalid_argument on unknown keys
/// or unparseable values.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

RunConfig load_config_file(const std::filesystem::path& path);

/// Comma-separated list of non-negative, strictly increasing densities.
std::vector<double> parse_density_list(const std::string& text);

}  // namespace ndcharge
