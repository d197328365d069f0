#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ndcharge/grid.hpp"
#include "ndcharge/material.hpp"
#include "ndcharge/surface.hpp"

namespace ndcharge {

// Sign conventions used throughout the solver
// -------------------------------------------
// phi is the rigid band-edge shift in eV: every electron level moves to
// E + phi(r).  In these units the Poisson equation for a spherically
// symmetric charge density rho (in e/nm^3, positive charge positive) reads
//
//   (1/r^2) d/dr ( r^2 dphi/dr ) = rho / (eps0 * eps_r),
//
// so a positive bulk charge bends all levels upward toward the surface.
// The gauge is phi(R) = 0: energies are quoted against the unshifted
// (surface) band edges.  An occupied acceptor sheet of density sigma
// (nm^-2) carries charge -sigma, and with a field-free exterior Gauss's
// law fixes dphi/dr(R^-) = +sigma / (eps0 * eps_r).

/// Converged electrostatic solution.
struct BandProfile {
  std::vector<double> phi_ev;     // band shift per radial node
  double fermi_level_ev = 0.0;    // global Fermi level above the unshifted VBM
  double surface_sheet_nm2 = 0.0; // occupied acceptor areal density
  double residual_norm = 0.0;     // max-norm PDE residual of the final phi
  int iterations = 0;             // outer (Fermi bisection) iterations
  bool converged = false;
};

struct SolverOptions {
  double tol_phi_ev = 1e-8;       // inner-loop stopping: max |delta phi|
  double tol_fermi_ev = 1e-6;     // outer bisection bracket width
  double neutrality_tol = 1e-7;   // relative charge-balance target
  int max_inner = 500;
  int max_outer = 100;
  bool newton = true;             // linearized-charge Newton inner loop
  double mixing = 0.3;            // damping for the fixed-point inner loop
  double newton_step_cap_ev = 0.25;  // per-node update clamp
  double fermi_min_ev = -1.0;     // bisection bracket, may dip below the VBM
  double fermi_max_ev = -1.0;     // < 0 means "use the band gap"
};

/// Signed charge density rho(r) in e/nm^3 for a given band shift and Fermi
/// level: ionized donors, NV^- acceptors, and Boltzmann carriers.
std::vector<double> charge_density(const std::vector<double>& phi_ev,
                                   double fermi_level_ev,
                                   const MaterialParams& params);

/// d rho / d phi at each node (positive for all four species).
std::vector<double> charge_density_derivative(const std::vector<double>& phi_ev,
                                              double fermi_level_ev,
                                              const MaterialParams& params);

/// Solves the linear radial Poisson problem for a fixed charge density.
///
/// Finite-volume second-order discretization; regularity (zero flux) at
/// r = 0 and the gauge phi(R) = 0.  For charge-neutral data
/// (integral of rho + sheet charge = 0) the discrete surface flux equals
/// the sheet value, i.e. the exterior is field-free.  `sheet_nm2` is the
/// occupied acceptor density; if `neutrality_defect` is non-null it
/// receives (bulk charge per area) - sheet, the Gauss-law mismatch.
std::vector<double> solve_poisson_radial(const std::vector<double>& rho,
                                         const RadialGrid& grid, double eps_r,
                                         double sheet_nm2,
                                         double* neutrality_defect = nullptr);

/// Self-consistent band bending: outer bisection on the Fermi level against
/// global charge neutrality, inner solve of the nonlinear Poisson problem
/// at fixed Fermi level.
BandProfile solve_selfconsistent(const MaterialParams& params,
                                 const RadialGrid& grid,
                                 const SurfaceModel& surface,
                                 const SolverOptions& opts = {});

/// Depth (radius - r) at which the shifted NV(-/0) level crosses the Fermi
/// level, interpolated linearly between nodes; nullopt when no crossing.
std::optional<double> crossover_depth(const BandProfile& profile,
                                      const RadialGrid& grid,
                                      const MaterialParams& params);

/// Total bulk charge per surface area (e/nm^2) using the same cell moments
/// as the discretization, for Gauss-law bookkeeping.
double bulk_charge_per_area(const std::vector<double>& rho,
                            const RadialGrid& grid);

/// Max-norm residual of the discrete Poisson operator applied to phi
/// against rho/(eps0*eps_r), in eV/nm^2.
double poisson_residual_norm(const std::vector<double>& phi_ev,
                             const std::vector<double>& rho,
                             const RadialGrid& grid, double eps_r);

}  // namespace ndcharge
