#include "ndcharge/band_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ndcharge/constants.hpp"
#include "ndcharge/statistics.hpp"

namespace ndcharge {

namespace {

// Thomas algorithm for a tridiagonal system; lower[0] and upper[n-1] unused.
void solve_tridiagonal(std::vector<double>& lower, std::vector<double>& diag,
                       std::vector<double>& upper, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0)
      throw std::runtime_error("singular tridiagonal system");
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0)
    throw std::runtime_error("singular tridiagonal system");
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

// Geometry of the finite-volume discretization: cell faces sit halfway
// between nodes, face conductance a_j = r_{j+1/2}^2 / h couples nodes j and
// j+1, and moment_j = (r_{j+1/2}^3 - r_{j-1/2}^3)/3 is the exact integral of
// r^2 over cell j (the end cells are half cells).
struct CellGeometry {
  std::vector<double> face_conductance;  // size M
  std::vector<double> moment;            // size M+1

  explicit CellGeometry(const RadialGrid& grid) {
    const std::size_t m = grid.node_count() - 1;
    const double h = grid.step_nm;
    face_conductance.resize(m);
    moment.resize(m + 1);
    std::vector<double> face3(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double rf = grid.nodes[j] + 0.5 * h;
      face_conductance[j] = rf * rf / h;
      face3[j] = rf * rf * rf;
    }
    moment[0] = face3[0] / 3.0;
    for (std::size_t j = 1; j < m; ++j)
      moment[j] = (face3[j] - face3[j - 1]) / 3.0;
    const double r3 = grid.radius_nm * grid.radius_nm * grid.radius_nm;
    moment[m] = (r3 - face3[m - 1]) / 3.0;
  }
};

void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw std::domain_error(std::string(what) + " contains a non-finite value");
}

struct Species {
  double n_donor;       // nm^-3
  double n_nv;          // nm^-3
  double donor_level;   // eV above VBM
  double nv_level;      // eV above VBM
  double e_c;           // eV above VBM
  double kt;            // eV

  explicit Species(const MaterialParams& p)
      : n_donor(ppm_to_density(p.n_donor_ppm, p)),
        n_nv(ppm_to_density(p.n_nv_ppm, p)),
        donor_level(p.donor_level_ev()),
        nv_level(p.e_nv_transition_ev),
        e_c(p.e_gap_ev),
        kt(p.kt_ev()) {}
};

inline double rho_at(const Species& s, const MaterialParams& p, double phi,
                     double fermi) {
  // A donor is positively charged when its (shifted) level is empty.
  const double donor_plus =
      s.n_donor * fermi_occupancy(fermi - (s.donor_level + phi), s.kt);
  const double nv_minus =
      s.n_nv * fermi_occupancy(s.nv_level + phi - fermi, s.kt);
  const double n = p.n_c_nm3 * boltzmann_factor((fermi - (s.e_c + phi)) / s.kt);
  const double hole = p.n_v_nm3 * boltzmann_factor((phi - fermi) / s.kt);
  return donor_plus - nv_minus - n + hole;
}

inline double drho_dphi_at(const Species& s, const MaterialParams& p,
                           double phi, double fermi) {
  const double fd_donor =
      fermi_occupancy(fermi - (s.donor_level + phi), s.kt);
  const double fd_nv = fermi_occupancy(s.nv_level + phi - fermi, s.kt);
  const double n = p.n_c_nm3 * boltzmann_factor((fermi - (s.e_c + phi)) / s.kt);
  const double hole = p.n_v_nm3 * boltzmann_factor((phi - fermi) / s.kt);
  // All four species respond with the same sign: raising the local band
  // shift makes the charge more positive.
  return (s.n_donor * fd_donor * (1.0 - fd_donor) +
          s.n_nv * fd_nv * (1.0 - fd_nv) + n + hole) /
         s.kt;
}

}  // namespace

double ppm_to_density(double ppm, const MaterialParams& params) {
  if (ppm < 0.0) throw std::domain_error("ppm must be non-negative");
  return ppm * 1e-6 * params.atomic_density_nm3;
}

std::vector<double> charge_density(const std::vector<double>& phi_ev,
                                   double fermi_level_ev,
                                   const MaterialParams& params) {
  require_finite(phi_ev, "band shift");
  if (!std::isfinite(fermi_level_ev))
    throw std::domain_error("Fermi level is not finite");
  const Species s(params);
  std::vector<double> rho(phi_ev.size());
  for (std::size_t i = 0; i < phi_ev.size(); ++i)
    rho[i] = rho_at(s, params, phi_ev[i], fermi_level_ev);
  return rho;
}

std::vector<double> charge_density_derivative(const std::vector<double>& phi_ev,
                                              double fermi_level_ev,
                                              const MaterialParams& params) {
  require_finite(phi_ev, "band shift");
  const Species s(params);
  std::vector<double> d(phi_ev.size());
  for (std::size_t i = 0; i < phi_ev.size(); ++i)
    d[i] = drho_dphi_at(s, params, phi_ev[i], fermi_level_ev);
  return d;
}

double bulk_charge_per_area(const std::vector<double>& rho,
                            const RadialGrid& grid) {
  if (rho.size() != grid.node_count())
    throw std::invalid_argument("charge density size does not match grid");
  const CellGeometry geo(grid);
  double total = 0.0;
  for (std::size_t j = 0; j < rho.size(); ++j) total += rho[j] * geo.moment[j];
  return total / (grid.radius_nm * grid.radius_nm);
}

std::vector<double> solve_poisson_radial(const std::vector<double>& rho,
                                         const RadialGrid& grid, double eps_r,
                                         double sheet_nm2,
                                         double* neutrality_defect) {
  if (grid.node_count() < 3)
    throw std::domain_error("grid must have at least 3 nodes");
  if (rho.size() != grid.node_count())
    throw std::invalid_argument("charge density size does not match grid");
  require_finite(rho, "charge density");
  if (!std::isfinite(sheet_nm2))
    throw std::domain_error("sheet charge is not finite");

  const std::size_t n = grid.node_count();
  const std::size_t m = n - 1;
  const CellGeometry geo(grid);
  const double inv_eps = 1.0 / (eps0_e_per_ev_nm * eps_r);

  // Flux balance for cells 0..M-1 plus the gauge phi(R) = 0.  The surface
  // cell's balance is the one flux equation dropped in favor of the gauge:
  // by Gauss's law it is implied by the others exactly when the data is
  // charge neutral, which is what the sheet argument lets callers check.
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  diag[0] = -geo.face_conductance[0];
  upper[0] = geo.face_conductance[0];
  rhs[0] = rho[0] * geo.moment[0] * inv_eps;
  for (std::size_t j = 1; j < m; ++j) {
    lower[j] = geo.face_conductance[j - 1];
    diag[j] = -(geo.face_conductance[j - 1] + geo.face_conductance[j]);
    upper[j] = geo.face_conductance[j];
    rhs[j] = rho[j] * geo.moment[j] * inv_eps;
  }
  diag[m] = 1.0;  // gauge row
  rhs[m] = 0.0;

  solve_tridiagonal(lower, diag, upper, rhs);

  if (neutrality_defect)
    *neutrality_defect = bulk_charge_per_area(rho, grid) - sheet_nm2;
  return rhs;
}

double poisson_residual_norm(const std::vector<double>& phi_ev,
                             const std::vector<double>& rho,
                             const RadialGrid& grid, double eps_r) {
  const std::size_t n = grid.node_count();
  if (phi_ev.size() != n || rho.size() != n)
    throw std::invalid_argument("profile size does not match grid");
  const CellGeometry geo(grid);
  const double inv_eps = 1.0 / (eps0_e_per_ev_nm * eps_r);
  double norm = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    double flux = geo.face_conductance[j] * (phi_ev[j + 1] - phi_ev[j]);
    if (j > 0)
      flux -= geo.face_conductance[j - 1] * (phi_ev[j] - phi_ev[j - 1]);
    const double res = flux / geo.moment[j] - rho[j] * inv_eps;
    norm = std::max(norm, std::abs(res));
  }
  return norm;
}

namespace {

struct InnerSolveResult {
  bool converged = false;
  int iterations = 0;
};

// Newton iteration on the nonlinear discrete Poisson problem at fixed Fermi
// level.  The Jacobian adds -d rho/d phi to the diagonal, which keeps the
// tridiagonal system strictly diagonally dominant; per-node updates are
// clamped to stay within the basin of the exponential carrier terms.
InnerSolveResult inner_newton(std::vector<double>& phi, double fermi,
                              const Species& s, const MaterialParams& params,
                              const RadialGrid& grid, const CellGeometry& geo,
                              const SolverOptions& opts) {
  const std::size_t n = grid.node_count();
  const std::size_t m = n - 1;
  const double inv_eps = 1.0 / (eps0_e_per_ev_nm * params.eps_r);
  std::vector<double> lower(m), diag(m), upper(m), rhs(m);
  InnerSolveResult out;
  phi[m] = 0.0;  // gauge
  for (int it = 0; it < opts.max_inner; ++it) {
    for (std::size_t j = 0; j < m; ++j) {
      const double source = rho_at(s, params, phi[j], fermi) * geo.moment[j] * inv_eps;
      double flux = geo.face_conductance[j] * (phi[j + 1] - phi[j]);
      double d = -geo.face_conductance[j];
      if (j > 0) {
        flux -= geo.face_conductance[j - 1] * (phi[j] - phi[j - 1]);
        d -= geo.face_conductance[j - 1];
        lower[j] = geo.face_conductance[j - 1];
      } else {
        lower[j] = 0.0;
      }
      upper[j] = (j + 1 < m) ? geo.face_conductance[j] : 0.0;
      diag[j] = d - drho_dphi_at(s, params, phi[j], fermi) * geo.moment[j] * inv_eps;
      rhs[j] = -(flux - source);
    }
    solve_tridiagonal(lower, diag, upper, rhs);
    double max_step = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double step = std::clamp(rhs[j], -opts.newton_step_cap_ev,
                                     opts.newton_step_cap_ev);
      phi[j] += step;
      max_step = std::max(max_step, std::abs(step));
    }
    out.iterations = it + 1;
    if (max_step < opts.tol_phi_ev) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

InnerSolveResult inner_fixed_point(std::vector<double>& phi, double fermi,
                                   const Species& s,
                                   const MaterialParams& params,
                                   const RadialGrid& grid,
                                   const SolverOptions& opts) {
  InnerSolveResult out;
  phi[grid.node_count() - 1] = 0.0;
  for (int it = 0; it < opts.max_inner; ++it) {
    std::vector<double> rho(grid.node_count());
    for (std::size_t j = 0; j < rho.size(); ++j)
      rho[j] = rho_at(s, params, phi[j], fermi);
    const std::vector<double> next =
        solve_poisson_radial(rho, grid, params.eps_r, 0.0);
    double max_step = 0.0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
      const double step = opts.mixing * (next[j] - phi[j]);
      phi[j] += step;
      max_step = std::max(max_step, std::abs(step));
    }
    out.iterations = it + 1;
    if (max_step < opts.tol_phi_ev) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

BandProfile solve_selfconsistent(const MaterialParams& params,
                                 const RadialGrid& grid,
                                 const SurfaceModel& surface,
                                 const SolverOptions& opts) {
  params.validate();
  surface.validate(params.e_gap_ev);
  if (grid.node_count() < 3)
    throw std::domain_error("grid must have at least 3 nodes");

  const Species species(params);
  const CellGeometry geo(grid);
  const double fermi_max =
      opts.fermi_max_ev < 0.0 ? params.e_gap_ev : opts.fermi_max_ev;

  // Occupied acceptor sheet at a trial Fermi level; the surface node is
  // gauge-pinned so the acceptor level needs no band-shift correction.
  const auto sheet_at = [&](double fermi) {
    if (surface.mode == SurfaceMode::fully_ionized)
      return surface.acceptor_density_nm2;
    return surface.acceptor_density_nm2 *
           fermi_occupancy(surface.e_acceptor_ev - fermi, species.kt);
  };

  std::vector<double> phi(grid.node_count(), 0.0);
  bool inner_ok = true;
  const auto neutrality = [&](double fermi) {
    const InnerSolveResult r =
        opts.newton ? inner_newton(phi, fermi, species, params, grid, geo, opts)
                    : inner_fixed_point(phi, fermi, species, params, grid, opts);
    inner_ok = r.converged;
    std::vector<double> rho(grid.node_count());
    for (std::size_t j = 0; j < rho.size(); ++j)
      rho[j] = rho_at(species, params, phi[j], fermi);
    return bulk_charge_per_area(rho, grid) - sheet_at(fermi);
  };

  // Characteristic charge scale for the relative neutrality criterion.
  const double q_scale = std::max(
      {surface.acceptor_density_nm2,
       species.n_donor * grid.radius_nm / 3.0, 1e-30});

  // Establish a bracket.  The neutrality function decreases monotonically
  // with the Fermi level; when the surface layer outnumbers the donor
  // electrons the root sits below the surface VBM (hole-gas regime), so the
  // lower edge is expanded downward in steps as needed.
  if (!(opts.fermi_min_ev < fermi_max))
    throw std::invalid_argument("Fermi window is empty");
  double lo = std::max(0.0, opts.fermi_min_ev);
  double hi = fermi_max;
  double n_lo = neutrality(lo);
  while (n_lo < 0.0) {
    if (lo <= opts.fermi_min_ev + 1e-12)
      throw std::runtime_error(
          "charge neutrality bracket error: no Fermi level above the "
          "configured minimum balances the surface charge");
    lo = std::max(opts.fermi_min_ev, lo - 0.25);
    n_lo = neutrality(lo);
  }
  double n_hi = neutrality(hi);
  if (n_hi > 0.0)
    throw std::runtime_error(
        "charge neutrality bracket error: net charge is still positive at "
        "the top of the Fermi window");

  double mid = hi;
  double n_mid = n_hi;
  bool converged = false;
  int outer = 0;
  bool final_inner_ok = inner_ok;
  while (outer < opts.max_outer) {
    mid = 0.5 * (lo + hi);
    n_mid = neutrality(mid);
    final_inner_ok = inner_ok;
    ++outer;
    if (final_inner_ok && std::abs(n_mid) <= opts.neutrality_tol * q_scale &&
        (hi - lo) <= opts.tol_fermi_ev) {
      converged = true;
      break;
    }
    if (n_mid > 0.0)
      lo = mid;
    else
      hi = mid;
  }

  BandProfile profile;
  profile.phi_ev = phi;
  profile.fermi_level_ev = mid;
  profile.surface_sheet_nm2 = sheet_at(mid);
  profile.iterations = outer;
  profile.converged = converged;
  std::vector<double> rho(grid.node_count());
  for (std::size_t j = 0; j < rho.size(); ++j)
    rho[j] = rho_at(species, params, phi[j], mid);
  profile.residual_norm = poisson_residual_norm(phi, rho, grid, params.eps_r);
  return profile;
}

std::optional<double> crossover_depth(const BandProfile& profile,
                                      const RadialGrid& grid,
                                      const MaterialParams& params) {
  if (!profile.converged)
    throw std::domain_error("crossover depth requires a converged profile");
  if (profile.phi_ev.size() != grid.node_count())
    throw std::invalid_argument("profile size does not match grid");
  const double level = params.e_nv_transition_ev;
  const auto excess = [&](std::size_t j) {
    return level + profile.phi_ev[j] - profile.fermi_level_ev;
  };
  // Scan from the surface inward and report the first crossing.
  for (std::size_t j = grid.node_count(); j-- > 0;) {
    const double a = excess(j);
    if (a == 0.0) return grid.depth_nm(j);
    if (j == 0) break;
    const double b = excess(j - 1);
    if (a * b < 0.0) {
      const double t = a / (a - b);  // in (0,1)
      const double r = grid.nodes[j] - t * grid.step_nm;
      return grid.radius_nm - r;
    }
  }
  return std::nullopt;
}

}  // namespace ndcharge
