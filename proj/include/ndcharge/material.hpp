#pragma once

#include <stdexcept>

#include "ndcharge/constants.hpp"

namespace ndcharge {

/// Physical constants of the diamond/defect system. Energies are measured
/// from the unshifted valence-band maximum unless noted otherwise.
struct MaterialParams {
  double eps_r = 5.7;                 // relative permittivity
  double e_gap_ev = 5.47;             // band gap
  double e_nv_transition_ev = 2.8;    // NV(-/0) level above the VBM
  double e_donor_ionization_ev = 1.7; // donor level below the CBM
  double n_donor_ppm = 100.0;         // substitutional nitrogen, ppm of sites
  double n_nv_ppm = 1.0;              // NV concentration, ppm of sites
  double atomic_density_nm3 = 176.0;  // diamond lattice sites per nm^3
  double n_c_nm3 = 0.1;               // effective CB density of states
  double n_v_nm3 = 0.027;             // effective VB density of states
  double temperature_k = 300.0;

  // Donor level above the VBM.
  double donor_level_ev() const { return e_gap_ev - e_donor_ionization_ev; }
  double kt_ev() const { return thermal_voltage_ev(temperature_k); }

  void validate() const {
    if (!(eps_r > 0.0)) throw std::invalid_argument("eps_r must be > 0");
    if (!(e_gap_ev > 0.0)) throw std::invalid_argument("band gap must be > 0");
    if (!(e_nv_transition_ev > 0.0 && e_nv_transition_ev < e_gap_ev))
      throw std::invalid_argument("NV transition level must lie inside the gap");
    if (!(e_donor_ionization_ev > 0.0 && e_donor_ionization_ev < e_gap_ev))
      throw std::invalid_argument("donor ionization energy must lie inside the gap");
    if (n_donor_ppm < 0.0 || n_nv_ppm < 0.0)
      throw std::invalid_argument("concentrations must be non-negative");
    if (n_nv_ppm > n_donor_ppm)
      throw std::invalid_argument("NV concentration cannot exceed donor concentration");
    if (!(atomic_density_nm3 > 0.0) || !(n_c_nm3 > 0.0) || !(n_v_nm3 > 0.0))
      throw std::invalid_argument("densities must be > 0");
    if (!(temperature_k > 0.0))
      throw std::invalid_argument("temperature must be > 0");
  }
};

/// ppm of lattice sites -> volume density in nm^-3.
double ppm_to_density(double ppm, const MaterialParams& params);

}  // namespace ndcharge
