#pragma once

// Physical constants in the unit system used throughout this library:
// energies in eV, lengths in nm, charge in units of the elementary charge e,
// areal densities in nm^-2, volume densities in nm^-3, temperatures in K.

namespace ndcharge {

// Boltzmann constant, eV/K (CODATA 2018, exact in the 2019 SI).
inline constexpr double k_boltzmann_ev = 8.617333262e-5;

// Vacuum permittivity expressed as e / (V nm) == e^2 / (eV nm).
// eps0 [F/m] / e [C] * 1e-9 [m/nm].
inline constexpr double eps0_e_per_ev_nm =
    8.8541878128e-12 / 1.602176634e-19 * 1e-9;

inline constexpr double thermal_voltage_ev(double temperature_k) {
  return k_boltzmann_ev * temperature_k;
}

}  // namespace ndcharge
