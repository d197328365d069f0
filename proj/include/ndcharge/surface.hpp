#pragma once

#include <stdexcept>

namespace ndcharge {

enum class SurfaceMode {
  // Every surface acceptor site holds one electron.
  fully_ionized,
  // Acceptor occupancy follows Fermi-Dirac statistics at a level pinned
  // e_acceptor_ev above the (surface) valence-band maximum.
  level_pinned,
};

/// Electron-accepting surface complex layer (bound cations).
struct SurfaceModel {
  double acceptor_density_nm2 = 0.0;
  SurfaceMode mode = SurfaceMode::fully_ionized;
  double e_acceptor_ev = 0.0;  // used in level_pinned mode only

  void validate(double e_gap_ev) const {
    if (acceptor_density_nm2 < 0.0)
      throw std::invalid_argument("acceptor density must be non-negative");
    if (mode == SurfaceMode::level_pinned &&
        (e_acceptor_ev < 0.0 || e_acceptor_ev > e_gap_ev))
      throw std::invalid_argument("acceptor level must lie within the band gap");
  }
};

}  // namespace ndcharge
