#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ndcharge/band_solver.hpp"
#include "ndcharge/grid.hpp"
#include "ndcharge/kinetics.hpp"
#include "ndcharge/material.hpp"
#include "ndcharge/occupation.hpp"

namespace ndcharge {

/// Per-node band diagram table emitted by `simulate-band`, ordered from the
/// surface (depth 0) to the center.
struct BandTable {
  std::vector<double> depth_nm, phi_ev, ec_ev, ev_ev, e_nv_ev, fermi_ev,
      occupancy;
};

BandTable make_band_table(const BandProfile& profile, const RadialGrid& grid,
                          const MaterialParams& params);

void write_band_csv(std::ostream& out, const BandTable& table);
BandTable read_band_csv(std::istream& in);

void write_fraction_curve_csv(std::ostream& out, const FractionCurve& curve);
FractionCurve read_fraction_curve_csv(std::istream& in);

void write_power_curve_csv(std::ostream& out, const PowerCurve& curve);
PowerCurve read_power_curve_csv(std::istream& in);
PowerCurve read_power_curve_file(const std::filesystem::path& path);

/// Summary JSON emitted by `simulate-band`.
struct BandSummary {
  double fermi_level_ev = 0.0;
  std::optional<double> crossover_depth_nm;
  double nv_minus_fraction = 0.0;
  bool converged = false;
  int iterations = 0;
};

std::string band_summary_to_json(const BandSummary& summary);
BandSummary band_summary_from_json(const std::string& text);

}  // namespace ndcharge
