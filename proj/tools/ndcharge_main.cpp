// ndcharge command-line tool: band-bending simulation, surface-density
// sweeps, PL spectrum unmixing, and power-curve kinetics fits, driven by a
// flat key=value config file.  All commands are deterministic: identical
// inputs produce byte-identical outputs.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ndcharge/band_solver.hpp"
#include "ndcharge/config.hpp"
#include "ndcharge/format.hpp"
#include "ndcharge/io.hpp"
#include "ndcharge/kinetics.hpp"
#include "ndcharge/kinetics_fit.hpp"
#include "ndcharge/occupation.hpp"
#include "ndcharge/spectrum.hpp"
#include "ndcharge/unmix.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;        // input/config error
constexpr int kExitNoConvergence = 3;
constexpr int kExitConditioning = 4;

struct GlobalArgs {
  std::string config_path;
  std::string out_path;
  bool quiet = false;
};

void info(const GlobalArgs& g, const std::string& message) {
  if (!g.quiet) std::cerr << message << '\n';
}

ndcharge::RunConfig effective_config(const GlobalArgs& g) {
  if (g.config_path.empty()) return {};
  return ndcharge::load_config_file(g.config_path);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int run_simulate_band(const GlobalArgs& g, ndcharge::RunConfig config,
                      const std::optional<double>& density_override) {
  if (density_override)
    config.surface.acceptor_density_nm2 = *density_override;
  const ndcharge::RadialGrid grid = config.make_grid();
  const ndcharge::BandProfile profile = ndcharge::solve_selfconsistent(
      config.material, grid, config.surface, config.solver);

  const ndcharge::BandTable table =
      ndcharge::make_band_table(profile, grid, config.material);
  std::ostringstream csv;
  ndcharge::write_band_csv(csv, table);
  const std::string csv_path =
      g.out_path.empty() ? "band_profile.csv" : g.out_path;
  write_text_file(csv_path, csv.str());
  info(g, "band profile written to " + csv_path);

  ndcharge::BandSummary summary;
  summary.fermi_level_ev = profile.fermi_level_ev;
  summary.converged = profile.converged;
  summary.iterations = profile.iterations;
  if (profile.converged) {
    summary.crossover_depth_nm =
        ndcharge::crossover_depth(profile, grid, config.material);
    summary.nv_minus_fraction = ndcharge::nv_minus_fraction(
        profile, grid, config.material, {config.g_profile, {}});
  }
  std::cout << ndcharge::band_summary_to_json(summary);
  return profile.converged ? kExitOk : kExitNoConvergence;
}

int run_sweep(const GlobalArgs& g, ndcharge::RunConfig config,
              const std::string& densities_arg, bool serial) {
  std::vector<double> densities = config.sweep_densities;
  if (!densities_arg.empty())
    densities = ndcharge::parse_density_list(densities_arg);
  if (densities.empty())
    throw std::invalid_argument(
        "no densities given (use --densities or sweep.densities)");

  const ndcharge::RadialGrid grid = config.make_grid();
  ndcharge::SweepOptions opts;
  opts.solver = config.solver;
  opts.g = {config.g_profile, {}};
  const ndcharge::FractionCurve curve =
      serial ? ndcharge::sweep_surface_density_serial(
                   densities, config.material, grid, config.surface, opts)
             : ndcharge::sweep_surface_density(densities, config.material,
                                               grid, config.surface, opts);

  std::ostringstream csv;
  ndcharge::write_fraction_curve_csv(csv, curve);
  if (g.out_path.empty()) {
    std::cout << csv.str();
  } else {
    write_text_file(g.out_path, csv.str());
    info(g, "sweep written to " + g.out_path);
  }
  return kExitOk;  // at least one point converged or the sweep throws
}

int run_fit_spectrum(const GlobalArgs& g, const ndcharge::RunConfig& config,
                     const std::string& measured_path,
                     std::string ref_minus_path, std::string ref_zero_path,
                     std::optional<double> window_min,
                     std::optional<double> window_max,
                     const std::vector<std::string>& exclusions,
                     bool exclude_raman, bool cap_700) {
  if (ref_minus_path.empty()) ref_minus_path = config.ref_nv_minus;
  if (ref_zero_path.empty()) ref_zero_path = config.ref_nv_zero;
  if (ref_minus_path.empty() || ref_zero_path.empty())
    throw std::invalid_argument(
        "reference spectra required (--ref-minus/--ref-zero or io.ref_nv_* "
        "config keys)");

  const ndcharge::Spectrum measured =
      ndcharge::load_spectrum_file(measured_path);
  const ndcharge::ReferenceSet refs = ndcharge::ReferenceSet::from_spectra(
      ndcharge::load_spectrum_file(ref_minus_path),
      ndcharge::load_spectrum_file(ref_zero_path));

  ndcharge::FitWindow window;
  window.min_nm = window_min.value_or(config.fit_window_min_nm);
  window.max_nm = window_max.value_or(config.fit_window_max_nm);
  if (cap_700 || config.fit_cap_700nm)
    window.max_nm = std::min(window.max_nm, 700.0);
  if (exclude_raman || config.fit_exclude_raman)
    window.exclusions_nm.emplace_back(572.0, 574.0);
  for (const std::string& text : exclusions) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("exclusion must look like LO:HI, got '" +
                                  text + "'");
    window.exclusions_nm.emplace_back(std::stod(text.substr(0, colon)),
                                      std::stod(text.substr(colon + 1)));
  }

  const ndcharge::FitResult fit =
      ndcharge::fit_fraction(measured, refs, window);
  const std::string json = ndcharge::fit_result_to_json(fit);
  std::cout << json;
  if (!g.out_path.empty()) write_text_file(g.out_path, json);
  return kExitOk;
}

int run_fit_kinetics(const GlobalArgs& g, const ndcharge::RunConfig& config,
                     const std::string& curve_path,
                     std::optional<double> dwell,
                     const ndcharge::KineticParams& init) {
  ndcharge::PowerCurve curve = ndcharge::read_power_curve_file(curve_path);
  curve.dwell_s = dwell.value_or(config.kinetics_dwell_s);
  curve.validate();
  if (curve.size() < 5)
    throw std::invalid_argument("kinetics fit needs at least 5 data points");

  const ndcharge::KineticFitResult fit = ndcharge::fit_kinetics(curve, init);

  nlohmann::json j;
  j["alpha"] = fit.params.alpha;
  j["beta"] = fit.params.beta;
  j["gamma"] = fit.params.gamma;
  j["delta"] = fit.params.delta;
  j["trap_capacity"] = fit.params.trap_capacity;
  j["residual_rms"] = fit.residual_rms;
  j["converged"] = fit.converged;
  bool monotone = true;
  for (std::size_t i = 1; i < curve.size() && monotone; ++i)
    monotone = curve.power_mw[i] >= curve.power_mw[i - 1];
  if (!monotone)
    j["hysteresis_area"] =
        ndcharge::hysteresis_area(curve.power_mw, curve.fraction);
  const std::string json = j.dump(2) + "\n";
  std::cout << json;
  if (!g.out_path.empty()) write_text_file(g.out_path, json);
  return fit.converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "NV charge-state toolkit: band bending in surface-charged "
      "nanodiamonds, PL spectrum unmixing, and charge kinetics"};
  app.require_subcommand(1);

  GlobalArgs global;
  app.add_option("--config", global.config_path, "flat key=value config file")
      ->check(CLI::ExistingFile);
  app.add_option("--out", global.out_path, "output path");
  app.add_flag("--quiet", global.quiet, "suppress progress messages");

  auto* band = app.add_subcommand(
      "simulate-band", "solve the self-consistent band-bending profile");
  band->fallthrough();
  std::optional<double> band_density;
  band->add_option("--density", band_density,
                   "surface acceptor density, nm^-2 (overrides config)");

  auto* sweep = app.add_subcommand(
      "sweep", "NV- fraction versus surface acceptor density");
  sweep->fallthrough();
  std::string sweep_densities;
  bool sweep_serial = false;
  sweep->add_option("--densities", sweep_densities,
                    "comma-separated densities, nm^-2");
  sweep->add_flag("--serial", sweep_serial,
                  "use the serial reference implementation");

  auto* fit_spec = app.add_subcommand(
      "fit-spectrum", "extract the NV- fraction from a PL spectrum");
  fit_spec->fallthrough();
  std::string measured_path, ref_minus_path, ref_zero_path;
  std::optional<double> window_min, window_max;
  std::vector<std::string> exclusions;
  bool exclude_raman = false, cap_700 = false;
  fit_spec->add_option("--measured", measured_path, "measured spectrum CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit_spec->add_option("--ref-minus", ref_minus_path, "NV- reference CSV")
      ->check(CLI::ExistingFile);
  fit_spec->add_option("--ref-zero", ref_zero_path, "NV0 reference CSV")
      ->check(CLI::ExistingFile);
  fit_spec->add_option("--window-min", window_min, "fit window lower edge, nm");
  fit_spec->add_option("--window-max", window_max, "fit window upper edge, nm");
  fit_spec->add_option("--exclude", exclusions,
                       "wavelength interval LO:HI to exclude (repeatable)");
  fit_spec->add_flag("--exclude-raman", exclude_raman,
                     "exclude the 572-574 nm diamond Raman line");
  fit_spec->add_flag("--cap-700", cap_700, "cap the fit window at 700 nm");

  auto* fit_kin = app.add_subcommand(
      "fit-kinetics", "fit the three-state rate model to a power curve");
  fit_kin->fallthrough();
  std::string curve_path;
  std::optional<double> dwell;
  std::optional<double> init_alpha, init_beta, init_gamma, init_delta, init_cap;
  fit_kin->add_option("--curve", curve_path, "power curve CSV")
      ->required()
      ->check(CLI::ExistingFile);
  fit_kin->add_option("--dwell", dwell, "seconds per point");
  fit_kin->add_option("--init-alpha", init_alpha, "initial ionization coeff");
  fit_kin->add_option("--init-beta", init_beta, "initial recombination coeff");
  fit_kin->add_option("--init-gamma", init_gamma, "initial trap transfer coeff");
  fit_kin->add_option("--init-delta", init_delta, "initial trap release rate");
  fit_kin->add_option("--init-cap", init_cap, "initial trap capacity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    ndcharge::RunConfig config = effective_config(global);
    if (band->parsed()) return run_simulate_band(global, config, band_density);
    if (sweep->parsed())
      return run_sweep(global, config, sweep_densities, sweep_serial);
    if (fit_spec->parsed())
      return run_fit_spectrum(global, config, measured_path, ref_minus_path,
                              ref_zero_path, window_min, window_max,
                              exclusions, exclude_raman, cap_700);
    if (fit_kin->parsed()) {
      ndcharge::KineticParams init = config.kinetics_init;
      if (init_alpha) init.alpha = *init_alpha;
      if (init_beta) init.beta = *init_beta;
      if (init_gamma) init.gamma = *init_gamma;
      if (init_delta) init.delta = *init_delta;
      if (init_cap) init.trap_capacity = *init_cap;
      return run_fit_kinetics(global, config, curve_path, dwell, init);
    }
  } catch (const ndcharge::ConditioningError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConditioning;
  } catch (const ndcharge::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  }
  return kExitOk;
}
