#include "ndcharge/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ndcharge {

namespace {

std::string trim(std::string s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  };
  while (!s.empty() && is_space(s.front())) s.erase(s.begin());
  while (!s.empty() && is_space(s.back())) s.pop_back();
  return s;
}

double parse_number(const std::string& key, const std::string& value) {
  double v = 0.0;
  const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
  if (r.ec != std::errc{} || r.ptr != value.data() + value.size())
    throw std::invalid_argument("config key '" + key +
                                "': expected a number, got '" + value + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
  if (r.ec != std::errc{} || r.ptr != value.data() + value.size())
    throw std::invalid_argument("config key '" + key +
                                "': expected an integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config key '" + key +
                              "': expected a boolean, got '" + value + "'");
}

}  // namespace

std::vector<double> parse_density_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty())
      throw std::invalid_argument("empty entry in density list");
    out.push_back(parse_number("densities", item));
  }
  if (out.empty()) throw std::invalid_argument("density list is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0)
      throw std::invalid_argument("densities must be non-negative");
    if (i > 0 && !(out[i] > out[i - 1]))
      throw std::invalid_argument("densities must be strictly increasing");
  }
  return out;
}

void apply_config_entry(RunConfig& c, const std::string& key,
                        const std::string& value) {
  // material
  if (key == "material.eps_r") c.material.eps_r = parse_number(key, value);
  else if (key == "material.e_gap_ev") c.material.e_gap_ev = parse_number(key, value);
  else if (key == "material.e_nv_transition_ev")
    c.material.e_nv_transition_ev = parse_number(key, value);
  else if (key == "material.e_donor_ionization_ev")
    c.material.e_donor_ionization_ev = parse_number(key, value);
  else if (key == "material.n_donor_ppm") c.material.n_donor_ppm = parse_number(key, value);
  else if (key == "material.n_nv_ppm") c.material.n_nv_ppm = parse_number(key, value);
  else if (key == "material.atomic_density_nm3")
    c.material.atomic_density_nm3 = parse_number(key, value);
  else if (key == "material.n_c_nm3") c.material.n_c_nm3 = parse_number(key, value);
  else if (key == "material.n_v_nm3") c.material.n_v_nm3 = parse_number(key, value);
  else if (key == "material.temperature_k")
    c.material.temperature_k = parse_number(key, value);
  // grid
  else if (key == "grid.radius_nm") c.grid_radius_nm = parse_number(key, value);
  else if (key == "grid.step_nm") c.grid_step_nm = parse_number(key, value);
  // surface
  else if (key == "surface.acceptor_density_nm2")
    c.surface.acceptor_density_nm2 = parse_number(key, value);
  else if (key == "surface.mode") {
    if (value == "fully-ionized") c.surface.mode = SurfaceMode::fully_ionized;
    else if (value == "level-pinned") c.surface.mode = SurfaceMode::level_pinned;
    else
      throw std::invalid_argument(
          "surface.mode must be 'fully-ionized' or 'level-pinned'");
  } else if (key == "surface.e_acceptor_ev")
    c.surface.e_acceptor_ev = parse_number(key, value);
  // solver
  else if (key == "solver.tol_phi_ev") c.solver.tol_phi_ev = parse_number(key, value);
  else if (key == "solver.tol_fermi_ev") c.solver.tol_fermi_ev = parse_number(key, value);
  else if (key == "solver.neutrality_tol")
    c.solver.neutrality_tol = parse_number(key, value);
  else if (key == "solver.max_inner") c.solver.max_inner = parse_int(key, value);
  else if (key == "solver.max_outer") c.solver.max_outer = parse_int(key, value);
  else if (key == "solver.newton") c.solver.newton = parse_bool(key, value);
  else if (key == "solver.mixing") c.solver.mixing = parse_number(key, value);
  else if (key == "solver.step_cap_ev")
    c.solver.newton_step_cap_ev = parse_number(key, value);
  else if (key == "solver.fermi_min_ev") c.solver.fermi_min_ev = parse_number(key, value);
  else if (key == "solver.fermi_max_ev") c.solver.fermi_max_ev = parse_number(key, value);
  // occupation
  else if (key == "occupation.g_profile") {
    if (value == "uniform-volume") c.g_profile = DensityProfileKind::uniform_volume;
    else if (value == "uniform-depth") c.g_profile = DensityProfileKind::uniform_depth;
    else
      throw std::invalid_argument(
          "occupation.g_profile must be 'uniform-volume' or 'uniform-depth'");
  }
  // io
  else if (key == "io.ref_nv_minus") c.ref_nv_minus = value;
  else if (key == "io.ref_nv_zero") c.ref_nv_zero = value;
  // spectrum fit
  else if (key == "fit.window_min_nm") c.fit_window_min_nm = parse_number(key, value);
  else if (key == "fit.window_max_nm") c.fit_window_max_nm = parse_number(key, value);
  else if (key == "fit.exclude_raman") c.fit_exclude_raman = parse_bool(key, value);
  else if (key == "fit.cap_700nm") c.fit_cap_700nm = parse_bool(key, value);
  // kinetics
  else if (key == "kinetics.init_alpha") c.kinetics_init.alpha = parse_number(key, value);
  else if (key == "kinetics.init_beta") c.kinetics_init.beta = parse_number(key, value);
  else if (key == "kinetics.init_gamma") c.kinetics_init.gamma = parse_number(key, value);
  else if (key == "kinetics.init_delta") c.kinetics_init.delta = parse_number(key, value);
  else if (key == "kinetics.init_trap_capacity")
    c.kinetics_init.trap_capacity = parse_number(key, value);
  else if (key == "kinetics.dwell_s") c.kinetics_dwell_s = parse_number(key, value);
  // sweep
  else if (key == "sweep.densities") c.sweep_densities = parse_density_list(value);
  else
    throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open config file " + path.string());
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    apply_config_entry(config, key, value);
  }
  // Referenced input paths must exist up front.
  for (const std::string* p : {&config.ref_nv_minus, &config.ref_nv_zero}) {
    if (!p->empty() && !std::filesystem::exists(*p))
      throw std::invalid_argument("config references missing file '" + *p + "'");
  }
  return config;
}

}  // namespace ndcharge
