#include "ndcharge/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ndcharge/format.hpp"
#include "ndcharge/statistics.hpp"

namespace ndcharge {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double to_double(const std::string& s, int lineno) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r'))
    --end;
  const auto r = std::from_chars(begin, end, v);
  if (r.ec != std::errc{} || r.ptr != end)
    throw std::runtime_error("line " + std::to_string(lineno) +
                             ": expected a number, got '" + s + "'");
  return v;
}

void expect_header(const std::string& line, const std::string& expected,
                   const char* what) {
  std::string trimmed = line;
  if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
  if (trimmed != expected)
    throw std::runtime_error(std::string(what) + ": expected header '" +
                             expected + "'");
}

}  // namespace

BandTable make_band_table(const BandProfile& profile, const RadialGrid& grid,
                          const MaterialParams& params) {
  BandTable t;
  const std::size_t n = grid.node_count();
  const double kt = params.kt_ev();
  // Surface first, matching the depth axis of the band diagrams.
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = n - 1 - k;
    const double phi = profile.phi_ev[j];
    t.depth_nm.push_back(grid.depth_nm(j));
    t.phi_ev.push_back(phi);
    t.ec_ev.push_back(params.e_gap_ev + phi);
    t.ev_ev.push_back(phi);
    t.e_nv_ev.push_back(params.e_nv_transition_ev + phi);
    t.fermi_ev.push_back(profile.fermi_level_ev);
    t.occupancy.push_back(fermi_occupancy(
        params.e_nv_transition_ev + phi - profile.fermi_level_ev, kt));
  }
  return t;
}

void write_band_csv(std::ostream& out, const BandTable& t) {
  out << "depth_nm,phi_ev,ec_ev,ev_ev,e_nv_ev,fermi_ev,occupancy\n";
  for (std::size_t i = 0; i < t.depth_nm.size(); ++i)
    out << format_double(t.depth_nm[i]) << ',' << format_double(t.phi_ev[i])
        << ',' << format_double(t.ec_ev[i]) << ',' << format_double(t.ev_ev[i])
        << ',' << format_double(t.e_nv_ev[i]) << ','
        << format_double(t.fermi_ev[i]) << ','
        << format_double(t.occupancy[i]) << '\n';
}

BandTable read_band_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("band table: empty file");
  expect_header(line, "depth_nm,phi_ev,ec_ev,ev_ev,e_nv_ev,fermi_ev,occupancy",
                "band table");
  BandTable t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 7)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected 7 columns");
    t.depth_nm.push_back(to_double(f[0], lineno));
    t.phi_ev.push_back(to_double(f[1], lineno));
    t.ec_ev.push_back(to_double(f[2], lineno));
    t.ev_ev.push_back(to_double(f[3], lineno));
    t.e_nv_ev.push_back(to_double(f[4], lineno));
    t.fermi_ev.push_back(to_double(f[5], lineno));
    t.occupancy.push_back(to_double(f[6], lineno));
  }
  return t;
}

void write_fraction_curve_csv(std::ostream& out, const FractionCurve& curve) {
  out << "density_nm2,nv_minus_fraction,converged\n";
  for (std::size_t i = 0; i < curve.densities_nm2.size(); ++i)
    out << format_double(curve.densities_nm2[i]) << ','
        << format_double(curve.fractions[i]) << ','
        << (curve.converged[i] ? '1' : '0') << '\n';
}

FractionCurve read_fraction_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("fraction curve: empty file");
  expect_header(line, "density_nm2,nv_minus_fraction,converged",
                "fraction curve");
  FractionCurve c;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 3)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected 3 columns");
    c.densities_nm2.push_back(to_double(f[0], lineno));
    c.fractions.push_back(to_double(f[1], lineno));
    c.converged.push_back(to_double(f[2], lineno) != 0.0 ? 1 : 0);
  }
  return c;
}

void write_power_curve_csv(std::ostream& out, const PowerCurve& curve) {
  out << "power_mw,nv_minus_fraction\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out << format_double(curve.power_mw[i]) << ','
        << format_double(curve.fraction[i]) << '\n';
}

PowerCurve read_power_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("power curve: empty file");
  expect_header(line, "power_mw,nv_minus_fraction", "power curve");
  PowerCurve c;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    const auto f = split_csv(line);
    if (f.size() != 2)
      throw std::runtime_error("line " + std::to_string(lineno) +
                               ": expected 2 columns");
    c.power_mw.push_back(to_double(f[0], lineno));
    c.fraction.push_back(to_double(f[1], lineno));
  }
  c.validate();
  return c;
}

PowerCurve read_power_curve_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return read_power_curve_csv(in);
}

std::string band_summary_to_json(const BandSummary& s) {
  nlohmann::json j;
  j["fermi_level_ev"] = s.fermi_level_ev;
  if (s.crossover_depth_nm)
    j["crossover_depth_nm"] = *s.crossover_depth_nm;
  else
    j["crossover_depth_nm"] = nullptr;
  j["nv_minus_fraction"] = s.nv_minus_fraction;
  j["converged"] = s.converged;
  j["iterations"] = s.iterations;
  return j.dump(2) + "\n";
}

BandSummary band_summary_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  BandSummary s;
  s.fermi_level_ev = j.at("fermi_level_ev").get<double>();
  if (!j.at("crossover_depth_nm").is_null())
    s.crossover_depth_nm = j.at("crossover_depth_nm").get<double>();
  s.nv_minus_fraction = j.at("nv_minus_fraction").get<double>();
  s.converged = j.at("converged").get<bool>();
  s.iterations = j.at("iterations").get<int>();
  return s;
}

}  // namespace ndcharge
