#include "ndcharge/spectrum.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ndcharge/format.hpp"

namespace ndcharge {

void Spectrum::validate() const {
  if (wavelength_nm.size() != intensity.size())
    throw std::invalid_argument("wavelength and intensity lengths differ");
  if (wavelength_nm.size() < 2)
    throw std::invalid_argument("spectrum needs at least 2 points");
  for (std::size_t i = 0; i < wavelength_nm.size(); ++i) {
    if (!std::isfinite(wavelength_nm[i]) || !std::isfinite(intensity[i]))
      throw std::invalid_argument("spectrum contains non-finite values");
    if (i > 0 && !(wavelength_nm[i] > wavelength_nm[i - 1]))
      throw std::invalid_argument("wavelengths must be strictly increasing");
  }
}

namespace {

bool parse_double(std::string_view text, double& out) {
  // std::from_chars does not skip whitespace.
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
    text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) return false;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
  return r.ec == std::errc{} && r.ptr == text.data() + text.size();
}

}  // namespace

Spectrum load_spectrum(std::istream& in, std::string label) {
  struct Row {
    double wavelength;
    double intensity;
    int line;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.empty() || view.front() == '#') continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos)
      throw ParseError(lineno, "expected two comma-separated columns");
    double w = 0.0, v = 0.0;
    const bool numeric = parse_double(view.substr(0, comma), w) &&
                         parse_double(view.substr(comma + 1), v);
    if (!numeric) {
      if (!header_seen && rows.empty()) {
        header_seen = true;  // header row
        continue;
      }
      throw ParseError(lineno, "malformed row: " + std::string(view));
    }
    rows.push_back({w, v, lineno});
  }
  if (rows.empty()) throw ParseError(lineno, "no data rows");
  if (rows.size() < 2) throw ParseError(rows.back().line, "need at least 2 points");

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.wavelength < b.wavelength; });
  Spectrum s;
  s.label = std::move(label);
  s.wavelength_nm.reserve(rows.size());
  s.intensity.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && !(rows[i].wavelength > rows[i - 1].wavelength))
      throw ParseError(rows[i].line,
                       "duplicate wavelength " + std::to_string(rows[i].wavelength));
    s.wavelength_nm.push_back(rows[i].wavelength);
    s.intensity.push_back(rows[i].intensity);
  }
  s.validate();
  return s;
}

Spectrum load_spectrum_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return load_spectrum(in, path.filename().string());
}

void write_spectrum(std::ostream& out, const Spectrum& s) {
  out << "wavelength_nm,intensity\n";
  for (std::size_t i = 0; i < s.size(); ++i)
    out << format_double(s.wavelength_nm[i]) << ','
        << format_double(s.intensity[i]) << '\n';
}

void write_spectrum_file(const std::filesystem::path& path, const Spectrum& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_spectrum(out, s);
}

Spectrum resample(const Spectrum& s, std::span<const double> grid) {
  s.validate();
  Spectrum out;
  out.label = s.label;
  out.wavelength_nm.assign(grid.begin(), grid.end());
  out.intensity.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double w = grid[i];
    if (w < s.min_wavelength() || w > s.max_wavelength())
      throw std::domain_error("resample point outside the source span");
    const auto it = std::lower_bound(s.wavelength_nm.begin(),
                                     s.wavelength_nm.end(), w);
    const auto k = static_cast<std::size_t>(it - s.wavelength_nm.begin());
    if (k < s.size() && s.wavelength_nm[k] == w) {
      out.intensity[i] = s.intensity[k];  // exact at source nodes
      continue;
    }
    const double w0 = s.wavelength_nm[k - 1], w1 = s.wavelength_nm[k];
    const double t = (w - w0) / (w1 - w0);
    out.intensity[i] = (1.0 - t) * s.intensity[k - 1] + t * s.intensity[k];
  }
  return out;
}

Spectrum peak_normalize(const Spectrum& s,
                        std::optional<std::pair<double, double>> window) {
  s.validate();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (window && (s.wavelength_nm[i] < window->first ||
                   s.wavelength_nm[i] > window->second))
      continue;
    peak = std::max(peak, s.intensity[i]);
  }
  if (!(peak > 0.0))
    throw std::domain_error("peak normalization needs a positive maximum");
  Spectrum out = s;
  for (double& v : out.intensity) v /= peak;
  return out;
}

}  // namespace ndcharge
