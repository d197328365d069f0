#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ndcharge {

/// Parse failure carrying the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Wavelength-intensity series with strictly increasing wavelengths.
struct Spectrum {
  std::vector<double> wavelength_nm;
  std::vector<double> intensity;
  std::string label;

  std::size_t size() const { return wavelength_nm.size(); }
  double min_wavelength() const { return wavelength_nm.front(); }
  double max_wavelength() const { return wavelength_nm.back(); }
  void validate() const;
};

/// Reads the `wavelength_nm,intensity` CSV format.  Rows are sorted by
/// wavelength; duplicate wavelengths are rejected with the offending line.
/// Blank lines and lines starting with '#' are skipped.
Spectrum load_spectrum(std::istream& in, std::string label = "");
Spectrum load_spectrum_file(const std::filesystem::path& path);

void write_spectrum(std::ostream& out, const Spectrum& s);
void write_spectrum_file(const std::filesystem::path& path, const Spectrum& s);

/// Linear interpolation onto `grid`; exact at source nodes.  Requesting a
/// point outside the source span is a domain error.
Spectrum resample(const Spectrum& s, std::span<const double> grid);

/// Divides by the maximum intensity inside `window` (whole span when absent).
Spectrum peak_normalize(
    const Spectrum& s,
    std::optional<std::pair<double, double>> window = std::nullopt);

}  // namespace ndcharge
