#include "ndcharge/unmix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <limits>

#include <json.hpp>

namespace ndcharge {

ReferenceSet ReferenceSet::from_spectra(const Spectrum& minus,
                                        const Spectrum& zero) {
  ReferenceSet set;
  set.ref_minus = peak_normalize(minus);
  set.ref_zero = peak_normalize(zero);
  set.normalized = true;
  return set;
}

void ReferenceSet::validate() const {
  ref_minus.validate();
  ref_zero.validate();
  if (normalized) {
    const auto check = [](const Spectrum& s) {
      const double peak =
          *std::max_element(s.intensity.begin(), s.intensity.end());
      if (std::abs(peak - 1.0) > 1e-9)
        throw std::invalid_argument("normalized reference peak is not 1");
    };
    check(ref_minus);
    check(ref_zero);
  }
}

namespace {

bool excluded(double w, const std::vector<std::pair<double, double>>& iv) {
  for (const auto& [lo, hi] : iv)
    if (w >= lo && w <= hi) return true;
  return false;
}

}  // namespace

FitResult fit_fraction(const Spectrum& measured, const ReferenceSet& refs,
                       const FitWindow& window) {
  measured.validate();
  refs.validate();
  if (!(window.min_nm < window.max_nm))
    throw std::invalid_argument("fit window is degenerate");
  if (window.min_nm > measured.max_wavelength() ||
      window.max_nm < measured.min_wavelength())
    throw std::invalid_argument("fit window lies outside the measured span");

  std::vector<double> grid, data;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double w = measured.wavelength_nm[i];
    if (w < window.min_nm || w > window.max_nm) continue;
    if (excluded(w, window.exclusions_nm)) continue;
    grid.push_back(w);
    data.push_back(measured.intensity[i]);
  }
  if (grid.size() < 3)
    throw std::invalid_argument("fewer than 3 usable points in the fit window");

  Spectrum bm, bz;
  try {
    bm = resample(refs.ref_minus, grid);
    bz = resample(refs.ref_zero, grid);
  } catch (const std::domain_error&) {
    throw std::invalid_argument("references do not cover the fit window");
  }

  // 2x2 normal equations for data ~ c1 * I_minus + c2 * I_zero.
  double g11 = 0.0, g12 = 0.0, g22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = bm.intensity[i], z = bz.intensity[i], y = data[i];
    g11 += m * m;
    g12 += m * z;
    g22 += z * z;
    b1 += y * m;
    b2 += y * z;
  }
  const double det = g11 * g22 - g12 * g12;
  if (!(g11 > 0.0) || !(g22 > 0.0) || det <= 1e-12 * g11 * g22)
    throw ConditioningError("degenerate basis: references are linearly dependent on the window");

  double c1 = (b1 * g22 - b2 * g12) / det;
  double c2 = (b2 * g11 - b1 * g12) / det;
  if (c1 < 0.0 || c2 < 0.0) {
    // Exact solution lies on the boundary of the non-negative quadrant;
    // pick the clamped axis solution with the lower residual.
    const double a1 = std::max(0.0, b1 / g11);  // c2 = 0
    const double a2 = std::max(0.0, b2 / g22);  // c1 = 0
    const double ssr1 = a1 * a1 * g11 - 2.0 * a1 * b1;
    const double ssr2 = a2 * a2 * g22 - 2.0 * a2 * b2;
    if (ssr1 <= ssr2) {
      c1 = a1;
      c2 = 0.0;
    } else {
      c1 = 0.0;
      c2 = a2;
    }
  }

  const double total = c1 + c2;
  if (!(total > 0.0))
    throw std::invalid_argument("fraction undefined: fitted amplitude is zero");

  FitResult fit;
  fit.coeff_minus = c1;
  fit.coeff_zero = c2;
  fit.scale = total;
  // Derive the fraction from the smaller coefficient; swapping the two
  // references then maps f to 1-f exactly in floating point.
  fit.fraction = (c1 <= c2) ? c1 / total : 1.0 - c2 / total;
  fit.window_nm = {window.min_nm, window.max_nm};
  fit.excluded_nm = window.exclusions_nm;
  fit.n_points = static_cast<int>(grid.size());

  double ssr = 0.0;
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = data[i] - c1 * bm.intensity[i] - c2 * bz.intensity[i];
    ssr += r * r;
    peak = std::max(peak, std::abs(data[i]));
  }
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(grid.size())) / peak;
  return fit;
}

namespace {

Spectrum gaussian_mix(const char* label,
                      std::initializer_list<std::array<double, 3>> lines) {
  Spectrum s;
  s.label = label;
  for (double w = 550.0; w <= 810.0 + 1e-9; w += 0.5) {
    double v = 0.0;
    for (const auto& [amp, center, sigma] : lines) {
      const double t = (w - center) / sigma;
      v += amp * std::exp(-0.5 * t * t);
    }
    s.wavelength_nm.push_back(w);
    s.intensity.push_back(v);
  }
  return peak_normalize(s);
}

}  // namespace

Spectrum synthetic_reference_minus() {
  // Sharp ZPL at 637 nm plus a broad red-shifted sideband envelope.
  return gaussian_mix("synthetic NV- reference",
                      {{0.45, 637.0, 3.0}, {1.0, 690.0, 28.0}, {0.45, 740.0, 45.0}});
}

Spectrum synthetic_reference_zero() {
  return gaussian_mix("synthetic NV0 reference",
                      {{0.5, 575.0, 3.0}, {1.0, 620.0, 25.0}, {0.35, 670.0, 40.0}});
}

std::string fit_result_to_json(const FitResult& fit) {
  nlohmann::json j;
  j["fraction"] = fit.fraction;
  j["scale"] = fit.scale;
  j["residual_rms"] = fit.residual_rms;
  j["window_nm"] = {fit.window_nm.first, fit.window_nm.second};
  auto excluded = nlohmann::json::array();
  for (const auto& [lo, hi] : fit.excluded_nm)
    excluded.push_back({lo, hi});
  j["excluded_nm"] = excluded;
  j["n_points"] = fit.n_points;
  return j.dump(2) + "\n";
}

FitResult fit_result_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  FitResult fit;
  fit.fraction = j.at("fraction").get<double>();
  fit.scale = j.at("scale").get<double>();
  fit.residual_rms = j.at("residual_rms").get<double>();
  fit.window_nm = {j.at("window_nm").at(0).get<double>(),
                   j.at("window_nm").at(1).get<double>()};
  for (const auto& pair : j.at("excluded_nm"))
    fit.excluded_nm.emplace_back(pair.at(0).get<double>(),
                                 pair.at(1).get<double>());
  fit.n_points = j.at("n_points").get<int>();
  return fit;
}

}  // namespace ndcharge
