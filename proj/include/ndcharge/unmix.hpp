#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ndcharge/spectrum.hpp"

namespace ndcharge {

/// Numerically degenerate fit (e.g. linearly dependent references on the
/// chosen window).  Mapped to its own exit code by the CLI.
class ConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Peak-normalized NV^- / NV^0 basis pair.
struct ReferenceSet {
  Spectrum ref_minus;
  Spectrum ref_zero;
  bool normalized = false;

  /// Peak-normalizes both spectra over their full span.
  static ReferenceSet from_spectra(const Spectrum& minus, const Spectrum& zero);
  void validate() const;
};

struct FitWindow {
  double min_nm = 560.0;
  double max_nm = 750.0;
  std::vector<std::pair<double, double>> exclusions_nm;
};

struct FitResult {
  double fraction = 0.0;      // [NV^-]
  double scale = 0.0;         // overall amplitude a
  double residual_rms = 0.0;  // RMS residual / window maximum of the data
  std::pair<double, double> window_nm{0.0, 0.0};
  std::vector<std::pair<double, double>> excluded_nm;
  int n_points = 0;

  // Fit coefficients before the fraction/scale reparameterization.
  double coeff_minus = 0.0;
  double coeff_zero = 0.0;
};

/// Two-component non-negative least squares on the measured wavelength grid
/// restricted to the window minus the exclusions.  Solved exactly: the
/// unconstrained 2x2 normal-equation solution, projected to the boundary
/// with the lower residual when a coefficient comes out negative.
FitResult fit_fraction(const Spectrum& measured, const ReferenceSet& refs,
                       const FitWindow& window = {});

/// Synthetic stand-in basis curves: ZPLs at 637 / 575 nm on top of smooth
/// phonon-sideband envelopes, peak-normalized.  They are placeholders for
/// digitized single-NV reference spectra, not measured data.
Spectrum synthetic_reference_minus();
Spectrum synthetic_reference_zero();

std::string fit_result_to_json(const FitResult& fit);
FitResult fit_result_from_json(const std::string& text);

}  // namespace ndcharge
