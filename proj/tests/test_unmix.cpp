#include <doctest.h>

#include <cmath>
#include <random>

#include "ndcharge/spectrum.hpp"
#include "ndcharge/unmix.hpp"

using namespace ndcharge;

namespace {

std::vector<double> fit_grid() {
  std::vector<double> grid;
  for (double w = 555.0; w <= 760.0 + 1e-9; w += 1.0) grid.push_back(w);
  return grid;
}

// Synthetic measurement scale * (f * I_minus + (1-f) * I_zero) on `grid`.
Spectrum mixture(double fraction, double scale, const ReferenceSet& refs,
                 const std::vector<double>& grid) {
  const Spectrum bm = resample(refs.ref_minus, grid);
  const Spectrum bz = resample(refs.ref_zero, grid);
  Spectrum s;
  s.wavelength_nm = grid;
  s.intensity.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    s.intensity[i] = scale * (fraction * bm.intensity[i] +
                              (1.0 - fraction) * bz.intensity[i]);
  return s;
}

// Brute-force oracle: exhaustive search over the fraction at 1e-3
// resolution with the least-squares scale at each candidate.  Independent
// of the production normal-equation path.
double grid_search_fraction(const Spectrum& measured, const ReferenceSet& refs,
                            const FitWindow& window) {
  std::vector<double> grid, data;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    const double w = measured.wavelength_nm[i];
    if (w < window.min_nm || w > window.max_nm) continue;
    grid.push_back(w);
    data.push_back(measured.intensity[i]);
  }
  const Spectrum bm = resample(refs.ref_minus, grid);
  const Spectrum bz = resample(refs.ref_zero, grid);
  double best_f = 0.0;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 1000; ++k) {
    const double f = 1e-3 * k;
    double bb = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double basis = f * bm.intensity[i] + (1.0 - f) * bz.intensity[i];
      bb += basis * basis;
      yb += data[i] * basis;
    }
    const double a = bb > 0.0 ? std::max(0.0, yb / bb) : 0.0;
    double ssr = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double r =
          data[i] - a * (f * bm.intensity[i] + (1.0 - f) * bz.intensity[i]);
      ssr += r * r;
    }
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_f = f;
    }
  }
  return best_f;
}

ReferenceSet synthetic_refs() {
  return ReferenceSet::from_spectra(synthetic_reference_minus(),
                                    synthetic_reference_zero());
}

}  // namespace

TEST_CASE("fit_fraction: pure basis input") {
  const ReferenceSet refs = synthetic_refs();
  const Spectrum measured = resample(refs.ref_minus, fit_grid());
  const FitResult fit = fit_fraction(measured, refs);
  CHECK(fit.fraction == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.residual_rms < 1e-12);
  CHECK(fit.n_points > 3);
}

TEST_CASE("fit_fraction: exact mixture inversion") {
  const ReferenceSet refs = synthetic_refs();
  const Spectrum measured = mixture(0.6, 0.3, refs, fit_grid());
  const FitResult fit = fit_fraction(measured, refs);
  CHECK(fit.fraction == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(fit.scale == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("fit_fraction: noiseless recovery across the fraction range") {
  const ReferenceSet refs = synthetic_refs();
  for (double f : {0.0, 0.1, 0.5, 0.754, 0.9, 1.0}) {
    const Spectrum measured = mixture(f, 1.7, refs, fit_grid());
    const FitResult fit = fit_fraction(measured, refs);
    CHECK(std::abs(fit.fraction - f) < 1e-9);
  }
}

TEST_CASE("fit_fraction: 1% noise stays within 0.02 and matches the oracle") {
  const ReferenceSet refs = synthetic_refs();
  const FitWindow window;
  std::mt19937 rng(20230811);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (int trial = 0; trial < 25; ++trial) {
    Spectrum measured = mixture(0.754, 1.0, refs, fit_grid());
    for (double& v : measured.intensity) v *= 1.0 + noise(rng);
    const FitResult fit = fit_fraction(measured, refs, window);
    CHECK(std::abs(fit.fraction - 0.754) <= 0.02);
    const double oracle = grid_search_fraction(measured, refs, window);
    CHECK(std::abs(fit.fraction - oracle) <= 2e-3);
  }
}

TEST_CASE("fit_fraction: scale invariance") {
  const ReferenceSet refs = synthetic_refs();
  Spectrum measured = mixture(0.37, 0.8, refs, fit_grid());
  const FitResult base = fit_fraction(measured, refs);
  for (double& v : measured.intensity) v *= 123.5;
  const FitResult scaled = fit_fraction(measured, refs);
  CHECK(std::abs(scaled.fraction - base.fraction) <= 1e-9);
  CHECK(scaled.scale == doctest::Approx(base.scale * 123.5).epsilon(1e-9));
  CHECK(std::abs(scaled.residual_rms - base.residual_rms) <= 1e-9);
}

TEST_CASE("fit_fraction: reference swap maps f to 1-f exactly") {
  const ReferenceSet refs = synthetic_refs();
  ReferenceSet swapped;
  swapped.ref_minus = refs.ref_zero;
  swapped.ref_zero = refs.ref_minus;
  swapped.normalized = true;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int trial = 0; trial < 20; ++trial) {
    Spectrum measured = mixture(frac(rng), 1.0, refs, fit_grid());
    for (double& v : measured.intensity) v *= 1.0 + noise(rng);
    const double f = fit_fraction(measured, refs).fraction;
    const double f_swapped = fit_fraction(measured, swapped).fraction;
    CHECK(f_swapped == 1.0 - f);  // exact, not approximate
  }
}

TEST_CASE("fit_fraction: returned coefficients are a local optimum") {
  const ReferenceSet refs = synthetic_refs();
  Spectrum measured = mixture(0.7, 1.0, refs, fit_grid());
  std::mt19937 rng(99);
  std::normal_distribution<double> noise(0.0, 0.05);
  for (double& v : measured.intensity) v *= 1.0 + noise(rng);
  const FitResult fit = fit_fraction(measured, refs);

  const auto grid = fit_grid();
  std::vector<double> win, data;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < fit.window_nm.first || grid[i] > fit.window_nm.second)
      continue;
    win.push_back(grid[i]);
    data.push_back(measured.intensity[i]);
  }
  const Spectrum bm = resample(refs.ref_minus, win);
  const Spectrum bz = resample(refs.ref_zero, win);
  const auto ssr_at = [&](double c1, double c2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < win.size(); ++i) {
      const double r = data[i] - c1 * bm.intensity[i] - c2 * bz.intensity[i];
      ssr += r * r;
    }
    return ssr;
  };
  const double base = ssr_at(fit.coeff_minus, fit.coeff_zero);
  for (double d1 : {-1e-3, 0.0, 1e-3}) {
    for (double d2 : {-1e-3, 0.0, 1e-3}) {
      const double c1 = fit.coeff_minus + d1;
      const double c2 = fit.coeff_zero + d2;
      if (c1 < 0.0 || c2 < 0.0) continue;
      CHECK(ssr_at(c1, c2) >= base - 1e-15);
    }
  }
}

TEST_CASE("fit_fraction: empty exclusion leaves the result bit-identical") {
  const ReferenceSet refs = synthetic_refs();
  const Spectrum measured = mixture(0.4, 1.0, refs, fit_grid());
  const FitResult base = fit_fraction(measured, refs);
  FitWindow window;
  window.exclusions_nm.emplace_back(600.25, 600.75);  // contains no sample
  const FitResult excl = fit_fraction(measured, refs, window);
  CHECK(excl.fraction == base.fraction);
  CHECK(excl.scale == base.scale);
  CHECK(excl.residual_rms == base.residual_rms);
  CHECK(excl.n_points == base.n_points);
}

TEST_CASE("fit_fraction: fraction is clamped to [0,1] by construction") {
  const ReferenceSet refs = synthetic_refs();
  // Data anti-correlated with the NV- basis pushes the unconstrained
  // coefficient negative.
  const auto grid = fit_grid();
  const Spectrum bm = resample(refs.ref_minus, grid);
  const Spectrum bz = resample(refs.ref_zero, grid);
  Spectrum measured;
  measured.wavelength_nm = grid;
  measured.intensity.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    measured.intensity[i] =
        std::max(0.0, bz.intensity[i] - 0.4 * bm.intensity[i]) + 1e-6;
  const FitResult fit = fit_fraction(measured, refs);
  CHECK(fit.fraction >= 0.0);
  CHECK(fit.fraction <= 1.0);
  CHECK(fit.coeff_minus >= 0.0);
  CHECK(fit.coeff_zero >= 0.0);
}

TEST_CASE("fit_fraction: error paths") {
  const ReferenceSet refs = synthetic_refs();
  const Spectrum measured = mixture(0.5, 1.0, refs, fit_grid());

  SUBCASE("window outside the data span") {
    FitWindow window;
    window.min_nm = 900.0;
    window.max_nm = 950.0;
    CHECK_THROWS_AS(fit_fraction(measured, refs, window), std::invalid_argument);
  }

  SUBCASE("degenerate window") {
    FitWindow window;
    window.min_nm = 700.0;
    window.max_nm = 700.0;
    CHECK_THROWS_AS(fit_fraction(measured, refs, window), std::invalid_argument);
  }

  SUBCASE("fewer than 3 usable points") {
    FitWindow window;
    window.min_nm = 560.0;
    window.max_nm = 750.0;
    window.exclusions_nm.emplace_back(561.0, 749.0);
    CHECK_THROWS_AS(fit_fraction(measured, refs, window), std::invalid_argument);
  }

  SUBCASE("linearly dependent references") {
    ReferenceSet degenerate;
    degenerate.ref_minus = refs.ref_minus;
    degenerate.ref_zero = refs.ref_minus;
    degenerate.normalized = true;
    CHECK_THROWS_AS(fit_fraction(measured, degenerate, FitWindow{}),
                    ConditioningError);
  }

  SUBCASE("zero amplitude is undefined") {
    Spectrum zero = measured;
    for (double& v : zero.intensity) v = 0.0;
    CHECK_THROWS_AS(fit_fraction(zero, refs), std::invalid_argument);
  }
}

TEST_CASE("fit result JSON round trip") {
  const ReferenceSet refs = synthetic_refs();
  FitWindow window;
  window.exclusions_nm.emplace_back(572.0, 574.0);
  const FitResult fit =
      fit_fraction(mixture(0.3, 2.0, refs, fit_grid()), refs, window);
  const FitResult back = fit_result_from_json(fit_result_to_json(fit));
  CHECK(back.fraction == fit.fraction);
  CHECK(back.scale == fit.scale);
  CHECK(back.residual_rms == fit.residual_rms);
  CHECK(back.window_nm == fit.window_nm);
  REQUIRE(back.excluded_nm.size() == 1);
  CHECK(back.excluded_nm[0] == fit.excluded_nm[0]);
  CHECK(back.n_points == fit.n_points);
}

TEST_CASE("synthetic references are sane") {
  const Spectrum minus = synthetic_reference_minus();
  const Spectrum zero = synthetic_reference_zero();
  minus.validate();
  zero.validate();
  CHECK(*std::max_element(minus.intensity.begin(), minus.intensity.end()) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(minus.min_wavelength() <= 560.0);
  CHECK(minus.max_wavelength() >= 750.0);
  // NV0 peaks blue of NV-
  const auto argmax = [](const Spectrum& s) {
    return s.wavelength_nm[static_cast<std::size_t>(
        std::max_element(s.intensity.begin(), s.intensity.end()) -
        s.intensity.begin())];
  };
  CHECK(argmax(zero) < argmax(minus));
}
