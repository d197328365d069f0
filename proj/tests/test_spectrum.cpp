#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ndcharge/spectrum.hpp"

using namespace ndcharge;

TEST_CASE("load_spectrum: minimal valid input") {
  std::istringstream in("wavelength_nm,intensity\n560,1.0\n561,0.9\n");
  const Spectrum s = load_spectrum(in);
  REQUIRE(s.size() == 2);
  CHECK(s.wavelength_nm[0] == 560.0);
  CHECK(s.intensity[1] == 0.9);
}

TEST_CASE("load_spectrum: duplicate wavelength names the line") {
  std::istringstream in("wavelength_nm,intensity\n560,1.0\n600,0.5\n600,0.4\n");
  try {
    load_spectrum(in);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("load_spectrum: shuffled rows match sorted input") {
  std::istringstream shuffled(
      "wavelength_nm,intensity\n600,0.5\n560,1.0\n580,0.7\n");
  std::istringstream sorted(
      "wavelength_nm,intensity\n560,1.0\n580,0.7\n600,0.5\n");
  const Spectrum a = load_spectrum(shuffled);
  const Spectrum b = load_spectrum(sorted);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.wavelength_nm[i] == b.wavelength_nm[i]);
    CHECK(a.intensity[i] == b.intensity[i]);
  }
}

TEST_CASE("load_spectrum: malformed input") {
  std::istringstream bad("wavelength_nm,intensity\n560,1.0\noops,zap\n");
  CHECK_THROWS_AS(load_spectrum(bad), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_spectrum(empty), ParseError);
  std::istringstream one_col("wavelength_nm,intensity\n560\n");
  CHECK_THROWS_AS(load_spectrum(one_col), ParseError);
}

namespace {

Spectrum ramp() {
  Spectrum s;
  for (int i = 0; i <= 10; ++i) {
    s.wavelength_nm.push_back(560.0 + 2.0 * i);
    s.intensity.push_back(0.1 * i);
  }
  return s;
}

}  // namespace

TEST_CASE("resample") {
  const Spectrum s = ramp();

  SUBCASE("identity on the source grid") {
    const Spectrum r = resample(s, s.wavelength_nm);
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(r.intensity[i] == s.intensity[i]);
  }

  SUBCASE("midpoint of two nodes") {
    Spectrum two;
    two.wavelength_nm = {600.0, 602.0};
    two.intensity = {0.0, 1.0};
    const std::vector<double> grid{601.0};
    CHECK(resample(two, grid).intensity[0] == 0.5);
  }

  SUBCASE("refined superset grid preserves node values exactly") {
    std::vector<double> refined;
    for (double w = 560.0; w <= 580.0 + 1e-12; w += 0.5) refined.push_back(w);
    const Spectrum r = resample(s, refined);
    const Spectrum back = resample(r, s.wavelength_nm);
    for (std::size_t i = 0; i < s.size(); ++i)
      CHECK(back.intensity[i] == s.intensity[i]);
  }

  SUBCASE("extrapolation is rejected") {
    const std::vector<double> outside{559.0};
    CHECK_THROWS_AS(resample(s, outside), std::domain_error);
  }
}

TEST_CASE("peak_normalize") {
  SUBCASE("constant spectrum") {
    Spectrum s;
    s.wavelength_nm = {560.0, 570.0, 580.0};
    s.intensity = {5.0, 5.0, 5.0};
    const Spectrum n = peak_normalize(s);
    for (double v : n.intensity) CHECK(v == 1.0);
  }

  SUBCASE("idempotent") {
    const Spectrum n = peak_normalize(ramp());
    const Spectrum nn = peak_normalize(n);
    for (std::size_t i = 0; i < n.size(); ++i)
      CHECK(std::abs(nn.intensity[i] - n.intensity[i]) < 1e-12);
  }

  SUBCASE("scale invariant") {
    Spectrum scaled = ramp();
    for (double& v : scaled.intensity) v *= 3.7;
    const Spectrum a = peak_normalize(ramp());
    const Spectrum b = peak_normalize(scaled);
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(a.intensity[i] - b.intensity[i]) < 1e-15);
  }

  SUBCASE("all-zero spectrum is rejected") {
    Spectrum z;
    z.wavelength_nm = {560.0, 570.0};
    z.intensity = {0.0, 0.0};
    CHECK_THROWS_AS(peak_normalize(z), std::domain_error);
  }

  SUBCASE("window restriction") {
    const Spectrum n = peak_normalize(ramp(), std::make_pair(560.0, 570.0));
    // the window maximum (0.5 at 570 nm) becomes 1
    CHECK(n.intensity[5] == 1.0);
    CHECK(n.intensity.back() == doctest::Approx(2.0));
  }
}

TEST_CASE("spectrum CSV round trip") {
  const Spectrum s = ramp();
  std::ostringstream out;
  write_spectrum(out, s);
  std::istringstream in(out.str());
  const Spectrum r = load_spectrum(in);
  REQUIRE(r.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(r.wavelength_nm[i] == s.wavelength_nm[i]);
    CHECK(r.intensity[i] == s.intensity[i]);
  }
}
