// End-to-end tests of the ndcharge binary: exit codes, output formats, and
// byte-for-byte determinism.

#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ndcharge/io.hpp"
#include "ndcharge/kinetics.hpp"
#include "ndcharge/spectrum.hpp"
#include "ndcharge/unmix.hpp"

namespace fs = std::filesystem;
using namespace ndcharge;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("ndcharge_cli_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out_file = dir / "stdout.txt";
  const std::string cmd = std::string(NDCHARGE_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2> " +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  return r;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("cli simulate-band: flat-band case") {
  const fs::path dir = scratch_dir();
  const auto r = run_cli("simulate-band --density 0 --quiet --out " +
                             (dir / "band.csv").string(),
                         dir);
  CHECK(r.exit_code == 0);
  const BandSummary s = band_summary_from_json(r.out);
  CHECK(s.converged);
  CHECK(s.nv_minus_fraction > 0.999);
  CHECK(!s.crossover_depth_nm.has_value());
  std::ifstream csv(dir / "band.csv");
  const BandTable t = read_band_csv(csv);
  CHECK(t.depth_nm.size() == 41);
  fs::remove_all(dir);
}

TEST_CASE("cli simulate-band: paper defaults hit the expected crossover") {
  const fs::path dir = scratch_dir();
  const auto r = run_cli("simulate-band --density 1 --quiet --out " +
                             (dir / "band.csv").string(),
                         dir);
  CHECK(r.exit_code == 0);
  const BandSummary s = band_summary_from_json(r.out);
  REQUIRE(s.crossover_depth_nm.has_value());
  CHECK(*s.crossover_depth_nm > 12.5 * 0.75);
  CHECK(*s.crossover_depth_nm < 12.5 * 1.25);
  fs::remove_all(dir);
}

TEST_CASE("cli simulate-band: byte-identical reruns") {
  const fs::path dir = scratch_dir();
  const auto a = run_cli("simulate-band --density 0.8 --quiet --out " +
                             (dir / "a.csv").string(),
                         dir);
  const std::string json_a = a.out;
  const auto b = run_cli("simulate-band --density 0.8 --quiet --out " +
                             (dir / "b.csv").string(),
                         dir);
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(json_a == b.out);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  fs::remove_all(dir);
}

TEST_CASE("cli simulate-band: config file and overrides") {
  const fs::path dir = scratch_dir();
  write_file(dir / "run.cfg",
             "material.eps_r = 5.7\ngrid.radius_nm = 20\ngrid.step_nm = 0.5\n"
             "surface.acceptor_density_nm2 = 0\n");
  const auto r = run_cli("simulate-band --config " + (dir / "run.cfg").string() +
                             " --quiet --out " + (dir / "band.csv").string(),
                         dir);
  CHECK(r.exit_code == 0);

  write_file(dir / "bad.cfg", "material.eps_rr = 5.7\n");
  const auto bad = run_cli("simulate-band --config " +
                               (dir / "bad.cfg").string() + " --quiet --out " +
                               (dir / "x.csv").string(),
                           dir);
  CHECK(bad.exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("cli sweep") {
  const fs::path dir = scratch_dir();

  SUBCASE("single zero density") {
    const auto r = run_cli("sweep --densities 0 --quiet", dir);
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    const FractionCurve c = read_fraction_curve_csv(in);
    REQUIRE(c.fractions.size() == 1);
    CHECK(c.fractions[0] > 0.999);
    CHECK(c.converged[0] == 1);
  }

  SUBCASE("monotone non-increasing column") {
    const auto r = run_cli("sweep --densities 0,0.1,0.5,1,2 --quiet", dir);
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    const FractionCurve c = read_fraction_curve_csv(in);
    REQUIRE(c.fractions.size() == 5);
    for (std::size_t i = 1; i < c.fractions.size(); ++i)
      CHECK(c.fractions[i] <= c.fractions[i - 1]);
  }

  SUBCASE("missing density list is a usage error") {
    const auto r = run_cli("sweep --quiet", dir);
    CHECK(r.exit_code == 2);
  }

  SUBCASE("malformed density list is a usage error") {
    const auto r = run_cli("sweep --densities 1,0.5 --quiet", dir);
    CHECK(r.exit_code == 2);
  }

  SUBCASE("serial flag returns byte-identical output") {
    const auto par = run_cli("sweep --densities 0,0.5,1,1.5,2 --quiet", dir);
    const auto ser =
        run_cli("sweep --densities 0,0.5,1,1.5,2 --serial --quiet", dir);
    CHECK(par.exit_code == 0);
    CHECK(ser.exit_code == 0);
    CHECK(par.out == ser.out);
  }
  fs::remove_all(dir);
}

namespace {

fs::path write_refs(const fs::path& dir) {
  write_spectrum_file(dir / "ref_minus.csv", synthetic_reference_minus());
  write_spectrum_file(dir / "ref_zero.csv", synthetic_reference_zero());
  return dir;
}

Spectrum mixture_on_grid(double fraction, double scale) {
  std::vector<double> grid;
  for (double w = 555.0; w <= 760.0 + 1e-9; w += 1.0) grid.push_back(w);
  const ReferenceSet refs = ReferenceSet::from_spectra(
      synthetic_reference_minus(), synthetic_reference_zero());
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

}  // namespace

TEST_CASE("cli fit-spectrum") {
  const fs::path dir = scratch_dir();
  write_refs(dir);
  const std::string refs_args = " --ref-minus " +
                                (dir / "ref_minus.csv").string() +
                                " --ref-zero " + (dir / "ref_zero.csv").string();

  SUBCASE("measured equal to the NV- reference") {
    write_spectrum_file(dir / "measured.csv", synthetic_reference_minus());
    const auto r = run_cli("fit-spectrum --measured " +
                               (dir / "measured.csv").string() + refs_args +
                               " --quiet",
                           dir);
    CHECK(r.exit_code == 0);
    const FitResult fit = fit_result_from_json(r.out);
    CHECK(fit.fraction == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("synthetic 0.6/0.4 mixture at scale 0.3") {
    write_spectrum_file(dir / "mix.csv", mixture_on_grid(0.6, 0.3));
    const auto r = run_cli(
        "fit-spectrum --measured " + (dir / "mix.csv").string() + refs_args +
            " --quiet --out " + (dir / "fit.json").string(),
        dir);
    CHECK(r.exit_code == 0);
    const FitResult fit = fit_result_from_json(r.out);
    CHECK(fit.fraction == doctest::Approx(0.6).epsilon(1e-8));
    CHECK(fit.scale == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(slurp(dir / "fit.json") == r.out);
    // reruns are byte-identical
    const auto again = run_cli(
        "fit-spectrum --measured " + (dir / "mix.csv").string() + refs_args +
            " --quiet",
        dir);
    CHECK(again.out == r.out);
  }

  SUBCASE("degenerate references exit with the conditioning code") {
    write_spectrum_file(dir / "measured.csv", mixture_on_grid(0.5, 1.0));
    const auto r = run_cli(
        "fit-spectrum --measured " + (dir / "measured.csv").string() +
            " --ref-minus " + (dir / "ref_minus.csv").string() +
            " --ref-zero " + (dir / "ref_minus.csv").string() + " --quiet",
        dir);
    CHECK(r.exit_code == 4);
  }

  SUBCASE("missing measured file is an input error") {
    const auto r = run_cli(
        "fit-spectrum --measured " + (dir / "absent.csv").string() + refs_args,
        dir);
    CHECK(r.exit_code == 2);
  }

  SUBCASE("malformed measured file is an input error") {
    write_file(dir / "garbled.csv", "wavelength_nm,intensity\n600,1\n600,2\n");
    const auto r = run_cli("fit-spectrum --measured " +
                               (dir / "garbled.csv").string() + refs_args +
                               " --quiet",
                           dir);
    CHECK(r.exit_code == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli fit-kinetics") {
  const fs::path dir = scratch_dir();
  KineticParams gen;
  gen.alpha = 1.2;
  gen.beta = 0.08;
  gen.gamma = 15.0;
  gen.delta = 0.05;
  gen.trap_capacity = 0.8;

  PowerCurve curve;
  for (double p : {0.05, 0.1, 0.2, 0.35, 0.6, 0.9, 1.3, 1.7, 2.2, 2.8})
    curve.power_mw.push_back(p);
  for (double p : {2.2, 1.7, 1.3, 0.9, 0.6, 0.35, 0.2, 0.1, 0.05})
    curve.power_mw.push_back(p);
  curve.dwell_s = 1.0;
  curve.fraction =
      simulate_sweep(curve.power_mw, curve.dwell_s, gen, {0.0, 0.0}).fractions;
  {
    std::ofstream out(dir / "curve.csv", std::ios::binary);
    write_power_curve_csv(out, curve);
  }

  SUBCASE("noiseless recovery within 5% and positive hysteresis area") {
    const auto r = run_cli(
        "fit-kinetics --curve " + (dir / "curve.csv").string() +
            " --dwell 1 --init-alpha 1.4 --init-beta 0.07 --init-gamma 12"
            " --init-delta 0.06 --init-cap 0.9 --quiet",
        dir);
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j.at("alpha").get<double>() - gen.alpha) / gen.alpha < 0.05);
    CHECK(std::abs(j.at("beta").get<double>() - gen.beta) / gen.beta < 0.05);
    CHECK(std::abs(j.at("gamma").get<double>() - gen.gamma) / gen.gamma < 0.05);
    CHECK(std::abs(j.at("delta").get<double>() - gen.delta) / gen.delta < 0.05);
    CHECK(std::abs(j.at("trap_capacity").get<double>() - gen.trap_capacity) /
              gen.trap_capacity <
          0.05);
    CHECK(j.at("hysteresis_area").get<double>() > 0.0);
    // determinism
    const auto again = run_cli(
        "fit-kinetics --curve " + (dir / "curve.csv").string() +
            " --dwell 1 --init-alpha 1.4 --init-beta 0.07 --init-gamma 12"
            " --init-delta 0.06 --init-cap 0.9 --quiet",
        dir);
    CHECK(again.out == r.out);
  }

  SUBCASE("too few rows exit with the input code") {
    write_file(dir / "tiny.csv",
               "power_mw,nv_minus_fraction\n0.1,0\n0.2,0.1\n0.4,0.2\n");
    const auto r = run_cli(
        "fit-kinetics --curve " + (dir / "tiny.csv").string() + " --quiet",
        dir);
    CHECK(r.exit_code == 2);
  }
  fs::remove_all(dir);
}
