#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

#ifndef SIVFS_CLI_PATH
#error "SIVFS_CLI_PATH must point at the built binary"
#endif

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli_output.log";
  const std::string command =
      std::string("cd ") + dir.string() + " && " + SIVFS_CLI_PATH + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

fs::path make_work_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sivfs_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("spectrum subcommand") {
  const fs::path dir = make_work_dir("spectrum");

  SUBCASE("zero parameters give twelve zero eigenvalues") {
    write_file(dir / "zero.json", "{}");
    const RunResult run = run_cli("spectrum --params zero.json --out .", dir);
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(read_file(dir / "spectrum.json"));
    REQUIRE(doc["eigenvalues_ghz"].size() == 12);
    for (const auto& e : doc["eigenvalues_ghz"]) CHECK(std::abs(e.get<double>()) < 1e-12);
  }

  SUBCASE("an inverted center has an E-like lowest multiplet") {
    write_file(dir / "v3.json", R"({"delta_a": -20000.0, "lambda_so": 300.0, "d_tilde": -175.0})");
    const RunResult run = run_cli("spectrum --params v3.json --out .", dir);
    REQUIRE(run.exit_code == 0);
    const json doc = json::parse(read_file(dir / "spectrum.json"));
    CHECK(doc["labels"][0].get<std::string>() == "E-like");
  }

  SUBCASE("malformed parameter files exit with the validation code") {
    write_file(dir / "bad.json", "{broken");
    const RunResult run = run_cli("spectrum --params bad.json --out .", dir);
    CHECK(run.exit_code == 2);
  }

  SUBCASE("unknown strain keys exit with the validation code") {
    write_file(dir / "zero.json", "{}");
    const RunResult run = run_cli("spectrum --params zero.json --strain uqq=1 --out .", dir);
    CHECK(run.exit_code == 2);
  }
}

TEST_CASE("lac subcommand reproduces the Table I fields") {
  const fs::path dir = make_work_dir("lac");
  const RunResult run = run_cli("lac --d-mhz 64 --g 2.0 --bmin 0 --bmax 6 --scan --out .", dir);
  REQUIRE(run.exit_code == 0);
  CHECK(run.output.find("2.286") != std::string::npos);
  CHECK(run.output.find("4.573") != std::string::npos);
  const json doc = json::parse(read_file(dir / "lac.json"));
  REQUIRE(doc["fields_mt"].size() == 2);
  CHECK(doc["fields_mt"][0].get<double>() == doctest::Approx(2.2863).epsilon(1e-3));
  REQUIRE(doc["fields_scan_mt"].size() == 2);

  const RunResult v3 = run_cli("lac --d-mhz -14 --g 2.0 --bmin 0 --bmax 6 --out .", dir);
  REQUIRE(v3.exit_code == 0);
  CHECK(v3.output.find("0.500") != std::string::npos);
  CHECK(v3.output.find("1.000") != std::string::npos);
}

TEST_CASE("sweep subcommand writes the documented csv") {
  const fs::path dir = make_work_dir("sweep");
  write_file(dir / "p.json", R"({"delta_a": 10000.0, "xi_e": 10000.0})");
  const RunResult run =
      run_cli("sweep --params p.json --axis lambda_so --start 0 --stop 10 --count 5 --strain uxz=0.25 --out .", dir);
  REQUIRE(run.exit_code == 0);
  const std::string csv = read_file(dir / "sweep.csv");
  CHECK(csv.rfind("axis,e1,e2,e3,e4,e5,e6,e7,e8,e9,e10,e11,e12\n", 0) == 0);
  int lines = 0;
  for (const char c : csv) lines += (c == '\n');
  CHECK(lines == 6);
  CHECK(fs::exists(dir / "manifest_sweep.json"));
}

TEST_CASE("synth and fit round trips deterministically") {
  const fs::path dir = make_work_dir("synth");
  const std::string synth_args =
      "synth --model rabi --t2 219 --omega 0.0628318530717958648 --grid-start 0 --grid-stop 1000 --points 200 "
      "--noise 0.03 --seed 1 --out-file rabi.csv --out .";
  REQUIRE(run_cli(synth_args, dir).exit_code == 0);
  const std::string first = read_file(dir / "rabi.csv");
  REQUIRE(run_cli(synth_args, dir).exit_code == 0);
  CHECK(first == read_file(dir / "rabi.csv"));  // byte-identical rerun

  const RunResult fit = run_cli("fit-rabi --data rabi.csv --out .", dir);
  REQUIRE(fit.exit_code == 0);
  const json doc = json::parse(read_file(dir / "fit_rabi.json"));
  CHECK(doc["converged"].get<bool>());
  CHECK(doc["params"]["t2_star_ns"].get<double>() == doctest::Approx(219.0).epsilon(0.08));

  const std::string fit_json = read_file(dir / "fit_rabi.json");
  REQUIRE(run_cli("fit-rabi --data rabi.csv --out .", dir).exit_code == 0);
  CHECK(fit_json == read_file(dir / "fit_rabi.json"));
}

TEST_CASE("synth angular feeds fit-angular") {
  const fs::path dir = make_work_dir("angular");
  REQUIRE(run_cli("synth --model angular --i0 1.0 --cos2theta 0.96 --grid-start 0 --grid-stop 180 --points 19 "
                  "--noise 0.01 --seed 3 --out-file scan.csv --out .",
                  dir)
              .exit_code == 0);
  const RunResult fit = run_cli("fit-angular --data scan.csv --out .", dir);
  REQUIRE(fit.exit_code == 0);
  const json doc = json::parse(read_file(dir / "fit_angular.json"));
  CHECK(doc["params"]["cos2theta"].get<double>() == doctest::Approx(0.96).epsilon(0.03));
}

TEST_CASE("theta-map emits the map, the contour and the intercept report") {
  const fs::path dir = make_work_dir("map");
  const RunResult run = run_cli("theta-map --ratio-max 0.3 --cells 31 --contour-deg 76 --out .", dir);
  REQUIRE(run.exit_code == 0);
  CHECK(read_file(dir / "theta_map.csv").rfind("lambda_ratio,strain_ratio,theta_deg\n", 0) == 0);
  CHECK(read_file(dir / "theta_contour.csv").rfind("lambda_ratio,strain_ratio\n", 0) == 0);
  const json doc = json::parse(read_file(dir / "theta_map_report.json"));
  CHECK(doc["strain_free_intercept_exact"].get<double>() == doctest::Approx(0.1826).epsilon(0.05));
  CHECK(doc["strain_free_intercept_closed_form"].get<double>() == doctest::Approx(0.1545).epsilon(1e-3));
  CHECK(doc.contains("deviation_from_paper"));
}

TEST_CASE("calibrate and decompose work through files") {
  const fs::path dir = make_work_dir("pipeline");
  std::ostringstream hi, lo;
  hi << "wavelength_nm,intensity\n";
  lo << "wavelength_nm,intensity\n";
  for (double wl = 800.0; wl <= 810.0; wl += 1.0) {
    hi << wl << ",3.0\n";
    lo << wl << ",1.5\n";
  }
  write_file(dir / "hi.csv", hi.str());
  write_file(dir / "lo.csv", lo.str());
  const RunResult cal = run_cli(
      "calibrate --i-0-90 hi.csv --i-90-90 hi.csv --i-0-0 lo.csv --i-90-0 lo.csv --apply hi.csv --alpha 90 --out .",
      dir);
  REQUIRE(cal.exit_code == 0);
  const std::string curve = read_file(dir / "calibration.csv");
  CHECK(curve.rfind("wavelength_nm,factor,valid\n", 0) == 0);
  CHECK(curve.find(",2,1") != std::string::npos);  // factor 1 + 2A = 2
  const std::string corrected = read_file(dir / "calibrated.csv");
  CHECK(corrected.find(",1.5") != std::string::npos);  // 3.0 / (1 + 2A)

  std::ostringstream at, ref;
  at << "phi_deg,intensity\n";
  ref << "phi_deg,intensity\n";
  for (int k = 0; k <= 18; ++k) {
    const double phi = 10.0 * k;
    const double v1 = 1.0 + 0.06 * std::cos(2.0 * phi * 3.14159265358979 / 180.0);
    const double v2 = 0.8 * (1.0 + 0.96 * std::cos(2.0 * phi * 3.14159265358979 / 180.0));
    ref << phi << "," << v1 << "\n";
    at << phi << "," << (v2 + 0.4 * v1) << "\n";
  }
  write_file(dir / "at.csv", at.str());
  write_file(dir / "ref.csv", ref.str());
  const RunResult dec = run_cli("decompose --at-zpl at.csv --ref ref.csv --a 0.4 --out .", dir);
  REQUIRE(dec.exit_code == 0);
  CHECK(fs::exists(dir / "decomposed.csv"));
  const RunResult fit = run_cli("fit-angular --data decomposed.csv --out .", dir);
  REQUIRE(fit.exit_code == 0);
  const json doc = json::parse(read_file(dir / "fit_angular.json"));
  CHECK(doc["params"]["cos2theta"].get<double>() == doctest::Approx(0.96).epsilon(1e-6));
}

TEST_CASE("validate-lowdin reports deviations") {
  const fs::path dir = make_work_dir("lowdin");
  write_file(dir / "p.json", R"({"delta_a": 100000.0, "lambda_so": 1000.0})");
  const RunResult run = run_cli("validate-lowdin --params p.json --out .", dir);
  REQUIRE(run.exit_code == 0);
  const json doc = json::parse(read_file(dir / "lowdin.json"));
  CHECK(doc["dev_a2_ghz"].get<double>() < 1e-3);
  CHECK(doc["classification_clean"].get<bool>());
}

TEST_CASE("help exits cleanly and documents the csv columns") {
  const fs::path dir = make_work_dir("help");
  const RunResult run = run_cli("--help", dir);
  CHECK(run.exit_code == 0);
  CHECK(run.output.find("sweep CSV") != std::string::npos);
  CHECK(run.output.find("axis,e1..e12") != std::string::npos);
  const RunResult missing = run_cli("spectrum", dir);  // required --params absent
  CHECK(missing.exit_code == 2);
}
