#include "sivfs/effective.hpp"
#include "sivfs/hamiltonian.hpp"
#include "sivfs/models.hpp"
#include "sivfs/optics.hpp"
#include "sivfs/pipeline.hpp"
#include "sivfs/units.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace sivfs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr const char* kVersion = "0.1.0";

StrainTensor parse_strain(const std::string& spec) {
  StrainTensor u;
  if (spec.empty()) return u;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("strain spec must be key=value pairs: " + item);
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("strain value is not numeric: " + item);
    }
    if (key == "uxx") u.u_xx = value;
    else if (key == "uyy") u.u_yy = value;
    else if (key == "uzz") u.u_zz = value;
    else if (key == "uxy") u.u_xy = value;
    else if (key == "uxz") u.u_xz = value;
    else if (key == "uyz") u.u_yz = value;
    else throw std::invalid_argument("unknown strain component '" + key + "' (use uxx,uyy,uzz,uxy,uxz,uyz)");
  }
  return u;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& inputs, long long seed) {
  json doc;
  doc["command"] = command;
  doc["inputs"] = inputs;
  doc["seed"] = seed;
  doc["version"] = kVersion;
  write_text_atomic(out_dir / ("manifest_" + command + ".json"), doc.dump(2) + "\n");
}

json strain_json(const StrainTensor& u) {
  return {{"u_xx", u.u_xx}, {"u_yy", u.u_yy}, {"u_zz", u.u_zz},
          {"u_xy", u.u_xy}, {"u_xz", u.u_xz}, {"u_yz", u.u_yz}};
}

void ensure_out_dir(const std::string& out) {
  if (!out.empty() && !fs::exists(out)) fs::create_directories(out);
}

int finish_fit(const FitResult& fit, const fs::path& out_dir, const std::string& name) {
  write_text_atomic(out_dir / (name + ".json"), fit_result_to_json(fit) + "\n");
  std::cout << fit_result_to_json(fit) << "\n";
  if (!fit.converged) {
    std::cerr << name << ": fit did not converge within the iteration budget\n";
    return kExitNumeric;
  }
  return kExitOk;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw std::invalid_argument("expected a comma separated list of numbers");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sivfs: excited-state fine structure, optical selection rules and ODMR models\n"
      "of spin-3/2 silicon-vacancy centers in 6H-SiC.\n\n"
      "File formats:\n"
      "  parameter JSON   keys delta_a, lambda_so, b_ss, d_tilde, xi_e (MHz), g_factor\n"
      "  data CSV         x,y[,sigma] with one header row (fit-odmr: nu_mhz,t_k,signal[,sigma])\n"
      "  spectrum CSV     wavelength_nm,intensity[,valid] plus a .json sidecar with angles\n"
      "  sweep CSV        axis,e1..e12 (GHz)\n"
      "  theta map CSV    lambda_ratio,strain_ratio,theta_deg; contour CSV lambda_ratio,strain_ratio"};
  app.require_subcommand(1);

  // ---- spectrum --------------------------------------------------------
  std::string params_path, strain_spec, out_dir = ".";
  double bz_mt = 0.0;
  auto* cmd_spectrum = app.add_subcommand("spectrum", "Eigenvalues and multiplet labels for one parameter set");
  cmd_spectrum->add_option("--params", params_path, "center parameter JSON file (energies in MHz)")->required();
  cmd_spectrum->add_option("--strain", strain_spec, "strain components, e.g. uxz=0.01,uyz=0");
  cmd_spectrum->add_option("--bz", bz_mt, "magnetic field along c (mT)");
  cmd_spectrum->add_option("--out", out_dir, "output directory");

  // ---- sweep -----------------------------------------------------------
  std::string sweep_axis = "lambda_so";
  double sweep_start = 0.0, sweep_stop = 1.0;
  int sweep_count = 51;
  auto* cmd_sweep = app.add_subcommand("sweep", "Eigenvalue table along lambda_so (GHz), u_xz or b_z (mT)");
  cmd_sweep->add_option("--params", params_path, "center parameter JSON file")->required();
  cmd_sweep->add_option("--strain", strain_spec, "strain components");
  cmd_sweep->add_option("--axis", sweep_axis, "lambda_so | u_xz | b_z")
      ->check(CLI::IsMember({"lambda_so", "u_xz", "b_z"}));
  cmd_sweep->add_option("--start", sweep_start, "first grid value")->required();
  cmd_sweep->add_option("--stop", sweep_stop, "last grid value")->required();
  cmd_sweep->add_option("--count", sweep_count, "grid points")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--out", out_dir, "output directory");

  // ---- theta-map ---------------------------------------------------------
  double map_max = 0.5;
  int map_cells = 101;
  double contour_level = 76.0;
  auto* cmd_map = app.add_subcommand("theta-map",
                                     "PL tilt angle of the 4E multiplet over (lambda/delta_a, Xi u_xz/delta_a)");
  cmd_map->add_option("--ratio-max", map_max, "upper end of both ratio axes (<= 0.5)");
  cmd_map->add_option("--cells", map_cells, "grid points per axis")->check(CLI::Range(2, 2001));
  cmd_map->add_option("--contour-deg", contour_level, "contour level in degrees");
  cmd_map->add_option("--out", out_dir, "output directory");

  // ---- lac ----------------------------------------------------------------
  double lac_d_mhz = 64.0, lac_g = 2.0, lac_bmin = 0.0, lac_bmax = 6.0;
  bool lac_scan = false;
  auto* cmd_lac = app.add_subcommand("lac", "Level anticrossing fields of the axial quadruplet model");
  cmd_lac->add_option("--d-mhz", lac_d_mhz, "zero-field splitting constant D (MHz)")->required();
  cmd_lac->add_option("--g", lac_g, "g factor");
  cmd_lac->add_option("--bmin", lac_bmin, "lower field bound (mT)");
  cmd_lac->add_option("--bmax", lac_bmax, "upper field bound (mT)");
  cmd_lac->add_flag("--scan", lac_scan, "cross-check with the 1 uT numeric gap scan");
  cmd_lac->add_option("--out", out_dir, "output directory");

  // ---- fits ------------------------------------------------------------------
  std::string data_path;
  auto add_fit = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--data", data_path, "input CSV")->required();
    cmd->add_option("--out", out_dir, "output directory");
    return cmd;
  };
  auto* cmd_fit_angular = add_fit("fit-angular", "Fit I0(1 + cos2theta cos 2phi) to phi_deg,intensity[,sigma]");
  auto* cmd_fit_arrhenius = add_fit("fit-arrhenius", "Fit c0 + c1 exp(-Ea/kT) to t_k,contrast[,sigma]");
  auto* cmd_fit_odmr = add_fit("fit-odmr", "Fit the inversion lineshape to nu_mhz,t_k,signal[,sigma]");
  auto* cmd_fit_rabi = add_fit("fit-rabi", "Fit A + B cos(w tau + phi) exp(-tau/T2*) to tau_ns,signal[,sigma]");

  // ---- calibrate ----------------------------------------------------------------
  std::string cal_i090, cal_i9090, cal_i00, cal_i900, cal_apply;
  double cal_floor = 0.0, cal_alpha = 0.0;
  auto* cmd_cal = app.add_subcommand("calibrate", "Polarization sensitivity curve 1 + 2A(lambda), optionally applied");
  cmd_cal->add_option("--i-0-90", cal_i090, "spectrum beta=0 alpha=90")->required();
  cmd_cal->add_option("--i-90-90", cal_i9090, "spectrum beta=90 alpha=90")->required();
  cmd_cal->add_option("--i-0-0", cal_i00, "spectrum beta=0 alpha=0")->required();
  cmd_cal->add_option("--i-90-0", cal_i900, "spectrum beta=90 alpha=0")->required();
  cmd_cal->add_option("--noise-floor", cal_floor, "denominator noise floor");
  cmd_cal->add_option("--apply", cal_apply, "raw spectrum to correct with the new curve");
  cmd_cal->add_option("--alpha", cal_alpha, "polarizer angle of the raw spectrum (deg)");
  cmd_cal->add_option("--out", out_dir, "output directory");

  // ---- decompose -------------------------------------------------------------------
  std::string dec_at, dec_ref, dec_ref2, dec_spec0, dec_spec90;
  double dec_a = 0.0, dec_c = 0.0;
  bool dec_estimate = false;
  double win_v1 = 865.0, win_v2 = 887.0, win_v3 = 908.0, win_v3b = 902.0, win_half = 2.0;
  auto* cmd_dec = app.add_subcommand("decompose",
                                     "PSB subtraction of angular series, or mixture-ratio estimation from spectra");
  cmd_dec->add_option("--at-zpl", dec_at, "angular series at the target ZPL (phi_deg,intensity)");
  cmd_dec->add_option("--ref", dec_ref, "reference ZPL angular series");
  cmd_dec->add_option("--a", dec_a, "ratio multiplying --ref");
  cmd_dec->add_option("--ref2", dec_ref2, "second reference series (three-term variant)");
  cmd_dec->add_option("--c", dec_c, "ratio multiplying --ref2");
  cmd_dec->add_flag("--estimate", dec_estimate, "estimate ratios a,b,c from two calibrated spectra");
  cmd_dec->add_option("--spec0", dec_spec0, "calibrated spectrum at phi_m = 0 deg");
  cmd_dec->add_option("--spec90", dec_spec90, "calibrated spectrum at phi_m = 90 deg");
  cmd_dec->add_option("--v1-nm", win_v1, "V1 ZPL window center (placeholder default)");
  cmd_dec->add_option("--v2-nm", win_v2, "V2 ZPL window center (placeholder default)");
  cmd_dec->add_option("--v3-nm", win_v3, "V3 ZPL window center (placeholder default)");
  cmd_dec->add_option("--v3-base-nm", win_v3b, "PSB baseline window next to the V3 ZPL");
  cmd_dec->add_option("--half-width-nm", win_half, "half width of every window");
  cmd_dec->add_option("--out", out_dir, "output directory");

  // ---- synth ----------------------------------------------------------------------
  std::string synth_model = "rabi", synth_out_file = "synth.csv", synth_temps = "8,12,16,20,24";
  long long seed = 0;
  double noise = 0.0;
  double s_i0 = 1.0, s_cos2theta = 0.96;
  double s_c0 = -5e-3, s_c1 = 0.05, s_ea = 43.0;
  double s_tc0 = 16.0, s_gamma = 1.4, s_d0 = 14.0, s_dd = 2.0, s_scale = 1.0;
  double s_a = 0.0, s_b = 1.0, s_omega = 0.0628318530717958648, s_phi = 0.0, s_t2 = 219.0;
  double grid_start = 0.0, grid_stop = 180.0;
  int grid_points = 19;
  auto* cmd_synth = app.add_subcommand("synth", "Deterministic synthetic datasets for the four models");
  cmd_synth->add_option("--model", synth_model, "angular | arrhenius | odmr | rabi")
      ->check(CLI::IsMember({"angular", "arrhenius", "odmr", "rabi"}));
  cmd_synth->add_option("--seed", seed, "random seed (fixed seed => byte-identical output)");
  cmd_synth->add_option("--noise", noise, "additive Gaussian noise sigma");
  cmd_synth->add_option("--grid-start", grid_start, "x grid start (phi deg / T K / nu MHz / tau ns)");
  cmd_synth->add_option("--grid-stop", grid_stop, "x grid stop");
  cmd_synth->add_option("--points", grid_points, "x grid points")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--i0", s_i0, "angular: mean intensity");
  cmd_synth->add_option("--cos2theta", s_cos2theta, "angular: cos 2theta");
  cmd_synth->add_option("--c0", s_c0, "arrhenius: offset");
  cmd_synth->add_option("--c1", s_c1, "arrhenius: amplitude");
  cmd_synth->add_option("--ea-mev", s_ea, "arrhenius: activation energy (meV)");
  cmd_synth->add_option("--tc0", s_tc0, "odmr: critical temperature (K)");
  cmd_synth->add_option("--gamma", s_gamma, "odmr: correlation slope (K/MHz)");
  cmd_synth->add_option("--d0", s_d0, "odmr: mean splitting constant (MHz)");
  cmd_synth->add_option("--delta-d", s_dd, "odmr: splitting spread (MHz)");
  cmd_synth->add_option("--scale", s_scale, "odmr: amplitude");
  cmd_synth->add_option("--temps", synth_temps, "odmr: comma separated temperatures (K)");
  cmd_synth->add_option("--a-offset", s_a, "rabi: offset A");
  cmd_synth->add_option("--b-amp", s_b, "rabi: amplitude B");
  cmd_synth->add_option("--omega", s_omega, "rabi: angular frequency (rad/ns)");
  cmd_synth->add_option("--phi", s_phi, "rabi: phase (rad)");
  cmd_synth->add_option("--t2", s_t2, "rabi: dephasing time T2* (ns)");
  cmd_synth->add_option("--out-file", synth_out_file, "output CSV path");
  cmd_synth->add_option("--out", out_dir, "output directory for the manifest");

  // ---- validate-lowdin ---------------------------------------------------------
  auto* cmd_lowdin = app.add_subcommand("validate-lowdin", "Effective-vs-exact multiplet spectra deviation report");
  cmd_lowdin->add_option("--params", params_path, "center parameter JSON file")->required();
  cmd_lowdin->add_option("--strain", strain_spec, "strain components");
  cmd_lowdin->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    ensure_out_dir(out_dir);
    const fs::path out(out_dir);

    if (cmd_spectrum->parsed()) {
      const CenterParams p = load_center_params(params_path);
      const StrainTensor u = parse_strain(strain_spec);
      const EigenSystem es = eigensystem(build_hamiltonian(p, u, {bz_mt}));
      json doc;
      doc["eigenvalues_ghz"] = json::array();
      doc["labels"] = json::array();
      doc["w_e"] = json::array();
      for (int k = 0; k < es.dim(); ++k) {
        doc["eigenvalues_ghz"].push_back(es.eigenvalues(k));
        doc["labels"].push_back(to_string(es.labels[static_cast<std::size_t>(k)]));
        doc["w_e"].push_back(es.w_e[static_cast<std::size_t>(k)]);
      }
      doc["hierarchy_holds"] = p.hierarchy_holds();
      write_text_atomic(out / "spectrum.json", doc.dump(2) + "\n");
      for (int k = 0; k < es.dim(); ++k) {
        std::printf("%2d  %14.6f GHz  w_E=%.4f  %s\n", k + 1, es.eigenvalues(k), es.w_e[static_cast<std::size_t>(k)],
                    to_string(es.labels[static_cast<std::size_t>(k)]));
      }
      write_manifest(out, "spectrum",
                     {{"params", params_path}, {"strain", strain_json(parse_strain(strain_spec))}, {"bz_mt", bz_mt}},
                     0);
      return kExitOk;
    }

    if (cmd_sweep->parsed()) {
      const CenterParams p = load_center_params(params_path);
      const StrainTensor u = parse_strain(strain_spec);
      SweepAxis axis = SweepAxis::LambdaSo;
      if (sweep_axis == "u_xz") axis = SweepAxis::ShearUxz;
      if (sweep_axis == "b_z") axis = SweepAxis::FieldBz;
      const SweepTable table = sweep_parameter(p, u, axis, linspace(sweep_start, sweep_stop, sweep_count));
      std::ostringstream os;
      write_sweep_csv(os, table);
      write_text_atomic(out / "sweep.csv", os.str());
      write_manifest(out, "sweep",
                     {{"params", params_path},
                      {"strain", strain_json(u)},
                      {"axis", sweep_axis},
                      {"start", sweep_start},
                      {"stop", sweep_stop},
                      {"count", sweep_count}},
                     0);
      std::cout << "wrote " << (out / "sweep.csv").string() << " (" << table.grid.size() << " rows)\n";
      return kExitOk;
    }

    if (cmd_map->parsed()) {
      const auto grid = linspace(0.0, map_max, map_cells);
      const ThetaMap map = theta_map(grid, grid);
      std::ostringstream os;
      write_theta_map_csv(os, map);
      write_text_atomic(out / "theta_map.csv", os.str());

      const auto contour = theta_contour(map, contour_level);
      std::ostringstream cs;
      write_contour_csv(cs, contour);
      write_text_atomic(out / "theta_contour.csv", cs.str());

      const auto intercept = contour_strain_free_intercept(map, contour_level);
      const double pert_intercept = units::deg_to_rad(90.0 - contour_level) / std::sqrt(2.5);
      json doc;
      doc["contour_level_deg"] = contour_level;
      doc["strain_free_intercept_exact"] = intercept ? json(*intercept) : json();
      doc["strain_free_intercept_closed_form"] = pert_intercept;
      doc["paper_reference_ratio"] = 0.18;
      if (intercept) {
        doc["deviation_from_paper"] = *intercept - 0.18;
        doc["deviation_from_closed_form"] = *intercept - pert_intercept;
      }
      write_text_atomic(out / "theta_map_report.json", doc.dump(2) + "\n");
      write_manifest(out, "theta-map",
                     {{"ratio_max", map_max}, {"cells", map_cells}, {"contour_deg", contour_level}}, 0);
      std::cout << doc.dump(2) << "\n";
      return kExitOk;
    }

    if (cmd_lac->parsed()) {
      const auto analytic = find_level_anticrossings(lac_d_mhz, lac_g, lac_bmin, lac_bmax);
      json doc;
      doc["d_mhz"] = lac_d_mhz;
      doc["g_factor"] = lac_g;
      doc["fields_mt"] = analytic;
      std::cout << "level anticrossing fields (mT):";
      for (const double b : analytic) std::printf(" %.3f", b);
      std::printf("\n");
      if (lac_scan) {
        const auto scanned = find_level_anticrossings_scan(lac_d_mhz, lac_g, lac_bmin, lac_bmax);
        doc["fields_scan_mt"] = scanned;
        std::cout << "numeric gap scan (mT):";
        for (const double b : scanned) std::printf(" %.3f", b);
        std::printf("\n");
      }
      write_text_atomic(out / "lac.json", doc.dump(2) + "\n");
      write_manifest(out, "lac",
                     {{"d_mhz", lac_d_mhz}, {"g", lac_g}, {"bmin", lac_bmin}, {"bmax", lac_bmax}, {"scan", lac_scan}},
                     0);
      return kExitOk;
    }

    if (cmd_fit_angular->parsed()) {
      const FitResult fit = fit_angular(read_series_csv(data_path));
      write_manifest(out, "fit-angular", {{"data", data_path}}, 0);
      return finish_fit(fit, out, "fit_angular");
    }
    if (cmd_fit_arrhenius->parsed()) {
      const FitResult fit = fit_arrhenius(read_series_csv(data_path));
      write_manifest(out, "fit-arrhenius", {{"data", data_path}}, 0);
      return finish_fit(fit, out, "fit_arrhenius");
    }
    if (cmd_fit_odmr->parsed()) {
      const FitResult fit = fit_odmr(read_odmr_csv(data_path));
      write_manifest(out, "fit-odmr", {{"data", data_path}}, 0);
      return finish_fit(fit, out, "fit_odmr");
    }
    if (cmd_fit_rabi->parsed()) {
      const FitResult fit = fit_rabi(read_series_csv(data_path));
      write_manifest(out, "fit-rabi", {{"data", data_path}}, 0);
      return finish_fit(fit, out, "fit_rabi");
    }

    if (cmd_cal->parsed()) {
      const CalibrationCurve curve = correction_factor(read_spectrum_csv(cal_i090), read_spectrum_csv(cal_i9090),
                                                       read_spectrum_csv(cal_i00), read_spectrum_csv(cal_i900),
                                                       cal_floor);
      write_calibration_csv((out / "calibration.csv").string(), curve);
      std::cout << "wrote " << (out / "calibration.csv").string() << "\n";
      if (!cal_apply.empty()) {
        const Spectrum corrected = apply_calibration(read_spectrum_csv(cal_apply), curve, cal_alpha);
        write_spectrum_csv((out / "calibrated.csv").string(), corrected);
        std::cout << "wrote " << (out / "calibrated.csv").string() << "\n";
      }
      write_manifest(out, "calibrate",
                     {{"i_0_90", cal_i090},
                      {"i_90_90", cal_i9090},
                      {"i_0_0", cal_i00},
                      {"i_90_0", cal_i900},
                      {"noise_floor", cal_floor},
                      {"apply", cal_apply},
                      {"alpha_deg", cal_alpha}},
                     0);
      return kExitOk;
    }

    if (cmd_dec->parsed()) {
      if (dec_estimate) {
        if (dec_spec0.empty() || dec_spec90.empty()) {
          throw std::invalid_argument("--estimate needs --spec0 and --spec90");
        }
        ZplWindows windows;
        windows.v1_zpl = {win_v1, win_half};
        windows.v2_zpl = {win_v2, win_half};
        windows.v3_zpl = {win_v3, win_half};
        windows.v3_base = {win_v3b, win_half};
        const MixtureRatios ratios =
            estimate_mixture_ratios(read_spectrum_csv(dec_spec0), read_spectrum_csv(dec_spec90), windows);
        write_text_atomic(out / "mixture.json", mixture_report_json(ratios) + "\n");
        std::cout << mixture_report_json(ratios) << "\n";
        write_manifest(out, "decompose", {{"estimate", true}, {"spec0", dec_spec0}, {"spec90", dec_spec90}}, 0);
        return kExitOk;
      }
      if (dec_at.empty() || dec_ref.empty()) throw std::invalid_argument("decompose needs --at-zpl and --ref");
      const auto load_series = [](const std::string& path) {
        const DataSeries csv = read_series_csv(path);
        AngularSeries series;
        series.phi_deg = csv.x;
        series.intensity = csv.y;
        return series;
      };
      const AngularSeries at = load_series(dec_at);
      const AngularSeries ref = load_series(dec_ref);
      AngularSeries result = dec_ref2.empty() ? psb_subtract(at, ref, dec_a)
                                              : psb_subtract(at, ref, dec_a, load_series(dec_ref2), dec_c);
      DataSeries out_series;
      out_series.x = result.phi_deg;
      out_series.y = result.intensity;
      write_series_csv((out / "decomposed.csv").string(), out_series, "phi_deg,intensity");
      int clipped = 0;
      for (const auto flag : result.clipped) clipped += flag;
      json doc;
      doc["a"] = dec_a;
      if (!dec_ref2.empty()) doc["c"] = dec_c;
      doc["clipped_points"] = clipped;
      write_text_atomic(out / "decompose.json", doc.dump(2) + "\n");
      std::cout << doc.dump(2) << "\n";
      write_manifest(out, "decompose",
                     {{"at_zpl", dec_at}, {"ref", dec_ref}, {"a", dec_a}, {"ref2", dec_ref2}, {"c", dec_c}}, 0);
      return kExitOk;
    }

    if (cmd_synth->parsed()) {
      const auto grid = linspace(grid_start, grid_stop, grid_points);
      json inputs = {{"model", synth_model}, {"noise", noise}, {"grid_start", grid_start},
                     {"grid_stop", grid_stop}, {"points", grid_points}};
      if (synth_model == "angular") {
        write_series_csv(synth_out_file, synth_angular(grid, s_i0, s_cos2theta, noise, static_cast<std::uint64_t>(seed)),
                         "phi_deg,intensity");
        inputs["i0"] = s_i0;
        inputs["cos2theta"] = s_cos2theta;
      } else if (synth_model == "arrhenius") {
        if (grid_start <= 0.0) throw std::invalid_argument("arrhenius grid must start above 0 K");
        write_series_csv(synth_out_file,
                         synth_arrhenius(grid, s_c0, s_c1, s_ea, noise, static_cast<std::uint64_t>(seed)),
                         "t_k,contrast");
        inputs["c0"] = s_c0;
        inputs["c1"] = s_c1;
        inputs["ea_mev"] = s_ea;
      } else if (synth_model == "odmr") {
        const OdmrLineshapeParams op{s_tc0, s_gamma, s_d0, s_dd, s_scale};
        write_odmr_csv(synth_out_file, synth_odmr(grid, parse_list(synth_temps), op, noise,
                                                  static_cast<std::uint64_t>(seed)));
        inputs["tc0"] = s_tc0;
        inputs["gamma"] = s_gamma;
        inputs["d0"] = s_d0;
        inputs["delta_d"] = s_dd;
        inputs["scale"] = s_scale;
        inputs["temps"] = synth_temps;
      } else {
        const RabiParams rp{s_a, s_b, s_omega, s_phi, s_t2};
        write_series_csv(synth_out_file, synth_rabi(grid, rp, noise, static_cast<std::uint64_t>(seed)),
                         "tau_ns,signal");
        inputs["a_offset"] = s_a;
        inputs["b_amp"] = s_b;
        inputs["omega"] = s_omega;
        inputs["phi"] = s_phi;
        inputs["t2"] = s_t2;
      }
      inputs["out_file"] = synth_out_file;
      write_manifest(out, "synth", inputs, seed);
      std::cout << "wrote " << synth_out_file << "\n";
      return kExitOk;
    }

    if (cmd_lowdin->parsed()) {
      const CenterParams p = load_center_params(params_path);
      const StrainTensor u = parse_strain(strain_spec);
      const LowdinReport report = validate_against_exact(p, u);
      const std::string text = lowdin_report_json(p, u, report);
      write_text_atomic(out / "lowdin.json", text + "\n");
      std::cout << text << "\n";
      write_manifest(out, "validate-lowdin", {{"params", params_path}, {"strain", strain_json(u)}}, 0);
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitOk;
}
