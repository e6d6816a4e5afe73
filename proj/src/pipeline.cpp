#include "sivfs/pipeline.hpp"

#include "sivfs/units.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sivfs {

namespace {

using json = nlohmann::json;

void require_same_grid(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(what) + ": grids differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9) throw std::invalid_argument(std::string(what) + ": grids do not match");
  }
}

std::string sidecar_path(const std::string& path) { return path + ".json"; }

}  // namespace

void Spectrum::check() const {
  if (wavelength_nm.size() != intensity.size()) {
    throw std::invalid_argument("spectrum: wavelength and intensity lengths differ");
  }
  if (!valid.empty() && valid.size() != wavelength_nm.size()) {
    throw std::invalid_argument("spectrum: mask length differs from the grid");
  }
  for (std::size_t i = 1; i < wavelength_nm.size(); ++i) {
    if (wavelength_nm[i] <= wavelength_nm[i - 1]) {
      throw std::invalid_argument("spectrum: wavelength grid must ascend");
    }
  }
}

Spectrum read_spectrum_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spectrum file: " + path);

  Spectrum spec;
  std::string line;
  bool first = true;
  bool any_mask = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " needs wavelength_nm,intensity");
    }
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) continue;
    }
    try {
      spec.wavelength_nm.push_back(std::stod(cells[0]));
      double value = std::stod(cells[1]);
      if (value < 0.0) {
        value = 0.0;
        spec.clipped = true;
      }
      spec.intensity.push_back(value);
      if (cells.size() >= 3 && !cells[2].empty()) {
        spec.valid.push_back(std::stoi(cells[2]) != 0 ? 1 : 0);
        any_mask = true;
      } else {
        spec.valid.push_back(1);
      }
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " is not numeric");
    }
  }
  if (!any_mask) spec.valid.clear();
  spec.check();

  std::ifstream side(sidecar_path(path));
  if (side) {
    json doc;
    try {
      side >> doc;
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(sidecar_path(path) + ": " + e.what());
    }
    spec.beta_deg = doc.value("beta_deg", 0.0);
    spec.alpha_deg = doc.value("alpha_deg", 0.0);
    spec.temperature_k = doc.value("temperature_k", 0.0);
  }
  return spec;
}

void write_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
  spectrum.check();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.precision(12);
    const bool with_mask = !spectrum.valid.empty();
    out << (with_mask ? "wavelength_nm,intensity,valid\n" : "wavelength_nm,intensity\n");
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
      out << spectrum.wavelength_nm[i] << ',' << spectrum.intensity[i];
      if (with_mask) out << ',' << (spectrum.valid[i] ? 1 : 0);
      out << "\n";
    }
  }
  std::rename(tmp.c_str(), path.c_str());

  json doc;
  doc["beta_deg"] = spectrum.beta_deg;
  doc["alpha_deg"] = spectrum.alpha_deg;
  doc["temperature_k"] = spectrum.temperature_k;
  const std::string side_tmp = sidecar_path(path) + ".tmp";
  {
    std::ofstream side(side_tmp);
    if (!side) throw std::runtime_error("cannot write " + side_tmp);
    side << doc.dump(2) << "\n";
  }
  std::rename(side_tmp.c_str(), sidecar_path(path).c_str());
}

CalibrationCurve read_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open calibration file: " + path);
  CalibrationCurve curve;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) continue;
    }
    if (cells.size() < 2) throw std::invalid_argument(path + ": needs wavelength_nm,factor[,valid]");
    curve.wavelength_nm.push_back(std::stod(cells[0]));
    curve.factor.push_back(std::stod(cells[1]));
    curve.valid.push_back(cells.size() >= 3 && !cells[2].empty() ? (std::stoi(cells[2]) != 0) : 1);
  }
  return curve;
}

void write_calibration_csv(const std::string& path, const CalibrationCurve& curve) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.precision(12);
    out << "wavelength_nm,factor,valid\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out << curve.wavelength_nm[i] << ',' << curve.factor[i] << ',' << (curve.valid[i] ? 1 : 0) << "\n";
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

CalibrationCurve correction_factor(const Spectrum& i_0_90, const Spectrum& i_90_90, const Spectrum& i_0_0,
                                   const Spectrum& i_90_0, double noise_floor) {
  for (const Spectrum* s : {&i_0_90, &i_90_90, &i_0_0, &i_90_0}) s->check();
  require_same_grid(i_0_90.wavelength_nm, i_90_90.wavelength_nm, "correction factor");
  require_same_grid(i_0_90.wavelength_nm, i_0_0.wavelength_nm, "correction factor");
  require_same_grid(i_0_90.wavelength_nm, i_90_0.wavelength_nm, "correction factor");

  CalibrationCurve curve;
  curve.wavelength_nm = i_0_90.wavelength_nm;
  curve.factor.resize(curve.wavelength_nm.size(), 1.0);
  curve.valid.resize(curve.wavelength_nm.size(), 1);

  bool any_valid = false;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double numerator = i_0_90.intensity[i] + i_90_90.intensity[i];
    const double denominator = i_0_0.intensity[i] + i_90_0.intensity[i];
    const bool inputs_ok =
        i_0_90.is_valid(i) && i_90_90.is_valid(i) && i_0_0.is_valid(i) && i_90_0.is_valid(i);
    if (!inputs_ok || denominator <= noise_floor || denominator <= 0.0) {
      curve.valid[i] = 0;
      continue;
    }
    curve.factor[i] = numerator / denominator;
    if (curve.factor[i] < 0.0) {
      curve.valid[i] = 0;
      curve.factor[i] = 1.0;
      continue;
    }
    any_valid = true;
  }
  if (!any_valid) throw std::invalid_argument("correction factor: denominator spectra vanish everywhere");
  return curve;
}

Spectrum apply_calibration(const Spectrum& raw, const CalibrationCurve& calibration, double alpha_deg) {
  raw.check();
  require_same_grid(raw.wavelength_nm, calibration.wavelength_nm, "apply calibration");

  Spectrum out = raw;
  out.alpha_deg = alpha_deg;
  out.valid.assign(raw.size(), 1);
  const double cos2a = std::cos(2.0 * units::deg_to_rad(alpha_deg));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double a = calibration.a_of(i);
    const double denom = 1.0 + a - a * cos2a;
    if (!raw.is_valid(i) || !calibration.valid[i] || denom <= 0.0) {
      out.valid[i] = 0;
      out.intensity[i] = 0.0;
      continue;
    }
    out.intensity[i] = raw.intensity[i] / denom;
  }
  if (std::all_of(out.valid.begin(), out.valid.end(), [](std::uint8_t v) { return v != 0; })) {
    out.valid.clear();
  }
  return out;
}

namespace {

AngularSeries subtract_impl(const AngularSeries& at_zpl, const std::vector<const AngularSeries*>& refs,
                            const std::vector<double>& coeffs) {
  for (std::size_t r = 0; r < refs.size(); ++r) {
    require_same_grid(at_zpl.phi_deg, refs[r]->phi_deg, "psb subtract");
    if (coeffs[r] < 0.0) throw std::invalid_argument("psb subtract: mixture ratios must be non-negative");
  }
  AngularSeries out;
  out.phi_deg = at_zpl.phi_deg;
  out.intensity.resize(at_zpl.size());
  out.clipped.assign(at_zpl.size(), 0);
  for (std::size_t i = 0; i < at_zpl.size(); ++i) {
    double value = at_zpl.intensity[i];
    for (std::size_t r = 0; r < refs.size(); ++r) value -= coeffs[r] * refs[r]->intensity[i];
    if (value < 0.0) {
      value = 0.0;
      out.clipped[i] = 1;
    }
    out.intensity[i] = value;
  }
  return out;
}

}  // namespace

AngularSeries psb_subtract(const AngularSeries& at_zpl, const AngularSeries& reference, double a) {
  return subtract_impl(at_zpl, {&reference}, {a});
}

AngularSeries psb_subtract(const AngularSeries& at_zpl, const AngularSeries& reference1, double b,
                           const AngularSeries& reference2, double c) {
  return subtract_impl(at_zpl, {&reference1, &reference2}, {b, c});
}

namespace {

struct WindowStats {
  double mean = 0.0;
  double sem = 0.0;  // standard error of the mean
  std::size_t count = 0;
};

WindowStats window_stats(const Spectrum& spectrum, const WavelengthWindow& window) {
  WindowStats stats;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double wl = spectrum.wavelength_nm[i];
    if (!spectrum.is_valid(i)) continue;
    if (wl < window.center_nm - window.half_width_nm || wl > window.center_nm + window.half_width_nm) continue;
    sum += spectrum.intensity[i];
    sum2 += spectrum.intensity[i] * spectrum.intensity[i];
    ++stats.count;
  }
  if (stats.count == 0) {
    throw std::invalid_argument("wavelength window around " + std::to_string(window.center_nm) +
                                " nm contains no valid samples");
  }
  stats.mean = sum / static_cast<double>(stats.count);
  if (stats.count > 1) {
    const double var = std::max(0.0, (sum2 - stats.count * stats.mean * stats.mean) /
                                          static_cast<double>(stats.count - 1));
    stats.sem = std::sqrt(var / static_cast<double>(stats.count));
  }
  return stats;
}

double ratio_sigma(double num, double num_sigma, double den, double den_sigma) {
  const double r = num / den;
  return std::abs(r) * std::sqrt(std::pow(num_sigma / std::max(std::abs(num), 1e-300), 2) +
                                 std::pow(den_sigma / std::abs(den), 2));
}

}  // namespace

double window_mean(const Spectrum& spectrum, const WavelengthWindow& window) {
  return window_stats(spectrum, window).mean;
}

MixtureRatios estimate_mixture_ratios(const Spectrum& at_0deg, const Spectrum& at_90deg, const ZplWindows& windows) {
  at_0deg.check();
  at_90deg.check();

  const WindowStats v1_90 = window_stats(at_90deg, windows.v1_zpl);
  const WindowStats v1_0 = window_stats(at_0deg, windows.v1_zpl);
  const WindowStats v2_90 = window_stats(at_90deg, windows.v2_zpl);
  const WindowStats v2_0 = window_stats(at_0deg, windows.v2_zpl);
  const WindowStats v3b_90 = window_stats(at_90deg, windows.v3_base);
  const WindowStats v3b_0 = window_stats(at_0deg, windows.v3_base);

  if (v1_90.mean <= 0.0 || v1_0.mean <= 0.0) {
    throw std::invalid_argument("mixture ratios: the V1 reference ZPL intensity vanishes");
  }

  MixtureRatios ratios;
  // V2 is polarized along c, so the V2 window at 90 degrees holds only the
  // V1 phonon sideband.
  ratios.a = v2_90.mean / v1_90.mean;
  ratios.sigma_a = ratio_sigma(v2_90.mean, v2_90.sem, v1_90.mean, v1_90.sem);

  // Same argument for the PSB level next to the V3 ZPL at 90 degrees.
  ratios.b = v3b_90.mean / v1_90.mean;
  ratios.sigma_b = ratio_sigma(v3b_90.mean, v3b_90.sem, v1_90.mean, v1_90.sem);

  // At 0 degrees the V2 ZPL is bright; its own PSB share follows after
  // removing the V1 contributions from both windows.
  const double v2_clean_0 = v2_0.mean - ratios.a * v1_0.mean;
  if (v2_clean_0 <= 0.0) {
    throw std::invalid_argument("mixture ratios: the V2 ZPL intensity vanishes after PSB removal");
  }
  double c_num = v3b_0.mean - ratios.b * v1_0.mean;
  if (c_num < 0.0) {
    c_num = 0.0;
    ratios.flags.push_back("c_clipped_to_zero");
  }
  ratios.c = c_num / v2_clean_0;
  const double c_num_sigma = std::sqrt(v3b_0.sem * v3b_0.sem +
                                       std::pow(ratios.sigma_b * v1_0.mean, 2) +
                                       std::pow(ratios.b * v1_0.sem, 2));
  const double v2_clean_sigma = std::sqrt(v2_0.sem * v2_0.sem + std::pow(ratios.sigma_a * v1_0.mean, 2) +
                                          std::pow(ratios.a * v1_0.sem, 2));
  ratios.sigma_c = ratio_sigma(std::max(c_num, 1e-300), c_num_sigma, v2_clean_0, v2_clean_sigma);
  return ratios;
}

std::string mixture_report_json(const MixtureRatios& ratios) {
  nlohmann::json doc;
  doc["a"] = ratios.a;
  doc["b"] = ratios.b;
  doc["c"] = ratios.c;
  doc["sigma_a"] = ratios.sigma_a;
  doc["sigma_b"] = ratios.sigma_b;
  doc["sigma_c"] = ratios.sigma_c;
  doc["flags"] = ratios.flags;
  return doc.dump(2);
}

}  // namespace sivfs
