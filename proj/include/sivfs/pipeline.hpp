#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sivfs {

// Wavelength-resolved PL spectrum with acquisition tags. The mask marks
// samples invalidated along the processing chain; empty means all valid.
struct Spectrum {
  std::vector<double> wavelength_nm;  // ascending
  std::vector<double> intensity;
  std::vector<std::uint8_t> valid;    // optional, parallel to the grids
  double beta_deg = 0.0;              // sample orientation
  double alpha_deg = 0.0;             // polarizer orientation
  double temperature_k = 0.0;
  bool clipped = false;               // negative intensities clipped on load

  std::size_t size() const { return wavelength_nm.size(); }
  bool is_valid(std::size_t i) const { return valid.empty() || valid[i] != 0; }
  void check() const;  // grid ascending, lengths consistent
};

// CSV `wavelength_nm,intensity[,valid]`; tags live in a JSON sidecar next
// to the file (same path with a .json suffix). Writes are atomic.
Spectrum read_spectrum_csv(const std::string& path);
void write_spectrum_csv(const std::string& path, const Spectrum& spectrum);

// Polarization sensitivity factor 1 + 2A(lambda) on a shared grid.
struct CalibrationCurve {
  std::vector<double> wavelength_nm;
  std::vector<double> factor;  // 1 + 2A
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return wavelength_nm.size(); }
  double a_of(std::size_t i) const { return 0.5 * (factor[i] - 1.0); }
};

CalibrationCurve read_calibration_csv(const std::string& path);
void write_calibration_csv(const std::string& path, const CalibrationCurve& curve);

// 1 + 2A = (I_{0,90} + I_{90,90}) / (I_{0,0} + I_{90,0}) pointwise; points
// whose denominator falls below the noise floor are flagged invalid.
CalibrationCurve correction_factor(const Spectrum& i_0_90, const Spectrum& i_90_90, const Spectrum& i_0_0,
                                   const Spectrum& i_90_0, double noise_floor = 0.0);

// Inverts I_meas = I_PL (1 + A - A cos 2alpha); invalid calibration points
// propagate into the output mask.
Spectrum apply_calibration(const Spectrum& raw, const CalibrationCurve& calibration, double alpha_deg);

// Angular intensity series on a shared polarizer grid.
struct AngularSeries {
  std::vector<double> phi_deg;
  std::vector<double> intensity;
  std::vector<std::uint8_t> clipped;  // set where subtraction went negative

  std::size_t size() const { return phi_deg.size(); }
};

// ZPL = PL_at_ZPL - a * reference, pointwise, negatives clipped to zero and
// flagged. The three-term variant subtracts two references.
AngularSeries psb_subtract(const AngularSeries& at_zpl, const AngularSeries& reference, double a);
AngularSeries psb_subtract(const AngularSeries& at_zpl, const AngularSeries& reference1, double b,
                           const AngularSeries& reference2, double c);

struct WavelengthWindow {
  double center_nm = 0.0;
  double half_width_nm = 1.0;
};

// Placeholder defaults near the 6H-SiC V1/V2/V3 ZPL regions; always confirm
// against the instrument calibration before use.
struct ZplWindows {
  WavelengthWindow v1_zpl{865.0, 2.0};
  WavelengthWindow v2_zpl{887.0, 2.0};
  WavelengthWindow v3_zpl{908.0, 2.0};
  WavelengthWindow v3_base{902.0, 2.0};  // PSB level adjacent to the V3 ZPL
};

struct MixtureRatios {
  double a = 0.0, b = 0.0, c = 0.0;
  double sigma_a = 0.0, sigma_b = 0.0, sigma_c = 0.0;
  std::vector<std::string> flags;
};

// Estimates the PSB admixture ratios from calibrated spectra at
// phi_m = 0 and 90 degrees: a and b where the V2 ZPL is dark (90 deg),
// c from the 0 degree spectrum. Assumes the V2 ZPL is polarized along c
// and the reference windows carry signal.
MixtureRatios estimate_mixture_ratios(const Spectrum& at_0deg, const Spectrum& at_90deg,
                                      const ZplWindows& windows = {});
std::string mixture_report_json(const MixtureRatios& ratios);

double window_mean(const Spectrum& spectrum, const WavelengthWindow& window);

}  // namespace sivfs
