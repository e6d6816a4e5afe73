#pragma once

#include "sivfs/fitting.hpp"
#include "sivfs/optics.hpp"

#include <cstdint>
#include <vector>

namespace sivfs {

// --- angular polarization scan -------------------------------------------

// I_m(phi) = i0 (1 + cos2theta cos 2phi_m), phi in degrees.
double angular_model(double phi_m_deg, double i0, double cos2theta);

// Fits (i0, cos2theta) with cos2theta clamped to [-1, 1]. A constant scan
// yields cos2theta = 0 with the "zero_sensitivity" flag. Requires a phi
// span of at least 180 degrees.
FitResult fit_angular(const DataSeries& scan);

// --- Arrhenius contrast ----------------------------------------------------

// c0 + c1 exp(-e_a / kT), e_a in meV. Negative e_a is accepted but flagged.
double arrhenius_model(double t_kelvin, double c0, double c1, double e_a_mev);
FitResult fit_arrhenius(const DataSeries& contrast);

// --- ODMR lineshape with temperature inversion ------------------------------

struct OdmrLineshapeParams {
  double t_c0_k = 0.0;         // mean critical temperature
  double gamma_k_per_mhz = 0.0;  // T_c--D correlation slope
  double d0_mhz = 0.0;         // mean zero-field splitting constant D
  double delta_d_mhz = 1.0;    // ensemble spread of D, > 0
  double scale = 1.0;
};

// [T - T_c0 - gamma (h nu/2 - D0)] exp(-(h nu/2 - D0)^2 / (2 deltaD^2)),
// with h nu/2 expressed in MHz so d0 and delta_d share units with D.
double odmr_lineshape(double nu_mhz, double t_kelvin, const OdmrLineshapeParams& p);

struct OdmrPoint {
  double nu_mhz = 0.0;
  double t_k = 0.0;
  double signal = 0.0;
  double sigma = 0.0;  // optional weight, 0 = unweighted
};

std::vector<OdmrPoint> read_odmr_csv(const std::string& path);
void write_odmr_csv(const std::string& path, const std::vector<OdmrPoint>& points);
FitResult fit_odmr(const std::vector<OdmrPoint>& points);

// --- Rabi decay --------------------------------------------------------------

struct RabiParams {
  double a_offset = 0.0;
  double b_amp = 1.0;
  double omega_rad_per_ns = 0.0;
  double phi_rad = 0.0;
  double t2_star_ns = 1.0;  // > 0
};

// A + B cos(omega tau + phi) exp(-tau / T2*).
double rabi_model(double tau_ns, const RabiParams& p);
FitResult fit_rabi(const DataSeries& trace);

// --- multiplet splitting from thermal depolarization -------------------------

struct DepolarizationPoint {
  double t_k = 0.0;
  double cos2theta = 0.0;
};

// Inverts the thermal depolarization law through two measurements. Uses the
// low-temperature point directly as theta(0) when its Boltzmann factor is
// below 1e-6, otherwise solves the two-point system. Returns meV, signed by
// branch.
double delta_a_from_two_temperatures(const DepolarizationPoint& pt1, const DepolarizationPoint& pt2,
                                     DepolarizationBranch branch);

// --- synthetic data ----------------------------------------------------------

DataSeries synth_angular(const std::vector<double>& phi_deg, double i0, double cos2theta, double noise_sigma,
                         std::uint64_t seed);
DataSeries synth_arrhenius(const std::vector<double>& t_kelvin, double c0, double c1, double e_a_mev,
                           double noise_sigma, std::uint64_t seed);
std::vector<OdmrPoint> synth_odmr(const std::vector<double>& nu_mhz, const std::vector<double>& t_kelvin,
                                  const OdmrLineshapeParams& p, double noise_sigma, std::uint64_t seed);
DataSeries synth_rabi(const std::vector<double>& tau_ns, const RabiParams& p, double noise_sigma, std::uint64_t seed);

std::vector<double> linspace(double start, double stop, int count);

}  // namespace sivfs
