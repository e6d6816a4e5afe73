#pragma once

#include "sivfs/hamiltonian.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sivfs {

// Spin-conserving dipole amplitudes from each excited eigenstate to the
// 4A2 ground quadruplet, summed over the ground spin sublevels. The Lz = 0
// component radiates along z; the Lz = +-1 components carry sigma-+/sigma--
// helicity, from which the linear x/y intensities follow.
struct DipoleAmplitudes {
  std::vector<double> dx2, dy2, dz2;
  std::vector<double> sigma_plus2, sigma_minus2;

  int size() const { return static_cast<int>(dz2.size()); }
  double in_plane(int k) const { return dx2[static_cast<std::size_t>(k)] + dy2[static_cast<std::size_t>(k)]; }
  double total(int k) const { return in_plane(k) + dz2[static_cast<std::size_t>(k)]; }
};

DipoleAmplitudes dipole_amplitudes(const EigenSystem& es);

enum class MultipletSelect { Lowest, A2Like, ELike };

// arctan of sqrt(mean in-plane intensity / z intensity), degrees in [0, 90].
// The in-plane intensity is averaged over x and y, matching an ensemble
// measurement with no preferred azimuth.
double tilt_angle_from_sums(double sum_dx2, double sum_dy2, double sum_dz2);

// Intensity-weighted tilt angle of the selected multiplet from exact
// diagonalization. Fails loudly when the requested multiplet cannot be
// identified (mixed classification).
double tilt_angle_exact(const CenterParams& p, const StrainTensor& u, MultipletSelect select);

struct PerturbativeTilt {
  double theta_a2_deg = 0.0;
  double theta_e_deg = 90.0;
  bool small_parameters = true;  // false when lambda or strain exceed 0.3 |delta_a|
};

// Weak-mixing closed forms:
//   theta_A2 = sqrt(Xi^2 (uxz^2 + uyz^2)/2 + 5 lambda^2/4) / |delta_a|
//   theta_E  = pi/2 - sqrt(Xi^2 (uxz^2 + uyz^2) + 5 lambda^2/2) / |delta_a|
PerturbativeTilt tilt_angle_perturbative(const CenterParams& p, const StrainTensor& u);

struct ThetaMap {
  std::vector<double> lambda_ratio;                // |lambda / delta_a|
  std::vector<double> strain_ratio;                // |Xi u_xz / delta_a|
  std::vector<std::vector<double>> theta_deg;      // [lambda][strain]
};

ThetaMap theta_map(const std::vector<double>& lambda_grid, const std::vector<double>& strain_grid);
void write_theta_map_csv(std::ostream& os, const ThetaMap& map);

// Contour polyline at a fixed angle: for every strain row the lambda value
// where theta crosses the level (linear interpolation), ordered by strain.
std::vector<std::array<double, 2>> theta_contour(const ThetaMap& map, double level_deg);
void write_contour_csv(std::ostream& os, const std::vector<std::array<double, 2>>& contour);
std::optional<double> contour_strain_free_intercept(const ThetaMap& map, double level_deg);

enum class PolarizationRegime { Circular, Linear, Intermediate };
const char* to_string(PolarizationRegime regime);

struct LevelPolarization {
  double energy_ghz = 0.0;
  int degeneracy = 0;
  std::string polarization;  // "z", "sigma+/-", "linear", "elliptic"
};

struct RegimeReport {
  PolarizationRegime regime = PolarizationRegime::Intermediate;
  double so_scale_ghz = 0.0;      // |lambda|
  double strain_scale_ghz = 0.0;  // deformation coupling norm
  std::vector<LevelPolarization> lowest_multiplet;
};

// Spin-orbit versus deformation dominance with a factor-10 threshold,
// plus the polarization character of each level of the lowest multiplet.
RegimeReport classify_regime(const CenterParams& p, const StrainTensor& u);

// I_m(phi) = I0 (1 + cos2theta * cos 2phi_m); |cos2theta| <= 1 enforced.
double angular_intensity(double i0, double cos2theta, double phi_m_deg);

enum class DepolarizationBranch { A2Lowest, ELowest };

// Thermal depolarization laws:
//   A2 lowest: tan^2 theta(T) = tan^2 theta(0) + exp(-delta_a / kT)
//   E  lowest: cot^2 theta(T) = cot^2 theta(0) + exp(+delta_a / kT)
// Returned as cos 2theta(T).
double thermal_cos2theta(double t_kelvin, double theta0_deg, double delta_a_mev, DepolarizationBranch branch);
bool branch_matches_sign(DepolarizationBranch branch, double delta_a_mev);

double cos2theta_to_theta_deg(double cos2theta);
double theta_deg_to_cos2theta(double theta_deg);

}  // namespace sivfs
