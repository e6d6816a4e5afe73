#include "sivfs/optics.hpp"

#include "sivfs/units.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sivfs {

DipoleAmplitudes dipole_amplitudes(const EigenSystem& es) {
  if (es.eigenvectors.rows() != basis::dim) {
    throw std::invalid_argument("dipole amplitudes require the 12-dimensional product space");
  }
  const int n = es.dim();
  DipoleAmplitudes amp;
  amp.dx2.assign(static_cast<std::size_t>(n), 0.0);
  amp.dy2.assign(static_cast<std::size_t>(n), 0.0);
  amp.dz2.assign(static_cast<std::size_t>(n), 0.0);
  amp.sigma_plus2.assign(static_cast<std::size_t>(n), 0.0);
  amp.sigma_minus2.assign(static_cast<std::size_t>(n), 0.0);

  for (int k = 0; k < n; ++k) {
    for (const int sz2 : {3, 1, -1, -3}) {
      const Complex c_plus = es.eigenvectors(basis::index(+1, sz2), k);
      const Complex c_zero = es.eigenvectors(basis::index(0, sz2), k);
      const Complex c_minus = es.eigenvectors(basis::index(-1, sz2), k);
      const std::size_t i = static_cast<std::size_t>(k);
      amp.dz2[i] += std::norm(c_zero);
      amp.sigma_plus2[i] += std::norm(c_plus);
      amp.sigma_minus2[i] += std::norm(c_minus);
      amp.dx2[i] += 0.5 * std::norm(c_minus - c_plus);
      amp.dy2[i] += 0.5 * std::norm(c_minus + c_plus);
    }
  }
  return amp;
}

double tilt_angle_from_sums(double sum_dx2, double sum_dy2, double sum_dz2) {
  if (sum_dx2 < 0.0 || sum_dy2 < 0.0 || sum_dz2 < 0.0) {
    throw std::invalid_argument("dipole intensities must be non-negative");
  }
  const double in_plane = 0.5 * (sum_dx2 + sum_dy2);
  return units::rad_to_deg(std::atan2(std::sqrt(in_plane), std::sqrt(sum_dz2)));
}

namespace {

std::vector<int> select_multiplet(const EigenSystem& es, MultipletSelect select) {
  MultipletLabel want = MultipletLabel::Mixed;
  switch (select) {
    case MultipletSelect::A2Like: want = MultipletLabel::A2Like; break;
    case MultipletSelect::ELike: want = MultipletLabel::ELike; break;
    case MultipletSelect::Lowest: {
      want = es.labels.front();
      if (want == MultipletLabel::Mixed) {
        throw std::runtime_error("tilt angle undefined: lowest state has mixed orbital character");
      }
      break;
    }
  }
  std::vector<int> states;
  for (int k = 0; k < es.dim(); ++k) {
    if (es.labels[static_cast<std::size_t>(k)] == want) states.push_back(k);
  }
  const int expected = (want == MultipletLabel::A2Like) ? basis::spin_dim : 2 * basis::spin_dim;
  if (static_cast<int>(states.size()) != expected) {
    throw std::runtime_error(std::string("tilt angle undefined: expected a clean ") + to_string(want) +
                             " multiplet, found " + std::to_string(states.size()) + " states");
  }
  return states;
}

double tilt_angle_of_states(const EigenSystem& es, const std::vector<int>& states) {
  const DipoleAmplitudes amp = dipole_amplitudes(es);
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (const int k : states) {
    const std::size_t i = static_cast<std::size_t>(k);
    sx += amp.dx2[i];
    sy += amp.dy2[i];
    sz += amp.dz2[i];
  }
  return tilt_angle_from_sums(sx, sy, sz);
}

}  // namespace

double tilt_angle_exact(const CenterParams& p, const StrainTensor& u, MultipletSelect select) {
  if (p.delta_a == 0.0) throw std::invalid_argument("tilt angle undefined at delta_a = 0");
  const EigenSystem es = eigensystem(build_hamiltonian(p, u));
  return tilt_angle_of_states(es, select_multiplet(es, select));
}

PerturbativeTilt tilt_angle_perturbative(const CenterParams& p, const StrainTensor& u) {
  if (p.delta_a == 0.0) throw std::invalid_argument("tilt angle undefined at delta_a = 0");
  const double shear2 = p.xi_e * p.xi_e * (u.u_xz * u.u_xz + u.u_yz * u.u_yz);
  const double so2 = p.lambda_so * p.lambda_so;
  const double scale = std::abs(p.delta_a);

  PerturbativeTilt tilt;
  tilt.theta_a2_deg = units::rad_to_deg(std::sqrt(0.5 * shear2 + 1.25 * so2) / scale);
  tilt.theta_e_deg = 90.0 - units::rad_to_deg(std::sqrt(shear2 + 2.5 * so2) / scale);
  tilt.small_parameters =
      std::abs(p.lambda_so) <= 0.3 * scale && std::sqrt(shear2) <= 0.3 * scale;
  return tilt;
}

ThetaMap theta_map(const std::vector<double>& lambda_grid, const std::vector<double>& strain_grid) {
  if (lambda_grid.empty() || strain_grid.empty()) throw std::invalid_argument("theta map grids must not be empty");
  for (const double x : lambda_grid) {
    if (x < 0.0 || x > 0.5) throw std::invalid_argument("lambda/delta_a grid must stay within [0, 0.5]");
  }
  for (const double s : strain_grid) {
    if (s < 0.0 || s > 0.5) throw std::invalid_argument("strain grid must stay within [0, 0.5]");
  }

  ThetaMap map;
  map.lambda_ratio = lambda_grid;
  map.strain_ratio = strain_grid;
  map.theta_deg.assign(lambda_grid.size(), std::vector<double>(strain_grid.size(), 0.0));

  // V3-like inverted ordering; only the magnitudes of the two ratios set
  // the angle of the E octuplet. The eight largest-w_e states stand in for
  // the octuplet so the map stays defined deep into the mixing region.
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    for (std::size_t j = 0; j < strain_grid.size(); ++j) {
      CenterParams p;
      p.delta_a = -1.0;
      p.lambda_so = lambda_grid[i];
      p.xi_e = 1.0;
      StrainTensor u;
      u.u_xz = strain_grid[j];
      const EigenSystem es = eigensystem(build_hamiltonian(p, u));

      std::vector<int> order(basis::dim);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&es](int a, int b) { return es.w_e[a] > es.w_e[b]; });
      order.resize(2 * basis::spin_dim);
      map.theta_deg[i][j] = tilt_angle_of_states(es, order);
    }
  }
  return map;
}

void write_theta_map_csv(std::ostream& os, const ThetaMap& map) {
  os << "lambda_ratio,strain_ratio,theta_deg\n";
  os.precision(10);
  for (std::size_t i = 0; i < map.lambda_ratio.size(); ++i) {
    for (std::size_t j = 0; j < map.strain_ratio.size(); ++j) {
      os << map.lambda_ratio[i] << ',' << map.strain_ratio[j] << ',' << map.theta_deg[i][j] << "\n";
    }
  }
}

std::vector<std::array<double, 2>> theta_contour(const ThetaMap& map, double level_deg) {
  std::vector<std::array<double, 2>> contour;
  for (std::size_t j = 0; j < map.strain_ratio.size(); ++j) {
    for (std::size_t i = 0; i + 1 < map.lambda_ratio.size(); ++i) {
      const double a = map.theta_deg[i][j];
      const double b = map.theta_deg[i + 1][j];
      if ((a - level_deg) == 0.0) {
        contour.push_back({map.lambda_ratio[i], map.strain_ratio[j]});
        break;
      }
      if ((a - level_deg) * (b - level_deg) < 0.0) {
        const double t = (level_deg - a) / (b - a);
        const double lambda = map.lambda_ratio[i] + t * (map.lambda_ratio[i + 1] - map.lambda_ratio[i]);
        contour.push_back({lambda, map.strain_ratio[j]});
        break;
      }
    }
  }
  return contour;
}

void write_contour_csv(std::ostream& os, const std::vector<std::array<double, 2>>& contour) {
  os << "lambda_ratio,strain_ratio\n";
  os.precision(10);
  for (const auto& point : contour) os << point[0] << ',' << point[1] << "\n";
}

std::optional<double> contour_strain_free_intercept(const ThetaMap& map, double level_deg) {
  if (map.strain_ratio.empty() || map.strain_ratio.front() != 0.0) return std::nullopt;
  const auto contour = theta_contour(map, level_deg);
  if (contour.empty() || contour.front()[1] != 0.0) return std::nullopt;
  return contour.front()[0];
}

const char* to_string(PolarizationRegime regime) {
  switch (regime) {
    case PolarizationRegime::Circular: return "circular";
    case PolarizationRegime::Linear: return "linear";
    case PolarizationRegime::Intermediate: return "intermediate";
  }
  return "?";
}

RegimeReport classify_regime(const CenterParams& p, const StrainTensor& u) {
  RegimeReport report;
  report.so_scale_ghz = std::abs(p.lambda_so);
  const double in_plane_x = 0.5 * p.xi_e * (u.u_xx - u.u_yy);
  const double in_plane_y = p.xi_e * u.u_xy;
  const double shear2 = p.xi_e * p.xi_e * (u.u_xz * u.u_xz + u.u_yz * u.u_yz);
  report.strain_scale_ghz = std::sqrt(shear2 + in_plane_x * in_plane_x + in_plane_y * in_plane_y);

  if (report.so_scale_ghz > 10.0 * report.strain_scale_ghz && report.so_scale_ghz > 0.0) {
    report.regime = PolarizationRegime::Circular;
  } else if (report.strain_scale_ghz > 10.0 * report.so_scale_ghz && report.strain_scale_ghz > 0.0) {
    report.regime = PolarizationRegime::Linear;
  } else {
    report.regime = PolarizationRegime::Intermediate;
  }

  const EigenSystem es = eigensystem(build_hamiltonian(p, u));
  const DipoleAmplitudes amp = dipole_amplitudes(es);

  // Lowest multiplet: lowest group of states sharing the ground label; when
  // the ground state is mixed, fall back to the lowest Kramers quadruplet.
  const MultipletLabel ground = es.labels.front();
  int count = 0;
  if (ground == MultipletLabel::Mixed) {
    count = basis::spin_dim;
  } else {
    const int expected = (ground == MultipletLabel::A2Like) ? basis::spin_dim : 2 * basis::spin_dim;
    for (int k = 0; k < es.dim() && es.labels[static_cast<std::size_t>(k)] == ground; ++k) ++count;
    count = std::min(count, expected);
  }

  const double scale = std::max(1.0, es.eigenvalues.cwiseAbs().maxCoeff());
  int k = 0;
  while (k < count) {
    int stop = k + 1;
    while (stop < count && es.eigenvalues(stop) - es.eigenvalues(stop - 1) <= 1e-9 * scale) ++stop;

    // Helicity weights per ground-state spin channel, traced over the
    // degenerate level so the result does not depend on the eigenvector
    // basis inside it. A Kramers doublet emits sigma+ and sigma- into
    // different channels; the circular/linear distinction lives per channel.
    double dz = 0.0, in_plane = 0.0, contrast = 0.0;
    for (int q = k; q < stop; ++q) dz += amp.dz2[static_cast<std::size_t>(q)];
    for (const int sz2 : {3, 1, -1, -3}) {
      double a_plus = 0.0, a_minus = 0.0;
      for (int q = k; q < stop; ++q) {
        a_plus += std::norm(es.eigenvectors(basis::index(+1, sz2), q));
        a_minus += std::norm(es.eigenvectors(basis::index(-1, sz2), q));
      }
      in_plane += a_plus + a_minus;
      contrast += std::abs(a_plus - a_minus);
    }
    const double total = in_plane + dz;
    LevelPolarization level;
    level.energy_ghz = es.eigenvalues(k);
    level.degeneracy = stop - k;
    if (total <= 0.0) {
      level.polarization = "dark";
    } else if (dz > 0.9 * total) {
      level.polarization = "z";
    } else if (in_plane > 0.9 * total) {
      const double imbalance = contrast / in_plane;
      level.polarization = imbalance > 0.9 ? "sigma+/-" : (imbalance < 0.1 ? "linear" : "elliptic");
    } else {
      level.polarization = "elliptic";
    }
    report.lowest_multiplet.push_back(level);
    k = stop;
  }
  return report;
}

double angular_intensity(double i0, double cos2theta, double phi_m_deg) {
  if (std::abs(cos2theta) > 1.0) throw std::invalid_argument("cos 2theta must lie in [-1, 1]");
  return i0 * (1.0 + cos2theta * std::cos(2.0 * units::deg_to_rad(phi_m_deg)));
}

bool branch_matches_sign(DepolarizationBranch branch, double delta_a_mev) {
  return branch == DepolarizationBranch::A2Lowest ? delta_a_mev > 0.0 : delta_a_mev < 0.0;
}

double thermal_cos2theta(double t_kelvin, double theta0_deg, double delta_a_mev, DepolarizationBranch branch) {
  if (t_kelvin < 0.0) throw std::invalid_argument("temperature must be non-negative");
  const double theta0 = units::deg_to_rad(theta0_deg);
  const double boltzmann =
      t_kelvin == 0.0 ? 0.0
                      : std::exp((branch == DepolarizationBranch::A2Lowest ? -delta_a_mev : delta_a_mev) /
                                 (units::k_b_mev_per_k * t_kelvin));

  double tan2;
  if (branch == DepolarizationBranch::A2Lowest) {
    const double tan0 = std::tan(theta0);
    if (!std::isfinite(tan0) || std::abs(theta0_deg - 90.0) < 1e-12) {
      throw std::invalid_argument("theta(0) = 90 deg leaves tan^2 undefined on the A2 branch");
    }
    tan2 = tan0 * tan0 + boltzmann;
  } else {
    if (std::abs(theta0_deg) < 1e-12) {
      throw std::invalid_argument("theta(0) = 0 deg leaves cot^2 undefined on the E branch");
    }
    const double tan0 = std::tan(theta0);
    const double cot2 = 1.0 / (tan0 * tan0) + boltzmann;
    tan2 = 1.0 / cot2;
  }
  return (1.0 - tan2) / (1.0 + tan2);
}

double cos2theta_to_theta_deg(double cos2theta) {
  if (std::abs(cos2theta) > 1.0) throw std::invalid_argument("cos 2theta must lie in [-1, 1]");
  return 0.5 * units::rad_to_deg(std::acos(cos2theta));
}

double theta_deg_to_cos2theta(double theta_deg) { return std::cos(2.0 * units::deg_to_rad(theta_deg)); }

}  // namespace sivfs
