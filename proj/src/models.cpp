#include "sivfs/models.hpp"

#include "sivfs/units.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sivfs {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return v.size() > 1 ? std::sqrt(acc / static_cast<double>(v.size() - 1)) : 0.0;
}

Eigen::VectorXd make_vector(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<int>(values.size()));
  int i = 0;
  for (const double x : values) v(i++) = x;
  return v;
}

constexpr double kUnbounded = 1e300;

}  // namespace

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw std::invalid_argument("linspace needs at least one point");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = start;
    return grid;
  }
  const double step = (stop - start) / (count - 1);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = start + i * step;
  grid.back() = stop;
  return grid;
}

// --- angular -----------------------------------------------------------------

double angular_model(double phi_m_deg, double i0, double cos2theta) {
  return i0 * (1.0 + cos2theta * std::cos(2.0 * units::deg_to_rad(phi_m_deg)));
}

FitResult fit_angular(const DataSeries& scan) {
  if (scan.size() < 3) throw std::invalid_argument("angular fit needs at least 3 points");
  const auto [lo, hi] = std::minmax_element(scan.x.begin(), scan.x.end());
  if (*hi - *lo < 180.0 - 1e-9) throw std::invalid_argument("angular scan must span at least 180 degrees");

  const std::vector<std::string> names = {"i0", "cos2theta"};

  // Constant scan carries no angular information.
  if (stddev(scan.y) <= 1e-12 * std::max(1.0, std::abs(mean(scan.y)))) {
    FitResult flat;
    flat.names = names;
    flat.params = {mean(scan.y), 0.0};
    flat.uncertainties = {0.0, 0.0};
    flat.converged = true;
    flat.flags.push_back("zero_sensitivity");
    double chi2 = 0.0;
    for (std::size_t i = 0; i < scan.size(); ++i) {
      const double r = (flat.params[0] - scan.y[i]) * scan.weight(i);
      chi2 += r * r;
    }
    flat.residual_norm = chi2;
    return flat;
  }

  // The model is linear in (i0, i0*cos2theta); solve that for the start point.
  double s11 = 0, s1c = 0, scc = 0, s1y = 0, scy = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double c = std::cos(2.0 * units::deg_to_rad(scan.x[i]));
    const double w = scan.weight(i) * scan.weight(i);
    s11 += w;
    s1c += w * c;
    scc += w * c * c;
    s1y += w * scan.y[i];
    scy += w * c * scan.y[i];
  }
  const double det = s11 * scc - s1c * s1c;
  double a = mean(scan.y), b = 0.0;
  if (std::abs(det) > 1e-30) {
    a = (scc * s1y - s1c * scy) / det;
    b = (s11 * scy - s1c * s1y) / det;
  }
  const double c_init = (std::abs(a) > 1e-30) ? std::clamp(b / a, -1.0, 1.0) : 0.0;

  const auto model = [](double x, const Eigen::VectorXd& p) { return angular_model(x, p(0), p(1)); };
  const auto gradient = [](double x, const Eigen::VectorXd& p) {
    const double c = std::cos(2.0 * units::deg_to_rad(x));
    return make_vector({1.0 + p(1) * c, p(0) * c});
  };

  FitResult result = fit_curve(model, scan, make_vector({a, c_init}), names, {}, gradient,
                               make_vector({-kUnbounded, -1.0}), make_vector({kUnbounded, 1.0}));
  result.params[1] = std::clamp(result.params[1], -1.0, 1.0);
  return result;
}

// --- Arrhenius ----------------------------------------------------------------

double arrhenius_model(double t_kelvin, double c0, double c1, double e_a_mev) {
  if (t_kelvin <= 0.0) throw std::invalid_argument("Arrhenius model requires T > 0");
  return c0 + c1 * std::exp(-e_a_mev / (units::k_b_mev_per_k * t_kelvin));
}

FitResult fit_arrhenius(const DataSeries& contrast) {
  if (contrast.size() < 4) throw std::invalid_argument("Arrhenius fit needs at least 4 points");
  for (const double t : contrast.x) {
    if (t <= 0.0) throw std::invalid_argument("Arrhenius fit requires positive temperatures");
  }

  // Start values: offset from the coldest points, activation energy from a
  // two-point logarithmic slope.
  std::vector<std::size_t> order(contrast.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&contrast](std::size_t i, std::size_t k) { return contrast.x[i] < contrast.x[k]; });

  const double c0_init = contrast.y[order.front()];
  const std::size_t mid = order[order.size() / 2];
  const std::size_t top = order.back();
  double ea_init = 10.0;
  double c1_init = contrast.y[top] - c0_init;
  const double dy_top = contrast.y[top] - c0_init;
  const double dy_mid = contrast.y[mid] - c0_init;
  if (dy_top * dy_mid > 0.0 && std::abs(dy_top) > std::abs(dy_mid)) {
    const double inv_diff = 1.0 / contrast.x[mid] - 1.0 / contrast.x[top];
    if (inv_diff > 0.0) {
      ea_init = std::clamp(units::k_b_mev_per_k * std::log(dy_top / dy_mid) / inv_diff, 0.05, 500.0);
    }
    c1_init = dy_top / std::exp(-ea_init / (units::k_b_mev_per_k * contrast.x[top]));
  }

  const auto model = [](double t, const Eigen::VectorXd& p) { return arrhenius_model(t, p(0), p(1), p(2)); };
  const auto gradient = [](double t, const Eigen::VectorXd& p) {
    const double boltz = std::exp(-p(2) / (units::k_b_mev_per_k * t));
    return make_vector({1.0, boltz, -p(1) * boltz / (units::k_b_mev_per_k * t)});
  };

  FitResult result = fit_curve(model, contrast, make_vector({c0_init, c1_init, ea_init}),
                               {"c0", "c1", "e_a_mev"}, {}, gradient);
  if (result.params[2] < 0.0) result.flags.push_back("anti_activation");
  return result;
}

// --- ODMR lineshape -------------------------------------------------------------

double odmr_lineshape(double nu_mhz, double t_kelvin, const OdmrLineshapeParams& p) {
  if (p.delta_d_mhz <= 0.0) throw std::invalid_argument("delta_d must be positive");
  const double x = 0.5 * nu_mhz - p.d0_mhz;  // h nu / 2 - D0, MHz
  const double gauss = std::exp(-x * x / (2.0 * p.delta_d_mhz * p.delta_d_mhz));
  return p.scale * (t_kelvin - p.t_c0_k - p.gamma_k_per_mhz * x) * gauss;
}

std::vector<OdmrPoint> read_odmr_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file: " + path);
  std::vector<OdmrPoint> points;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 3) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " needs nu_mhz,t_k,signal");
    }
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      if (end == cells[0].c_str()) continue;
    }
    try {
      OdmrPoint pt;
      pt.nu_mhz = std::stod(cells[0]);
      pt.t_k = std::stod(cells[1]);
      pt.signal = std::stod(cells[2]);
      if (cells.size() >= 4 && !cells[3].empty()) pt.sigma = std::stod(cells[3]);
      points.push_back(pt);
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " is not numeric");
    }
  }
  if (points.empty()) throw std::invalid_argument(path + ": no data rows");
  return points;
}

void write_odmr_csv(const std::string& path, const std::vector<OdmrPoint>& points) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out.precision(12);
    out << "nu_mhz,t_k,signal\n";
    for (const auto& pt : points) out << pt.nu_mhz << ',' << pt.t_k << ',' << pt.signal << "\n";
  }
  std::rename(tmp.c_str(), path.c_str());
}

FitResult fit_odmr(const std::vector<OdmrPoint>& points) {
  if (points.size() < 6) throw std::invalid_argument("ODMR fit needs at least 6 points");

  // Moment-based start: line position and width from |signal| over h nu/2,
  // critical temperature from the sign change of the integrated signal.
  double wsum = 0.0, xsum = 0.0;
  for (const auto& pt : points) {
    const double w = std::abs(pt.signal);
    wsum += w;
    xsum += w * 0.5 * pt.nu_mhz;
  }
  const double d0_init = wsum > 0.0 ? xsum / wsum : 0.5 * points.front().nu_mhz;
  double x2sum = 0.0;
  for (const auto& pt : points) {
    const double dx = 0.5 * pt.nu_mhz - d0_init;
    x2sum += std::abs(pt.signal) * dx * dx;
  }
  double delta_init = wsum > 0.0 ? std::sqrt(x2sum / wsum) : 1.0;
  if (!(delta_init > 0.0)) delta_init = 1.0;

  std::map<double, std::pair<double, int>> by_t;
  for (const auto& pt : points) {
    auto& acc = by_t[pt.t_k];
    acc.first += pt.signal;
    acc.second += 1;
  }
  double st = 0, si = 0, stt = 0, sti = 0;
  for (const auto& [t, acc] : by_t) {
    const double integral = acc.first / acc.second;
    st += t;
    si += integral;
    stt += t * t;
    sti += t * integral;
  }
  const double nt = static_cast<double>(by_t.size());
  const double slope = (nt * sti - st * si) / std::max(nt * stt - st * st, 1e-30);
  const double intercept = (si - slope * st) / nt;
  double tc_init = std::abs(slope) > 1e-30 ? -intercept / slope : st / nt;
  if (!std::isfinite(tc_init)) tc_init = st / nt;

  // Scale and slope by linear least squares at fixed (tc, d0, delta).
  double saa = 0, sab = 0, sbb = 0, say = 0, sby = 0;
  for (const auto& pt : points) {
    const double x = 0.5 * pt.nu_mhz - d0_init;
    const double g = std::exp(-x * x / (2.0 * delta_init * delta_init));
    const double fa = (pt.t_k - tc_init) * g;
    const double fb = -x * g;
    saa += fa * fa;
    sab += fa * fb;
    sbb += fb * fb;
    say += fa * pt.signal;
    sby += fb * pt.signal;
  }
  const double det = saa * sbb - sab * sab;
  double scale_init = 1.0, gamma_init = 1.0;
  if (std::abs(det) > 1e-30) {
    scale_init = (sbb * say - sab * sby) / det;
    const double sg = (saa * sby - sab * say) / det;
    if (std::abs(scale_init) > 1e-30) gamma_init = sg / scale_init;
  }
  if (!std::isfinite(scale_init) || scale_init == 0.0) scale_init = 1.0;
  if (!std::isfinite(gamma_init)) gamma_init = 1.0;

  LmProblem problem;
  problem.lower = make_vector({-kUnbounded, -kUnbounded, -kUnbounded, 1e-9, -kUnbounded});
  problem.upper = make_vector({kUnbounded, kUnbounded, kUnbounded, kUnbounded, kUnbounded});
  problem.residual = [&points](const Eigen::VectorXd& p) {
    const OdmrLineshapeParams lp{p(0), p(1), p(2), p(3), p(4)};
    Eigen::VectorXd r(static_cast<int>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double w = points[i].sigma > 0.0 ? 1.0 / points[i].sigma : 1.0;
      r(static_cast<int>(i)) = (odmr_lineshape(points[i].nu_mhz, points[i].t_k, lp) - points[i].signal) * w;
    }
    return r;
  };
  problem.jacobian = [&points](const Eigen::VectorXd& p) {
    Eigen::MatrixXd jac(static_cast<int>(points.size()), 5);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double w = points[i].sigma > 0.0 ? 1.0 / points[i].sigma : 1.0;
      const double x = 0.5 * points[i].nu_mhz - p(2);
      const double delta = p(3);
      const double g = std::exp(-x * x / (2.0 * delta * delta));
      const double amp = points[i].t_k - p(0) - p(1) * x;
      const int row = static_cast<int>(i);
      jac(row, 0) = -p(4) * g * w;
      jac(row, 1) = -p(4) * x * g * w;
      jac(row, 2) = p(4) * g * (p(1) + amp * x / (delta * delta)) * w;
      jac(row, 3) = p(4) * amp * g * x * x / (delta * delta * delta) * w;
      jac(row, 4) = amp * g * w;
    }
    return jac;
  };

  return lm_fit(problem, make_vector({tc_init, gamma_init, d0_init, delta_init, scale_init}),
                {"t_c0_k", "gamma_k_per_mhz", "d0_mhz", "delta_d_mhz", "scale"});
}

// --- Rabi ------------------------------------------------------------------------

double rabi_model(double tau_ns, const RabiParams& p) {
  if (tau_ns < 0.0) throw std::invalid_argument("Rabi model requires tau >= 0");
  if (p.t2_star_ns <= 0.0) throw std::invalid_argument("T2* must be positive");
  return p.a_offset + p.b_amp * std::cos(p.omega_rad_per_ns * tau_ns + p.phi_rad) * std::exp(-tau_ns / p.t2_star_ns);
}

FitResult fit_rabi(const DataSeries& trace) {
  if (trace.size() < 8) throw std::invalid_argument("Rabi fit needs at least 8 points");

  const double a_init = mean(trace.y);
  const auto [lo, hi] = std::minmax_element(trace.y.begin(), trace.y.end());
  const double b_init = std::max(0.5 * (*hi - *lo), 1e-12);
  const double span = *std::max_element(trace.x.begin(), trace.x.end()) -
                      *std::min_element(trace.x.begin(), trace.x.end());
  if (span <= 0.0) throw std::invalid_argument("Rabi trace needs a positive time span");

  // Dominant frequency by periodogram scan, phase from the same sum.
  double best_omega = 2.0 * units::pi / span;
  double best_power = -1.0;
  std::complex<double> best_sum;
  const double omega_min = 2.0 * units::pi / (2.0 * span);
  const double omega_max = units::pi * static_cast<double>(trace.size()) / span;
  const int steps = 1200;
  for (int k = 0; k <= steps; ++k) {
    const double omega = omega_min + (omega_max - omega_min) * k / steps;
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
      acc += (trace.y[i] - a_init) * std::exp(std::complex<double>(0.0, -omega * trace.x[i]));
    }
    const double power = std::norm(acc);
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
      best_sum = acc;
    }
  }
  const double phi_init = std::arg(best_sum);
  const double t2_init = std::max(span / 3.0, 1e-9);

  const auto model = [](double tau, const Eigen::VectorXd& p) {
    return rabi_model(tau, RabiParams{p(0), p(1), p(2), p(3), p(4)});
  };
  const auto gradient = [](double tau, const Eigen::VectorXd& p) {
    const double envelope = std::exp(-tau / p(4));
    const double phase = p(2) * tau + p(3);
    const double c = std::cos(phase), s = std::sin(phase);
    return make_vector({1.0, c * envelope, -p(1) * tau * s * envelope, -p(1) * s * envelope,
                        p(1) * c * envelope * tau / (p(4) * p(4))});
  };

  return fit_curve(model, trace, make_vector({a_init, b_init, best_omega, phi_init, t2_init}),
                   {"a_offset", "b_amp", "omega_rad_per_ns", "phi_rad", "t2_star_ns"}, {}, gradient,
                   make_vector({-kUnbounded, -kUnbounded, -kUnbounded, -kUnbounded, 1e-9}),
                   make_vector({kUnbounded, kUnbounded, kUnbounded, kUnbounded, kUnbounded}));
}

// --- delta_a from two temperatures ---------------------------------------------

namespace {

double depolarization_transform(double cos2theta, DepolarizationBranch branch) {
  if (std::abs(cos2theta) >= 1.0) {
    throw std::invalid_argument("cos 2theta must lie strictly inside (-1, 1) for the inversion");
  }
  // tan^2 theta on the A2 branch, cot^2 theta on the E branch.
  return branch == DepolarizationBranch::A2Lowest ? (1.0 - cos2theta) / (1.0 + cos2theta)
                                                  : (1.0 + cos2theta) / (1.0 - cos2theta);
}

}  // namespace

double delta_a_from_two_temperatures(const DepolarizationPoint& pt1, const DepolarizationPoint& pt2,
                                     DepolarizationBranch branch) {
  DepolarizationPoint cold = pt1, warm = pt2;
  if (cold.t_k > warm.t_k) std::swap(cold, warm);
  if (cold.t_k < 0.0) throw std::invalid_argument("temperatures must be non-negative");
  if (warm.t_k <= 0.0 || warm.t_k == cold.t_k) throw std::invalid_argument("two distinct temperatures required");

  const double t_cold = depolarization_transform(cold.cos2theta, branch);
  const double t_warm = depolarization_transform(warm.cos2theta, branch);
  const double diff = t_warm - t_cold;
  if (diff < 0.0) throw std::invalid_argument("negative Boltzmann difference: depolarization must grow with T");
  if (diff == 0.0) throw std::out_of_range("no depolarization between the two temperatures; |delta_a| out of range");

  const double k_warm = units::k_b_mev_per_k * warm.t_k;
  const double k_cold = units::k_b_mev_per_k * cold.t_k;
  const double sign = branch == DepolarizationBranch::A2Lowest ? 1.0 : -1.0;

  // Low-temperature proxy: treat theta(T_cold) as theta(0).
  if (diff < 1.0) {
    const double proxy = -k_warm * std::log(diff);
    const double cold_boltz = cold.t_k == 0.0 ? 0.0 : std::exp(-proxy / k_cold);
    if (cold_boltz < 1e-6) return sign * proxy;
  }

  // Two-equation solve on the decreasing branch of
  // f(D) = exp(-D/kT_warm) - exp(-D/kT_cold).
  const auto f = [&](double d) { return std::exp(-d / k_warm) - std::exp(-d / k_cold); };
  const double d_peak = std::log(warm.t_k / cold.t_k) / (1.0 / k_cold - 1.0 / k_warm);
  if (f(d_peak) < diff) {
    throw std::out_of_range("no splitting reproduces the measured depolarization pair");
  }
  double lo_d = d_peak;
  double hi_d = std::max(2.0 * d_peak, 1.0);
  while (f(hi_d) > diff) hi_d *= 2.0;
  for (int it = 0; it < 200 && hi_d - lo_d > 1e-13 * std::max(1.0, hi_d); ++it) {
    const double mid = 0.5 * (lo_d + hi_d);
    (f(mid) > diff ? lo_d : hi_d) = mid;
  }
  const double d_solved = 0.5 * (lo_d + hi_d);
  if (t_cold - std::exp(-d_solved / k_cold) < -1e-9) {
    throw std::out_of_range("depolarization pair inconsistent with a non-negative zero-temperature angle");
  }
  return sign * d_solved;
}

// --- synthetic data ----------------------------------------------------------------

namespace {

std::vector<double> gaussian_noise(std::size_t n, double sigma, std::uint64_t seed) {
  std::vector<double> noise(n, 0.0);
  if (sigma <= 0.0) return noise;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  for (auto& x : noise) x = dist(rng);
  return noise;
}

}  // namespace

DataSeries synth_angular(const std::vector<double>& phi_deg, double i0, double cos2theta, double noise_sigma,
                         std::uint64_t seed) {
  DataSeries series;
  series.x = phi_deg;
  const auto noise = gaussian_noise(phi_deg.size(), noise_sigma, seed);
  for (std::size_t i = 0; i < phi_deg.size(); ++i) {
    series.y.push_back(angular_model(phi_deg[i], i0, cos2theta) + noise[i]);
  }
  return series;
}

DataSeries synth_arrhenius(const std::vector<double>& t_kelvin, double c0, double c1, double e_a_mev,
                           double noise_sigma, std::uint64_t seed) {
  DataSeries series;
  series.x = t_kelvin;
  const auto noise = gaussian_noise(t_kelvin.size(), noise_sigma, seed);
  for (std::size_t i = 0; i < t_kelvin.size(); ++i) {
    series.y.push_back(arrhenius_model(t_kelvin[i], c0, c1, e_a_mev) + noise[i]);
  }
  return series;
}

std::vector<OdmrPoint> synth_odmr(const std::vector<double>& nu_mhz, const std::vector<double>& t_kelvin,
                                  const OdmrLineshapeParams& p, double noise_sigma, std::uint64_t seed) {
  std::vector<OdmrPoint> points;
  const auto noise = gaussian_noise(nu_mhz.size() * t_kelvin.size(), noise_sigma, seed);
  std::size_t k = 0;
  for (const double t : t_kelvin) {
    for (const double nu : nu_mhz) {
      OdmrPoint pt;
      pt.nu_mhz = nu;
      pt.t_k = t;
      pt.signal = odmr_lineshape(nu, t, p) + noise[k++];
      points.push_back(pt);
    }
  }
  return points;
}

DataSeries synth_rabi(const std::vector<double>& tau_ns, const RabiParams& p, double noise_sigma,
                      std::uint64_t seed) {
  DataSeries series;
  series.x = tau_ns;
  const auto noise = gaussian_noise(tau_ns.size(), noise_sigma, seed);
  for (std::size_t i = 0; i < tau_ns.size(); ++i) {
    series.y.push_back(rabi_model(tau_ns[i], p) + noise[i]);
  }
  return series;
}

}  // namespace sivfs
