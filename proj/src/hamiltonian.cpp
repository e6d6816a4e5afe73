#include "sivfs/hamiltonian.hpp"

#include "sivfs/units.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sivfs {

namespace {

using json = nlohmann::json;

const AngularMomentumSet& orbital_ops() {
  static const AngularMomentumSet l = angular_momentum_matrices(1.0);
  return l;
}

const AngularMomentumSet& spin_ops() {
  static const AngularMomentumSet s = angular_momentum_matrices(1.5);
  return s;
}

Matrix orbital_identity() { return Matrix::Identity(basis::orbital_dim, basis::orbital_dim); }

}  // namespace

bool CenterParams::hierarchy_holds(double ratio) const {
  const double ss = std::max(std::abs(b_ss), std::abs(d_tilde));
  return std::abs(delta_a) >= ratio * std::abs(lambda_so) && std::abs(lambda_so) >= ratio * ss;
}

CenterParams center_params_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("invalid parameter JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("parameter JSON must be an object");

  CenterParams p;
  auto energy = [&doc](const char* key, double fallback_mhz) {
    if (!doc.contains(key)) return units::mhz_to_ghz(fallback_mhz);
    if (!doc.at(key).is_number()) throw std::invalid_argument(std::string("parameter '") + key + "' must be a number");
    return units::mhz_to_ghz(doc.at(key).get<double>());
  };
  p.delta_a = energy("delta_a", 0.0);
  p.lambda_so = energy("lambda_so", 0.0);
  p.b_ss = energy("b_ss", 0.0);
  p.d_tilde = energy("d_tilde", 0.0);
  p.xi_e = energy("xi_e", 0.0);
  if (doc.contains("g_factor")) {
    if (!doc.at("g_factor").is_number()) throw std::invalid_argument("parameter 'g_factor' must be a number");
    p.g_factor = doc.at("g_factor").get<double>();
  }
  for (auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "delta_a" && key != "lambda_so" && key != "b_ss" && key != "d_tilde" && key != "xi_e" &&
        key != "g_factor") {
      throw std::invalid_argument("unknown parameter key '" + key + "'");
    }
  }
  if (!std::isfinite(p.delta_a) || !std::isfinite(p.lambda_so) || !std::isfinite(p.b_ss) ||
      !std::isfinite(p.d_tilde) || !std::isfinite(p.xi_e) || !std::isfinite(p.g_factor)) {
    throw std::invalid_argument("center parameters must be finite");
  }
  return p;
}

CenterParams load_center_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open parameter file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return center_params_from_json(buf.str());
}

std::string center_params_to_json(const CenterParams& p) {
  json doc;
  doc["delta_a"] = units::ghz_to_mhz(p.delta_a);
  doc["lambda_so"] = units::ghz_to_mhz(p.lambda_so);
  doc["b_ss"] = units::ghz_to_mhz(p.b_ss);
  doc["d_tilde"] = units::ghz_to_mhz(p.d_tilde);
  doc["xi_e"] = units::ghz_to_mhz(p.xi_e);
  doc["g_factor"] = p.g_factor;
  return doc.dump(2);
}

std::array<std::array<double, 3>, 3> StrainTensor::as_matrix() const {
  return {{{u_xx, u_xy, u_xz}, {u_xy, u_yy, u_yz}, {u_xz, u_yz, u_zz}}};
}

bool StrainTensor::is_zero() const {
  return u_xx == 0.0 && u_yy == 0.0 && u_zz == 0.0 && u_xy == 0.0 && u_xz == 0.0 && u_yz == 0.0;
}

Matrix h_orbital(const CenterParams& p) {
  const auto& l = orbital_ops();
  const Matrix lz2 = l.jz * l.jz - (2.0 / 3.0) * orbital_identity();
  return p.delta_a * embed_orbital(lz2);
}

Matrix h_spin_orbit(const CenterParams& p) {
  const auto& l = orbital_ops();
  const auto& s = spin_ops();
  return p.lambda_so * (embed(l.jx, s.jx) + embed(l.jy, s.jy) + embed(l.jz, s.jz));
}

Matrix h_spin_spin(const CenterParams& p) {
  const auto& l = orbital_ops();
  const auto& s = spin_ops();
  const Matrix ls = embed(l.jx, s.jx) + embed(l.jy, s.jy) + embed(l.jz, s.jz);
  const Matrix sz2 = s.jz * s.jz - 1.25 * Matrix::Identity(basis::spin_dim, basis::spin_dim);
  return p.b_ss * (ls * ls - 2.5 * Matrix::Identity(basis::dim, basis::dim)) + p.d_tilde * embed_spin(sz2);
}

Matrix h_deformation(const CenterParams& p, const StrainTensor& u) {
  const auto& l = orbital_ops();
  const std::array<const Matrix*, 3> lops = {&l.jx, &l.jy, &l.jz};
  const auto um = u.as_matrix();
  const double trace_third = u.trace() / 3.0;

  Matrix orb = Matrix::Zero(basis::orbital_dim, basis::orbital_dim);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const double coeff = um[a][b] - (a == b ? trace_third : 0.0);
      if (coeff == 0.0) continue;
      Matrix quad = (*lops[a]) * (*lops[b]);
      if (a == b) quad -= (2.0 / 3.0) * orbital_identity();
      orb += coeff * quad;
    }
  }
  return p.xi_e * embed_orbital(orb);
}

Matrix h_zeeman(const CenterParams& p, const MagneticField& field) {
  const auto& s = spin_ops();
  return p.g_factor * units::mu_b_ghz_per_mt * field.b_z_mt * embed_spin(s.jz);
}

Matrix build_hamiltonian(const CenterParams& p, const StrainTensor& u, const MagneticField& field) {
  return h_orbital(p) + h_spin_orbit(p) + h_spin_spin(p) + h_deformation(p, u) + h_zeeman(p, field);
}

const char* to_string(MultipletLabel label) {
  switch (label) {
    case MultipletLabel::A2Like: return "A2-like";
    case MultipletLabel::ELike: return "E-like";
    case MultipletLabel::Mixed: return "mixed";
  }
  return "?";
}

double orbital_e_weight(const Vector& state) {
  double w = 0.0;
  for (int i = 0; i < state.size(); ++i) {
    const auto [lz, sz2] = basis::level(static_cast<int>(i));
    (void)sz2;
    if (lz != 0) w += std::norm(state(i));
  }
  return w;
}

EigenSystem eigensystem(const Matrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("eigensystem: matrix must be square");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!is_hermitian(h, 1e-10 * scale)) {
    throw std::invalid_argument("eigensystem: matrix is not Hermitian within tolerance");
  }

  const Matrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigensystem: diagonalization failed to converge");
  }

  EigenSystem es;
  es.eigenvalues = solver.eigenvalues();
  es.eigenvectors = solver.eigenvectors();
  const int n = es.dim();

  es.w_e.resize(n, 0.0);
  const bool product_space = (h.rows() == basis::dim);
  if (product_space) {
    for (int k = 0; k < n; ++k) es.w_e[k] = orbital_e_weight(es.eigenvectors.col(k));
  }

  // Deterministic order inside degenerate groups: ascending w_e.
  const double degeneracy_tol = 1e-9 * scale;
  int start = 0;
  while (start < n) {
    int stop = start + 1;
    while (stop < n && es.eigenvalues(stop) - es.eigenvalues(stop - 1) <= degeneracy_tol) ++stop;
    if (stop - start > 1 && product_space) {
      std::vector<int> order(stop - start);
      std::iota(order.begin(), order.end(), start);
      std::stable_sort(order.begin(), order.end(), [&es](int a, int b) { return es.w_e[a] < es.w_e[b]; });
      Matrix cols(n, stop - start);
      std::vector<double> weights(stop - start);
      Eigen::VectorXd vals(stop - start);
      for (int i = 0; i < stop - start; ++i) {
        cols.col(i) = es.eigenvectors.col(order[i]);
        weights[i] = es.w_e[order[i]];
        vals(i) = es.eigenvalues(order[i]);
      }
      es.eigenvectors.block(0, start, n, stop - start) = cols;
      for (int i = 0; i < stop - start; ++i) {
        es.w_e[start + i] = weights[i];
        es.eigenvalues(start + i) = vals(i);
      }
    }
    start = stop;
  }

  // Phase convention: first entry above threshold made real positive.
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const Complex v = es.eigenvectors(i, k);
      if (std::abs(v) > 1e-8) {
        es.eigenvectors.col(k) *= std::conj(v) / std::abs(v);
        break;
      }
    }
  }

  es.labels.assign(n, MultipletLabel::Mixed);
  classify_multiplets(es);
  return es;
}

EigenSystem& classify_multiplets(EigenSystem& es) {
  const int n = es.dim();
  es.w_e.resize(n);
  es.labels.resize(n);
  for (int k = 0; k < n; ++k) {
    if (es.eigenvectors.rows() == basis::dim) es.w_e[k] = orbital_e_weight(es.eigenvectors.col(k));
    const double w = es.w_e[k];
    es.labels[k] = w > 0.75 ? MultipletLabel::ELike : (w < 0.25 ? MultipletLabel::A2Like : MultipletLabel::Mixed);
  }
  return es;
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::LambdaSo: return "lambda_so";
    case SweepAxis::ShearUxz: return "u_xz";
    case SweepAxis::FieldBz: return "b_z";
  }
  return "?";
}

SweepTable sweep_parameter(const CenterParams& p, const StrainTensor& u, SweepAxis axis,
                           const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep grid must not be empty");
  const bool up = grid.back() >= grid.front();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (up ? grid[i + 1] < grid[i] : grid[i + 1] > grid[i]) {
      throw std::invalid_argument("sweep grid must be monotone");
    }
  }

  SweepTable table;
  table.axis = axis;
  table.grid = grid;
  table.energies.reserve(grid.size());
  for (const double value : grid) {
    CenterParams pp = p;
    StrainTensor uu = u;
    MagneticField field;
    switch (axis) {
      case SweepAxis::LambdaSo: pp.lambda_so = value; break;
      case SweepAxis::ShearUxz: uu.u_xz = value; break;
      case SweepAxis::FieldBz: field.b_z_mt = value; break;
    }
    const EigenSystem es = eigensystem(build_hamiltonian(pp, uu, field));
    std::array<double, basis::dim> row{};
    for (int k = 0; k < basis::dim; ++k) row[static_cast<std::size_t>(k)] = es.eigenvalues(k);
    table.energies.push_back(row);
  }
  return table;
}

void write_sweep_csv(std::ostream& os, const SweepTable& table) {
  os << "axis";
  for (int k = 1; k <= basis::dim; ++k) os << ",e" << k;
  os << "\n";
  os.precision(12);
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    os << table.grid[i];
    for (const double e : table.energies[i]) os << ',' << e;
    os << "\n";
  }
}

std::vector<double> find_level_anticrossings(double d_mhz, double g_factor, double b_min_mt, double b_max_mt) {
  if (b_max_mt < b_min_mt) throw std::invalid_argument("field range is empty");
  if (g_factor == 0.0) throw std::invalid_argument("g factor must be non-zero");

  const double g_mu_b = std::abs(g_factor) * units::mu_b_mhz_per_mt;  // MHz per mT
  std::vector<double> fields;
  // m1 + m2 over distinct quadruplet pairs takes -2..2; positive crossings
  // sit at |D|/(g uB) and 2|D|/(g uB).
  for (int s : {1, 2}) {
    const double b = s * std::abs(d_mhz) / g_mu_b;
    if (b > 0.0 && b >= b_min_mt && b <= b_max_mt) fields.push_back(b);
  }
  std::sort(fields.begin(), fields.end());
  std::vector<double> merged;
  for (const double b : fields) {
    if (merged.empty() || b - merged.back() > 1e-6) merged.push_back(b);
  }
  return merged;
}

std::vector<double> find_level_anticrossings_scan(double d_mhz, double g_factor, double b_min_mt, double b_max_mt,
                                                  double step_mt) {
  if (b_max_mt < b_min_mt) throw std::invalid_argument("field range is empty");
  if (step_mt <= 0.0) throw std::invalid_argument("scan step must be positive");

  const double g_mu_b = std::abs(g_factor) * units::mu_b_mhz_per_mt;
  const auto min_gap = [&](double b_mt) {
    std::array<double, 4> e{};
    int i = 0;
    for (const double m : {1.5, 0.5, -0.5, -1.5}) {
      e[static_cast<std::size_t>(i++)] = d_mhz * (m * m - 1.25) + g_factor * units::mu_b_mhz_per_mt * b_mt * m;
    }
    std::sort(e.begin(), e.end());
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k + 1 < 4; ++k) gap = std::min(gap, e[static_cast<std::size_t>(k + 1)] - e[static_cast<std::size_t>(k)]);
    return gap;
  };

  const int n = static_cast<int>(std::floor((b_max_mt - b_min_mt) / step_mt)) + 1;
  std::vector<double> gaps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) gaps[static_cast<std::size_t>(i)] = min_gap(b_min_mt + i * step_mt);

  // A crossing shows as a local minimum of the adjacent-level gap heading
  // to zero; the slope bound 3 g uB per step separates it from flat regions.
  const double threshold = 3.0 * g_mu_b * step_mt;
  std::vector<double> fields;
  for (int i = 1; i + 1 < n; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    if (gaps[k] < gaps[k - 1] && gaps[k] <= gaps[k + 1] && gaps[k] < threshold) {
      const double b = b_min_mt + i * step_mt;
      if (b > 0.0) fields.push_back(b);
    }
  }
  std::vector<double> merged;
  for (const double b : fields) {
    if (merged.empty() || b - merged.back() > 2.0 * step_mt) merged.push_back(b);
  }
  return merged;
}

}  // namespace sivfs
