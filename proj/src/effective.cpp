#include "sivfs/effective.hpp"

#include "sivfs/units.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace sivfs {

namespace {

constexpr int kOctupletDim = 2 * basis::spin_dim;

void require_delta_a(const CenterParams& p) {
  if (p.delta_a == 0.0) {
    throw std::invalid_argument("effective multiplets undefined at delta_a = 0 (degenerate perturbation theory)");
  }
}

// sigma (2x2) ⊗ spin (4x4) on |sigma_z = +1> first, Sz descending.
Matrix kron_sigma_spin(const Matrix& sigma, const Matrix& spin) {
  Matrix out(kOctupletDim, kOctupletDim);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 2; ++k) {
      out.block(i * basis::spin_dim, k * basis::spin_dim, basis::spin_dim, basis::spin_dim) = sigma(i, k) * spin;
    }
  }
  return out;
}

}  // namespace

EffectiveA2 effective_a2_params(const CenterParams& p) {
  require_delta_a(p);
  const double so2 = p.lambda_so * p.lambda_so / p.delta_a;
  EffectiveA2 a2;
  // The constant includes the mean second-order spin-orbit shift of the
  // quadruplet; without it the reduced spectrum misses the exact one at
  // order lambda^2.
  a2.epsilon_a2 = -(2.0 / 3.0) * p.delta_a - 2.5 * so2;
  a2.d_prime = p.d_tilde - p.b_ss + so2;
  return a2;
}

EffectiveE effective_e_params(const CenterParams& p, const StrainTensor& u) {
  require_delta_a(p);
  const double so2 = p.lambda_so * p.lambda_so / p.delta_a;
  EffectiveE e;
  e.epsilon_e = p.delta_a / 3.0 + 1.25 * so2;
  // sigma_z Sz coefficient with its first-order spin-spin and second-order
  // spin-orbit renormalization.
  e.lambda_so = p.lambda_so - 0.5 * p.b_ss - 0.5 * so2;
  e.d_dprime = p.d_tilde + 0.5 * p.b_ss - 0.5 * so2;
  e.d_dprime_perp = 0.5 * p.b_ss + 0.5 * so2;
  e.strain_x = 0.5 * p.xi_e * (u.u_xx - u.u_yy);
  e.strain_y = p.xi_e * u.u_xy;
  return e;
}

Matrix effective_a2_hamiltonian(const EffectiveA2& a2) {
  Matrix h = Matrix::Zero(basis::spin_dim, basis::spin_dim);
  int i = 0;
  for (const double m : {1.5, 0.5, -0.5, -1.5}) {
    h(i, i) = a2.epsilon_a2 + a2.d_prime * (m * m - 1.25);
    ++i;
  }
  return h;
}

Matrix effective_e_hamiltonian(const EffectiveE& e) {
  const AngularMomentumSet s = angular_momentum_matrices(1.5);
  const Matrix spin_id = Matrix::Identity(basis::spin_dim, basis::spin_dim);

  Matrix sigma_x = Matrix::Zero(2, 2), sigma_y = Matrix::Zero(2, 2), sigma_z = Matrix::Zero(2, 2),
         sigma_0 = Matrix::Identity(2, 2);
  sigma_x(0, 1) = sigma_x(1, 0) = 1.0;
  sigma_y(0, 1) = Complex(0.0, -1.0);
  sigma_y(1, 0) = Complex(0.0, 1.0);
  sigma_z(0, 0) = 1.0;
  sigma_z(1, 1) = -1.0;

  const Matrix sz2 = s.jz * s.jz - 1.25 * spin_id;
  const Matrix quad_x = s.jx * s.jx - s.jy * s.jy;
  const Matrix quad_y = s.jx * s.jy + s.jy * s.jx;

  return e.epsilon_e * kron_sigma_spin(sigma_0, spin_id) + e.lambda_so * kron_sigma_spin(sigma_z, s.jz) +
         e.d_dprime * kron_sigma_spin(sigma_0, sz2) +
         e.d_dprime_perp * (kron_sigma_spin(sigma_x, quad_x) + kron_sigma_spin(sigma_y, quad_y)) +
         e.strain_x * kron_sigma_spin(sigma_x, spin_id) + e.strain_y * kron_sigma_spin(sigma_y, spin_id);
}

Matrix effective_e_hamiltonian(const CenterParams& p, const StrainTensor& u) {
  return effective_e_hamiltonian(effective_e_params(p, u));
}

LowdinReport validate_against_exact(const CenterParams& p, const StrainTensor& u) {
  require_delta_a(p);

  const EigenSystem exact = eigensystem(build_hamiltonian(p, u));

  std::vector<int> order(basis::dim);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&exact](int a, int b) { return exact.w_e[a] < exact.w_e[b]; });

  std::vector<double> a2_exact, e_exact;
  for (int i = 0; i < basis::dim; ++i) {
    (i < basis::spin_dim ? a2_exact : e_exact).push_back(exact.eigenvalues(order[static_cast<std::size_t>(i)]));
  }
  std::sort(a2_exact.begin(), a2_exact.end());
  std::sort(e_exact.begin(), e_exact.end());

  const EigenSystem a2_eff = eigensystem(effective_a2_hamiltonian(effective_a2_params(p)));
  const EigenSystem e_eff = eigensystem(effective_e_hamiltonian(p, u));

  LowdinReport report;
  for (int k = 0; k < basis::spin_dim; ++k) {
    report.dev_a2_ghz = std::max(report.dev_a2_ghz, std::abs(a2_exact[static_cast<std::size_t>(k)] - a2_eff.eigenvalues(k)));
  }
  for (int k = 0; k < kOctupletDim; ++k) {
    report.dev_e_ghz = std::max(report.dev_e_ghz, std::abs(e_exact[static_cast<std::size_t>(k)] - e_eff.eigenvalues(k)));
  }
  for (const MultipletLabel label : exact.labels) {
    if (label == MultipletLabel::Mixed) ++report.mixed_states;
  }
  report.classification_clean = (report.mixed_states == 0);
  report.shear_ignored = (u.u_xz != 0.0 || u.u_yz != 0.0);
  return report;
}

std::string lowdin_report_json(const CenterParams& p, const StrainTensor& u, const LowdinReport& report) {
  nlohmann::json doc;
  doc["params"] = nlohmann::json::parse(center_params_to_json(p));
  doc["strain"] = {{"u_xx", u.u_xx}, {"u_yy", u.u_yy}, {"u_zz", u.u_zz},
                   {"u_xy", u.u_xy}, {"u_xz", u.u_xz}, {"u_yz", u.u_yz}};
  doc["dev_a2_ghz"] = report.dev_a2_ghz;
  doc["dev_e_ghz"] = report.dev_e_ghz;
  doc["mixed_states"] = report.mixed_states;
  doc["classification_clean"] = report.classification_clean;
  doc["shear_ignored"] = report.shear_ignored;
  return doc.dump(2);
}

}  // namespace sivfs
