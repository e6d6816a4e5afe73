#pragma once

#include "sivfs/spin_algebra.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace sivfs {

// Fine-structure parameters of one vacancy center, E/h in GHz.
// delta_a may be negative: an inverted ordering puts the 4E octuplet
// below the 4A2 quadruplet.
struct CenterParams {
  double delta_a = 0.0;    // axial 4A2/4E splitting
  double lambda_so = 0.0;  // spin-orbit constant
  double b_ss = 0.0;       // isotropic spin-spin constant
  double d_tilde = 0.0;    // axial spin-spin constant
  double xi_e = 0.0;       // deformation potential constant
  double g_factor = 2.0;

  // delta_a dominates lambda_so which dominates b_ss and d_tilde,
  // each by at least `ratio`.
  bool hierarchy_holds(double ratio = 10.0) const;
};

// JSON keys mirror the field names; energies are MHz in the document and
// converted to GHz on load. g_factor is optional (default 2.0).
CenterParams center_params_from_json(const std::string& text);
CenterParams load_center_params(const std::string& path);
std::string center_params_to_json(const CenterParams& p);  // MHz on disk

// Dimensionless lattice strain; symmetric, six independent components.
struct StrainTensor {
  double u_xx = 0.0, u_yy = 0.0, u_zz = 0.0;
  double u_xy = 0.0, u_xz = 0.0, u_yz = 0.0;

  double trace() const { return u_xx + u_yy + u_zz; }
  std::array<std::array<double, 3>, 3> as_matrix() const;
  bool is_zero() const;
};

struct MagneticField {
  double b_z_mt = 0.0;  // along the c-axis
};

// The five terms of the excited-state Hamiltonian; each is 12x12,
// Hermitian and traceless.
Matrix h_orbital(const CenterParams& p);
Matrix h_spin_orbit(const CenterParams& p);
Matrix h_spin_spin(const CenterParams& p);
Matrix h_deformation(const CenterParams& p, const StrainTensor& u);
Matrix h_zeeman(const CenterParams& p, const MagneticField& field);

Matrix build_hamiltonian(const CenterParams& p, const StrainTensor& u = {}, const MagneticField& field = {});

enum class MultipletLabel { A2Like, ELike, Mixed };
const char* to_string(MultipletLabel label);

struct EigenSystem {
  Eigen::VectorXd eigenvalues;  // ascending, GHz
  Matrix eigenvectors;          // orthonormal columns, matching order
  std::vector<double> w_e;      // squared amplitude on the Lz = +-1 subspace
  std::vector<MultipletLabel> labels;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

// Dense Hermitian diagonalization with deterministic ordering: ascending
// eigenvalues, degenerate groups sorted by ascending w_e, first
// significant eigenvector entry made real positive. Rejects input that is
// not Hermitian.
EigenSystem eigensystem(const Matrix& h);

// Label thresholds on w_e: > 0.75 E-like, < 0.25 A2-like, mixed otherwise.
EigenSystem& classify_multiplets(EigenSystem& es);
double orbital_e_weight(const Vector& state);

enum class SweepAxis { LambdaSo, ShearUxz, FieldBz };
const char* to_string(SweepAxis axis);

struct SweepTable {
  SweepAxis axis = SweepAxis::LambdaSo;
  std::vector<double> grid;
  std::vector<std::array<double, basis::dim>> energies;
};

// One diagonalization per grid point; the grid must be non-empty and
// monotone. The swept quantity overrides the corresponding input field.
SweepTable sweep_parameter(const CenterParams& p, const StrainTensor& u, SweepAxis axis,
                           const std::vector<double>& grid);
void write_sweep_csv(std::ostream& os, const SweepTable& table);

// Level crossings of the axial quadruplet model D(Sz^2 - 5/4) + g uB B Sz,
// analytic form B = -D(m1 + m2)/(g uB). Returns sorted distinct positive
// fields inside [b_min, b_max], duplicates merged within 1e-6 mT.
std::vector<double> find_level_anticrossings(double d_mhz, double g_factor, double b_min_mt, double b_max_mt);

// Numeric cross-check: scans the quadruplet eigenvalue gaps on a uniform
// field grid and reports local closing points.
std::vector<double> find_level_anticrossings_scan(double d_mhz, double g_factor, double b_min_mt, double b_max_mt,
                                                  double step_mt = 1e-3);

}  // namespace sivfs
