#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>

namespace sivfs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Angular momentum operator matrices for a single quantum number j, in the
// descending-m basis |j,j>, |j,j-1>, ..., |j,-j>. Units of hbar = 1.
struct AngularMomentumSet {
  double j = 0.0;
  Matrix jx, jy, jz;

  int dim() const { return static_cast<int>(jz.rows()); }
  Matrix jplus() const { return jx + Complex(0.0, 1.0) * jy; }
  Matrix jminus() const { return jx - Complex(0.0, 1.0) * jy; }
  // jx^2 + jy^2 + jz^2, equals j(j+1) * identity.
  Matrix casimir() const { return jx * jx + jy * jy + jz * jz; }
};

// Ladder-operator construction; rejects j that is not a non-negative
// half-integer.
AngularMomentumSet angular_momentum_matrices(double j);

// Fixed product basis of the 4A2 + 4E excited-state space: L = 1 orbital
// triplet times S = 3/2 spin quartet, index = 4*(1 - Lz) + (3/2 - Sz).
// Both factors run over descending projections.
namespace basis {

inline constexpr int orbital_dim = 3;
inline constexpr int spin_dim = 4;
inline constexpr int dim = orbital_dim * spin_dim;

// lz in {+1, 0, -1}, sz_twice in {+3, +1, -1, -3}.
int index(int lz, int sz_twice);
std::pair<int, int> level(int index);  // -> (lz, sz_twice)

}  // namespace basis

// Kronecker embedding op_l (3x3) ⊗ op_s (4x4) into the product basis.
Matrix embed(const Matrix& op_l, const Matrix& op_s);
Matrix embed_orbital(const Matrix& op_l);  // op_l ⊗ I4
Matrix embed_spin(const Matrix& op_s);     // I3 ⊗ op_s

bool is_hermitian(const Matrix& m, double tol);

}  // namespace sivfs
