#include "sivfs/spin_algebra.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sivfs {

AngularMomentumSet angular_momentum_matrices(double j) {
  const double two_j = 2.0 * j;
  if (j < 0.0 || std::abs(two_j - std::round(two_j)) > 1e-12) {
    throw std::invalid_argument("angular momentum quantum number must be a non-negative half-integer, got " +
                                std::to_string(j));
  }
  const int dim = static_cast<int>(std::lround(two_j)) + 1;

  Matrix jz = Matrix::Zero(dim, dim);
  Matrix jp = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double m = j - k;
    jz(k, k) = m;
    if (k > 0) {
      // <j,m+1| J+ |j,m> = sqrt(j(j+1) - m(m+1))
      jp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
  }
  const Matrix jm = jp.adjoint();

  AngularMomentumSet set;
  set.j = j;
  set.jx = 0.5 * (jp + jm);
  set.jy = Complex(0.0, -0.5) * (jp - jm);
  set.jz = jz;
  return set;
}

namespace basis {

int index(int lz, int sz_twice) {
  if (lz < -1 || lz > 1) throw std::invalid_argument("Lz must be -1, 0 or +1");
  if (sz_twice != 3 && sz_twice != 1 && sz_twice != -1 && sz_twice != -3) {
    throw std::invalid_argument("2*Sz must be one of +3, +1, -1, -3");
  }
  return 4 * (1 - lz) + (3 - sz_twice) / 2;
}

std::pair<int, int> level(int index) {
  if (index < 0 || index >= dim) throw std::invalid_argument("basis index out of range");
  const int lz = 1 - index / 4;
  const int sz_twice = 3 - 2 * (index % 4);
  return {lz, sz_twice};
}

}  // namespace basis

Matrix embed(const Matrix& op_l, const Matrix& op_s) {
  if (op_l.rows() != basis::orbital_dim || op_l.cols() != basis::orbital_dim) {
    throw std::invalid_argument("orbital operator must be 3x3");
  }
  if (op_s.rows() != basis::spin_dim || op_s.cols() != basis::spin_dim) {
    throw std::invalid_argument("spin operator must be 4x4");
  }
  Matrix out(basis::dim, basis::dim);
  for (int i = 0; i < basis::orbital_dim; ++i) {
    for (int k = 0; k < basis::orbital_dim; ++k) {
      out.block(i * basis::spin_dim, k * basis::spin_dim, basis::spin_dim, basis::spin_dim) = op_l(i, k) * op_s;
    }
  }
  return out;
}

Matrix embed_orbital(const Matrix& op_l) {
  return embed(op_l, Matrix::Identity(basis::spin_dim, basis::spin_dim));
}

Matrix embed_spin(const Matrix& op_s) {
  return embed(Matrix::Identity(basis::orbital_dim, basis::orbital_dim), op_s);
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace sivfs
