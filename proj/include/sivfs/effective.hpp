#pragma once

#include "sivfs/hamiltonian.hpp"

#include <string>

namespace sivfs {

// Lowdin-reduced 4A2 quadruplet: epsilon_a2 + d_prime (Sz^2 - 5/4).
// 2*d_prime is the zero-field splitting between the +-1/2 and +-3/2
// sublevels. Energies in GHz.
struct EffectiveA2 {
  double epsilon_a2 = 0.0;
  double d_prime = 0.0;
};

// Lowdin-reduced 4E octuplet, written on |sigma_z = +-1> ⊗ |Sz>. lambda_so
// is the sigma_z Sz coefficient, d_dprime the axial and d_dprime_perp the
// transverse spin-spin constant; strain_x and strain_y multiply sigma_x
// and sigma_y.
struct EffectiveE {
  double epsilon_e = 0.0;
  double lambda_so = 0.0;
  double d_dprime = 0.0;
  double d_dprime_perp = 0.0;
  double strain_x = 0.0;
  double strain_y = 0.0;
};

// First order in the spin-spin interaction, second order in the
// spin-orbit interaction. delta_a = 0 is rejected.
EffectiveA2 effective_a2_params(const CenterParams& p);
EffectiveE effective_e_params(const CenterParams& p, const StrainTensor& u);

Matrix effective_a2_hamiltonian(const EffectiveA2& a2);                      // 4x4
Matrix effective_e_hamiltonian(const EffectiveE& e);                        // 8x8
Matrix effective_e_hamiltonian(const CenterParams& p, const StrainTensor& u);

// Oracle check of the reduction against exact diagonalization: the four
// lowest-w_e exact states against the quadruplet spectrum and the eight
// E-like states against the octuplet spectrum.
struct LowdinReport {
  double dev_a2_ghz = 0.0;
  double dev_e_ghz = 0.0;
  int mixed_states = 0;
  bool classification_clean = true;
  bool shear_ignored = false;  // u_xz/u_yz present but absent from the reduced model
};

LowdinReport validate_against_exact(const CenterParams& p, const StrainTensor& u = {});
std::string lowdin_report_json(const CenterParams& p, const StrainTensor& u, const LowdinReport& report);

}  // namespace sivfs
