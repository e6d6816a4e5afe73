#pragma once

// Unit conventions: every energy inside the library is E/h in GHz unless the
// name carries another suffix. Magnetic fields are mT, temperatures K,
// wavelengths nm, angles degrees at API boundaries (radians internally).

namespace sivfs::units {

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Bohr magneton over Planck constant. Numerically identical in MHz/mT.
inline constexpr double mu_b_ghz_per_t = 13.9962;
inline constexpr double mu_b_mhz_per_mt = mu_b_ghz_per_t;
inline constexpr double mu_b_ghz_per_mt = mu_b_ghz_per_t * 1e-3;

// Boltzmann constant over Planck constant.
inline constexpr double k_b_ghz_per_k = 20.8366;

inline constexpr double ghz_per_mev = 241.799;
inline constexpr double k_b_mev_per_k = k_b_ghz_per_k / ghz_per_mev;

inline constexpr double deg_per_rad = 180.0 / pi;
inline constexpr double deg_to_rad(double deg) { return deg / deg_per_rad; }
inline constexpr double rad_to_deg(double rad) { return rad * deg_per_rad; }

inline constexpr double mhz_to_ghz(double mhz) { return mhz * 1e-3; }
inline constexpr double ghz_to_mhz(double ghz) { return ghz * 1e3; }
inline constexpr double mev_to_ghz(double mev) { return mev * ghz_per_mev; }
inline constexpr double ghz_to_mev(double ghz) { return ghz / ghz_per_mev; }

}  // namespace sivfs::units
