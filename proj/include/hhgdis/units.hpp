#pragma once

#include <cmath>
#include <numbers>

// Hartree atomic units everywhere; these helpers live at the configuration
// boundary only.
namespace hhgdis::units {

inline constexpr double bohr_nm = 0.052917721090380;
inline constexpr double au_time_fs = 0.024188843265857;
// Intensity corresponding to a field amplitude of 1 a.u. (I = F^2 * this).
inline constexpr double au_intensity_w_cm2 = 3.5094475e16;
inline constexpr double hartree_ev = 27.211386245988;
// Speed of light in a.u.
inline constexpr double c_au = 137.035999084;

inline double fs_from_au(double t) { return t * au_time_fs; }
inline double au_from_fs(double t) { return t / au_time_fs; }

inline double omega_from_wavelength_nm(double lambda_nm) {
  const double lambda_au = lambda_nm / bohr_nm;
  return 2.0 * std::numbers::pi * c_au / lambda_au;
}

inline double wavelength_nm_from_omega(double omega) {
  return 2.0 * std::numbers::pi * c_au / omega * bohr_nm;
}

inline double field_from_intensity(double w_cm2) { return std::sqrt(w_cm2 / au_intensity_w_cm2); }
inline double intensity_from_field(double f) { return f * f * au_intensity_w_cm2; }

}  // namespace hhgdis::units
