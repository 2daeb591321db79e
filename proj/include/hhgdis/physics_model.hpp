#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hhgdis/error.hpp"

namespace hhgdis {

/// Linearly polarized pulse F(t) = F_L f(t) sin(omega_L t) with a trapezoidal
/// envelope given in whole laser cycles.
struct LaserParams {
  double field = 0.15;
  double omega = 0.044;
  int n_up = 2;
  int n_plateau = 11;
  int n_down = 2;

  double period() const { return 2.0 * std::numbers::pi / omega; }
  int total_cycles() const { return n_up + n_plateau + n_down; }
  double duration() const { return total_cycles() * period(); }

  void validate() const {
    if (!(field > 0.0)) throw ConfigError("laser field must be positive");
    if (!(omega > 0.0)) throw ConfigError("laser omega must be positive");
    if (n_up < 0 || n_plateau < 0 || n_down < 0)
      throw ConfigError("envelope cycle counts must be nonnegative");
  }

  friend bool operator==(const LaserParams&, const LaserParams&) = default;
};

struct AtomParams {
  double softening = 0.4837;

  void validate() const {
    if (!(softening > 0.0)) throw ConfigError("atom softening must be positive");
  }

  friend bool operator==(const AtomParams&, const AtomParams&) = default;
};

/// Identical attractive Gaussian wells -A_E exp(-x^2 / 2 sigma_E^2).
/// A_E = 0 is the gas phase.
struct PerturberParams {
  double depth = 0.8;
  double width = 0.5;

  void validate() const {
    if (!(depth >= 0.0)) throw ConfigError("perturber depth A_E must be >= 0");
    if (!(width > 0.0)) throw ConfigError("perturber width sigma_E must be positive");
  }

  friend bool operator==(const PerturberParams&, const PerturberParams&) = default;
};

/// One disorder realization: strictly increasing perturber positions.
struct EnvironmentConfig {
  std::vector<double> positions;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  bool valid() const {
    const auto n = positions.size();
    if (n % 2 != 0) return false;
    for (std::size_t k = 1; k < n; ++k)
      if (!(positions[k] > positions[k - 1])) return false;
    if (n >= 2 && !(positions[n / 2 - 1] < 0.0 && positions[n / 2] > 0.0)) return false;
    return true;
  }

  friend bool operator==(const EnvironmentConfig&, const EnvironmentConfig&) = default;
};

inline double envelope(double t, const LaserParams& laser) {
  const double cycles = t / laser.period();
  if (cycles <= 0.0) return 0.0;
  const double up = laser.n_up;
  const double flat_end = up + laser.n_plateau;
  const double end = flat_end + laser.n_down;
  if (cycles < up) return cycles / up;
  if (cycles <= flat_end) return 1.0;
  if (cycles < end) return (end - cycles) / laser.n_down;
  return 0.0;
}

inline double field_at(double t, const LaserParams& laser) {
  return laser.field * envelope(t, laser) * std::sin(laser.omega * t);
}

/// Constant-envelope field used by the classical engines.
inline double field_cw(double t, const LaserParams& laser) {
  return laser.field * std::sin(laser.omega * t);
}

inline double potential_atom(double x, const AtomParams& atom) {
  return -1.0 / std::sqrt(x * x + atom.softening);
}

/// dV/dx of the soft-Coulomb potential.
inline double gradient_atom(double x, const AtomParams& atom) {
  const double r2 = x * x + atom.softening;
  return x / (r2 * std::sqrt(r2));
}

inline double curvature_atom(double x, const AtomParams& atom) {
  const double r2 = x * x + atom.softening;
  const double r3 = r2 * std::sqrt(r2);
  return 1.0 / r3 - 3.0 * x * x / (r3 * r2);
}

// Wells further than this many widths away contribute below double precision.
inline constexpr double kWellCutoffWidths = 40.0;

inline double potential_env(double x, const EnvironmentConfig& config, const PerturberParams& pert) {
  if (pert.depth == 0.0) return 0.0;
  const double inv = 1.0 / (2.0 * pert.width * pert.width);
  const double reach = kWellCutoffWidths * pert.width;
  double v = 0.0;
  for (double xk : config.positions) {
    const double d = x - xk;
    if (std::abs(d) > reach) continue;
    v -= std::exp(-d * d * inv);
  }
  return pert.depth * v;
}

inline double gradient_env(double x, const EnvironmentConfig& config, const PerturberParams& pert) {
  if (pert.depth == 0.0) return 0.0;
  const double s2 = pert.width * pert.width;
  const double reach = kWellCutoffWidths * pert.width;
  double g = 0.0;
  for (double xk : config.positions) {
    const double d = x - xk;
    if (std::abs(d) > reach) continue;
    g += d / s2 * std::exp(-d * d / (2.0 * s2));
  }
  return pert.depth * g;
}

inline double ponderomotive_energy(const LaserParams& laser) {
  const double q = laser.field / (2.0 * laser.omega);
  return q * q;
}

inline double quiver_radius(const LaserParams& laser) {
  return laser.field / (laser.omega * laser.omega);
}

/// Classical three-step cutoff (3.17 U_p + I_p) expressed in harmonic orders.
inline double cutoff_harmonic(const LaserParams& laser, double ionization_potential) {
  return (3.17 * ponderomotive_energy(laser) + ionization_potential) / laser.omega;
}

}  // namespace hhgdis
