#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hhgdis/error.hpp"
#include "hhgdis/physics_model.hpp"
#include "hhgdis/splitting.hpp"

namespace hhgdis {

// ---------------------------------------------------------------------------
// Simple-man (SFA) trajectories in a constant-envelope field F_L sin(omega t).
// ---------------------------------------------------------------------------

inline double sfa_position(double t, double t_i, const LaserParams& laser) {
  const double f = laser.field, w = laser.omega;
  return -(f / w) * std::cos(w * t_i) * (t - t_i) + (f / (w * w)) * (std::sin(w * t) - std::sin(w * t_i));
}

inline double sfa_momentum(double t, double t_i, const LaserParams& laser) {
  const double f = laser.field, w = laser.omega;
  return (f / w) * (std::cos(w * t) - std::cos(w * t_i));
}

/// Laser-only kinetic energy at return, p(t_r)^2 / 2.
inline double sfa_return_energy(double t_r, double t_i, const LaserParams& laser) {
  const double p = sfa_momentum(t_r, t_i, laser);
  return 0.5 * p * p;
}

struct SfaEvent {
  double t_i = 0.0;
  std::optional<double> t_s;
  // Signed return site: +l or -l (0 for the parent ion).
  double site = 0.0;
  double t_r = 0.0;
  double energy = 0.0;
};

struct ReturnSearch {
  double horizon_cycles = 1.5;
  int mesh_per_cycle = 2000;
  double time_tolerance = 1e-10;
};

namespace detail {

// Roots of g on (t_a, t_b] by sign changes on a uniform mesh and bisection.
template <class G>
std::vector<double> bracket_roots(G&& g, double t_a, double t_b, int mesh, double tol) {
  std::vector<double> roots;
  double prev_t = t_a + (t_b - t_a) / mesh;
  double prev = g(prev_t);
  // The first cell is skipped so that the launch point itself is never a root.
  for (int k = 2; k <= mesh; ++k) {
    const double t = t_a + (t_b - t_a) * k / mesh;
    const double v = g(t);
    if (prev == 0.0) {
      roots.push_back(prev_t);
    } else if ((prev < 0.0) != (v < 0.0) && v != 0.0) {
      double lo = prev_t, hi = t, glo = prev;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev = v;
  }
  return roots;
}

}  // namespace detail

/// All times t_r in (t_i, t_i + horizon] with |x(t_r)| = l, both sides reported.
inline std::vector<SfaEvent> find_returns(double t_i, double ell, const LaserParams& laser,
                                          const ReturnSearch& search = {}) {
  if (ell < 0.0) throw DataError("find_returns: distance must be >= 0");
  const double t_b = t_i + search.horizon_cycles * laser.period();
  const int mesh = std::max(2, static_cast<int>(std::ceil(search.mesh_per_cycle * search.horizon_cycles)));
  std::vector<SfaEvent> out;
  const double sites[2] = {ell, -ell};
  for (int s = 0; s < (ell == 0.0 ? 1 : 2); ++s) {
    const double site = sites[s];
    auto g = [&](double t) { return sfa_position(t, t_i, laser) - site; };
    for (double tr : detail::bracket_roots(g, t_i, t_b, mesh, search.time_tolerance))
      out.push_back({t_i, std::nullopt, site, tr, sfa_return_energy(tr, t_i, laser)});
  }
  std::sort(out.begin(), out.end(), [](const SfaEvent& a, const SfaEvent& b) { return a.t_r < b.t_r; });
  return out;
}

struct ReturnScan {
  int ionization_samples = 2000;
  ReturnSearch search;
};

/// max E_r over t_i in [0, T_L) and every return within the horizon, with a
/// golden-section polish of the best ionization time.
inline double max_return_energy(double ell, const LaserParams& laser, const ReturnScan& scan = {}) {
  auto best_at = [&](double t_i) {
    double e = 0.0;
    for (const auto& ev : find_returns(t_i, ell, laser, scan.search)) e = std::max(e, ev.energy);
    return e;
  };
  const double period = laser.period();
  const double h = period / scan.ionization_samples;
  double best = 0.0, t_best = 0.0;
  for (int k = 0; k < scan.ionization_samples; ++k) {
    const double t = k * h;
    const double e = best_at(t);
    if (e > best) {
      best = e;
      t_best = t;
    }
  }
  double lo = t_best - h, hi = t_best + h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  double fc = best_at(c), fd = best_at(d);
  for (int it = 0; it < 60; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = best_at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = best_at(d);
    }
  }
  return std::max({best, fc, fd});
}

/// Laser-only trajectory with an elastic momentum reversal at t_s.
struct BackscatterTrajectory {
  double t_i = 0.0;
  double t_s = 0.0;
  LaserParams laser;

  double x_s() const { return sfa_position(t_s, t_i, laser); }
  double p_s() const { return -sfa_momentum(t_s, t_i, laser); }

  double position(double t) const {
    if (t <= t_s) return sfa_position(t, t_i, laser);
    const double f = laser.field, w = laser.omega;
    const double drift = p_s() - (f / w) * std::cos(w * t_s);
    return x_s() + drift * (t - t_s) + (f / (w * w)) * (std::sin(w * t) - std::sin(w * t_s));
  }

  double momentum(double t) const {
    if (t <= t_s) return sfa_momentum(t, t_i, laser);
    const double f = laser.field, w = laser.omega;
    return p_s() + (f / w) * (std::cos(w * t) - std::cos(w * t_s));
  }

  /// Returns to the origin after the reversal.
  std::vector<SfaEvent> returns(const ReturnSearch& search = {}) const {
    const double t_b = t_s + search.horizon_cycles * laser.period();
    const int mesh = std::max(2, static_cast<int>(std::ceil(search.mesh_per_cycle * search.horizon_cycles)));
    std::vector<SfaEvent> out;
    auto g = [&](double t) { return position(t); };
    for (double tr : detail::bracket_roots(g, t_s, t_b, mesh, search.time_tolerance)) {
      const double p = momentum(tr);
      out.push_back({t_i, t_s, 0.0, tr, 0.5 * p * p});
    }
    return out;
  }
};

inline BackscatterTrajectory backscatter_trajectory(double t_i, double t_s, const LaserParams& laser) {
  if (!(t_s > t_i)) throw DataError("backscatter_trajectory: t_s must follow t_i");
  return {t_i, t_s, laser};
}

// ---------------------------------------------------------------------------
// Exact classical flow of p^2/2 + V(x) + x F_L sin(omega t) and periodic orbits.
// ---------------------------------------------------------------------------

struct PhaseSpacePoint {
  double x = 0.0;
  double p = 0.0;
};

/// Classical analog: soft-Coulomb core (optional) in a constant-envelope field.
/// The field amplitude may be zero here.
struct ClassicalModel {
  LaserParams laser;
  AtomParams atom;
  bool with_atom = true;
  int steps_per_period = 16384;

  double period() const { return laser.period(); }
  double force(double x, double t) const {
    return -(with_atom ? gradient_atom(x, atom) : 0.0) - laser.field * std::sin(laser.omega * t);
  }
  double curvature(double x) const { return with_atom ? curvature_atom(x, atom) : 0.0; }
  double energy(PhaseSpacePoint z) const {
    return 0.5 * z.p * z.p + (with_atom ? potential_atom(z.x, atom) : 0.0);
  }
};

using Matrix2 = Eigen::Matrix2d;

namespace detail {

inline const SplittingScheme& classical_scheme() {
  static const SplittingScheme s = triple_jump(bm4_scheme());
  return s;
}

// One composed step of size h from time t: kicks at the A stages, drifts
// (which carry the clock) at the B stages. Optionally transports a tangent
// matrix with the exact derivative of each sub-step.
inline void classical_step(const ClassicalModel& m, PhaseSpacePoint& z, double t, double h, Matrix2* tangent) {
  const auto& s = classical_scheme();
  double clock = t;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    const double k = s.a[i] * h;
    if (tangent) {
      const double c = m.curvature(z.x);
      tangent->row(1) -= k * c * tangent->row(0);
    }
    z.p += k * m.force(z.x, clock);
    if (i < s.b.size()) {
      const double d = s.b[i] * h;
      z.x += d * z.p;
      if (tangent) tangent->row(0) += d * tangent->row(1);
      clock += d;
    }
  }
}

inline long long steps_for(const ClassicalModel& m, double span) {
  const double h = m.period() / m.steps_per_period;
  return std::max<long long>(1, static_cast<long long>(std::ceil(std::abs(span) / h - 1e-9)));
}

}  // namespace detail

inline PhaseSpacePoint classical_flow(PhaseSpacePoint z0, double t0, double t1, const ClassicalModel& m) {
  if (t1 == t0) return z0;
  const long long n = detail::steps_for(m, t1 - t0);
  const double h = (t1 - t0) / static_cast<double>(n);
  for (long long k = 0; k < n; ++k) detail::classical_step(m, z0, t0 + k * h, h, nullptr);
  return z0;
}

struct FlowWithTangent {
  PhaseSpacePoint end;
  Matrix2 jacobian;
};

inline FlowWithTangent flow_with_tangent(PhaseSpacePoint z0, double t0, double t1, const ClassicalModel& m) {
  Matrix2 M = Matrix2::Identity();
  const long long n = detail::steps_for(m, t1 - t0);
  const double h = (t1 - t0) / static_cast<double>(n);
  for (long long k = 0; k < n; ++k) detail::classical_step(m, z0, t0 + k * h, h, &M);
  return {z0, M};
}

/// Linearization of the one-period map at z0 from the variational equations.
inline Matrix2 monodromy(PhaseSpacePoint z0, double t0, const ClassicalModel& m) {
  return flow_with_tangent(z0, t0, t0 + m.period(), m).jacobian;
}

enum class Stability { hyperbolic, elliptic, parabolic };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::hyperbolic: return "hyperbolic";
    case Stability::elliptic: return "elliptic";
    case Stability::parabolic: return "parabolic";
  }
  return "unknown";
}

inline constexpr double kStabilityTolerance = 1e-6;

inline Stability classify(const Matrix2& M) {
  const double margin = std::abs(M.trace()) - 2.0;
  if (margin > kStabilityTolerance) return Stability::hyperbolic;
  if (margin < -kStabilityTolerance) return Stability::elliptic;
  return Stability::parabolic;
}

struct PeriodicOrbit {
  PhaseSpacePoint z;
  double t0 = 0.0;
  Matrix2 monodromy = Matrix2::Identity();
  Stability stability = Stability::parabolic;
  double residual = 0.0;
  std::vector<double> residual_history;
};

struct NewtonOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  // Relative threshold on |det(M - I)| below which the fixed point is not isolated.
  double singular_threshold = 1e-10;
};

inline double orbit_residual(PhaseSpacePoint z, double t0, const ClassicalModel& m) {
  const auto f = classical_flow(z, t0, t0 + m.period(), m);
  return std::hypot(f.x - z.x, f.p - z.p);
}

/// Newton iteration on phi(z) - z with Jacobian M - I, backtracking when a
/// full step increases the residual.
inline PeriodicOrbit find_periodic_orbit(PhaseSpacePoint guess, double t0, const ClassicalModel& m,
                                         const NewtonOptions& opt = {}) {
  PeriodicOrbit orbit;
  orbit.t0 = t0;
  Eigen::Vector2d z(guess.x, guess.p);
  const double t1 = t0 + m.period();
  for (int it = 0; it <= opt.max_iterations; ++it) {
    const auto fw = flow_with_tangent({z[0], z[1]}, t0, t1, m);
    const Eigen::Vector2d G(fw.end.x - z[0], fw.end.p - z[1]);
    const double res = G.norm();
    orbit.residual_history.push_back(res);
    if (res < opt.tolerance) {
      orbit.z = {z[0], z[1]};
      orbit.monodromy = fw.jacobian;
      orbit.stability = classify(fw.jacobian);
      orbit.residual = res;
      return orbit;
    }
    const Matrix2 A = fw.jacobian - Matrix2::Identity();
    const double scale = std::max(1.0, A.squaredNorm());
    if (std::abs(A.determinant()) < opt.singular_threshold * scale)
      throw NumericalError("find_periodic_orbit: singular Jacobian (non-isolated or parabolic fixed point)");
    const Eigen::Vector2d dz = A.partialPivLu().solve(-G);
    double lambda = 1.0;
    Eigen::Vector2d zn = z + dz;
    while (lambda > 1e-6) {
      zn = z + lambda * dz;
      if (orbit_residual({zn[0], zn[1]}, t0, m) < res) break;
      lambda *= 0.5;
    }
    z = zn;
  }
  throw NumericalError("find_periodic_orbit: iteration cap reached, residual " +
                       std::to_string(orbit.residual_history.back()));
}

/// Zero-drift simple-man trajectory (cos(omega t_i) = 0, launched at the field
/// maximum sin(omega t_i) = +1 or -1) evaluated at t0.
inline PhaseSpacePoint zero_drift_guess(double t0, const LaserParams& laser, int branch = +1) {
  const double f = laser.field, w = laser.omega;
  return {(f / (w * w)) * (std::sin(w * t0) - branch), (f / w) * std::cos(w * t0)};
}

/// Image under z -> -z, t -> t + T/2, confirmed by integrating the flow.
inline PeriodicOrbit symmetry_partner(const PeriodicOrbit& orbit, const ClassicalModel& m,
                                      double tolerance = 1e-10) {
  PeriodicOrbit partner;
  partner.z = {-orbit.z.x, -orbit.z.p};
  partner.t0 = orbit.t0 + 0.5 * m.period();
  const auto fw = flow_with_tangent(partner.z, partner.t0, partner.t0 + m.period(), m);
  partner.residual = std::hypot(fw.end.x - partner.z.x, fw.end.p - partner.z.p);
  if (!(partner.residual < tolerance))
    throw NumericalError("symmetry_partner: mirrored orbit does not close (residual " +
                         std::to_string(partner.residual) + ")");
  partner.monodromy = fw.jacobian;
  partner.stability = classify(fw.jacobian);
  partner.residual_history = {partner.residual};
  return partner;
}

struct OrbitSample {
  double t = 0.0;
  double x = 0.0;
  double p = 0.0;
};

/// Orbit sampled on the integrator's step grid and extended periodically over
/// [t_begin, t_end].
inline std::vector<OrbitSample> overlay_orbit(const PeriodicOrbit& orbit, const ClassicalModel& m, double t_begin,
                                              double t_end) {
  const long long n = m.steps_per_period;
  const double h = m.period() / static_cast<double>(n);
  std::vector<PhaseSpacePoint> one(n);
  PhaseSpacePoint z = orbit.z;
  for (long long k = 0; k < n; ++k) {
    one[k] = z;
    detail::classical_step(m, z, orbit.t0 + k * h, h, nullptr);
  }
  std::vector<OrbitSample> out;
  const auto k0 = static_cast<long long>(std::ceil((t_begin - orbit.t0) / h - 1e-9));
  const auto k1 = static_cast<long long>(std::floor((t_end - orbit.t0) / h + 1e-9));
  for (long long k = k0; k <= k1; ++k) {
    const long long r = ((k % n) + n) % n;
    out.push_back({orbit.t0 + k * h, one[r].x, one[r].p});
  }
  return out;
}

}  // namespace hhgdis
