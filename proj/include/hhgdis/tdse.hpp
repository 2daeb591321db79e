#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "hhgdis/error.hpp"
#include "hhgdis/fft.hpp"
#include "hhgdis/grid.hpp"
#include "hhgdis/physics_model.hpp"
#include "hhgdis/splitting.hpp"

namespace hhgdis {

using FieldFn = std::function<double(double)>;

/// Static part of the Hamiltonian sampled on the grid, plus the time-dependent
/// dipole coupling x F(t).
struct HamiltonianParts {
  std::vector<double> potential;  // V(x) + environment
  std::vector<double> gradient;   // d/dx of the above
  FieldFn field;                  // F(t); empty means field-free
};

inline HamiltonianParts make_hamiltonian(const Grid& grid, const AtomParams& atom, const EnvironmentConfig& env,
                                         const PerturberParams& pert, FieldFn field) {
  HamiltonianParts h;
  h.potential.resize(grid.n);
  h.gradient.resize(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    h.potential[j] = potential_atom(x, atom) + potential_env(x, env, pert);
    h.gradient[j] = gradient_atom(x, atom) + gradient_env(x, env, pert);
  }
  h.field = std::move(field);
  return h;
}

inline FieldFn laser_field(const LaserParams& laser) {
  return [laser](double t) { return field_at(t, laser); };
}

struct Schedule {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.02;

  /// Number of steps; dt is shrunk so that the steps tile [t_start, t_end].
  long long steps() const {
    const double span = t_end - t_start;
    if (span == 0.0) return 0;
    return static_cast<long long>(std::ceil(std::abs(span) / std::abs(dt) - 1e-9));
  }
  double effective_dt() const {
    const auto n = steps();
    return n == 0 ? dt : (t_end - t_start) / static_cast<double>(n);
  }
};

/// Cosine^(1/8) edge mask over `fraction` of the domain at each end.
inline std::vector<double> absorber_mask(const Grid& grid, double fraction) {
  std::vector<double> mask(grid.n, 1.0);
  if (fraction <= 0.0) return mask;
  const double band = fraction * grid.length();
  for (std::size_t j = 0; j < grid.n; ++j) {
    const double x = grid.x(j);
    const double depth = std::max(grid.x_min + band - x, x - (grid.x_max - band));
    if (depth > 0.0) {
      const double c = std::cos(0.5 * std::numbers::pi * std::min(depth / band, 1.0));
      mask[j] = std::pow(std::max(c, 0.0), 0.125);
    }
  }
  return mask;
}

inline void apply_absorber(Wavefunction& psi, std::span<const double> mask) {
  for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= mask[j];
}

struct PropagatorSettings {
  double dt = 0.02;
  double absorber_fraction = 0.1;
  bool absorber = true;

  friend bool operator==(const PropagatorSettings&, const PropagatorSettings&) = default;
};

/// Everything precomputed for one (grid, dt, scheme) triple.
struct PropagatorPlan {
  Grid grid;
  double dt = 0.0;
  SplittingScheme scheme;
  // Kinetic phase per distinct B coefficient, with the 1/n of the inverse FFT folded in.
  std::vector<std::vector<cplx>> kinetic;
  std::vector<int> kinetic_index;
  std::vector<double> absorber;
  bool absorber_enabled = true;

  PropagatorPlan(const Grid& g, const PropagatorSettings& settings, SplittingScheme s = bm4_scheme())
      : grid(g), dt(settings.dt), scheme(std::move(s)), absorber_enabled(settings.absorber) {
    grid.validate();
    const double inv_n = 1.0 / static_cast<double>(grid.n);
    std::vector<double> distinct;
    for (double b : scheme.b) {
      auto it = std::find(distinct.begin(), distinct.end(), b);
      if (it == distinct.end()) {
        distinct.push_back(b);
        std::vector<cplx> table(grid.n);
        for (std::size_t k = 0; k < grid.n; ++k) {
          const double p = grid.p(k);
          table[k] = std::polar(inv_n, -b * dt * 0.5 * p * p);
        }
        kinetic.push_back(std::move(table));
        kinetic_index.push_back(static_cast<int>(distinct.size()) - 1);
      } else {
        kinetic_index.push_back(static_cast<int>(it - distinct.begin()));
      }
    }
    absorber = absorber_mask(grid, settings.absorber ? settings.absorber_fraction : 0.0);
  }
};

struct RecordOptions {
  int stride = 4;
  std::vector<double> probe_times;
};

/// Time series recorded during one propagation.
struct Recording {
  std::vector<double> times;
  std::vector<double> position;
  std::vector<double> acceleration;
  std::vector<double> norm;
  std::vector<Wavefunction> snapshots;
};

inline double dipole_accel_instant(const Wavefunction& psi, double t, const HamiltonianParts& h) {
  double force = 0.0, nrm = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double w = std::norm(psi[j]);
    force += w * h.gradient[j];
    nrm += w;
  }
  if (!(nrm > 0.0)) throw NumericalError("dipole acceleration of a zero-norm state");
  const double f = h.field ? h.field(t) : 0.0;
  return -force / nrm - f;
}

/// Split-operator propagator for one configuration. Not shareable across
/// threads; build one per worker.
class Propagator {
 public:
  Propagator(const PropagatorPlan& plan, HamiltonianParts hamiltonian)
      : plan_(plan), h_(std::move(hamiltonian)), fft_(plan.grid.n), x_(plan.grid.positions()) {
    if (h_.potential.size() != plan_.grid.n || h_.gradient.size() != plan_.grid.n)
      throw DataError("Hamiltonian sampled on a different grid than the plan");
    // Cumulative B weight preceding each A stage fixes the time at which the
    // potential stage is evaluated.
    double acc = 0.0;
    for (std::size_t i = 0; i < plan_.scheme.a.size(); ++i) {
      stage_time_.push_back(acc);
      if (i < plan_.scheme.b.size()) acc += plan_.scheme.b[i];
    }
    std::vector<double> distinct;
    for (double a : plan_.scheme.a) {
      auto it = std::find(distinct.begin(), distinct.end(), a);
      if (it == distinct.end()) {
        distinct.push_back(a);
        std::vector<cplx> table(plan_.grid.n);
        for (std::size_t j = 0; j < plan_.grid.n; ++j) table[j] = std::polar(1.0, -a * plan_.dt * h_.potential[j]);
        static_phase_.push_back(std::move(table));
        static_index_.push_back(static_cast<int>(distinct.size()) - 1);
      } else {
        static_index_.push_back(static_cast<int>(it - distinct.begin()));
      }
    }
  }

  const PropagatorPlan& plan() const { return plan_; }
  const HamiltonianParts& hamiltonian() const { return h_; }

  /// Advances psi from psi.time by plan().dt; no absorber.
  void step(Wavefunction& psi) {
    auto buf = fft_.data();
    std::copy(psi.amplitudes.begin(), psi.amplitudes.end(), buf.begin());
    advance(psi.time);
    std::copy(buf.begin(), buf.end(), psi.amplitudes.begin());
    psi.time += plan_.dt;
  }

  void absorb(Wavefunction& psi) const {
    if (plan_.absorber_enabled) apply_absorber(psi, plan_.absorber);
  }

  /// Runs the schedule, sampling observables every `stride` steps and
  /// snapshots at the steps nearest each probe time.
  Recording propagate(const Wavefunction& psi0, const Schedule& schedule, const RecordOptions& rec) {
    const auto nsteps = schedule.steps();
    if (nsteps > 0 && std::abs(schedule.effective_dt() - plan_.dt) > 1e-12 * std::abs(plan_.dt))
      throw DataError("schedule time step differs from the propagator plan");
    if (psi0.grid != plan_.grid) throw DataError("initial state on a different grid than the plan");
    Wavefunction psi = psi0;
    psi.time = schedule.t_start;
    const auto dt = plan_.dt;
    Recording out;
    std::vector<long long> probe_steps;
    for (double tp : rec.probe_times)
      probe_steps.push_back(std::llround((tp - psi.time) / dt));
    auto sample = [&](const Wavefunction& w) {
      out.times.push_back(w.time);
      out.position.push_back(position_expectation(w));
      out.acceleration.push_back(dipole_accel_instant(w, w.time, h_));
      out.norm.push_back(hhgdis::norm(w));
    };
    auto snap = [&](long long k, const Wavefunction& w) {
      for (auto ps : probe_steps)
        if (ps == k) out.snapshots.push_back(w);
    };
    const int stride = std::max(rec.stride, 1);
    sample(psi);
    snap(0, psi);
    auto buf = fft_.data();
    std::copy(psi.amplitudes.begin(), psi.amplitudes.end(), buf.begin());
    Wavefunction view(plan_.grid);
    const double t0 = psi.time;
    for (long long k = 1; k <= nsteps; ++k) {
      const double t = t0 + static_cast<double>(k - 1) * dt;
      advance(t);
      if (plan_.absorber_enabled)
        for (std::size_t j = 0; j < buf.size(); ++j) buf[j] *= plan_.absorber[j];
      const bool want_sample = k % stride == 0;
      const bool want_snap = std::find(probe_steps.begin(), probe_steps.end(), k) != probe_steps.end();
      if (want_sample || want_snap) {
        std::copy(buf.begin(), buf.end(), view.amplitudes.begin());
        view.time = t0 + static_cast<double>(k) * dt;
        if (want_sample) sample(view);
        if (want_snap) snap(k, view);
      }
    }
    return out;
  }

 private:
  // One composed step on the FFT buffer, starting at time t.
  void advance(double t) {
    auto buf = fft_.data();
    const auto& s = plan_.scheme;
    const std::size_t n = buf.size();
    for (std::size_t i = 0; i < s.a.size(); ++i) {
      const double tt = t + stage_time_[i] * plan_.dt;
      const double f = h_.field ? h_.field(tt) : 0.0;
      const auto& stat = static_phase_[static_index_[i]];
      if (f == 0.0) {
        for (std::size_t j = 0; j < n; ++j) buf[j] *= stat[j];
      } else {
        apply_field_phase(buf, stat, -s.a[i] * plan_.dt * f);
      }
      if (i < s.b.size()) {
        fft_.forward();
        const auto& kin = plan_.kinetic[plan_.kinetic_index[i]];
        for (std::size_t k = 0; k < n; ++k) buf[k] *= kin[k];
        fft_.backward_unscaled();
      }
    }
  }

  // buf_j *= stat_j * exp(i c x_j); exact phases every kBlock points, a
  // complex recurrence in between.
  void apply_field_phase(std::span<cplx> buf, const std::vector<cplx>& stat, double c) const {
    constexpr std::size_t kBlock = 32;
    const cplx rot = std::polar(1.0, c * plan_.grid.dx());
    const std::size_t n = buf.size();
    for (std::size_t j0 = 0; j0 < n; j0 += kBlock) {
      cplx ph = std::polar(1.0, c * x_[j0]);
      const std::size_t j1 = std::min(n, j0 + kBlock);
      for (std::size_t j = j0; j < j1; ++j) {
        buf[j] *= stat[j] * ph;
        ph *= rot;
      }
    }
  }

  PropagatorPlan plan_;
  HamiltonianParts h_;
  Fft fft_;
  std::vector<double> x_;
  std::vector<double> stage_time_;
  std::vector<std::vector<cplx>> static_phase_;
  std::vector<int> static_index_;
};

inline void step(Propagator& prop, Wavefunction& psi) { prop.step(psi); }

struct GroundState {
  Wavefunction psi;
  double energy = 0.0;
  long long iterations = 0;
};

struct GroundStateOptions {
  double tau = 0.05;
  double tolerance = 1e-10;
  long long max_iterations = 400000;
};

namespace detail {

inline double rayleigh_energy(Fft& fft, const Grid& grid, std::span<const cplx> psi, std::span<const double> v) {
  auto buf = fft.data();
  std::copy(psi.begin(), psi.end(), buf.begin());
  fft.forward();
  double kin = 0.0, pot = 0.0, nrm = 0.0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double p = grid.p(k);
    kin += 0.5 * p * p * std::norm(buf[k]);
  }
  kin /= static_cast<double>(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) {
    pot += v[j] * std::norm(psi[j]);
    nrm += std::norm(psi[j]);
  }
  return (kin + pot) / nrm;
}

}  // namespace detail

/// Lowest eigenstate of p^2/2 + V by imaginary-time Strang splitting.
/// The imaginary-time factors with negative BM4 weights are unstable, hence
/// the second-order scheme here.
inline GroundState ground_state(const Grid& grid, const std::function<double(double)>& potential,
                                const GroundStateOptions& opt = {}) {
  grid.validate();
  std::vector<double> v(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) v[j] = potential(grid.x(j));
  Fft fft(grid.n);
  const double tau = opt.tau;
  std::vector<double> half_pot(grid.n), kin(grid.n);
  for (std::size_t j = 0; j < grid.n; ++j) half_pot[j] = std::exp(-0.5 * tau * v[j]);
  const double inv_n = 1.0 / static_cast<double>(grid.n);
  for (std::size_t k = 0; k < grid.n; ++k) {
    const double p = grid.p(k);
    kin[k] = std::exp(-tau * 0.5 * p * p) * inv_n;
  }
  // Start from a broad even Gaussian centred at the grid midpoint of the potential minimum.
  std::size_t jmin = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  Wavefunction psi = gaussian_packet(grid, grid.x(jmin), 2.0);
  auto buf = fft.data();
  Fft efft(grid.n);
  double energy = detail::rayleigh_energy(efft, grid, psi.amplitudes, v);
  const double dx = grid.dx();
  for (long long it = 1; it <= opt.max_iterations; ++it) {
    for (std::size_t j = 0; j < grid.n; ++j) buf[j] = psi[j] * half_pot[j];
    fft.forward();
    for (std::size_t k = 0; k < grid.n; ++k) buf[k] *= kin[k];
    fft.backward_unscaled();
    double nrm = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) {
      psi[j] = buf[j] * half_pot[j];
      nrm += std::norm(psi[j]);
    }
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw NumericalError("ground_state: state collapsed");
    const double s = 1.0 / std::sqrt(nrm * dx);
    for (auto& c : psi.amplitudes) c *= s;
    const double e = detail::rayleigh_energy(efft, grid, psi.amplitudes, v);
    const double drift = std::abs(e - energy);
    energy = e;
    if (drift < opt.tolerance) return {std::move(psi), energy, it};
  }
  throw NumericalError("ground_state: no convergence, last energy " + std::to_string(energy));
}

}  // namespace hhgdis
