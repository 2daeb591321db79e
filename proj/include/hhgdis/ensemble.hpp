#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hhgdis/env_sampler.hpp"
#include "hhgdis/error.hpp"
#include "hhgdis/grid.hpp"
#include "hhgdis/physics_model.hpp"
#include "hhgdis/spectral_map.hpp"
#include "hhgdis/tdse.hpp"

namespace hhgdis {

struct EnsembleSpec {
  std::size_t n_c = 1000;
  std::uint64_t master_seed = 1;
  StructureParams structure;
  PerturberParams perturbers;
  LaserParams laser;
  AtomParams atom;
  Grid grid;
  PropagatorSettings propagator;
  int record_stride = 4;
  std::vector<double> probe_times;

  Schedule schedule() const { return {0.0, laser.duration(), propagator.dt}; }

  void validate() const {
    if (n_c < 1) throw ConfigError("n_c must be >= 1");
    structure.validate();
    perturbers.validate();
    laser.validate();
    atom.validate();
    grid.validate();
    if (!(propagator.dt > 0.0)) throw ConfigError("dt must be positive");
    if (record_stride < 1) throw ConfigError("record stride must be >= 1");
    for (double t : probe_times)
      if (t < 0.0 || t > laser.duration() + 1e-9) throw ConfigError("probe time outside the pulse");
  }
};

/// Probe times every `per_cycle`-th of a laser period across the whole pulse.
inline std::vector<double> uniform_probe_times(const LaserParams& laser, int per_cycle) {
  std::vector<double> out;
  const int n = laser.total_cycles() * per_cycle;
  for (int k = 0; k <= n; ++k) out.push_back(k * laser.period() / per_cycle);
  return out;
}

/// Per-configuration recordings on a shared time axis and grid.
struct EnsembleRecord {
  Grid grid;
  std::vector<EnvironmentConfig> configs;
  std::vector<Recording> runs;

  std::size_t size() const { return runs.size(); }
  const std::vector<double>& times() const { return runs.front().times; }
};

namespace detail {

// Runs fn(i) for i in [0, n) on `workers` threads; rethrows the first failure
// tagged with its index.
inline void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn,
                         std::size_t label_offset = 0) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::optional<std::size_t> failed;
  std::string message;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      {
        std::lock_guard lock(err_mutex);
        if (failed) return;
      }
      try {
        fn(i);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        if (!failed || i < *failed) {
          failed = i;
          message = e.what();
        }
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failed) throw NumericalError("configuration " + std::to_string(label_offset + *failed) + ": " + message);
}

}  // namespace detail

using RecordSink = std::function<void(std::size_t, const EnvironmentConfig&, Recording&&)>;

/// Samples configurations from streams 0..n_c-1 and propagates each from the
/// gas-phase ground state. Finished recordings go to `sink` in index order, a
/// batch of `workers` at a time, so only one batch is held in memory.
inline void run_ensemble_streaming(const EnsembleSpec& spec, unsigned workers, const GroundState* prepared,
                                   const RecordSink& sink) {
  spec.validate();
  const auto configs = sample_configurations(spec.master_seed, spec.n_c, spec.structure);
  GroundState local;
  if (!prepared) {
    const AtomParams atom = spec.atom;
    local = ground_state(spec.grid, [atom](double x) { return potential_atom(x, atom); });
    prepared = &local;
  }
  const Schedule sched = spec.schedule();
  PropagatorSettings settings = spec.propagator;
  settings.dt = sched.effective_dt();
  const PropagatorPlan plan(spec.grid, settings);
  const RecordOptions rec{spec.record_stride, spec.probe_times};
  const std::size_t batch = std::max<std::size_t>(1, workers);
  for (std::size_t begin = 0; begin < spec.n_c; begin += batch) {
    const std::size_t count = std::min(batch, spec.n_c - begin);
    std::vector<Recording> runs(count);
    detail::parallel_for(
        count, workers,
        [&](std::size_t k) {
          const std::size_t i = begin + k;
          Propagator prop(plan, make_hamiltonian(spec.grid, spec.atom, configs[i], spec.perturbers,
                                                 laser_field(spec.laser)));
          runs[k] = prop.propagate(prepared->psi, sched, rec);
        },
        begin);
    for (std::size_t k = 0; k < count; ++k) sink(begin + k, configs[begin + k], std::move(runs[k]));
  }
}

inline EnsembleRecord run_ensemble(const EnsembleSpec& spec, unsigned workers = 1,
                                   const GroundState* prepared = nullptr) {
  EnsembleRecord record;
  record.grid = spec.grid;
  run_ensemble_streaming(spec, workers, prepared, [&](std::size_t, const EnvironmentConfig& c, Recording&& r) {
    record.configs.push_back(c);
    record.runs.push_back(std::move(r));
  });
  return record;
}

enum class Observable { position, acceleration, norm };

inline const std::vector<double>& series_of(const Recording& r, Observable o) {
  switch (o) {
    case Observable::position: return r.position;
    case Observable::acceleration: return r.acceleration;
    case Observable::norm: return r.norm;
  }
  return r.position;
}

/// Unweighted mean over configurations, accumulated in index order.
inline std::vector<double> ensemble_expectation(const std::vector<Recording>& runs, Observable o) {
  if (runs.empty()) throw DataError("ensemble_expectation: no records");
  const auto& t0 = runs.front().times;
  std::vector<double> mean(t0.size(), 0.0);
  for (const auto& r : runs) {
    if (r.times != t0) throw DataError("ensemble_expectation: misaligned time axes");
    const auto& s = series_of(r, o);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += s[k];
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (auto& m : mean) m *= inv;
  return mean;
}

inline std::vector<double> ensemble_expectation(const EnsembleRecord& rec, Observable o) {
  return ensemble_expectation(rec.runs, o);
}

/// Smooth radial filter removing |x| < r0: zero inside r0 - w, one beyond
/// r0 + w, sin^2 ramp between (half height at r0).
struct MaskSpec {
  double radius = 5.0;
  double width = 2.0;

  double operator()(double x) const {
    const double r = std::abs(x);
    const double lo = radius - width;
    const double hi = radius + width;
    if (r <= lo) return 0.0;
    if (r >= hi) return 1.0;
    const double s = std::sin(0.25 * std::numbers::pi * (r - lo) / width);
    return s * s;
  }

  void validate() const {
    if (!(width > 0.0) || !(radius >= width)) throw ConfigError("mask needs width > 0 and radius >= width");
  }

  friend bool operator==(const MaskSpec&, const MaskSpec&) = default;
};

inline Wavefunction apply_photoelectron_mask(const Wavefunction& psi, const MaskSpec& mask) {
  Wavefunction out = psi;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] *= mask(out.grid.x(j));
  return out;
}

namespace detail {

inline std::vector<std::vector<cplx>> masked_states(const std::vector<const Wavefunction*>& snaps,
                                                    const std::optional<MaskSpec>& mask) {
  std::vector<std::vector<cplx>> out;
  out.reserve(snaps.size());
  const Grid& g = snaps.front()->grid;
  std::vector<double> m;
  if (mask) {
    m.resize(g.n);
    for (std::size_t j = 0; j < g.n; ++j) m[j] = (*mask)(g.x(j));
  }
  for (const auto* s : snaps) {
    if (s->grid != g) throw DataError("purity: snapshots on different grids");
    out.push_back(s->amplitudes);
    if (mask)
      for (std::size_t j = 0; j < g.n; ++j) out.back()[j] *= m[j];
  }
  return out;
}

}  // namespace detail

/// tr(rho^2)/tr(rho)^2 for rho = (1/N) sum |psi_i><psi_i| via the N x N Gram
/// matrix, never forming rho itself.
inline double purity(const std::vector<const Wavefunction*>& snapshots, const std::optional<MaskSpec>& mask = {},
                     unsigned workers = 1) {
  if (snapshots.empty()) throw DataError("purity: no snapshots");
  const auto states = detail::masked_states(snapshots, mask);
  const std::size_t n = states.size();
  const double dx = snapshots.front()->grid.dx();
  std::vector<cplx> gram(n * n);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) pairs.emplace_back(i, j);
  detail::parallel_for(pairs.size(), workers, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    gram[i * n + j] = overlap(states[i], states[j], dx);
  });
  double trace = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    trace += gram[i * n + i].real();
    for (std::size_t j = i; j < n; ++j) sq += (i == j ? 1.0 : 2.0) * std::norm(gram[i * n + j]);
  }
  if (!(trace > 0.0)) throw NumericalError("purity undefined for all-zero states");
  return sq / (trace * trace);
}

inline double purity(const std::vector<Wavefunction>& snapshots, const std::optional<MaskSpec>& mask = {},
                     unsigned workers = 1) {
  std::vector<const Wavefunction*> ptrs;
  for (const auto& s : snapshots) ptrs.push_back(&s);
  return purity(ptrs, mask, workers);
}

inline std::vector<const Wavefunction*> snapshots_at(const EnsembleRecord& rec, std::size_t probe) {
  std::vector<const Wavefunction*> out;
  for (const auto& r : rec.runs) {
    if (probe >= r.snapshots.size()) throw DataError("snapshot index beyond recorded probes");
    out.push_back(&r.snapshots[probe]);
  }
  return out;
}

struct PuritySeries {
  std::vector<double> times;
  std::vector<double> total;
  std::vector<double> photoelectron;
};

inline PuritySeries purity_series(const EnsembleRecord& rec, const MaskSpec& mask, unsigned workers = 1) {
  if (rec.runs.empty()) throw DataError("purity_series: empty record");
  PuritySeries out;
  const std::size_t nprobe = rec.runs.front().snapshots.size();
  for (std::size_t p = 0; p < nprobe; ++p) {
    const auto snaps = snapshots_at(rec, p);
    out.times.push_back(snaps.front()->time);
    out.total.push_back(purity(snaps, std::nullopt, workers));
    out.photoelectron.push_back(purity(snaps, mask, workers));
  }
  return out;
}

struct MapRegion {
  double x_lo = -100.0;
  double x_hi = 100.0;
  std::size_t stride = 1;
};

/// |rho(x, x')|^2 with rho = (1/N) sum psi_i(x) psi_i*(x') on a strided subgrid.
inline SpectralMap density_matrix_map(const std::vector<const Wavefunction*>& snapshots,
                                      const std::optional<MaskSpec>& mask, const MapRegion& region) {
  if (snapshots.empty()) throw DataError("density_matrix_map: no snapshots");
  const Grid& g = snapshots.front()->grid;
  if (region.x_lo < g.x_min || region.x_hi > g.x_max || !(region.x_hi > region.x_lo) || region.stride == 0)
    throw DataError("density_matrix_map: region outside the grid");
  const auto states = detail::masked_states(snapshots, mask);
  std::vector<std::size_t> idx;
  std::vector<double> xs;
  for (std::size_t j = 0; j < g.n; j += region.stride) {
    const double x = g.x(j);
    if (x >= region.x_lo && x <= region.x_hi) {
      idx.push_back(j);
      xs.push_back(x);
    }
  }
  SpectralMap map("x", xs, "x'", xs);
  const double inv = 1.0 / static_cast<double>(states.size());
  const std::size_t m = idx.size();
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      cplx rho = 0.0;
      for (const auto& s : states) rho += s[idx[a]] * std::conj(s[idx[b]]);
      const double v = std::norm(rho * inv);
      map.at(a, b) = v;
      map.at(b, a) = v;
    }
  return map;
}

/// rho(x, x, t) averaged over configurations at every probe time.
inline SpectralMap probability_density_map(const EnsembleRecord& rec, std::size_t x_stride = 1) {
  if (rec.runs.empty()) throw DataError("probability_density_map: empty record");
  const Grid& g = rec.grid;
  x_stride = std::max<std::size_t>(x_stride, 1);
  std::vector<double> xs;
  for (std::size_t j = 0; j < g.n; j += x_stride) xs.push_back(g.x(j));
  std::vector<double> ts;
  for (const auto& s : rec.runs.front().snapshots) ts.push_back(s.time);
  SpectralMap map("t", ts, "x", xs);
  const double inv = 1.0 / static_cast<double>(rec.runs.size());
  for (std::size_t p = 0; p < ts.size(); ++p)
    for (const auto& r : rec.runs) {
      if (r.snapshots.size() != ts.size()) throw DataError("probability_density_map: misaligned snapshots");
      for (std::size_t c = 0; c < xs.size(); ++c) map.at(p, c) += std::norm(r.snapshots[p][c * x_stride]) * inv;
    }
  return map;
}

}  // namespace hhgdis
