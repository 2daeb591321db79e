#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "hhgdis/ensemble.hpp"
#include "hhgdis/env_sampler.hpp"
#include "hhgdis/error.hpp"
#include "hhgdis/grid.hpp"
#include "hhgdis/physics_model.hpp"
#include "hhgdis/spectra.hpp"
#include "hhgdis/tdse.hpp"
#include "hhgdis/units.hpp"

namespace hhgdis {

/// Everything a pipeline run needs. Laser values are stored in atomic units;
/// wavelength and intensity keys are converted while parsing.
struct RunConfig {
  LaserParams laser;
  AtomParams atom;
  PerturberParams perturbers;
  // n_p = 0 selects the coverage default for the laser and spacing.
  StructureParams structure{10.0, 1.0, 0};
  std::size_t n_c = 1000;
  std::uint64_t master_seed = 1;
  int probes_per_cycle = 8;
  int record_stride = 4;
  Grid grid;
  PropagatorSettings propagator;
  std::string out_dir = "out";
  MaskSpec mask;
  // Gabor window in laser periods and the tau stride as a fraction of T_L.
  double gabor_window = 0.35;
  int gabor_steps_per_cycle = 64;
  double gabor_max_order = 300.0;
  OrderBand band;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ParseContext {
  std::string section;
  std::string key;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line) + ": [" + section + "] " + key + ": " + what);
  }
};

inline double to_double(const std::string& v, const ParseContext& c) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    c.fail("expected a number, got '" + v + "'");
  }
  if (used != v.size() || !std::isfinite(out)) c.fail("expected a number, got '" + v + "'");
  return out;
}

inline long long to_integer(const std::string& v, const ParseContext& c) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    c.fail("expected an integer, got '" + v + "'");
  }
  if (used != v.size()) c.fail("expected an integer, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& v, const ParseContext& c) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  c.fail("expected true or false, got '" + v + "'");
}

struct KeySpec {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&, const ParseContext&)> set;
  std::function<std::string(const RunConfig&)> get;  // empty for alias keys
};

inline double positive(double v, const ParseContext& c) {
  if (!(v > 0.0)) c.fail("must be positive");
  return v;
}
inline double nonnegative(double v, const ParseContext& c) {
  if (!(v >= 0.0)) c.fail("must be >= 0");
  return v;
}
inline int cycles(long long v, const ParseContext& c) {
  if (v < 0 || v > 10000) c.fail("must be between 0 and 10000");
  return static_cast<int>(v);
}

inline const std::vector<KeySpec>& key_table() {
  using C = ParseContext;
  static const std::vector<KeySpec> table = {
      {"laser", "F_L", [](RunConfig& r, const std::string& v, const C& c) { r.laser.field = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.laser.field); }},
      {"laser", "intensity_w_cm2",
       [](RunConfig& r, const std::string& v, const C& c) {
         r.laser.field = units::field_from_intensity(positive(to_double(v, c), c));
       },
       {}},
      {"laser", "omega", [](RunConfig& r, const std::string& v, const C& c) { r.laser.omega = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.laser.omega); }},
      {"laser", "wavelength_nm",
       [](RunConfig& r, const std::string& v, const C& c) {
         r.laser.omega = units::omega_from_wavelength_nm(positive(to_double(v, c), c));
       },
       {}},
      {"laser", "n_up", [](RunConfig& r, const std::string& v, const C& c) { r.laser.n_up = cycles(to_integer(v, c), c); },
       [](const RunConfig& r) { return std::to_string(r.laser.n_up); }},
      {"laser", "n_plateau",
       [](RunConfig& r, const std::string& v, const C& c) { r.laser.n_plateau = cycles(to_integer(v, c), c); },
       [](const RunConfig& r) { return std::to_string(r.laser.n_plateau); }},
      {"laser", "n_down", [](RunConfig& r, const std::string& v, const C& c) { r.laser.n_down = cycles(to_integer(v, c), c); },
       [](const RunConfig& r) { return std::to_string(r.laser.n_down); }},

      {"atom", "softening",
       [](RunConfig& r, const std::string& v, const C& c) { r.atom.softening = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.atom.softening); }},

      {"environment", "A_E",
       [](RunConfig& r, const std::string& v, const C& c) { r.perturbers.depth = nonnegative(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.perturbers.depth); }},
      {"environment", "sigma_E",
       [](RunConfig& r, const std::string& v, const C& c) { r.perturbers.width = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.perturbers.width); }},
      {"environment", "a", [](RunConfig& r, const std::string& v, const C& c) { r.structure.a = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.structure.a); }},
      {"environment", "sigma",
       [](RunConfig& r, const std::string& v, const C& c) { r.structure.sigma = nonnegative(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.structure.sigma); }},
      {"environment", "n_p",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 0 || n % 2 != 0 || n > 100000) c.fail("must be an even count (0 selects the default)");
         r.structure.n_p = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.structure.n_p); }},

      {"grid", "x_min", [](RunConfig& r, const std::string& v, const C& c) { r.grid.x_min = to_double(v, c); },
       [](const RunConfig& r) { return fmt17(r.grid.x_min); }},
      {"grid", "x_max", [](RunConfig& r, const std::string& v, const C& c) { r.grid.x_max = to_double(v, c); },
       [](const RunConfig& r) { return fmt17(r.grid.x_max); }},
      {"grid", "n",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 8 || n > (1LL << 26)) c.fail("must be between 8 and 2^26");
         r.grid.n = static_cast<std::size_t>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.grid.n); }},
      {"grid", "dt", [](RunConfig& r, const std::string& v, const C& c) { r.propagator.dt = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.propagator.dt); }},
      {"grid", "absorber", [](RunConfig& r, const std::string& v, const C& c) { r.propagator.absorber = to_bool(v, c); },
       [](const RunConfig& r) { return std::string(r.propagator.absorber ? "true" : "false"); }},
      {"grid", "absorber_fraction",
       [](RunConfig& r, const std::string& v, const C& c) {
         const double f = to_double(v, c);
         if (!(f >= 0.0 && f < 0.5)) c.fail("must lie in [0, 0.5)");
         r.propagator.absorber_fraction = f;
       },
       [](const RunConfig& r) { return fmt17(r.propagator.absorber_fraction); }},

      {"ensemble", "n_c",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 1) c.fail("must be >= 1");
         r.n_c = static_cast<std::size_t>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.n_c); }},
      {"ensemble", "master_seed",
       [](RunConfig& r, const std::string& v, const C& c) {
         std::size_t used = 0;
         try {
           r.master_seed = std::stoull(v, &used);
         } catch (const std::exception&) {
           used = 0;
         }
         if (used != v.size() || v.empty() || v[0] == '-') c.fail("expected an unsigned integer, got '" + v + "'");
       },
       [](const RunConfig& r) { return std::to_string(r.master_seed); }},
      {"ensemble", "probes_per_cycle",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 0 || n > 4096) c.fail("must be between 0 and 4096");
         r.probes_per_cycle = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.probes_per_cycle); }},
      {"ensemble", "record_stride",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 1 || n > 1000000) c.fail("must be >= 1");
         r.record_stride = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.record_stride); }},

      {"output", "dir",
       [](RunConfig& r, const std::string& v, const C& c) {
         if (v.empty()) c.fail("must not be empty");
         r.out_dir = v;
       },
       [](const RunConfig& r) { return r.out_dir; }},
      {"output", "mask_radius",
       [](RunConfig& r, const std::string& v, const C& c) { r.mask.radius = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.mask.radius); }},
      {"output", "mask_width",
       [](RunConfig& r, const std::string& v, const C& c) { r.mask.width = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.mask.width); }},
      {"output", "gabor_window",
       [](RunConfig& r, const std::string& v, const C& c) { r.gabor_window = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.gabor_window); }},
      {"output", "gabor_steps_per_cycle",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 1 || n > 100000) c.fail("must be >= 1");
         r.gabor_steps_per_cycle = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.gabor_steps_per_cycle); }},
      {"output", "gabor_max_order",
       [](RunConfig& r, const std::string& v, const C& c) { r.gabor_max_order = positive(to_double(v, c), c); },
       [](const RunConfig& r) { return fmt17(r.gabor_max_order); }},
      {"output", "band_lo",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 1) c.fail("must be >= 1");
         r.band.lo = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.band.lo); }},
      {"output", "band_hi",
       [](RunConfig& r, const std::string& v, const C& c) {
         const auto n = to_integer(v, c);
         if (n < 1) c.fail("must be >= 1");
         r.band.hi = static_cast<int>(n);
       },
       [](const RunConfig& r) { return std::to_string(r.band.hi); }},
  };
  return table;
}

inline bool known_section(const std::string& s) {
  for (const auto& k : key_table())
    if (s == k.section) return true;
  return false;
}

}  // namespace detail

/// Cross-field checks that single keys cannot express.
inline void validate(const RunConfig& r) {
  if (!(r.grid.x_max > r.grid.x_min)) throw ConfigError("[grid] x_max must exceed x_min");
  if (r.band.hi < r.band.lo + 3) throw ConfigError("[output] band_hi must be at least band_lo + 3");
  r.laser.validate();
  r.atom.validate();
  r.perturbers.validate();
  r.grid.validate();
  r.mask.validate();
}

/// key = value lines under [section] headers; '#' and ';' start comments.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  detail::ParseContext ctx;
  std::string raw;
  bool seen_field = false, seen_intensity = false, seen_omega = false, seen_wavelength = false;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++ctx.line;
    ctx.key.clear();
    std::string line = raw;
    if (const auto h = line.find_first_of("#;"); h != std::string::npos) line.erase(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(ctx.line) + ": unterminated section header");
      ctx.section = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::known_section(ctx.section))
        throw ConfigError("line " + std::to_string(ctx.line) + ": unknown section [" + ctx.section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(ctx.line) + ": expected 'key = value'");
    ctx.key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (ctx.section.empty())
      throw ConfigError("line " + std::to_string(ctx.line) + ": key '" + ctx.key + "' outside any section");
    const detail::KeySpec* spec = nullptr;
    for (const auto& k : detail::key_table())
      if (ctx.section == k.section && ctx.key == k.key) spec = &k;
    if (!spec) ctx.fail("unknown key");
    const std::string full = ctx.section + "." + ctx.key;
    for (const auto& s : seen)
      if (s == full) ctx.fail("duplicate key");
    seen.push_back(full);
    if (ctx.section == "laser") {
      seen_field |= ctx.key == "F_L";
      seen_intensity |= ctx.key == "intensity_w_cm2";
      seen_omega |= ctx.key == "omega";
      seen_wavelength |= ctx.key == "wavelength_nm";
      if (seen_field && seen_intensity) ctx.fail("give either F_L or intensity_w_cm2, not both");
      if (seen_omega && seen_wavelength) ctx.fail("give either omega or wavelength_nm, not both");
    }
    spec->set(cfg, value, ctx);
  }
  validate(cfg);
  return cfg;
}

inline RunConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

/// Canonical text form with every key, laser values in atomic units.
inline std::string render_config(const RunConfig& cfg) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : detail::key_table()) {
    if (!k.get) continue;
    if (section != k.section) {
      if (!section.empty()) os << '\n';
      section = k.section;
      os << '[' << section << "]\n";
    }
    os << k.key << " = " << k.get(cfg) << '\n';
  }
  return os.str();
}

inline int resolved_perturber_count(const RunConfig& cfg) {
  return cfg.structure.n_p > 0 ? cfg.structure.n_p : default_perturber_count(cfg.laser, cfg.structure.a);
}

inline EnsembleSpec make_ensemble_spec(const RunConfig& cfg) {
  EnsembleSpec s;
  s.n_c = cfg.n_c;
  s.master_seed = cfg.master_seed;
  s.structure = cfg.structure;
  s.structure.n_p = resolved_perturber_count(cfg);
  s.perturbers = cfg.perturbers;
  s.laser = cfg.laser;
  s.atom = cfg.atom;
  s.grid = cfg.grid;
  s.propagator = cfg.propagator;
  s.record_stride = cfg.record_stride;
  if (cfg.probes_per_cycle > 0) s.probe_times = uniform_probe_times(cfg.laser, cfg.probes_per_cycle);
  return s;
}

}  // namespace hhgdis
