#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hhgdis/error.hpp"
#include "hhgdis/physics_model.hpp"

namespace hhgdis {

/// Statistics of the perturber chain: gaps follow N(a, sigma^2) truncated to
/// [2a/3, 4a/3].
struct StructureParams {
  double a = 10.0;
  double sigma = 1.0;
  int n_p = 16;

  double gap_min() const { return 2.0 * a / 3.0; }
  double gap_max() const { return 4.0 * a / 3.0; }

  void validate() const {
    if (!(a > 0.0)) throw ConfigError("structure parameter a must be positive");
    if (!(sigma >= 0.0)) throw ConfigError("structure parameter sigma must be >= 0");
    if (n_p < 2 || n_p % 2 != 0) throw ConfigError("n_p must be an even integer >= 2");
  }

  friend bool operator==(const StructureParams&, const StructureParams&) = default;
};

/// Reproducible random stream keyed by (master_seed, stream_index).
class SeededRng {
 public:
  SeededRng(std::uint64_t master_seed, std::uint64_t stream_index)
      : master_seed_(master_seed), stream_index_(stream_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(stream_index), static_cast<std::uint32_t>(stream_index >> 32),
                      0x48484731u};
    engine_.seed(seq);
  }

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  double normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
};

/// Rejection sampling against the untruncated Gaussian; sigma = 0 returns a.
inline double sample_gap(SeededRng& rng, const StructureParams& s) {
  if (s.sigma == 0.0) return s.a;
  const double lo = s.gap_min();
  const double hi = s.gap_max();
  for (;;) {
    const double g = rng.normal(s.a, s.sigma);
    if (g >= lo && g <= hi) return g;
  }
}

/// Central pair straddling the origin first, then cumulative gaps outward.
inline EnvironmentConfig sample_configuration(SeededRng& rng, const StructureParams& s) {
  s.validate();
  const int half = s.n_p / 2;
  std::vector<double> left(half), right(half);
  left[0] = -sample_gap(rng, s);
  right[0] = sample_gap(rng, s);
  for (int k = 1; k < half; ++k) {
    left[k] = left[k - 1] - sample_gap(rng, s);
    right[k] = right[k - 1] + sample_gap(rng, s);
  }
  EnvironmentConfig config;
  config.positions.reserve(s.n_p);
  for (int k = half - 1; k >= 0; --k) config.positions.push_back(left[k]);
  for (int k = 0; k < half; ++k) config.positions.push_back(right[k]);
  return config;
}

inline std::vector<EnvironmentConfig> sample_configurations(std::uint64_t master_seed, std::size_t count,
                                                            const StructureParams& s) {
  std::vector<EnvironmentConfig> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SeededRng rng(master_seed, i);
    out.push_back(sample_configuration(rng, s));
  }
  return out;
}

/// Smallest even perturber count whose chain reaches +-(2 R_quiver + 3a).
inline int default_perturber_count(const LaserParams& laser, double a) {
  const double reach = 2.0 * quiver_radius(laser) + 3.0 * a;
  return 2 * static_cast<int>(std::ceil(reach / a));
}

struct PairHistogram {
  double bin_width = 0.0;
  std::vector<double> centers;
  // Mean number of pairs per configuration falling in each bin.
  std::vector<double> mass;
};

inline PairHistogram pair_correlation(const std::vector<EnvironmentConfig>& configs, double bin_width,
                                      double r_max) {
  if (configs.empty()) throw DataError("pair_correlation: no configurations supplied");
  if (!(bin_width > 0.0) || !(r_max > 0.0)) throw DataError("pair_correlation: bin width and r_max must be positive");
  const auto nbins = static_cast<std::size_t>(std::ceil(r_max / bin_width));
  PairHistogram h;
  h.bin_width = bin_width;
  h.centers.resize(nbins);
  h.mass.assign(nbins, 0.0);
  for (std::size_t b = 0; b < nbins; ++b) h.centers[b] = (b + 0.5) * bin_width;
  for (const auto& c : configs) {
    const auto& x = c.positions;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        const double r = std::abs(x[j] - x[i]);
        const auto b = static_cast<std::size_t>(r / bin_width);
        if (b < nbins) h.mass[b] += 1.0;
      }
  }
  const double inv = 1.0 / static_cast<double>(configs.size());
  for (auto& m : h.mass) m *= inv;
  return h;
}

// Plain-text configuration file: one header line then one configuration per line.
inline void write_configurations(std::ostream& os, const std::vector<EnvironmentConfig>& configs,
                                 const StructureParams& s, std::uint64_t master_seed) {
  os << "# a=" << std::setprecision(17) << s.a << " sigma=" << s.sigma << " n_p=" << s.n_p
     << " master_seed=" << master_seed << '\n';
  for (const auto& c : configs) {
    for (std::size_t k = 0; k < c.positions.size(); ++k) {
      if (k) os << ' ';
      os << std::setprecision(17) << c.positions[k];
    }
    os << '\n';
  }
}

struct ConfigurationFile {
  StructureParams structure;
  std::uint64_t master_seed = 0;
  std::vector<EnvironmentConfig> configs;
};

inline ConfigurationFile read_configurations(std::istream& is) {
  ConfigurationFile out;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      // Comment lines may carry key=value tokens; only the structure keys matter.
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const auto key = tok.substr(0, eq);
        const auto val = tok.substr(eq + 1);
        if (key == "a") out.structure.a = std::stod(val), header = true;
        else if (key == "sigma") out.structure.sigma = std::stod(val);
        else if (key == "n_p") out.structure.n_p = std::stoi(val);
        else if (key == "master_seed") out.master_seed = std::stoull(val);
      }
      continue;
    }
    std::istringstream ls(line);
    EnvironmentConfig c;
    double v;
    while (ls >> v) c.positions.push_back(v);
    out.configs.push_back(std::move(c));
  }
  if (!header) throw DataError("configuration file: missing header line");
  return out;
}

}  // namespace hhgdis
