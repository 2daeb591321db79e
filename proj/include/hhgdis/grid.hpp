#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "hhgdis/error.hpp"

namespace hhgdis {

using cplx = std::complex<double>;

/// Uniform periodic grid x_j = x_min + j dx, j = 0..n-1, dx = (x_max - x_min)/n.
struct Grid {
  double x_min = -400.0;
  double x_max = 400.0;
  std::size_t n = 8192;

  double dx() const { return (x_max - x_min) / static_cast<double>(n); }
  double x(std::size_t j) const { return x_min + static_cast<double>(j) * dx(); }
  double length() const { return x_max - x_min; }
  double p_max() const { return std::numbers::pi / dx(); }

  /// Momentum of FFT bin k in standard (unshifted) order.
  double p(std::size_t k) const {
    const double dp = 2.0 * std::numbers::pi / length();
    const auto kk = static_cast<long long>(k);
    const auto nn = static_cast<long long>(n);
    return dp * static_cast<double>(kk < (nn + 1) / 2 ? kk : kk - nn);
  }

  std::vector<double> positions() const {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = x(j);
    return out;
  }

  void validate() const {
    if (n < 2) throw ConfigError("grid needs at least two points");
    if (!(x_max > x_min)) throw ConfigError("grid x_max must exceed x_min");
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

struct Wavefunction {
  Grid grid;
  std::vector<cplx> amplitudes;
  double time = 0.0;

  Wavefunction() = default;
  explicit Wavefunction(const Grid& g, double t = 0.0) : grid(g), amplitudes(g.n), time(t) {}

  std::size_t size() const { return amplitudes.size(); }
  cplx& operator[](std::size_t j) { return amplitudes[j]; }
  const cplx& operator[](std::size_t j) const { return amplitudes[j]; }
};

inline double norm(std::span<const cplx> psi, double dx) {
  double s = 0.0;
  for (const auto& c : psi) s += std::norm(c);
  return s * dx;
}

inline double norm(const Wavefunction& psi) { return norm(psi.amplitudes, psi.grid.dx()); }

inline cplx overlap(std::span<const cplx> a, std::span<const cplx> b, double dx) {
  cplx s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::conj(a[j]) * b[j];
  return s * dx;
}

inline cplx overlap(const Wavefunction& a, const Wavefunction& b) {
  if (a.grid != b.grid) throw DataError("overlap: wavefunctions on different grids");
  return overlap(a.amplitudes, b.amplitudes, a.grid.dx());
}

inline void normalize(Wavefunction& psi) {
  const double nrm = norm(psi);
  if (!(nrm > 0.0)) throw NumericalError("normalize: zero-norm state");
  const double s = 1.0 / std::sqrt(nrm);
  for (auto& c : psi.amplitudes) c *= s;
}

/// <x> divided by the current norm.
inline double position_expectation(const Wavefunction& psi) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const double w = std::norm(psi[j]);
    num += psi.grid.x(j) * w;
    den += w;
  }
  if (!(den > 0.0)) throw NumericalError("position expectation of a zero-norm state");
  return num / den;
}

inline Wavefunction gaussian_packet(const Grid& g, double center, double width, double momentum = 0.0) {
  Wavefunction psi(g);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double d = g.x(j) - center;
    psi[j] = std::exp(-d * d / (4.0 * width * width)) * std::polar(1.0, momentum * g.x(j));
  }
  normalize(psi);
  return psi;
}

}  // namespace hhgdis
