#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "hhgdis/error.hpp"
#include "hhgdis/fft.hpp"
#include "hhgdis/spectral_map.hpp"

namespace hhgdis {

/// One-sided magnitude spectrum on a harmonic-order axis. Magnitudes are
/// scaled so that sum(magnitude^2) equals sum(signal^2).
struct Spectrum {
  std::vector<double> order;
  std::vector<double> magnitude;

  double order_step() const { return order.size() > 1 ? order[1] - order[0] : 0.0; }
};

enum class Apodization { none, hann };

namespace detail {

inline double uniform_step(std::span<const double> times) {
  if (times.size() < 2) throw DataError("spectrum needs at least two samples");
  const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw DataError("time axis must be increasing");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - times[k - 1] - dt) > 1e-6 * dt) throw DataError("non-uniform time sampling");
  return dt;
}

}  // namespace detail

inline Spectrum hhg_spectrum(std::span<const double> times, std::span<const double> signal, double omega,
                             Apodization apod = Apodization::none) {
  if (times.size() != signal.size()) throw DataError("hhg_spectrum: time and signal lengths differ");
  const double dt = detail::uniform_step(times);
  const std::size_t n = signal.size();
  Fft fft(n);
  auto buf = fft.data();
  for (std::size_t k = 0; k < n; ++k) {
    double w = 1.0;
    if (apod == Apodization::hann) {
      const double s = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n - 1));
      w = s * s;
    }
    buf[k] = signal[k] * w;
  }
  fft.forward();
  Spectrum out;
  const std::size_t half = n / 2;
  const double df = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  for (std::size_t k = 0; k <= half; ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == half);
    const double weight = (edge ? 1.0 : 2.0) / static_cast<double>(n);
    out.order.push_back(static_cast<double>(k) * df / omega);
    out.magnitude.push_back(std::abs(buf[k]) * std::sqrt(weight));
  }
  return out;
}

/// cos^4(pi t / T_w) on |t| < T_w / 2.
inline double gabor_window(double t, double width) {
  if (std::abs(t) >= 0.5 * width) return 0.0;
  const double c = std::cos(std::numbers::pi * t / width);
  return c * c * c * c;
}

/// |integral d(t) w(tau - t) e^{-i omega t} dt| for tau on the given grid and
/// frequencies on the signal's native grid up to `max_order`.
inline SpectralMap gabor(std::span<const double> times, std::span<const double> signal, double window_width,
                         std::span<const double> taus, double omega, double max_order) {
  if (!(window_width > 0.0)) throw DataError("gabor: window duration must be positive");
  const double dt = detail::uniform_step(times);
  const std::size_t n = signal.size();
  const double df = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
  std::vector<double> orders;
  for (std::size_t k = 0; k <= n / 2 && static_cast<double>(k) * df / omega <= max_order; ++k)
    orders.push_back(static_cast<double>(k) * df / omega);
  SpectralMap map("tau", std::vector<double>(taus.begin(), taus.end()), "order", orders);
  Fft fft(n);
  auto buf = fft.data();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) buf[k] = signal[k] * gabor_window(taus[i] - times[k], window_width);
    fft.forward();
    for (std::size_t c = 0; c < orders.size(); ++c) map.at(i, c) = std::abs(buf[c]) * dt;
  }
  return map;
}

inline std::vector<double> uniform_taus(double t_begin, double t_end, double stride) {
  std::vector<double> out;
  for (double t = t_begin; t <= t_end + 1e-9 * stride; t += stride) out.push_back(t);
  return out;
}

/// Largest magnitude strictly inside (q - 1/2, q + 1/2) for each order q.
inline std::vector<double> harmonic_peaks(const Spectrum& s, std::span<const int> orders) {
  std::vector<double> out;
  for (int q : orders) {
    double best = 0.0;
    for (std::size_t k = 0; k < s.order.size(); ++k)
      if (s.order[k] > q - 0.5 && s.order[k] < q + 0.5) best = std::max(best, s.magnitude[k]);
    out.push_back(best);
  }
  return out;
}

inline double harmonic_peak(const Spectrum& s, int q) {
  const int o[1] = {q};
  return harmonic_peaks(s, o).front();
}

struct OrderBand {
  int lo = 21;
  int hi = 227;

  friend bool operator==(const OrderBand&, const OrderBand&) = default;
};

/// Mean even-order peak divided by mean odd-order peak over the band.
inline double parity_contrast(const Spectrum& s, OrderBand band) {
  double even = 0.0, odd = 0.0;
  int ne = 0, no = 0;
  for (int q = band.lo; q <= band.hi; ++q) {
    const double p = harmonic_peak(s, q);
    if (q % 2 == 0) {
      even += p;
      ++ne;
    } else {
      odd += p;
      ++no;
    }
  }
  if (ne < 2 || no < 2) throw DataError("parity_contrast: band needs at least two odd and two even orders");
  return (even / ne) / (odd / no);
}

enum class PeakSelection { odd, all };

inline double plateau_statistics(const Spectrum& s, OrderBand band, PeakSelection sel = PeakSelection::odd) {
  double sum = 0.0;
  int count = 0;
  for (int q = band.lo; q <= band.hi; ++q) {
    if (sel == PeakSelection::odd && q % 2 == 0) continue;
    sum += harmonic_peak(s, q);
    ++count;
  }
  if (count == 0) throw DataError("plateau_statistics: empty band");
  return sum / count;
}

/// log10 magnitude averaged over all bins within one order of q; the window
/// spans one odd and one even region so parity does not bias it.
inline double smoothed_log_magnitude(const Spectrum& s, double q) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < s.order.size(); ++k)
    if (std::abs(s.order[k] - q) <= 1.0) {
      sum += std::log10(std::max(s.magnitude[k], std::numeric_limits<double>::min()));
      ++count;
    }
  return count ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

/// First order >= start_order at which the smoothed log-magnitude falls by at
/// least `decades` within the next `span` orders. NaN when no such knee exists.
inline double cutoff_order(const Spectrum& s, double start_order, double decades = 1.0, int span = 4) {
  const double top = s.order.empty() ? 0.0 : s.order.back();
  for (int q = static_cast<int>(std::ceil(start_order)); q + span + 1 <= top; ++q)
    if (smoothed_log_magnitude(s, q) - smoothed_log_magnitude(s, q + span) >= decades) return q;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace hhgdis
