#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>

namespace hhgdis {

namespace detail {
// FFTW planning is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// In-place complex transform over an owned, SIMD-aligned buffer.
/// Forward is unnormalized e^{-ikx}; backward applies the 1/n factor.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    buf_ = fftw_alloc_complex(n);
    if (!buf_) throw std::bad_alloc();
    std::lock_guard lock(detail::fftw_planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  Fft(const Fft& other) : Fft(other.n_) {}
  Fft& operator=(const Fft&) = delete;

  ~Fft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  std::size_t size() const { return n_; }

  std::span<std::complex<double>> data() { return {reinterpret_cast<std::complex<double>*>(buf_), n_}; }
  std::span<const std::complex<double>> data() const {
    return {reinterpret_cast<const std::complex<double>*>(buf_), n_};
  }

  void forward() { fftw_execute(fwd_); }

  /// Inverse transform without the 1/n factor, for callers that fold it in.
  void backward_unscaled() { fftw_execute(bwd_); }

  void backward() {
    fftw_execute(bwd_);
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& c : data()) c *= s;
  }

 private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

}  // namespace hhgdis
