#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "hhgdis/purity_fit.hpp"
#include "hhgdis/spectra.hpp"

using namespace hhgdis;
using Catch::Approx;

namespace {

constexpr double kOmega = 0.057;

struct Series {
  std::vector<double> t, d;
};

template <class F>
Series sample(F&& f, int cycles, int per_cycle) {
  Series s;
  const double T = 2 * std::numbers::pi / kOmega;
  const int n = cycles * per_cycle;
  for (int k = 0; k < n; ++k) {
    const double t = k * T / per_cycle;
    s.t.push_back(t);
    s.d.push_back(f(t));
  }
  return s;
}

}  // namespace

TEST_CASE("Parseval normalization") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N;
  for (int n : {255, 256}) {
    std::vector<double> t(n), d(n);
    double e = 0.0;
    for (int k = 0; k < n; ++k) {
      t[k] = 0.1 * k;
      d[k] = N(rng);
      e += d[k] * d[k];
    }
    const auto s = hhg_spectrum(t, d, 1.0);
    double es = 0.0;
    for (double m : s.magnitude) es += m * m;
    CHECK(es == Approx(e).epsilon(1e-10));
  }
}

TEST_CASE("pure tone") {
  const auto s = sample([](double t) { return 3.0 * std::cos(kOmega * t); }, 16, 64);
  const auto sp = hhg_spectrum(s.t, s.d, kOmega);
  std::size_t best = 0;
  for (std::size_t k = 1; k < sp.magnitude.size(); ++k)
    if (sp.magnitude[k] > sp.magnitude[best]) best = k;
  CHECK(sp.order[best] == Approx(1.0));
  CHECK(sp.order_step() == Approx(1.0 / 16));
  const double amp = 3.0 * std::sqrt(s.d.size() / 2.0);
  CHECK(harmonic_peak(sp, 1) == Approx(amp).epsilon(1e-12));
  CHECK(harmonic_peak(sp, 5) < 1e-10 * amp);
  for (auto m : sp.magnitude) CHECK(m >= 0.0);
}

TEST_CASE("non-uniform sampling is rejected") {
  std::vector<double> t{0.0, 1.0, 2.5, 3.0}, d{1, 2, 3, 4};
  CHECK_THROWS_AS(hhg_spectrum(t, d, 1.0), DataError);
  CHECK_THROWS_AS(hhg_spectrum(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0}, 1.0), DataError);
}

TEST_CASE("half-period antisymmetry kills even orders") {
  // d(t + T/2) = -d(t): only odd harmonics
  const auto s = sample(
      [](double t) { return std::sin(kOmega * t) + 0.3 * std::sin(3 * kOmega * t + 0.2) + 0.1 * std::cos(7 * kOmega * t); },
      12, 128);
  const auto sp = hhg_spectrum(s.t, s.d, kOmega);
  const double c = parity_contrast(sp, {1, 8});
  CHECK(c < 1e-12);
  Series scaled = s;
  for (auto& x : scaled.d) x *= 1e-5;
  // add a weak even harmonic so the contrast is finite, then check scale invariance
  auto with_even = sample([](double t) { return std::sin(kOmega * t) + 0.05 * std::sin(2 * kOmega * t); }, 12, 128);
  auto we_scaled = with_even;
  for (auto& x : we_scaled.d) x *= 1e-5;
  const double c1 = parity_contrast(hhg_spectrum(with_even.t, with_even.d, kOmega), {1, 4});
  const double c2 = parity_contrast(hhg_spectrum(we_scaled.t, we_scaled.d, kOmega), {1, 4});
  CHECK(c1 == Approx(c2).epsilon(1e-10));
  CHECK(c1 > 1e-3);
  CHECK_THROWS_AS(parity_contrast(sp, {3, 4}), DataError);
}

TEST_CASE("flat comb plateau statistics") {
  const auto s = sample(
      [](double t) {
        double v = 0.0;
        for (int q = 1; q <= 15; q += 2) v += std::cos(q * kOmega * t);
        return v;
      },
      8, 128);
  const auto sp = hhg_spectrum(s.t, s.d, kOmega);
  const double h = harmonic_peak(sp, 3);
  CHECK(plateau_statistics(sp, {3, 13}, PeakSelection::odd) == Approx(h).epsilon(1e-10));
  CHECK(plateau_statistics(sp, {3, 13}, PeakSelection::all) == Approx(h * 6.0 / 11.0).epsilon(1e-6));
}

TEST_CASE("cutoff knee") {
  Spectrum s;
  for (int k = 0; k <= 2000; ++k) {
    const double q = 0.05 * k;
    // odd comb over a floor, ending in an exponential fall of half a decade per order past 40
    const double comb = std::abs(q - 2 * std::round((q - 1) / 2) - 1) < 0.1 ? 1.0 : 1e-2;
    const double fall = q > 40 ? std::pow(10.0, -0.5 * (q - 40)) : 1.0;
    s.order.push_back(q);
    s.magnitude.push_back(comb * fall);
  }
  const double knee = cutoff_order(s, 10.0);
  CHECK(knee >= 36.0);
  CHECK(knee <= 40.0);
  Spectrum flat{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, std::vector<double>(11, 1.0)};
  CHECK(std::isnan(cutoff_order(flat, 1.0)));
}

TEST_CASE("Gabor transform ridges") {
  const double T = 2 * std::numbers::pi / kOmega;
  SECTION("two tones give horizontal ridges") {
    const auto s = sample([](double t) { return std::cos(5 * kOmega * t) + std::cos(11 * kOmega * t); }, 8, 256);
    const auto taus = uniform_taus(2 * T, 6 * T, T / 4);
    const auto m = gabor(s.t, s.d, 2.0 * T, taus, kOmega, 20);
    const double df = m.cols[1] - m.cols[0];
    for (std::size_t i = 0; i < taus.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t c = 0; c < m.cols.size(); ++c)
        if (m.at(i, c) > m.at(i, best)) best = c;
      const bool at5 = std::abs(m.cols[best] - 5) <= df, at11 = std::abs(m.cols[best] - 11) <= df;
      CHECK((at5 || at11));
    }
  }
  SECTION("a burst gives a vertical ridge at its time") {
    const double tb = 4.0 * T;
    const auto s = sample([&](double t) { return std::exp(-std::pow((t - tb) / 5.0, 2)) * std::cos(20 * kOmega * t); }, 8, 256);
    const auto taus = uniform_taus(0.0, 8 * T, T / 64);
    const auto m = gabor(s.t, s.d, 0.35 * T, taus, kOmega, 40);
    std::size_t c20 = 0;
    for (std::size_t c = 0; c < m.cols.size(); ++c)
      if (std::abs(m.cols[c] - 20) < std::abs(m.cols[c20] - 20)) c20 = c;
    std::size_t best = 0;
    for (std::size_t i = 0; i < taus.size(); ++i)
      if (m.at(i, c20) > m.at(best, c20)) best = i;
    CHECK(std::abs(taus[best] - tb) <= T / 64);
    for (double v : m.values) CHECK(v >= 0.0);
  }
  CHECK(gabor_window(0.0, 1.0) == 1.0);
  CHECK(gabor_window(0.5, 1.0) == 0.0);
  CHECK(gabor_window(0.25, 1.0) == Approx(0.25));
  std::vector<double> t{0, 1, 2}, d{1, 1, 1}, taus{1};
  CHECK_THROWS_AS(gabor(t, d, 0.0, taus, 1.0, 1.0), DataError);
}

TEST_CASE("purity fit recovers the generating parameters") {
  std::vector<double> t, p;
  for (int k = 0; k <= 200; ++k) {
    t.push_back(5.0 + 0.1 * k);
    p.push_back(purity_model(t.back(), 0.5, 3.0, 5.0));
  }
  const auto f = fit_purity_decay(t, p);
  CHECK(f.gamma == Approx(0.5).margin(1e-6));
  CHECK(f.t_star == Approx(3.0).margin(1e-6));
  CHECK(f.t0 == Approx(5.0).margin(1e-6));
  CHECK(f.residual_rms < 1e-9);
  CHECK_FALSE(f.degenerate);

  // idempotence: refit the fitted curve
  std::vector<double> q;
  for (double x : t) q.push_back(purity_model(x, f.gamma, f.t_star, f.t0));
  const auto g = fit_purity_decay(t, q);
  CHECK(g.gamma == Approx(f.gamma).margin(1e-8));
  CHECK(g.t_star == Approx(f.t_star).margin(1e-8));
  CHECK(g.t0 == Approx(f.t0).margin(1e-8));
}

TEST_CASE("purity fit with noise and windows") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N(0.0, 1e-3);
  std::vector<double> t, p;
  for (int k = 0; k <= 300; ++k) {
    t.push_back(0.1 * k);
    p.push_back(k < 60 ? 1.0 : purity_model(t.back(), 0.98, 2.65, 6.28) + N(rng));
  }
  const auto f = fit_purity_decay(t, p, {6.5, 30.0});
  CHECK(f.gamma == Approx(0.98).margin(0.01));
  CHECK(f.t_star == Approx(2.65).margin(0.1));
  CHECK(f.gamma <= 1.0);
  CHECK(f.residual_rms < 2e-3);
}

TEST_CASE("degenerate purity series") {
  std::vector<double> t{0, 1, 2, 3}, p{1, 1, 1, 1};
  const auto f = fit_purity_decay(t, p);
  CHECK(f.degenerate);
  CHECK(f.gamma == 0.0);
  CHECK_THROWS_AS(fit_purity_decay(t, p, {10.0, 20.0}), DataError);
}
