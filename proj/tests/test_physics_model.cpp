#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hhgdis/physics_model.hpp"
#include "hhgdis/units.hpp"

using namespace hhgdis;
using Catch::Approx;

TEST_CASE("trapezoid envelope") {
  LaserParams L;
  const double T = L.period();
  CHECK(envelope(0.0, L) == 0.0);
  CHECK(envelope(T, L) == Approx(0.5).margin(1e-15));
  CHECK(envelope(5 * T, L) == 1.0);
  CHECK(envelope(14 * T, L) == Approx(0.5).margin(1e-14));
  CHECK(envelope(15 * T, L) == Approx(0.0).margin(1e-14));
  CHECK(envelope(16 * T, L) == 0.0);
  CHECK(envelope(-1.0, L) == 0.0);
  double mx = 0.0;
  for (int k = 0; k <= 15000; ++k) mx = std::max(mx, std::abs(envelope(k * T / 1000.0, L)));
  CHECK(mx == 1.0);
  // continuity at the ramp corners
  for (double c : {2.0, 13.0})
    CHECK(std::abs(envelope(c * T + 1e-9, L) - envelope(c * T - 1e-9, L)) < 1e-9);
}

TEST_CASE("laser field") {
  LaserParams L;
  const double T = L.period();
  CHECK(field_at(0.0, L) == 0.0);
  CHECK(field_at(5.25 * T, L) == Approx(L.field).epsilon(1e-12));
  CHECK(field_at(16 * T, L) == 0.0);
  CHECK(L.duration() == Approx(15 * T));
  CHECK(quiver_radius(L) == Approx(77.48).epsilon(1e-3));
}

TEST_CASE("soft-Coulomb atom") {
  AtomParams A;
  CHECK(potential_atom(0.0, A) == Approx(-1.0 / std::sqrt(0.4837)));
  CHECK(potential_atom(0.0, A) == Approx(-1.4378).epsilon(1e-4));
  CHECK(potential_atom(1e4, A) == Approx(-1e-4).epsilon(1e-8));
  CHECK(potential_atom(3.3, A) == potential_atom(-3.3, A));
}

TEST_CASE("perturber wells") {
  PerturberParams P;
  EnvironmentConfig one{{3.0}};
  CHECK(potential_env(3.0, one, P) == Approx(-0.8));
  PerturberParams gas{0.0, 0.5};
  EnvironmentConfig pair{{-10.0, 10.0}};
  for (double x : {-12.0, 0.0, 10.0}) CHECK(potential_env(x, pair, gas) == 0.0);
  CHECK(std::abs(potential_env(0.0, pair, P)) < 1e-80);
  // translation covariance
  EnvironmentConfig shifted{{-10.0 + 2.5, 10.0 + 2.5}};
  for (double x : {-7.0, 0.3, 11.1}) CHECK(potential_env(x + 2.5, shifted, P) == Approx(potential_env(x, pair, P)));
  CHECK(pair.valid());
  CHECK_FALSE(EnvironmentConfig{{1.0, 2.0}}.valid());
  CHECK_FALSE(EnvironmentConfig{{-1.0, 0.5, 2.0}}.valid());
}

TEST_CASE("gradients match centered differences") {
  AtomParams A;
  PerturberParams P;
  EnvironmentConfig env{{-21.0, -9.5, 9.7, 20.2}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  const double h = 1e-4;
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    const double fa = (potential_atom(x + h, A) - potential_atom(x - h, A)) / (2 * h);
    CHECK(gradient_atom(x, A) == Approx(fa).epsilon(1e-6));
    const double ca = (gradient_atom(x + h, A) - gradient_atom(x - h, A)) / (2 * h);
    CHECK(curvature_atom(x, A) == Approx(ca).epsilon(1e-6).margin(1e-12));
    const double fe = (potential_env(x + h, env, P) - potential_env(x - h, env, P)) / (2 * h);
    CHECK(gradient_env(x, env, P) == Approx(fe).epsilon(1e-6).margin(1e-12));
  }
}

TEST_CASE("ponderomotive scale and cutoff") {
  LaserParams L;
  CHECK(ponderomotive_energy(L) == Approx(2.906).epsilon(1e-3));
  CHECK(cutoff_harmonic(L, 0.90) == Approx(230).margin(1.5));
  LaserParams weak = L;
  weak.field = 1e-12;
  CHECK(ponderomotive_energy(weak) == Approx(0.0).margin(1e-20));
}

TEST_CASE("validation rejects bad parameters") {
  LaserParams L;
  L.omega = 0.0;
  CHECK_THROWS_AS(L.validate(), ConfigError);
  CHECK_THROWS_AS((PerturberParams{-0.1, 0.5}.validate()), ConfigError);
  CHECK_THROWS_AS(AtomParams{0.0}.validate(), ConfigError);
}

TEST_CASE("unit conversions") {
  CHECK(units::omega_from_wavelength_nm(800.0) == Approx(0.05695).epsilon(1e-3));
  CHECK(units::omega_from_wavelength_nm(1030.0) == Approx(0.0442).epsilon(2e-3));
  CHECK(units::wavelength_nm_from_omega(units::omega_from_wavelength_nm(1030.0)) == Approx(1030.0));
  CHECK(units::field_from_intensity(3.5094475e16) == Approx(1.0));
  CHECK(units::fs_from_au(units::au_from_fs(7.43)) == Approx(7.43));
}
