#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "hhgdis/physics_model.hpp"
#include "hhgdis/tdse.hpp"

using namespace hhgdis;
using Catch::Approx;

namespace {

// Lowest eigenvalue of -1/2 d^2/dx^2 + V on a Dirichlet box, eighth-order
// central differences.
double fd_ground_energy(double half_width, double dx, const AtomParams& atom) {
  const int n = static_cast<int>(std::round(2 * half_width / dx)) - 1;
  const double c[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double x = -half_width + (i + 1) * dx;
    H(i, i) = -0.5 * c[0] / (dx * dx) + potential_atom(x, atom);
    for (int k = 1; k <= 4; ++k) {
      if (i + k < n) H(i, i + k) = H(i + k, i) = -0.5 * c[k] / (dx * dx);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

GroundState atom_ground_state(const Grid& g, const AtomParams& atom = {}) {
  return ground_state(g, [atom](double x) { return potential_atom(x, atom); });
}

HamiltonianParts free_hamiltonian(const Grid& g) {
  HamiltonianParts h;
  h.potential.assign(g.n, 0.0);
  h.gradient.assign(g.n, 0.0);
  return h;
}

double distance(const Wavefunction& a, const Wavefunction& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
  return std::sqrt(s * a.grid.dx());
}

Wavefunction evolve(const Grid& g, const GroundState& gs, const LaserParams& laser, double dt, double t_end) {
  PropagatorSettings set;
  set.dt = dt;
  set.absorber = false;
  const PropagatorPlan plan(g, set);
  Propagator prop(plan, make_hamiltonian(g, {}, {}, {0.0, 0.5}, laser_field(laser)));
  Wavefunction psi = gs.psi;
  const long long n = std::llround(t_end / dt);
  for (long long k = 0; k < n; ++k) prop.step(psi);
  return psi;
}

}  // namespace

TEST_CASE("ground state against finite-difference diagonalization") {
  const Grid g{-60.0, 60.0, 1024};
  const auto gs = atom_ground_state(g);
  const double oracle = fd_ground_energy(30.0, 0.05, {});
  INFO("spectral " << gs.energy << " fd " << oracle);
  CHECK(gs.energy == Approx(-0.90).margin(0.005));
  CHECK(std::abs(gs.energy - oracle) < 1e-4);
  CHECK(norm(gs.psi) == Approx(1.0).epsilon(1e-12));
  // even parity
  CHECK(position_expectation(gs.psi) == Approx(0.0).margin(1e-8));
}

TEST_CASE("harmonic oscillator ground state") {
  const Grid g{-20.0, 20.0, 256};
  const auto gs = ground_state(g, [](double x) { return 0.5 * x * x; });
  CHECK(gs.energy == Approx(0.5).epsilon(1e-6));
}

TEST_CASE("absorber mask") {
  const Grid g{-100.0, 100.0, 1000};
  const auto m = absorber_mask(g, 0.1);
  CHECK(m[500] == 1.0);
  CHECK(m[150] == 1.0);
  // cos^(1/8) stays near one until the very edge
  CHECK(m[0] < 0.02);
  CHECK(m[50] < 1.0);
  CHECK(m[0] < m[10]);
  for (std::size_t j = 1; j < 100; ++j) CHECK(m[j] >= m[j - 1]);
  const auto none = absorber_mask(g, 0.0);
  for (double v : none) CHECK(v == 1.0);
}

TEST_CASE("norm is conserved without absorber") {
  const Grid g{-100.0, 100.0, 1024};
  const auto gs = atom_ground_state(g);
  LaserParams laser{0.05, 0.057, 0, 1, 0};
  const auto psi = evolve(g, gs, laser, 0.05, laser.period());
  CHECK(std::abs(norm(psi) - 1.0) < 1e-8);
}

TEST_CASE("fourth-order global convergence") {
  const Grid g{-100.0, 100.0, 1024};
  const auto gs = atom_ground_state(g);
  LaserParams laser{0.05, 0.057, 0, 1, 0};
  const double T = 0.5 * laser.period();
  const auto ref = evolve(g, gs, laser, T / 4096, T);
  const auto coarse = evolve(g, gs, laser, T / 256, T);
  const auto fine = evolve(g, gs, laser, T / 512, T);
  const double factor = distance(coarse, ref) / distance(fine, ref);
  INFO("errors " << distance(coarse, ref) << " " << distance(fine, ref) << " factor " << factor);
  CHECK(factor > 12.0);
  CHECK(factor < 20.0);
}

TEST_CASE("free Gaussian packet dispersion") {
  const Grid g{-200.0, 200.0, 4096};
  const double w = 2.0, p0 = 1.0, x0 = -20.0;
  Wavefunction psi = gaussian_packet(g, x0, w, p0);
  PropagatorSettings set;
  set.dt = 0.05;
  set.absorber = false;
  const PropagatorPlan plan(g, set);
  Propagator prop(plan, free_hamiltonian(g));
  for (int k = 0; k < 400; ++k) prop.step(psi);
  const double t = 20.0;
  CHECK(psi.time == Approx(t));
  const double s2 = w * w + t * t / (4 * w * w);
  double err = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double d = g.x(j) - x0 - p0 * t;
    const double exact = std::exp(-d * d / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
    err = std::max(err, std::abs(std::norm(psi[j]) - exact));
  }
  CHECK(err < 1e-4);
  CHECK(std::abs(position_expectation(psi) - (x0 + p0 * t)) < 1e-10);
}

TEST_CASE("propagate records on the stride and snapshots at probes") {
  const Grid g{-100.0, 100.0, 512};
  const auto gs = atom_ground_state(g);
  LaserParams laser{0.05, 0.057, 1, 1, 1};
  PropagatorSettings set;
  set.dt = 0.1;
  const Schedule sched{0.0, laser.duration(), set.dt};
  set.dt = sched.effective_dt();
  const PropagatorPlan plan(g, set);
  Propagator prop(plan, make_hamiltonian(g, {}, {}, {0.0, 0.5}, laser_field(laser)));
  const double T = laser.period();
  const auto rec = prop.propagate(gs.psi, sched, {4, {0.0, T, 2 * T}});
  const auto n = sched.steps();
  CHECK(rec.times.size() == static_cast<std::size_t>(n / 4 + 1));
  CHECK(rec.times[1] == Approx(4 * set.dt));
  REQUIRE(rec.snapshots.size() == 3);
  CHECK(rec.snapshots[1].time == Approx(T).margin(set.dt));
  CHECK(rec.norm.front() == Approx(1.0));
  for (std::size_t k = 1; k < rec.norm.size(); ++k) CHECK(rec.norm[k] <= rec.norm[k - 1] + 1e-12);
  // field-free start: no force on the symmetric ground state
  CHECK(rec.acceleration.front() == Approx(0.0).margin(1e-10));
}

TEST_CASE("plan and state mismatches are rejected") {
  const Grid g{-50.0, 50.0, 256};
  const Grid other{-50.0, 50.0, 512};
  PropagatorSettings set;
  const PropagatorPlan plan(g, set);
  Propagator prop(plan, free_hamiltonian(g));
  CHECK_THROWS_AS(prop.propagate(gaussian_packet(other, 0.0, 1.0), {0.0, 1.0, set.dt}, {}), DataError);
  CHECK_THROWS_AS(prop.propagate(gaussian_packet(g, 0.0, 1.0), {0.0, 1.0, 0.03}, {}), DataError);
  CHECK_THROWS_AS(Propagator(plan, free_hamiltonian(other)), DataError);
}
