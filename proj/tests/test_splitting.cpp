#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numeric>

#include "hhgdis/splitting.hpp"

using namespace hhgdis;
using Mat = Eigen::MatrixXd;

namespace {

// exp(a_m h A) exp(b_{m-1} h B) ... exp(a_0 h A), rightmost applied first.
Mat compose(const SplittingScheme& s, const Mat& A, const Mat& B, double h) {
  Mat out = Mat::Identity(A.rows(), A.cols());
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    out = Mat((s.a[i] * h * A).exp()) * out;
    if (i < s.b.size()) out = Mat((s.b[i] * h * B).exp()) * out;
  }
  return out;
}

double local_error(const SplittingScheme& s, const Mat& A, const Mat& B, double h) {
  const Mat exact = (h * (A + B)).exp();
  return (compose(s, A, B, h) - exact).norm();
}

struct Pair {
  Mat A, B;
};

Pair test_pair() {
  // Harmonic-oscillator-like generators on a 6-dim space plus a coupling that
  // keeps [A, B] and the higher commutators nonzero.
  Mat A = Mat::Zero(6, 6), B = Mat::Zero(6, 6);
  for (int k = 0; k < 6; ++k)
    for (int j = 0; j < 6; ++j) {
      A(k, j) = std::sin(1.0 + k + 2.3 * j);
      B(k, j) = std::cos(0.7 * k - 1.1 * j);
    }
  return {A - A.transpose(), 0.5 * (B - B.transpose()) + 0.1 * Mat::Identity(6, 6)};
}

}  // namespace

TEST_CASE("coefficient sums") {
  for (const auto& s : {bm4_scheme(), strang_scheme(), triple_jump(bm4_scheme())}) {
    CHECK(std::accumulate(s.a.begin(), s.a.end(), 0.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(std::accumulate(s.b.begin(), s.b.end(), 0.0) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(s.a.size() == s.b.size() + 1);
    for (std::size_t i = 0; i < s.a.size(); ++i) CHECK(s.a[i] == Catch::Approx(s.a[s.a.size() - 1 - i]));
  }
  const auto bm4 = bm4_scheme();
  CHECK(bm4.a.size() == 7);
  CHECK(bm4.b.size() == 6);
  CHECK(bm4.order == 4);
  CHECK(triple_jump(bm4).order == 6);
}

TEST_CASE("local error order against the matrix exponential") {
  const auto [A, B] = test_pair();
  struct Case {
    SplittingScheme s;
    double h;
    double expected_ratio;
  };
  // Local error of an order-p method scales as h^{p+1}.
  const Case cases[] = {{strang_scheme(), 0.05, 8.0}, {bm4_scheme(), 0.2, 32.0}, {triple_jump(bm4_scheme()), 0.4, 128.0}};
  for (const auto& c : cases) {
    const double e1 = local_error(c.s, A, B, c.h);
    const double e2 = local_error(c.s, A, B, c.h / 2);
    const double ratio = e1 / e2;
    INFO("order " << c.s.order << " errors " << e1 << " " << e2 << " ratio " << ratio);
    CHECK(ratio > 0.75 * c.expected_ratio);
    CHECK(ratio < 1.3 * c.expected_ratio);
  }
}

TEST_CASE("BM4 beats Strang at equal stage cost") {
  const auto [A, B] = test_pair();
  // Six kinetic stages of BM4 against six Strang steps.
  const double h = 0.3;
  double strang = 0.0;
  {
    Mat out = Mat::Identity(6, 6);
    for (int k = 0; k < 6; ++k) out = compose(strang_scheme(), A, B, h / 6) * out;
    strang = (out - Mat((h * (A + B)).exp())).norm();
  }
  CHECK(local_error(bm4_scheme(), A, B, h) < strang);
}
