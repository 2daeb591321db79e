#pragma once

#include <cmath>
#include <vector>

namespace hhgdis {

/// Symmetric splitting exp(a_1 h A) exp(b_1 h B) ... exp(b_m h B) exp(a_{m+1} h A).
/// `a` has one more entry than `b`; both sum to one.
struct SplittingScheme {
  std::vector<double> a;
  std::vector<double> b;
  int order = 2;
};

namespace bm4 {
// Blanes & Moan (2002), order-4 partitioned Runge-Kutta method S6 (six B
// stages, seven A stages). Remaining coefficients follow from symmetry and
// consistency.
inline constexpr double a1 = 0.0792036964311957;
inline constexpr double a2 = 0.353172906049774;
inline constexpr double a3 = -0.0420650803577195;
inline constexpr double a4 = 1.0 - 2.0 * (a1 + a2 + a3);
inline constexpr double b1 = 0.209515106613362;
inline constexpr double b2 = -0.143851773179818;
inline constexpr double b3 = 0.5 - (b1 + b2);
}  // namespace bm4

inline SplittingScheme bm4_scheme() {
  using namespace bm4;
  return {{a1, a2, a3, a4, a3, a2, a1}, {b1, b2, b3, b3, b2, b1}, 4};
}

inline SplittingScheme strang_scheme() { return {{0.5, 0.5}, {1.0}, 2}; }

/// Triple-jump composition of a symmetric scheme of even order p, giving
/// order p + 2.
inline SplittingScheme triple_jump(const SplittingScheme& base) {
  const double root = std::pow(2.0, 1.0 / (base.order + 1));
  const double g1 = 1.0 / (2.0 - root);
  const double g2 = -root / (2.0 - root);
  SplittingScheme out;
  out.order = base.order + 2;
  const double gammas[3] = {g1, g2, g1};
  for (int s = 0; s < 3; ++s) {
    const double g = gammas[s];
    for (std::size_t i = 0; i < base.a.size(); ++i) {
      const double ai = g * base.a[i];
      // Merge the trailing A stage of one block with the leading A stage of the next.
      if (s > 0 && i == 0) out.a.back() += ai;
      else out.a.push_back(ai);
      if (i < base.b.size()) out.b.push_back(g * base.b[i]);
    }
  }
  return out;
}

}  // namespace hhgdis
