#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hhgdis/error.hpp"

namespace hhgdis {

/// P(t) = gamma (exp(-(t - t0)/t_star) - 1) + 1, times in fs.
struct PurityFit {
  double gamma = 0.0;
  double t_star = 1.0;
  double t0 = 0.0;
  // Root-mean-square residual over the fitted window.
  double residual_rms = 0.0;
  bool degenerate = false;
};

inline double purity_model(double t, double gamma, double t_star, double t0) {
  return gamma * (std::exp(-(t - t0) / t_star) - 1.0) + 1.0;
}

struct FitWindow {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
};

namespace detail {

struct FitData {
  std::vector<double> t, y;
};

inline double fit_rms(const FitData& d, double g, double ts, double t0) {
  double s = 0.0;
  for (std::size_t k = 0; k < d.t.size(); ++k) {
    const double r = purity_model(d.t[k], g, ts, t0) - d.y[k];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(d.t.size()));
}

// Optimal gamma in [0, 1] for fixed (t_star, t0); the model is linear in gamma.
inline double best_gamma(const FitData& d, double ts, double t0) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < d.t.size(); ++k) {
    const double u = std::exp(-(d.t[k] - t0) / ts) - 1.0;
    num += (d.y[k] - 1.0) * u;
    den += u * u;
  }
  if (!(den > 0.0)) return 0.0;
  return std::clamp(num / den, 0.0, 1.0);
}

}  // namespace detail

/// Multi-start over a (t_star, t0) grid, then damped Gauss-Newton on
/// (gamma, log t_star, t0) with gamma projected onto [0, 1].
inline PurityFit fit_purity_decay(std::span<const double> times, std::span<const double> values,
                                  FitWindow window = {}) {
  if (times.size() != values.size()) throw DataError("fit_purity_decay: length mismatch");
  detail::FitData d;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= window.t_min && times[k] <= window.t_max) {
      d.t.push_back(times[k]);
      d.y.push_back(values[k]);
    }
  if (d.t.size() < 3) throw DataError("fit_purity_decay: fewer than three samples in the window");
  const auto [ymin, ymax] = std::minmax_element(d.y.begin(), d.y.end());
  const double t_lo = d.t.front(), t_hi = d.t.back();
  const double span = t_hi - t_lo;
  PurityFit fit;
  if (*ymax - *ymin < 1e-14 || !(span > 0.0)) {
    fit.gamma = 0.0;
    fit.t_star = span > 0.0 ? span : 1.0;
    fit.t0 = t_lo;
    fit.residual_rms = detail::fit_rms(d, 0.0, fit.t_star, fit.t0);
    fit.degenerate = true;
    return fit;
  }

  double best = std::numeric_limits<double>::infinity();
  double g0 = 0.0, ts0 = span, tz0 = t_lo;
  constexpr int kStar = 40, kZero = 40;
  for (int i = 0; i < kStar; ++i) {
    const double ts = span * std::pow(10.0, -2.0 + 3.5 * i / (kStar - 1));
    for (int j = 0; j < kZero; ++j) {
      const double tz = t_lo - span + 2.0 * span * j / (kZero - 1);
      const double g = detail::best_gamma(d, ts, tz);
      const double r = detail::fit_rms(d, g, ts, tz);
      if (r < best) {
        best = r;
        g0 = g;
        ts0 = ts;
        tz0 = tz;
      }
    }
  }

  // Parameters: gamma, log(t_star), t0.
  Eigen::Vector3d p(g0, std::log(ts0), tz0);
  auto residuals = [&](const Eigen::Vector3d& q, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const std::size_t n = d.t.size();
    r.resize(n);
    if (jac) jac->resize(n, 3);
    const double ts = std::exp(q[1]);
    for (std::size_t k = 0; k < n; ++k) {
      const double e = std::exp(-(d.t[k] - q[2]) / ts);
      r[k] = q[0] * (e - 1.0) + 1.0 - d.y[k];
      if (jac) {
        (*jac)(k, 0) = e - 1.0;
        (*jac)(k, 1) = q[0] * e * (d.t[k] - q[2]) / ts;
        (*jac)(k, 2) = q[0] * e / ts;
      }
    }
  };
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  residuals(p, r, &J);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < 500; ++it) {
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    Eigen::Matrix3d A = JtJ;
    A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
    Eigen::Vector3d step = A.ldlt().solve(-g);
    Eigen::Vector3d trial = p + step;
    trial[0] = std::clamp(trial[0], 0.0, 1.0);
    Eigen::VectorXd rt;
    residuals(trial, rt, nullptr);
    const double ct = rt.squaredNorm();
    if (ct < cost) {
      const double moved = (trial - p).norm();
      p = trial;
      cost = ct;
      residuals(p, r, &J);
      lambda = std::max(lambda * 0.3, 1e-15);
      if (moved < 1e-15 * (1.0 + p.norm())) break;
    } else {
      lambda *= 10.0;
      if (lambda > 1e16) break;
    }
  }
  fit.gamma = p[0];
  fit.t_star = std::exp(p[1]);
  fit.t0 = p[2];
  fit.residual_rms = std::sqrt(cost / static_cast<double>(d.t.size()));
  return fit;
}

}  // namespace hhgdis
