#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "struktnorm/subset.hpp"

namespace struktnorm {

/// Separable concave objective: value, gradient and (diagonal, <= 0) Hessian.
using SeparableObjective =
    std::function<void(const Eigen::VectorXd& k, double& val, Eigen::VectorXd& grad, Eigen::VectorXd& hess)>;

struct BarrierResult {
  Eigen::VectorXd kappa;
  Eigen::VectorXd y;  ///< constraint multipliers 1 / (t * slack)
  double value = 0.0;
  double gap_bound = kInf;
  int newton_steps = 0;
};

/// Log-barrier path-following for  max phi(kappa)  s.t.  kappa(B) <= cap_B,
/// kappa >= 0, with rows given as masks over n coordinates. Every coordinate
/// must appear in some row. `upper` optionally maps multipliers to a certified
/// upper bound, which then drives the stopping rule instead of the m/t bound.
inline BarrierResult barrier_maximize(int n, const std::vector<SubsetMask>& rows, const std::vector<double>& cap,
                                      const SeparableObjective& phi, double rel_tol,
                                      const std::function<double(const Eigen::VectorXd&)>& upper = nullptr) {
  const int m = static_cast<int>(rows.size());
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    double lo = kInf;
    for (int b = 0; b < m; ++b)
      if (rows[b].contains(i)) lo = std::min(lo, cap[b] / rows[b].size());
    if (lo == kInf) throw InvalidArgument("barrier: a coordinate is not covered by any constraint");
    k[i] = 0.5 * lo;
  }
  auto slacks = [&](const Eigen::VectorXd& x, Eigen::VectorXd& s) {
    s.resize(m);
    for (int b = 0; b < m; ++b) s[b] = cap[b] - subset_sum(x, rows[b]);
  };
  BarrierResult res, best;
  Eigen::VectorXd s, g(n), hd(n), grad(n), step(n);
  Eigen::MatrixXd H(n, n);
  double t = 1.0;
  int total_steps = 0;
  for (int outer = 0; outer < 60; ++outer) {
    bool centered = false;
    for (int it = 0; it < 60; ++it) {
      double val;
      phi(k, val, g, hd);
      slacks(k, s);
      H.setZero();
      for (int i = 0; i < n; ++i) {
        grad[i] = -t * g[i] - 1.0 / k[i];
        H(i, i) = -t * hd[i] + 1.0 / (k[i] * k[i]);
      }
      for (int b = 0; b < m; ++b) {
        const double inv = 1.0 / s[b], inv2 = inv * inv;
        const auto idx = rows[b].indices();
        for (int i : idx) {
          grad[i] += inv;
          for (int j : idx) H(i, j) += inv2;
        }
      }
      step = H.ldlt().solve(-grad);
      const double dec = -grad.dot(step);
      ++total_steps;
      if (!(dec >= 0.0) || dec < 1e-12) {
        centered = true;
        break;
      }
      double alpha = dec < 0.25 ? 1.0 : 1.0 / (1.0 + std::sqrt(dec));
      for (int tries = 0; tries < 80; ++tries) {
        Eigen::VectorXd kn = k + alpha * step;
        bool ok = kn.minCoeff() > 0.0;
        if (ok) {
          slacks(kn, s);
          ok = s.minCoeff() > 0.0;
        }
        if (ok) {
          k = kn;
          break;
        }
        alpha *= 0.5;
      }
    }
    double val;
    phi(k, val, g, hd);
    slacks(k, s);
    res.y.resize(m);
    for (int b = 0; b < m; ++b) res.y[b] = 1.0 / (t * s[b]);
    res.kappa = k;
    res.value = val;
    res.newton_steps = total_steps;
    res.gap_bound = upper ? upper(res.y) - val : (m + n) / t;
    if (!(res.gap_bound >= best.gap_bound)) best = res;
    const double scale = std::max(1.0, std::abs(val));
    if (best.gap_bound <= rel_tol * scale) return best;
    if (!centered) break;  // numerical floor reached
    t *= 8.0;
  }
  if (best.gap_bound <= 1e-8 * std::max(1.0, std::abs(best.value))) return best;
  throw NumericalError("barrier method did not reach the requested gap (gap bound " +
                       std::to_string(best.gap_bound) + ")");
}

}  // namespace struktnorm
