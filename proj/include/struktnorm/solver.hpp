#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "struktnorm/regularizers.hpp"

namespace struktnorm {

/// (1/2n) ||y - X w||^2 + lambda * Omega(w)
struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  RegularizerPtr reg;
  double lambda = 0.0;

  void validate() const {
    if (!reg) throw InvalidArgument("problem has no regularizer");
    if (X.rows() != y.size()) throw InvalidArgument("X and y have different row counts");
    if (X.cols() != reg->dim()) throw InvalidArgument("X column count differs from the regularizer dimension");
    if (X.rows() == 0) throw InvalidArgument("empty design");
    if (!X.allFinite() || !y.allFinite()) throw InvalidArgument("design and response must be finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  }
};

struct SolveOptions {
  double tol = 1e-8;
  int max_iter = 50000;
  double certificate_tol = 1e-5;
  bool check_certificate = true;
};

struct SolveReport {
  std::vector<double> w;
  std::vector<double> objective;  ///< one entry per accepted iterate
  int iterations = 0;
  int restarts = 0;
  double rel_change = kInf;
  double lipschitz = 0.0;
  bool converged = false;
  std::optional<double> dual_residual;  ///< Omega*(X^T (y - X w) / n)
  double lambda = 0.0;
};

/// Quadratic part in Gram form: f(w) = 0.5 w'Qw - b'w + c.
struct Quadratic {
  Eigen::MatrixXd Q;
  Eigen::VectorXd b;
  double c = 0.0;

  static Quadratic from(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const double n = static_cast<double>(X.rows());
    Quadratic q;
    q.Q = X.transpose() * X / n;
    q.b = X.transpose() * y / n;
    q.c = y.squaredNorm() / (2.0 * n);
    return q;
  }
  double value(const Eigen::VectorXd& w) const { return 0.5 * w.dot(Q * w) - b.dot(w) + c; }
};

/// Largest eigenvalue of a PSD matrix by power iteration (deterministic start).
inline double power_iteration(const Eigen::MatrixXd& Q, int iters = 100) {
  const int d = static_cast<int>(Q.rows());
  if (d == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d));
  double est = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd u = Q * v;
    const double nu = u.norm();
    if (nu == 0.0) return 0.0;
    const double next = v.dot(u);
    v = u / nu;
    if (std::abs(next - est) <= 1e-10 * std::max(1.0, next)) {
      est = next;
      break;
    }
    est = next;
  }
  return est;
}

namespace detail {

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// FISTA with backtracking and function-value restart, from a warm start.
inline SolveReport solve_quadratic(const Quadratic& f, const Regularizer& reg, double lambda,
                                   std::vector<double> w0, const SolveOptions& opts = {}, double lip0 = 0.0) {
  const int d = static_cast<int>(f.b.size());
  if (static_cast<int>(w0.size()) != d) w0.assign(d, 0.0);
  SolveReport rep;
  rep.lambda = lambda;
  double L = lip0 > 0.0 ? lip0 : power_iteration(f.Q);
  if (!(L > 0.0)) L = 1.0;
  Eigen::VectorXd x = detail::to_eigen(w0), yv = x, xprev = x;
  auto objective = [&](const Eigen::VectorXd& w) { return f.value(w) + lambda * reg.value(detail::to_std(w)); };
  double fx = objective(x), t = 1.0;
  rep.objective.push_back(fx);
  int small = 0;
  bool restarted = false;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd gy = f.Q * yv - f.b;
    const double fy = f.value(yv);
    Eigen::VectorXd xn;
    for (int bt = 0; bt < 60; ++bt) {
      const Eigen::VectorXd z = yv - gy / L;
      xn = lambda > 0.0 ? detail::to_eigen(reg.prox(detail::to_std(z), lambda / L)) : z;
      const Eigen::VectorXd diff = xn - yv;
      if (f.value(xn) <= fy + gy.dot(diff) + 0.5 * L * diff.squaredNorm() + 1e-12 * std::max(1.0, std::abs(fy)))
        break;
      L *= 2.0;
    }
    const double fn = objective(xn);
    ++rep.iterations;
    if (fn > fx) {
      if (restarted) {
        // a plain proximal step from x no longer decreases: numerical floor
        rep.converged = true;
        break;
      }
      // restart momentum from the last accepted iterate
      ++rep.restarts;
      restarted = true;
      t = 1.0;
      yv = x;
      continue;
    }
    restarted = false;
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    xprev = x;
    x = xn;
    yv = x + ((t - 1.0) / tn) * (x - xprev);
    t = tn;
    rep.rel_change = std::abs(fx - fn) / std::max(1.0, std::abs(fn));
    fx = fn;
    rep.objective.push_back(fx);
    small = rep.rel_change < opts.tol ? small + 1 : 0;
    if (small >= 3) {
      rep.converged = true;
      break;
    }
  }
  rep.lipschitz = L;
  rep.w = detail::to_std(x);
  return rep;
}

inline std::optional<double> dual_residual(const Quadratic& f, const Regularizer& reg, const std::vector<double>& w) {
  const Eigen::VectorXd g = f.b - f.Q * detail::to_eigen(w);
  return reg.dual(detail::to_std(g));
}

/// Solves the problem; when the regularizer has a dual norm, iterations are
/// tightened until the Fenchel certificate holds.
inline SolveReport solve(const Quadratic& f, const Regularizer& reg, double lambda, std::vector<double> w0 = {},
                         const SolveOptions& opts = {}) {
  SolveOptions o = opts;
  SolveReport rep = solve_quadratic(f, reg, lambda, std::move(w0), o);
  if (!opts.check_certificate || lambda <= 0.0) return rep;
  for (int round = 0; round < 4; ++round) {
    rep.dual_residual = dual_residual(f, reg, rep.w);
    if (!rep.dual_residual || *rep.dual_residual <= lambda * (1.0 + opts.certificate_tol)) return rep;
    o.tol *= 1e-2;
    auto more = solve_quadratic(f, reg, lambda, rep.w, o, rep.lipschitz);
    more.iterations += rep.iterations;
    more.restarts += rep.restarts;
    more.objective.insert(more.objective.begin(), rep.objective.begin(), rep.objective.end() - 1);
    rep = std::move(more);
  }
  rep.dual_residual = dual_residual(f, reg, rep.w);
  return rep;
}

inline SolveReport solve(const Problem& prob, const SolveOptions& opts = {}) {
  prob.validate();
  return solve(Quadratic::from(prob.X, prob.y), *prob.reg, prob.lambda, {}, opts);
}

// Paths ----------------------------------------------------------------------

inline std::vector<double> geometric_grid(double lambda_max, int points, double decades) {
  if (points < 1) throw InvalidArgument("grid needs at least one point");
  if (!(lambda_max > 0.0)) throw InvalidArgument("lambda_max must be positive");
  std::vector<double> g;
  for (int k = 0; k < points; ++k)
    g.push_back(lambda_max * std::pow(10.0, -decades * (points == 1 ? 0.0 : static_cast<double>(k) / (points - 1))));
  return g;
}

inline std::vector<int> support_of_estimate(const std::vector<double>& w, double rel = 1e-6) {
  double mx = 0.0;
  for (double x : w) mx = std::max(mx, std::abs(x));
  std::vector<int> s;
  if (mx == 0.0) return s;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (std::abs(w[i]) > rel * mx) s.push_back(static_cast<int>(i));
  return s;
}

inline int hamming_distance(const std::vector<int>& a, const std::vector<int>& b, int d) {
  std::vector<char> in(d, 0);
  for (int i : a) in[i] ^= 1;
  for (int i : b) in[i] ^= 1;
  int h = 0;
  for (char c : in) h += c;
  return h;
}

struct PathPoint {
  double lambda = 0.0;
  SolveReport report;
  std::vector<int> support;
  int hamming = -1;       ///< -1 without ground truth
  double l2_error = -1.0;
};

/// Warm-started sweep over a strictly decreasing grid.
inline std::vector<PathPoint> path(const Quadratic& f, const Regularizer& reg, const std::vector<double>& grid,
                                   const std::vector<double>& wstar = {}, const SolveOptions& opts = {},
                                   double support_rel = 1e-6) {
  if (grid.empty()) throw InvalidArgument("lambda grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] < grid[k - 1])) throw InvalidArgument("lambda grid must be strictly decreasing");
  const int d = static_cast<int>(f.b.size());
  std::vector<int> true_support;
  if (!wstar.empty()) {
    if (static_cast<int>(wstar.size()) != d) throw InvalidArgument("ground truth has the wrong length");
    for (int i = 0; i < d; ++i)
      if (wstar[i] != 0.0) true_support.push_back(i);
  }
  std::vector<PathPoint> out;
  std::vector<double> warm(d, 0.0);
  for (double lam : grid) {
    PathPoint pt;
    pt.lambda = lam;
    pt.report = solve(f, reg, lam, warm, opts);
    warm = pt.report.w;
    pt.support = support_of_estimate(pt.report.w, support_rel);
    if (!wstar.empty()) {
      pt.hamming = hamming_distance(pt.support, true_support, d);
      double e = 0.0;
      for (int i = 0; i < d; ++i) e += (pt.report.w[i] - wstar[i]) * (pt.report.w[i] - wstar[i]);
      pt.l2_error = std::sqrt(e);
    }
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace struktnorm
