#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "struktnorm/subset.hpp"

namespace struktnorm {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  std::vector<double> x;  ///< primal solution
  std::vector<double> y;  ///< equality duals, c - A^T y >= 0 at optimum
};

/// Dense two-phase tableau simplex for  min c^T x  s.t.  A x = b, x >= 0.
/// A is row-major m x n. Dantzig pricing, switching to Bland's rule after a
/// run of degenerate pivots.
class DenseSimplex {
 public:
  DenseSimplex(int m, int n, std::vector<double> a, std::vector<double> b, std::vector<double> c)
      : m_(m), n_(n), width_(n + m + 1), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    if (static_cast<int>(a_.size()) != m * n || static_cast<int>(b_.size()) != m || static_cast<int>(c_.size()) != n)
      throw InvalidArgument("LP dimensions do not match");
  }

  LpResult solve() {
    build_phase1();
    LpResult r;
    if (!run(/*phase1=*/true)) throw NumericalError("phase 1 cannot be unbounded");
    double bscale = 1.0;
    for (double v : b_) bscale = std::max(bscale, std::abs(v));
    if (-t(m_, width_ - 1) > tol_ * bscale * (1 + m_)) {
      r.status = LpStatus::Infeasible;
      return r;
    }
    drive_out_artificials();
    set_phase2_costs();
    if (!run(/*phase1=*/false)) {
      r.status = LpStatus::Unbounded;
      return r;
    }
    r.status = LpStatus::Optimal;
    r.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (basis_[i] < n_) r.x[basis_[i]] = std::max(0.0, t(i, width_ - 1));
    r.value = 0.0;
    for (int j = 0; j < n_; ++j) r.value += c_[j] * r.x[j];
    r.y.assign(m_, 0.0);
    for (int i = 0; i < m_; ++i) r.y[i] = -t(m_, n_ + i) * sign_[i];
    return r;
  }

 private:
  double& t(int i, int j) { return tab_[static_cast<std::size_t>(i) * width_ + j]; }

  void build_phase1() {
    tab_.assign(static_cast<std::size_t>(m_ + 1) * width_, 0.0);
    sign_.assign(m_, 1.0);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      sign_[i] = b_[i] < 0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) t(i, j) = sign_[i] * a_[static_cast<std::size_t>(i) * n_ + j];
      t(i, n_ + i) = 1.0;
      t(i, width_ - 1) = sign_[i] * b_[i];
      basis_[i] = n_ + i;
    }
    // reduced costs of the phase-1 objective (sum of artificials)
    for (int j = 0; j < width_; ++j) {
      if (j >= n_ && j < n_ + m_) continue;
      double s = 0.0;
      for (int i = 0; i < m_; ++i) s += t(i, j);
      t(m_, j) = -s;
    }
  }

  void set_phase2_costs() {
    for (int j = 0; j < width_; ++j) {
      double cj = j < n_ ? c_[j] : 0.0;
      double s = 0.0;
      for (int i = 0; i < m_; ++i) {
        const int bi = basis_[i];
        const double cb = bi < n_ ? c_[bi] : 0.0;
        if (cb != 0.0) s += cb * t(i, j);
      }
      if (j == width_ - 1) cj = 0.0;
      t(m_, j) = cj - s;
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      int best = -1;
      double bv = 1e-9;
      for (int j = 0; j < n_; ++j)
        if (std::abs(t(i, j)) > bv) {
          bv = std::abs(t(i, j));
          best = j;
        }
      if (best >= 0) pivot(i, best);
      // otherwise the row is redundant; its artificial stays basic at zero
    }
  }

  void pivot(int r, int col) {
    const double pv = t(r, col);
    double* pr = &tab_[static_cast<std::size_t>(r) * width_];
    for (int j = 0; j < width_; ++j) pr[j] /= pv;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[static_cast<std::size_t>(i) * width_];
      const double f = row[col];
      if (f == 0.0) continue;
      for (int j = 0; j < width_; ++j) row[j] -= f * pr[j];
      row[col] = 0.0;
    }
    basis_[r] = col;
  }

  // Returns false when the objective is unbounded.
  bool run(bool phase1) {
    const int ncols = phase1 ? n_ + m_ : n_;
    int degenerate_run = 0;
    const long max_iter = 50000L + 20L * (n_ + m_);
    for (long it = 0; it < max_iter; ++it) {
      const bool bland = degenerate_run > 50;
      int col = -1;
      double best = -tol_;
      for (int j = 0; j < ncols; ++j) {
        const double rc = t(m_, j);
        if (rc < best) {
          col = j;
          if (bland) break;
          best = rc;
        }
      }
      if (col < 0) return true;
      int row = -1;
      double ratio = kInf, piv = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double aij = t(i, col);
        if (aij <= 1e-11) continue;
        const double q = std::max(0.0, t(i, width_ - 1)) / aij;
        const bool better = q < ratio - 1e-12 ||
                            (q <= ratio + 1e-12 && (bland ? basis_[i] < basis_[row] : aij > piv));
        if (row < 0 || better) {
          row = i;
          ratio = q;
          piv = aij;
        }
      }
      if (row < 0) return false;
      degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;
      pivot(row, col);
    }
    throw NumericalError("simplex iteration limit reached");
  }

  int m_, n_, width_;
  std::vector<double> a_, b_, c_;
  std::vector<double> tab_;
  std::vector<double> sign_;
  std::vector<int> basis_;
  double tol_ = 1e-9;
};

inline LpResult solve_lp(int m, int n, std::vector<double> a, std::vector<double> b, std::vector<double> c) {
  return DenseSimplex(m, n, std::move(a), std::move(b), std::move(c)).solve();
}

/// Covering LP  min sum_j cost_j delta_j  s.t.  sum_j delta_j 1_{cols_j} >= rhs,
/// delta >= 0, over a ground set of size m. `kappa` holds the duals
/// (kappa >= 0, kappa(cols_j) <= cost_j).
struct CoverResult {
  LpStatus status = LpStatus::Infeasible;
  double value = kInf;
  std::vector<double> delta;
  std::vector<double> kappa;
};

inline CoverResult solve_cover(int m, const std::vector<SubsetMask>& cols, const std::vector<double>& cost,
                               const std::vector<double>& rhs) {
  const int k = static_cast<int>(cols.size());
  const int n = k + m;  // surplus variables after the cover columns
  std::vector<double> a(static_cast<std::size_t>(m) * n, 0.0), c(n, 0.0);
  for (int j = 0; j < k; ++j) {
    cols[j].for_each([&](int i) {
      if (i < m) a[static_cast<std::size_t>(i) * n + j] = 1.0;
    });
    c[j] = cost[j];
  }
  for (int i = 0; i < m; ++i) a[static_cast<std::size_t>(i) * n + k + i] = -1.0;
  auto lp = solve_lp(m, n, std::move(a), rhs, std::move(c));
  CoverResult out;
  out.status = lp.status;
  if (lp.status != LpStatus::Optimal) return out;
  out.value = lp.value;
  out.delta.assign(lp.x.begin(), lp.x.begin() + k);
  out.kappa = lp.y;
  for (double& v : out.kappa) v = std::max(0.0, v);
  return out;
}

}  // namespace struktnorm
