#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "struktnorm/subset.hpp"

namespace struktnorm {

/// Minor of ModifiedRange (1D) or ProjectedRange2D over an index list, for
/// ground sets beyond the 64-bit mask limit. Only the hull of the contracted
/// set matters, so a minor is (positions, hull of C, F(C)).
///
/// 1D: F(A) = D - 1 + range(A).  2D: MR_{d1}(rows) + MR_{d2}(cols), element
/// k at (k / d2, k % d2).
class RangeOracle {
 public:
  static RangeOracle modified_range(int d) {
    if (d < 1) throw InvalidArgument("ground set size must be positive");
    RangeOracle r;
    r.two_d_ = false;
    r.d1_ = d;
    r.d2_ = 1;
    r.pos_.resize(d);
    for (int i = 0; i < d; ++i) r.pos_[i] = i;
    return r;
  }
  static RangeOracle projected_range_2d(int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw InvalidArgument("grid dimensions must be positive");
    RangeOracle r;
    r.two_d_ = true;
    r.d1_ = d1;
    r.d2_ = d2;
    r.pos_.resize(static_cast<std::size_t>(d1) * d2);
    for (int i = 0; i < d1 * d2; ++i) r.pos_[i] = i;
    return r;
  }
  /// Minor given base positions (ascending) and contracted base positions.
  static RangeOracle minor(bool two_d, int d1, int d2, std::vector<int> pos, const std::vector<int>& contracted) {
    RangeOracle r;
    r.two_d_ = two_d;
    r.d1_ = d1;
    r.d2_ = two_d ? d2 : 1;
    r.pos_ = std::move(pos);
    for (int p : contracted) r.add_to_hull(p);
    r.offset_ = r.base_value(r.c_);
    return r;
  }

  int size() const { return static_cast<int>(pos_.size()); }
  bool two_d() const { return two_d_; }
  int base_size() const { return d1_ * d2_; }
  const std::vector<int>& positions() const { return pos_; }

  double value(const std::vector<int>& idx) const {
    if (idx.empty()) return 0.0;
    Hull h = c_;
    for (int i : idx) extend(h, pos_[i]);
    return base_value(h) - offset_;
  }
  double full_value() const {
    if (pos_.empty()) return 0.0;
    Hull h = c_;
    for (int p : pos_) extend(h, p);
    return base_value(h) - offset_;
  }
  /// F of each prefix of the given order.
  std::vector<double> chain_values(const std::vector<int>& order) const {
    std::vector<double> out;
    out.reserve(order.size());
    Hull h = c_;
    for (int i : order) {
      extend(h, pos_[i]);
      out.push_back(base_value(h) - offset_);
    }
    return out;
  }

  RangeOracle restrict_to(const std::vector<int>& idx) const {
    RangeOracle r = *this;
    r.pos_.clear();
    for (int i : idx) r.pos_.push_back(pos_[i]);
    return r;
  }
  RangeOracle contract_by(const std::vector<int>& idx) const {
    RangeOracle r = *this;
    std::vector<char> in(pos_.size(), 0);
    for (int i : idx) {
      in[i] = 1;
      extend(r.c_, pos_[i]);
    }
    r.pos_.clear();
    for (std::size_t i = 0; i < pos_.size(); ++i)
      if (!in[i]) r.pos_.push_back(pos_[i]);
    r.offset_ = r.base_value(r.c_);
    return r;
  }

  /// Exact minimizer of F(A) - t(A). For a fixed hull the best set takes every
  /// element inside with t > 0, so minimizing over hulls is exact; the 1D case
  /// separates in the two endpoints and runs in one pass.
  std::pair<std::vector<int>, double> sfm(const std::vector<double>& t) const {
    return two_d_ ? sfm2d(t) : sfm1d(t);
  }

 private:
  struct Hull {
    int r0 = 1 << 30, r1 = -1, c0 = 1 << 30, c1 = -1;
    bool empty() const { return r1 < 0; }
  };

  void extend(Hull& h, int p) const {
    const int r = p / d2_, c = p % d2_;
    h.r0 = std::min(h.r0, r);
    h.r1 = std::max(h.r1, r);
    h.c0 = std::min(h.c0, c);
    h.c1 = std::max(h.c1, c);
  }
  void add_to_hull(int p) { extend(c_, p); }

  double base_value(const Hull& h) const {
    if (h.empty()) return 0.0;
    if (!two_d_) return d1_ + h.r1 - h.r0;
    return (d1_ + h.r1 - h.r0) + (d2_ + h.c1 - h.c0);
  }

  double subset_value(const std::vector<int>& idx, const std::vector<double>& t) const {
    double s = value(idx);
    for (int i : idx) s -= t[i];
    return s;
  }

  std::pair<std::vector<int>, double> sfm1d(const std::vector<double>& t) const {
    const int m = size();
    const bool has_c = !c_.empty();
    const int cmin = c_.r0, cmax = c_.r1;
    std::vector<double> pre(m + 1, 0.0);
    for (int i = 0; i < m; ++i) pre[i + 1] = pre[i] + std::max(0.0, t[i]);
    auto first_at_least = [&](int p) {
      return static_cast<int>(std::lower_bound(pos_.begin(), pos_.end(), p) - pos_.begin());
    };
    const double base = d1_ - offset_;
    double best = 0.0, left_min = kInf;
    int left_arg = -1, bl = -1, br = -1;
    std::vector<int> cands;
    for (int i = 0; i < m; ++i)
      if (t[i] > 0.0) cands.push_back(pos_[i]);
    if (has_c) {
      cands.push_back(cmin);
      cands.push_back(cmax);
      std::sort(cands.begin(), cands.end());
      cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
    }
    for (int p : cands) {
      if (!has_c || p <= cmin) {
        const double v = -p + pre[first_at_least(p)];
        if (v < left_min) {
          left_min = v;
          left_arg = p;
        }
      }
      if ((!has_c || p >= cmax) && left_arg >= 0) {
        const double v = base + left_min + p - pre[first_at_least(p + 1)];
        if (v < best - 1e-12 * (1.0 + std::abs(best))) {
          best = v;
          bl = left_arg;
          br = p;
        }
      }
    }
    std::vector<int> a;
    if (bl >= 0)
      for (int i = 0; i < m; ++i)
        if (t[i] > 0.0 && pos_[i] >= bl && pos_[i] <= br) a.push_back(i);
    return {a, subset_value(a, t)};
  }

  std::pair<std::vector<int>, double> sfm2d(const std::vector<double>& t) const {
    const int m = size();
    const bool has_c = !c_.empty();
    std::vector<double> ps(static_cast<std::size_t>(d1_ + 1) * (d2_ + 1), 0.0);
    auto P = [&](int r, int c) -> double& { return ps[static_cast<std::size_t>(r) * (d2_ + 1) + c]; };
    for (int i = 0; i < m; ++i) P(pos_[i] / d2_ + 1, pos_[i] % d2_ + 1) += std::max(0.0, t[i]);
    for (int r = 1; r <= d1_; ++r)
      for (int c = 1; c <= d2_; ++c) P(r, c) += P(r - 1, c) + P(r, c - 1) - P(r - 1, c - 1);
    const double base = d1_ + d2_ - offset_;
    double best = 0.0;
    int br0 = -1, br1 = -1, bc0 = -1, bc1 = -1;
    const int r0max = has_c ? c_.r0 : d1_ - 1, c0max = has_c ? c_.c0 : d2_ - 1;
    const int r1min = has_c ? c_.r1 : 0, c1min = has_c ? c_.c1 : 0;
    for (int r0 = 0; r0 <= r0max; ++r0)
      for (int r1 = std::max(r0, r1min); r1 < d1_; ++r1)
        for (int c0 = 0; c0 <= c0max; ++c0)
          for (int c1 = std::max(c0, c1min); c1 < d2_; ++c1) {
            const double mass = P(r1 + 1, c1 + 1) - P(r0, c1 + 1) - P(r1 + 1, c0) + P(r0, c0);
            const double v = base + (r1 - r0) + (c1 - c0) - mass;
            if (v < best - 1e-12 * (1.0 + std::abs(best))) {
              best = v;
              br0 = r0, br1 = r1, bc0 = c0, bc1 = c1;
            }
          }
    std::vector<int> a;
    if (br0 >= 0)
      for (int i = 0; i < m; ++i) {
        const int r = pos_[i] / d2_, c = pos_[i] % d2_;
        if (t[i] > 0.0 && r >= br0 && r <= br1 && c >= bc0 && c <= bc1) a.push_back(i);
      }
    return {a, subset_value(a, t)};
  }

  bool two_d_ = false;
  int d1_ = 0, d2_ = 1;
  std::vector<int> pos_;
  Hull c_;
  double offset_ = 0.0;
};

}  // namespace struktnorm
