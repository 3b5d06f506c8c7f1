#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "struktnorm/range.hpp"
#include "struktnorm/setfn.hpp"

namespace struktnorm {

/// Indices sorted by decreasing value, ties by ascending index.
inline std::vector<int> decreasing_order(const std::vector<double>& w) {
  std::vector<int> idx(w.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return w[a] > w[b]; });
  return idx;
}

inline void check_length(const SetFunction& f, std::size_t n) {
  if (static_cast<int>(n) != f.d())
    throw InvalidArgument("vector length " + std::to_string(n) + " does not match d=" + std::to_string(f.d()));
}

/// Lovász extension at w >= 0. Returns +inf if the chain hits an infinite value
/// while weights are still positive.
inline double lovasz(const SetFunction& f, const std::vector<double>& w) {
  check_length(f, w.size());
  for (double v : w)
    if (!(v >= 0.0)) throw InvalidArgument("lovasz expects a nonnegative vector (pass |w|)");
  const auto order = decreasing_order(w);
  double total = 0.0, prev = 0.0;
  SubsetMask chain;
  for (int j : order) {
    if (w[j] <= 0.0) break;
    chain = chain.with(j);
    const double cur = f(chain);
    if (cur == kInf) return kInf;
    total += w[j] * (cur - prev);
    prev = cur;
  }
  return total;
}

/// Greedy vertex of the submodular polyhedron for weights w.
inline std::vector<double> greedy(const SetFunction& f, const std::vector<double>& w) {
  check_length(f, w.size());
  if (!known_submodular(f)) throw InvalidArgument("greedy requires a submodular function");
  const auto order = decreasing_order(w);
  std::vector<double> s(w.size(), 0.0);
  double prev = 0.0;
  SubsetMask chain;
  for (int j : order) {
    if (w[j] <= 0.0) break;
    chain = chain.with(j);
    const double cur = f(chain);
    if (cur == kInf) throw InvalidArgument("greedy hit an infinite value on the chain");
    s[j] = cur - prev;
    prev = cur;
  }
  return s;
}

enum class SfmMethod { Brute, Range1d, Range2d, MinNorm };

inline const char* method_name(SfmMethod m) {
  switch (m) {
    case SfmMethod::Brute: return "brute";
    case SfmMethod::Range1d: return "range1d";
    case SfmMethod::Range2d: return "range2d";
    case SfmMethod::MinNorm: return "minnorm";
  }
  return "?";
}

struct SfmResult {
  SubsetMask a;
  double value = 0.0;
  SfmMethod method = SfmMethod::Brute;
};

struct SfmOptions {
  bool allow_minnorm = false;
  bool force_brute = false;
};

namespace detail {

inline double modular_value(const SetFunction& f, const std::vector<double>& t, SubsetMask a) {
  const double v = f(a);
  return v == kInf ? kInf : v - subset_sum(t, a);
}

inline SfmResult sfm_brute(const SetFunction& f, const std::vector<double>& t) {
  const int d = f.d();
  if (d > kMaxExhaustive) throw CapabilityError("brute-force SFM requires d <= 20");
  const std::uint64_t n = std::uint64_t{1} << d;
  std::vector<double> vals(n);
  double best = 0.0;
  for (std::uint64_t m = 0; m < n; ++m) {
    vals[m] = modular_value(f, t, SubsetMask(m));
    best = std::min(best, vals[m]);
  }
  const double tol = 1e-12 * (1.0 + std::abs(best));
  for (std::uint64_t m = 0; m < n; ++m)
    if (vals[m] <= best + tol) return {SubsetMask(m), vals[m], SfmMethod::Brute};
  return {SubsetMask(), 0.0, SfmMethod::Brute};
}

/// The range-family minor of f as an index-list oracle.
inline RangeOracle range_oracle(const SetFunction& f) {
  const bool two_d = f.family() == Family::ProjectedRange2D;
  std::vector<int> pos(f.d());
  for (int i = 0; i < f.d(); ++i) pos[i] = f.base_index(i);
  const auto& b = f.base();
  return RangeOracle::minor(two_d, two_d ? b.d1 : b.d, two_d ? b.d2 : 1, std::move(pos), f.contracted().indices());
}

inline SfmResult sfm_range(const SetFunction& f, const std::vector<double>& t) {
  auto [idx, value] = range_oracle(f).sfm(t);
  (void)value;
  SubsetMask a = SubsetMask::from_indices(idx);
  return {a, modular_value(f, t, a),
          f.family() == Family::ProjectedRange2D ? SfmMethod::Range2d : SfmMethod::Range1d};
}

// Fujishige-Wolfe minimum-norm point in the base polytope of G = F - t.
// The minimizer is read off the negative coordinates; the certificate is the
// gap between G(A) and the lower bound x-(V).
inline SfmResult sfm_minnorm(const SetFunction& f, const std::vector<double>& t) {
  const int d = f.d();
  auto g = [&](SubsetMask a) { return modular_value(f, t, a); };
  auto vertex = [&](const Eigen::VectorXd& x) {
    std::vector<double> neg(d);
    for (int i = 0; i < d; ++i) neg[i] = -x[i];  // minimize x^T s: greedy on -x
    const auto order = decreasing_order(neg);
    Eigen::VectorXd s(d);
    double prev = 0.0;
    SubsetMask chain;
    for (int j : order) {
      chain = chain.with(j);
      const double cur = g(chain);
      if (!std::isfinite(cur)) throw CapabilityError("min-norm SFM requires a finite function");
      s[j] = cur - prev;
      prev = cur;
    }
    return s;
  };
  auto best_level_set = [&](const Eigen::VectorXd& x, double& val) {
    std::vector<double> neg(d);
    for (int i = 0; i < d; ++i) neg[i] = -x[i];
    const auto order = decreasing_order(neg);
    SubsetMask chain, best;
    val = 0.0;
    for (int j : order) {
      chain = chain.with(j);
      const double v = g(chain);
      if (v < val) {
        val = v;
        best = chain;
      }
    }
    return best;
  };
  std::vector<Eigen::VectorXd> pts{vertex(Eigen::VectorXd::Zero(d))};
  std::vector<double> lam{1.0};
  Eigen::VectorXd x = pts[0];
  double scale = 1.0;
  for (int i = 0; i < d; ++i) scale = std::max(scale, std::abs(x[i]));
  for (int iter = 0; iter < 20000; ++iter) {
    double lower = 0.0;
    for (int i = 0; i < d; ++i) lower += std::min(0.0, x[i]);
    double val;
    SubsetMask a = best_level_set(x, val);
    if (val - lower <= 1e-8 * scale) return {a, val, SfmMethod::MinNorm};
    const Eigen::VectorXd s = vertex(x);
    if (x.squaredNorm() - x.dot(s) <= 1e-12 * scale * scale) return {a, val, SfmMethod::MinNorm};
    pts.push_back(s);
    lam.push_back(0.0);
    // minor cycles: affine minimizer over the corral
    for (;;) {
      const int k = static_cast<int>(pts.size());
      Eigen::MatrixXd M(k + 1, k + 1);
      M.setZero();
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) M(i, j) = pts[i].dot(pts[j]);
      for (int i = 0; i < k; ++i) M(i, k) = M(k, i) = 1.0;
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
      rhs[k] = 1.0;
      Eigen::VectorXd sol = M.completeOrthogonalDecomposition().solve(rhs);
      Eigen::VectorXd alpha = sol.head(k);
      if (alpha.minCoeff() > 1e-12) {
        for (int i = 0; i < k; ++i) lam[i] = alpha[i];
        break;
      }
      double theta = 1.0;
      for (int i = 0; i < k; ++i)
        if (alpha[i] <= 1e-12 && lam[i] - alpha[i] > 0) theta = std::min(theta, lam[i] / (lam[i] - alpha[i]));
      for (int i = 0; i < k; ++i) lam[i] = theta * alpha[i] + (1 - theta) * lam[i];
      std::vector<Eigen::VectorXd> np;
      std::vector<double> nl;
      for (int i = 0; i < k; ++i)
        if (lam[i] > 1e-12) {
          np.push_back(pts[i]);
          nl.push_back(lam[i]);
        }
      pts.swap(np);
      lam.swap(nl);
      if (pts.size() <= 1) break;
    }
    double sum = std::accumulate(lam.begin(), lam.end(), 0.0);
    x.setZero();
    for (std::size_t i = 0; i < pts.size(); ++i) x += (lam[i] / sum) * pts[i];
  }
  throw NumericalError("min-norm point SFM did not reach its certificate");
}

}  // namespace detail

/// Minimizes A -> F(A) - t(A).
inline SfmResult sfm(const SetFunction& f, const std::vector<double>& t, SfmOptions opts = {}) {
  check_length(f, t.size());
  for (double v : t)
    if (!std::isfinite(v)) throw InvalidArgument("SFM weights must be finite");
  if (!opts.force_brute) {
    if (f.family() == Family::ModifiedRange || f.family() == Family::ProjectedRange2D) return detail::sfm_range(f, t);
  }
  if (f.d() <= kMaxExhaustive) return detail::sfm_brute(f, t);
  if (opts.allow_minnorm && known_submodular(f)) return detail::sfm_minnorm(f, t);
  throw CapabilityError(std::string("no SFM method for family '") + family_name(f.family()) + "' at d=" +
                        std::to_string(f.d()));
}

/// True when an exact SFM oracle exists without the optional min-norm solver.
inline bool has_sfm_oracle(const SetFunction& f) {
  return f.family() == Family::ModifiedRange || f.family() == Family::ProjectedRange2D || f.d() <= kMaxExhaustive;
}

inline bool same_value(double a, double b) { return std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a) + std::abs(b)); }

/// Closure of K under zero-marginal-gain augmentations.
inline SubsetMask smallest_stable_superset(const SetFunction& f, SubsetMask k) {
  if (!k.within(f.d())) throw InvalidArgument("set outside the ground set");
  if (k.empty()) return k;
  SubsetMask j = k;
  double fj = f(j);
  for (bool changed = true; changed;) {
    changed = false;
    for (int i = 0; i < f.d(); ++i) {
      if (j.contains(i)) continue;
      const double fi = f(j.with(i));
      if (fi != kInf && same_value(fi, fj)) {
        j = j.with(i);
        fj = fi;
        changed = true;
      }
    }
  }
  return j;
}

inline bool is_stable(const SetFunction& f, SubsetMask a) {
  const double fa = f(a);
  for (int i = 0; i < f.d(); ++i)
    if (!a.contains(i)) {
      const double v = f(a.with(i));
      if (v != kInf && same_value(v, fa)) return false;
    }
  return true;
}

/// For submodular F, separability reduces to 2-partitions.
inline bool is_inseparable(const SetFunction& f, SubsetMask a) {
  const double fa = f(a);
  const std::uint64_t low = a.bits() & (~a.bits() + 1);
  const std::uint64_t rest = a.bits() & ~low;
  // enumerate B containing the lowest bit, B != A
  for (std::uint64_t sub = rest;; sub = (sub - 1) & rest) {
    const std::uint64_t bmask = sub | low;
    if (bmask != a.bits()) {
      const double s = f(SubsetMask(bmask)) + f(SubsetMask(a.bits() & ~bmask));
      if (same_value(s, fa)) return false;
    }
    if (sub == 0) break;
  }
  return true;
}

struct CoreSet {
  std::vector<SubsetMask> sets;
  std::vector<double> values;
  std::vector<SubsetMask> near_ties;  ///< redundant sets whose certificate was within tolerance
};

inline CoreSet stable_inseparable_sets(const SetFunction& f) {
  if (f.d() > 14) throw CapabilityError("stable/inseparable enumeration requires d <= 14");
  if (!known_submodular(f)) throw InvalidArgument("stable/inseparable characterization requires submodular F");
  CoreSet out;
  const std::uint64_t n = std::uint64_t{1} << f.d();
  for (std::uint64_t m = 1; m < n; ++m) {
    const SubsetMask a(m);
    const double v = f(a);
    if (v == kInf) continue;
    if (is_stable(f, a) && is_inseparable(f, a)) {
      out.sets.push_back(a);
      out.values.push_back(v);
    }
  }
  return out;
}

}  // namespace struktnorm
