#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <type_traits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "struktnorm/barrier.hpp"
#include "struktnorm/envelope.hpp"
#include "struktnorm/range.hpp"
#include "struktnorm/submod.hpp"

namespace struktnorm {

inline double conjugate_exponent(double p) {
  if (std::isinf(p)) return 1.0;
  if (!(p > 1.0)) throw InvalidArgument("p must be > 1 (got " + std::to_string(p) + ")");
  return p / (p - 1.0);
}

inline double lp_norm(const std::vector<double>& v, double p) {
  double mx = 0.0;
  for (double x : v) mx = std::max(mx, std::abs(x));
  if (std::isinf(p) || mx == 0.0) return mx;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / mx, p);
  return mx * std::pow(s, 1.0 / p);
}

template <class V>
auto gather(const V& v, const std::vector<int>& idx) {
  std::vector<std::decay_t<decltype(v[0])>> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(v[i]);
  return out;
}

/// Exponent pair bound to a set function.
struct NormParams {
  SetFunction F;
  double p = 2.0;
  double q = 2.0;
  std::shared_ptr<const CoreSet> core;  ///< optional candidate family for enumeration paths

  static NormParams make(SetFunction f, double p) {
    NormParams np;
    np.q = conjugate_exponent(p);
    np.p = p;
    np.F = std::move(f);
    return np;
  }
  bool p_inf() const { return std::isinf(p); }
  NormParams with_core_set() const {
    NormParams np = *this;
    np.core = std::make_shared<CoreSet>(core_set(F));
    return np;
  }
};

// Oracle adapter ---------------------------------------------------------

/// Index-list view of a SetFunction, matching the RangeOracle interface used by
/// the decomposition algorithms.
class MaskOracle {
 public:
  explicit MaskOracle(SetFunction f, SfmOptions opts = {}) : f_(std::move(f)), opts_(opts) {}
  int size() const { return f_.d(); }
  const SetFunction& function() const { return f_; }
  double value(const std::vector<int>& idx) const { return f_(SubsetMask::from_indices(idx)); }
  double full_value() const { return f_(SubsetMask::full(f_.d())); }
  std::vector<double> chain_values(const std::vector<int>& order) const {
    std::vector<double> out;
    SubsetMask chain;
    for (int i : order) {
      chain = chain.with(i);
      out.push_back(f_(chain));
    }
    return out;
  }
  MaskOracle restrict_to(const std::vector<int>& idx) const {
    return MaskOracle(f_.restrict_to(SubsetMask::from_indices(idx)), opts_);
  }
  MaskOracle contract_by(const std::vector<int>& idx) const {
    return MaskOracle(f_.contract_by(SubsetMask::from_indices(idx)), opts_);
  }
  std::pair<std::vector<int>, double> sfm(const std::vector<double>& t) const {
    auto r = struktnorm::sfm(f_, t, opts_);
    return {r.a.indices(), r.value};
  }

 private:
  SetFunction f_;
  SfmOptions opts_;
};

// Decomposition algorithms over an oracle -----------------------------------

/// Lovász extension through prefix values; w >= 0.
template <class O>
double lovasz_oracle(const O& f, const std::vector<double>& w) {
  auto order = decreasing_order(w);
  while (!order.empty() && !(w[order.back()] > 0.0)) order.pop_back();
  const auto chain = f.chain_values(order);
  double total = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (chain[k] == kInf) return kInf;
    total += w[order[k]] * (chain[k] - prev);
    prev = chain[k];
  }
  return total;
}

struct DecompositionLeaf {
  std::vector<int> ids;  ///< original coordinates
  double gain = 0.0;     ///< F(prefix u S) - F(prefix)
};

namespace detail {

inline std::vector<int> support_of(const std::vector<double>& z) {
  std::vector<int> s;
  for (int i = 0; i < static_cast<int>(z.size()); ++i)
    if (z[i] != 0.0) s.push_back(i);
  return s;
}

inline std::vector<int> complement_of(const std::vector<int>& a, int n) {
  std::vector<char> in(n, 0);
  for (int i : a) in[i] = 1;
  std::vector<int> c;
  for (int i = 0; i < n; ++i)
    if (!in[i]) c.push_back(i);
  return c;
}

/// t_i = |z_i|^p F(V) / ||z||_p^p, computed on the scaled vector.
inline std::vector<double> split_weights(const std::vector<double>& z, double p, double fv) {
  double mx = 0.0;
  for (double x : z) mx = std::max(mx, std::abs(x));
  std::vector<double> t(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (t[i] = std::pow(std::abs(z[i]) / mx, p));
  for (double& v : t) v *= fv / s;
  return t;
}

template <class O>
void decompose(const O& f, const std::vector<double>& z, const std::vector<int>& ids, double p,
               std::vector<DecompositionLeaf>& out, int budget) {
  const int n = static_cast<int>(z.size());
  const auto sup = support_of(z);
  if (sup.empty()) return;
  if (static_cast<int>(sup.size()) < n) {
    decompose(f.restrict_to(sup), gather(z, sup), gather(ids, sup), p, out, budget);
    return;
  }
  if (budget < 0) throw NumericalError("norm decomposition exceeded its recursion bound");
  const double fv = f.full_value();
  if (n == 1 || fv <= 0.0) {
    out.push_back({ids, std::max(0.0, fv)});
    return;
  }
  const auto t = split_weights(z, p, fv);
  auto [a, val] = f.sfm(t);
  if (val >= -1e-12 * std::max(1.0, fv) || a.empty() || static_cast<int>(a.size()) == n) {
    out.push_back({ids, fv});
    return;
  }
  const auto c = complement_of(a, n);
  decompose(f.restrict_to(a), gather(z, a), gather(ids, a), p, out, budget - 1);
  decompose(f.contract_by(a), gather(z, c), gather(ids, c), p, out, budget - 1);
}

/// Euclidean projection of |z| onto the l1 ball of radius r; returns the threshold.
inline double l1_threshold(const std::vector<double>& z, double r) {
  std::vector<double> a;
  for (double x : z) a.push_back(std::abs(x));
  std::sort(a.begin(), a.end(), std::greater<>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    cum += a[k];
    const double cand = (cum - r) / static_cast<double>(k + 1);
    if (a[k] > cand) tau = cand;
  }
  return std::max(0.0, tau);
}

struct RootProx {
  std::vector<double> w;
  std::vector<double> kappa;  // sums to F(V)
};

/// Solves  min 1/2 ||w - z||^2 + lambda F(V)^{1/q} ||w||_p  together with the
/// matching kappa of the separable root problem.
inline RootProx root_prox(const std::vector<double>& z, double lambda, double fv, double p) {
  const int n = static_cast<int>(z.size());
  const double q = conjugate_exponent(p);
  RootProx r{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (fv <= 0.0) {
    r.w = z;
    return r;
  }
  const double mu = lambda * std::pow(fv, 1.0 / q);
  const double zq = lp_norm(z, q);
  if (zq <= mu) {
    // w = 0: any kappa with lambda kappa_i^{1/q} >= |z_i| works; take kappa ~ |z|^q
    double mx = 0.0;
    for (double x : z) mx = std::max(mx, std::abs(x));
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (r.kappa[i] = std::pow(std::abs(z[i]) / mx, q));
    for (double& k : r.kappa) k *= fv / s;
    return r;
  }
  if (std::isinf(p)) {
    const double tau = l1_threshold(z, mu);
    for (int i = 0; i < n; ++i) {
      const double a = std::abs(z[i]);
      r.w[i] = std::copysign(std::min(a, tau), z[i]);
      r.kappa[i] = std::max(0.0, a - tau) / lambda;
    }
    return r;
  }
  if (p == 2.0) {
    const double nz = lp_norm(z, 2.0);
    for (int i = 0; i < n; ++i) {
      r.w[i] = (1.0 - mu / nz) * z[i];
      r.kappa[i] = fv * (z[i] / nz) * (z[i] / nz);
    }
    return r;
  }
  // general p: |w_i| + mu |w_i|^{p-1} / rho^{p-1} = |z_i| with rho = ||w||_p
  auto solve_w = [&](double rho, std::vector<double>& w) {
    for (int i = 0; i < n; ++i) {
      const double a = std::abs(z[i]);
      double lo = 0.0, hi = a;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid + mu * std::pow(mid / rho, p - 1.0) > a) hi = mid;
        else lo = mid;
      }
      w[i] = 0.5 * (lo + hi);
    }
  };
  std::vector<double> w(n);
  double lo = 0.0, hi = lp_norm(z, p);
  for (int it = 0; it < 100; ++it) {
    const double rho = 0.5 * (lo + hi);
    solve_w(rho, w);
    if (lp_norm(w, p) > rho) lo = rho;
    else hi = rho;
  }
  solve_w(0.5 * (lo + hi), w);
  const double wp = lp_norm(w, p);
  for (int i = 0; i < n; ++i) {
    r.w[i] = std::copysign(w[i], z[i]);
    r.kappa[i] = fv * std::pow(w[i] / wp, p);
  }
  return r;
}

template <class O>
void prox_rec(const O& f, const std::vector<double>& z, const std::vector<int>& ids, double lambda, double p,
              std::vector<double>& x, int budget) {
  const int n = static_cast<int>(z.size());
  const auto sup = support_of(z);
  if (sup.empty()) return;
  if (static_cast<int>(sup.size()) < n) {
    prox_rec(f.restrict_to(sup), gather(z, sup), gather(ids, sup), lambda, p, x, budget);
    return;
  }
  if (budget < 0) throw NumericalError("prox decomposition exceeded its recursion bound");
  const double fv = f.full_value();
  const auto root = root_prox(z, lambda, fv, p);
  auto emit = [&](const std::vector<double>& w) {
    for (int i = 0; i < n; ++i) x[ids[i]] = w[i];
  };
  if (n == 1 || fv <= 0.0) return emit(root.w);
  auto [a, val] = f.sfm(root.kappa);
  if (val >= -1e-12 * std::max(1.0, fv) || a.empty() || static_cast<int>(a.size()) == n) return emit(root.w);
  const auto c = complement_of(a, n);
  prox_rec(f.restrict_to(a), gather(z, a), gather(ids, a), lambda, p, x, budget - 1);
  prox_rec(f.contract_by(a), gather(z, c), gather(ids, c), lambda, p, x, budget - 1);
}

}  // namespace detail

/// Leaves of the norm decomposition, in recursion order.
template <class O>
std::vector<DecompositionLeaf> decomposition_leaves(const O& f, const std::vector<double>& w, double p) {
  if (std::isinf(p)) throw InvalidArgument("the decomposition applies to finite p");
  std::vector<int> ids(w.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<DecompositionLeaf> out;
  detail::decompose(f, w, ids, p, out, f.size() + 1);
  return out;
}

/// Norm by recursive splitting (restriction / contraction) for submodular F;
/// p = inf uses the Lovász extension of |w|.
template <class O>
double decomposition_norm(const O& f, const std::vector<double>& w, double p) {
  if (static_cast<int>(w.size()) != f.size()) throw InvalidArgument("vector length does not match d");
  if (std::isinf(p)) {
    std::vector<double> a(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) a[i] = std::abs(w[i]);
    return lovasz_oracle(f, a);
  }
  const double q = conjugate_exponent(p);
  double total = 0.0;
  for (const auto& leaf : decomposition_leaves(f, w, p))
    total += std::pow(leaf.gain, 1.0 / q) * lp_norm(gather(w, leaf.ids), p);
  return total;
}

/// Proximal operator of lambda * Omega_p by the decomposition algorithm.
template <class O>
std::vector<double> decomposition_prox(const O& f, const std::vector<double>& z, double lambda, double p) {
  if (static_cast<int>(z.size()) != f.size()) throw InvalidArgument("vector length does not match d");
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  std::vector<double> x(z.size(), 0.0);
  std::vector<int> ids(z.size());
  std::iota(ids.begin(), ids.end(), 0);
  detail::prox_rec(f, z, ids, lambda, p, x, f.size() + 1);
  return x;
}

/// max_A t(A) / F(A) with t = |s|^q by Dinkelbach iterations over exact SFM;
/// returns the dual norm.
template <class O>
double dinkelbach_dual(const O& f, const std::vector<double>& s, double q) {
  const int n = f.size();
  if (static_cast<int>(s.size()) != n) throw InvalidArgument("vector length does not match d");
  double mx = 0.0;
  for (double x : s) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return 0.0;
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = std::pow(std::abs(s[i]) / mx, q);
  double gamma = 0.0;
  for (int i = 0; i < n; ++i) {
    if (t[i] == 0.0) continue;
    const double fi = f.value({i});
    if (fi <= 0.0) return kInf;
    if (fi != kInf) gamma = std::max(gamma, t[i] / fi);
  }
  if (gamma == 0.0) {
    // every singleton with mass is infinite; start from the full set
    double tv = std::accumulate(t.begin(), t.end(), 0.0);
    gamma = tv / f.full_value();
  }
  for (int it = 0; it < 10 * n + 100; ++it) {
    std::vector<double> tg(n);
    for (int i = 0; i < n; ++i) tg[i] = t[i] / gamma;
    auto [a, val] = f.sfm(tg);
    if (val >= -1e-12 || a.empty()) break;
    const double fa = f.value(a);
    if (fa <= 0.0) return kInf;
    double ta = 0.0;
    for (int i : a) ta += t[i];
    const double next = ta / fa;
    if (next <= gamma * (1.0 + 1e-10)) break;
    gamma = next;
  }
  return mx * std::pow(gamma, 1.0 / q);
}

// SetFunction-level API --------------------------------------------------

inline bool has_decomposition(const SetFunction& f) { return known_submodular(f) && has_sfm_oracle(f); }

inline bool is_range_family(const SetFunction& f) {
  return f.family() == Family::ModifiedRange || f.family() == Family::ProjectedRange2D;
}

/// max over A of ||s_A||_q / F(A)^{1/q} by enumeration (d <= 20).
inline double dual_norm_brute(const SetFunction& f, const std::vector<double>& s, double q) {
  check_length(f, s.size());
  if (f.d() > kMaxExhaustive) throw CapabilityError("brute-force dual norm requires d <= 20");
  double mx = 0.0;
  for (double x : s) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return 0.0;
  const std::uint64_t n = std::uint64_t{1} << f.d();
  std::vector<double> t(f.d()), sums(n, 0.0);
  for (int i = 0; i < f.d(); ++i) t[i] = std::pow(std::abs(s[i]) / mx, q);
  double best = 0.0;
  for (std::uint64_t m = 1; m < n; ++m) {
    sums[m] = sums[m & (m - 1)] + t[std::countr_zero(m)];
    if (sums[m] == 0.0) continue;
    const double fa = f(SubsetMask(m));
    if (fa == kInf) continue;
    if (fa <= 0.0) return kInf;
    best = std::max(best, sums[m] / fa);
  }
  return mx * std::pow(best, 1.0 / q);
}

/// Dual norm restricted to a candidate family (exact when the family is the core set).
inline double dual_norm_over(const CoreSet& core, const std::vector<double>& s, double q) {
  double mx = 0.0;
  for (double x : s) mx = std::max(mx, std::abs(x));
  if (mx == 0.0) return 0.0;
  double best = 0.0;
  for (std::size_t b = 0; b < core.sets.size(); ++b) {
    double ta = 0.0;
    core.sets[b].for_each([&](int i) { ta += std::pow(std::abs(s[i]) / mx, q); });
    best = std::max(best, ta / core.values[b]);
  }
  return mx * std::pow(best, 1.0 / q);
}

inline double dual_norm(const NormParams& np, const std::vector<double>& s) {
  check_length(np.F, s.size());
  if (np.core) return dual_norm_over(*np.core, s, np.q);
  if (is_range_family(np.F) || (np.F.d() > kMaxExhaustive && has_decomposition(np.F)))
    return dinkelbach_dual(MaskOracle(np.F), s, np.q);
  if (np.F.d() <= kMaxExhaustive) return dual_norm_brute(np.F, s, np.q);
  throw CapabilityError("dual norm needs d <= 20 or a submodular function with an SFM oracle");
}

namespace detail {

/// Undominated covering patterns on the support K, from the core set when
/// attached, otherwise from every finite-valued set.
struct LpPatterns {
  std::vector<int> support;
  std::vector<SubsetMask> cols;   // compressed to K
  std::vector<double> cost;
  std::vector<std::uint64_t> block;  // actual block in ground coordinates
};

inline LpPatterns lp_patterns(const NormParams& np, const std::vector<int>& support) {
  const SetFunction& f = np.F;
  LpPatterns lp;
  lp.support = support;
  const int k = static_cast<int>(support.size());
  if (k > 16) throw CapabilityError("the LP path supports at most 16 nonzero coordinates");
  const std::size_t npat = std::size_t{1} << k;
  PatternCosts pc{std::vector<double>(npat, kInf), std::vector<std::uint64_t>(npat, 0)};
  auto offer = [&](std::uint64_t m, double v) {
    if (v == kInf) return;
    const std::uint64_t pat = compress(m, support);
    if (pat != 0 && v < pc.cost[pat]) {
      pc.cost[pat] = v;
      pc.block[pat] = m;
    }
  };
  if (np.core) {
    for (std::size_t b = 0; b < np.core->sets.size(); ++b) offer(np.core->sets[b].bits(), np.core->values[b]);
  } else {
    if (f.d() > 16) throw CapabilityError("the LP path enumerates supports and requires d <= 16");
    const std::uint64_t n = std::uint64_t{1} << f.d();
    for (std::uint64_t m = 1; m < n; ++m) offer(m, f(SubsetMask(m)));
  }
  undominated(pc, k, lp.cols, lp.cost, &lp.block);
  return lp;
}

struct LpSolve {
  double value = 0.0;
  LpPatterns pat;
  std::vector<double> weights;  // delta (p = inf) or barrier multipliers y (p < inf), per column
};

inline LpSolve lp_norm_solve(const NormParams& np, const std::vector<double>& w) {
  check_length(np.F, w.size());
  LpSolve out;
  const auto support = support_of(w);
  if (support.empty()) return out;
  out.pat = lp_patterns(np, support);
  const int k = static_cast<int>(support.size());
  std::vector<double> a(k);
  double amax = 0.0;
  for (int i = 0; i < k; ++i) amax = std::max(amax, a[i] = std::abs(w[support[i]]));
  if (np.p_inf()) {
    auto res = solve_cover(k, out.pat.cols, out.pat.cost, a);
    if (res.status != LpStatus::Optimal) throw NumericalError("covering LP failed");
    out.value = res.value;
    out.weights = res.delta;
    return out;
  }
  const double q = np.q, p = np.p;
  double cmax = 0.0;
  for (double c : out.pat.cost) cmax = std::max(cmax, c);
  std::vector<double> cap(out.pat.cost);
  for (double& c : cap) c /= cmax;
  for (double& v : a) v /= amax;
  SeparableObjective phi = [&](const Eigen::VectorXd& kap, double& val, Eigen::VectorXd& g, Eigen::VectorXd& h) {
    val = 0.0;
    for (int i = 0; i < k; ++i) {
      const double kp = std::pow(kap[i], 1.0 / q);
      val += a[i] * kp;
      g[i] = a[i] / q * kp / kap[i];
      h[i] = a[i] / q * (1.0 / q - 1.0) * kp / (kap[i] * kap[i]);
    }
  };
  auto upper = [&](const Eigen::VectorXd& y) {
    std::vector<double> Y(k, 0.0);
    double u = 0.0;
    for (std::size_t b = 0; b < cap.size(); ++b) {
      u += y[b] * cap[b];
      out.pat.cols[b].for_each([&](int i) { Y[i] += y[b]; });
    }
    for (int i = 0; i < k; ++i)
      u += std::exp(p * std::log(a[i]) + (1.0 - p) * std::log(q * Y[i]) - std::log(p));
    return u;
  };
  auto res = barrier_maximize(k, out.pat.cols, cap, phi, 1e-12, upper);
  out.value = amax * std::pow(cmax, 1.0 / q) * res.value;
  out.weights.assign(res.y.data(), res.y.data() + res.y.size());
  return out;
}

}  // namespace detail

/// Norm through the latent-decomposition program over enumerated supports:
/// a covering LP for p = inf, a certified barrier method otherwise.
inline double norm_lp(const NormParams& np, const std::vector<double>& w) {
  return detail::lp_norm_solve(np, w).value;
}

inline double norm(const NormParams& np, const std::vector<double>& w) {
  check_length(np.F, w.size());
  if (has_decomposition(np.F)) return decomposition_norm(MaskOracle(np.F), w, np.p);
  return norm_lp(np, w);
}

/// Theta(w) = F(Supp w)^{1/q} ||w||_p.
inline double theta(const NormParams& np, const std::vector<double>& w) {
  check_length(np.F, w.size());
  const auto s = SubsetMask::from_indices(detail::support_of(w));
  if (s.empty()) return 0.0;
  const double fs = np.F(s);
  if (fs == kInf) return kInf;
  return std::pow(fs, 1.0 / np.q) * lp_norm(w, np.p);
}

struct LatentDecomposition {
  std::vector<SubsetMask> blocks;
  std::vector<std::vector<double>> vectors;
  std::vector<double> delta;  ///< cover weights (p = inf) or q * multipliers
  double objective = 0.0;     ///< sum F(B)^{1/q} ||v^B||_p
};

/// Optimal latent vectors v^B with sum_B v^B = w, supported on core sets.
inline LatentDecomposition latent_decomposition(const NormParams& np, const std::vector<double>& w) {
  LatentDecomposition out;
  const NormParams cp = np.core || np.F.d() > 14 ? np : np.with_core_set();
  auto sol = detail::lp_norm_solve(cp, w);
  const auto& pat = sol.pat;
  if (pat.support.empty()) return out;
  const int k = static_cast<int>(pat.support.size());
  std::vector<double> weight(sol.weights);
  if (!np.p_inf())
    for (double& v : weight) v *= np.q;
  double wmax = 0.0;
  for (double v : weight) wmax = std::max(wmax, v);
  std::vector<char> keep(weight.size());
  for (std::size_t b = 0; b < weight.size(); ++b) keep[b] = weight[b] > 1e-9 * wmax;
  std::vector<double> eta(k, 0.0);
  for (std::size_t b = 0; b < weight.size(); ++b)
    if (keep[b]) pat.cols[b].for_each([&](int i) { eta[i] += weight[b]; });
  for (int i = 0; i < k; ++i)
    if (eta[i] <= 0.0) throw NumericalError("latent decomposition lost a coordinate");
  for (std::size_t b = 0; b < weight.size(); ++b) {
    if (!keep[b]) continue;
    std::vector<double> v(w.size(), 0.0);
    pat.cols[b].for_each([&](int i) { v[pat.support[i]] = w[pat.support[i]] * weight[b] / eta[i]; });
    out.blocks.push_back(SubsetMask(pat.block[b]));
    out.vectors.push_back(std::move(v));
    out.delta.push_back(weight[b]);
    out.objective += std::pow(pat.cost[b], 1.0 / np.q) * lp_norm(out.vectors.back(), np.p);
  }
  return out;
}

/// Proximal operator by the decomposition algorithm (submodular F).
inline std::vector<double> prox(const NormParams& np, double lambda, const std::vector<double>& z) {
  check_length(np.F, z.size());
  if (!has_decomposition(np.F))
    throw CapabilityError("prox by decomposition needs a submodular function with an SFM oracle");
  return decomposition_prox(MaskOracle(np.F), z, lambda, np.p);
}

/// Proximal operator through the separable kappa-form
///   max sum_i psi_i(kappa_i)  over  kappa in P_F,
/// solved by a barrier method over enumerated constraints. x is read off as a
/// soft threshold, which makes z - x dual-feasible by construction. Falls back
/// to the decomposition for large submodular F.
inline std::vector<double> prox_generic(const NormParams& np, double lambda, const std::vector<double>& z) {
  check_length(np.F, z.size());
  if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
  const auto support = detail::support_of(z);
  std::vector<double> x(z.size(), 0.0);
  if (support.empty()) return x;
  const bool enumerable = np.core || np.F.d() <= 16;
  if (!enumerable || support.size() > 16) {
    if (has_decomposition(np.F)) return decomposition_prox(MaskOracle(np.F), z, lambda, np.p);
    throw CapabilityError("prox_generic needs enumerable supports or a submodular function");
  }
  const auto pat = detail::lp_patterns(np, support);
  const int k = static_cast<int>(support.size());
  const double q = np.q;
  double zmax = 0.0, cmax = 0.0;
  for (int i : support) zmax = std::max(zmax, std::abs(z[i]));
  for (double c : pat.cost) cmax = std::max(cmax, c);
  std::vector<double> cap(pat.cost), az(k);
  for (double& c : cap) c /= cmax;
  for (int i = 0; i < k; ++i) az[i] = std::abs(z[support[i]]) / zmax;
  const double lam = lambda / zmax * std::pow(cmax, 1.0 / q);
  SeparableObjective psi = [&](const Eigen::VectorXd& kap, double& val, Eigen::VectorXd& g, Eigen::VectorXd& h) {
    val = 0.0;
    for (int i = 0; i < k; ++i) {
      const double kp = std::pow(kap[i], 1.0 / q);
      const double tau = lam * kp;
      const double d1 = lam / q * kp / kap[i];
      const double d2 = d1 * (1.0 / q - 1.0) / kap[i];
      if (tau < az[i]) {
        val += tau * az[i] - 0.5 * tau * tau;
        g[i] = (az[i] - tau) * d1;
        h[i] = -d1 * d1 + (az[i] - tau) * d2;
      } else {
        val += 0.5 * az[i] * az[i];
        g[i] = 0.0;
        h[i] = 0.0;
      }
    }
  };
  // dual bound: sum_B y_B cap_B + sum_i max_u [h_i(lam u) - Y_i u^q], u = kappa^{1/q} in [0, |z_i| / lam]
  auto upper = [&](const Eigen::VectorXd& y) {
    std::vector<double> Y(k, 0.0);
    double u = 0.0;
    for (std::size_t b = 0; b < cap.size(); ++b) {
      u += y[b] * cap[b];
      pat.cols[b].for_each([&](int i) { Y[i] += y[b]; });
    }
    for (int i = 0; i < k; ++i) {
      double lo = 0.0, hi = az[i] / lam;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double slope = lam * (az[i] - lam * mid) - q * Y[i] * std::pow(mid, q - 1.0);
        if (slope > 0.0) lo = mid;
        else hi = mid;
      }
      const double um = 0.5 * (lo + hi), tau = lam * um;
      u += tau * az[i] - 0.5 * tau * tau - Y[i] * std::pow(um, q);
    }
    return u;
  };
  auto res = barrier_maximize(k, pat.cols, cap, psi, 1e-13, upper);
  for (int i = 0; i < k; ++i) {
    const double tau = lam * std::pow(res.kappa[i], 1.0 / q);
    x[support[i]] = zmax * std::copysign(std::max(0.0, az[i] - tau), z[support[i]]);
  }
  return x;
}

struct LevelDecomposition {
  std::vector<SubsetMask> sets;
  std::vector<double> eta;
  std::vector<double> gains;

  /// sum_j g_j^{1/q} ||w_{A_j}||_p
  double reconstruct(const std::vector<double>& w, double p) const {
    const double q = conjugate_exponent(p);
    double total = 0.0;
    for (std::size_t j = 0; j < sets.size(); ++j)
      total += std::pow(gains[j], 1.0 / q) * lp_norm(gather(w, sets[j].indices()), p);
    return total;
  }
};

/// Ordered level sets of the optimal eta for submodular F.
inline LevelDecomposition eta_decomposition(const NormParams& np, const std::vector<double>& w) {
  check_length(np.F, w.size());
  if (!has_decomposition(np.F)) throw CapabilityError("eta decomposition needs a submodular function with SFM");
  if (detail::support_of(w).empty()) throw InvalidArgument("eta decomposition of the zero vector");
  struct Level {
    SubsetMask set;
    double eta;
  };
  std::vector<Level> levels;
  if (np.p_inf()) {
    std::vector<double> a(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) a[i] = std::abs(w[i]);
    for (int i : decreasing_order(a)) {
      if (a[i] == 0.0) break;
      if (!levels.empty() && same_value(levels.back().eta, a[i])) levels.back().set = levels.back().set.with(i);
      else levels.push_back({SubsetMask::singleton(i), a[i]});
    }
  } else {
    for (const auto& leaf : decomposition_leaves(MaskOracle(np.F), w, np.p)) {
      const double e = lp_norm(gather(w, leaf.ids), np.p) / std::pow(leaf.gain, 1.0 / np.p);
      levels.push_back({SubsetMask::from_indices(leaf.ids), e});
    }
    std::stable_sort(levels.begin(), levels.end(), [](const Level& x, const Level& y) { return x.eta > y.eta; });
    std::vector<Level> merged;
    for (const auto& l : levels) {
      if (!merged.empty() && std::abs(merged.back().eta - l.eta) <= 1e-9 * merged.back().eta)
        merged.back().set = merged.back().set | l.set;
      else merged.push_back(l);
    }
    levels.swap(merged);
  }
  LevelDecomposition out;
  SubsetMask prefix;
  double prev = 0.0;
  for (const auto& l : levels) {
    prefix = prefix | l.set;
    const double cur = np.F(prefix);
    out.sets.push_back(l.set);
    out.gains.push_back(cur - prev);
    prev = cur;
  }
  for (std::size_t j = 0; j < out.sets.size(); ++j) {
    const double wn = lp_norm(gather(w, out.sets[j].indices()), np.p);
    out.eta.push_back(np.p_inf() ? wn : wn / std::pow(out.gains[j], 1.0 / np.p));
  }
  return out;
}

/// The p = 1 case is the weighted l1 norm with d_k = max_{A containing k} F(A).
inline std::vector<double> weighted_l1_weights(const SetFunction& f) {
  if (f.d() > kMaxExhaustive) throw CapabilityError("weighted l1 weights require d <= 20");
  std::vector<double> dk(f.d(), 0.0);
  const std::uint64_t n = std::uint64_t{1} << f.d();
  for (std::uint64_t m = 1; m < n; ++m) {
    const double v = f(SubsetMask(m));
    if (v == kInf) continue;
    SubsetMask(m).for_each([&](int i) { dk[i] = std::max(dk[i], v); });
  }
  return dk;
}

inline double weighted_l1_norm(const std::vector<double>& dk, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += dk[i] * std::abs(w[i]);
  return s;
}

/// Scale making (q mu)^{1/q} (p nu)^{1/p} Omega_p the tightest convex
/// positively homogeneous lower bound of mu F(Supp w) + nu ||w||_p^p.
inline double relaxation_constant(double p, double mu, double nu) {
  if (!(mu > 0.0) || !(nu > 0.0)) throw InvalidArgument("mu and nu must be > 0");
  const double q = conjugate_exponent(p);
  if (std::isinf(p)) return q * mu;
  return std::pow(q * mu, 1.0 / q) * std::pow(p * nu, 1.0 / p);
}

}  // namespace struktnorm
