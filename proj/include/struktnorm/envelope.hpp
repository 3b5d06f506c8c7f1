#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "struktnorm/simplex.hpp"
#include "struktnorm/submod.hpp"

namespace struktnorm {

namespace detail {

/// Cheapest finite block per trace pattern on A: cost[P] = min F(B) over B
/// with B & A = P, P in compressed coordinates of A (bit r = r-th element).
struct PatternCosts {
  std::vector<double> cost;
  std::vector<std::uint64_t> block;  // argmin B (base-local mask)
};

inline std::uint64_t compress(std::uint64_t b, const std::vector<int>& idx) {
  std::uint64_t out = 0;
  for (std::size_t r = 0; r < idx.size(); ++r)
    if ((b >> idx[r]) & 1u) out |= std::uint64_t{1} << r;
  return out;
}

inline PatternCosts pattern_costs(const SetFunction& f, SubsetMask a, SubsetMask excluded = SubsetMask(~0ull)) {
  if (f.d() > kMaxExhaustive) throw CapabilityError("envelope computations require d <= 20");
  const auto idx = a.indices();
  const std::size_t np = std::size_t{1} << idx.size();
  PatternCosts pc{std::vector<double>(np, kInf), std::vector<std::uint64_t>(np, 0)};
  const std::uint64_t n = std::uint64_t{1} << f.d();
  for (std::uint64_t m = 1; m < n; ++m) {
    if (m == excluded.bits()) continue;
    const double v = f(SubsetMask(m));
    if (v == kInf) continue;
    const std::uint64_t p = compress(m, idx);
    if (v < pc.cost[p]) {
      pc.cost[p] = v;
      pc.block[p] = m;
    }
  }
  pc.cost[0] = kInf;  // blocks missing A are useless for covering A
  return pc;
}

/// Keeps patterns not dominated by a superset pattern of no larger cost.
inline void undominated(const PatternCosts& pc, int k, std::vector<SubsetMask>& cols, std::vector<double>& cost,
                        std::vector<std::uint64_t>* blocks = nullptr) {
  const std::size_t np = pc.cost.size();
  std::vector<double> sup(pc.cost);  // min over strict-or-equal supersets
  for (int r = 0; r < k; ++r)
    for (std::size_t p = 0; p < np; ++p)
      if (!((p >> r) & 1u)) sup[p] = std::min(sup[p], sup[p | (std::size_t{1} << r)]);
  for (std::size_t p = 1; p < np; ++p) {
    if (pc.cost[p] == kInf) continue;
    double strict = kInf;
    for (int r = 0; r < k; ++r)
      if (!((p >> r) & 1u)) strict = std::min(strict, sup[p | (std::size_t{1} << r)]);
    if (strict <= pc.cost[p]) continue;
    cols.push_back(SubsetMask(p));
    cost.push_back(pc.cost[p]);
    if (blocks) blocks->push_back(pc.block[p]);
  }
}

}  // namespace detail

/// Fractional set-cover value of A via the covering LP (never short-circuited).
inline double lce_lp(const SetFunction& f, SubsetMask a) {
  if (!a.within(f.d())) throw InvalidArgument("subset outside the ground set");
  if (a.empty()) return 0.0;
  if (f.d() > 16) throw CapabilityError("LCE by linear programming requires d <= 16");
  const int k = a.size();
  const auto pc = detail::pattern_costs(f, a);
  std::vector<SubsetMask> cols;
  std::vector<double> cost;
  detail::undominated(pc, k, cols, cost);
  auto res = solve_cover(k, cols, cost, std::vector<double>(k, 1.0));
  if (res.status != LpStatus::Optimal) throw NumericalError("covering LP failed for a coverable set");
  return res.value;
}

/// Lower combinatorial envelope F_-(A).
inline double lce(const SetFunction& f, SubsetMask a) {
  if (a.empty()) return 0.0;
  if (f.claims().submodular == Claim::Yes) return f(a);
  return lce_lp(f, a);
}

struct CoverSolution {
  double value = kInf;
  std::vector<SubsetMask> blocks;
  std::vector<double> weights;
};

/// Minimum weighted integer cover of B by finite-valued sets (exact DP).
inline CoverSolution integer_cover(const SetFunction& f, SubsetMask b) {
  if (!b.within(f.d())) throw InvalidArgument("subset outside the ground set");
  CoverSolution out;
  if (b.empty()) {
    out.value = 0.0;
    return out;
  }
  if (f.d() > 16) throw CapabilityError("integer cover requires d <= 16");
  const int k = b.size();
  auto pc = detail::pattern_costs(f, b);
  const std::size_t np = pc.cost.size();
  // best single block covering at least T
  std::vector<double> best(pc.cost);
  std::vector<std::uint64_t> arg(pc.block);
  for (int r = 0; r < k; ++r)
    for (std::size_t p = 0; p < np; ++p)
      if (!((p >> r) & 1u)) {
        const std::size_t q = p | (std::size_t{1} << r);
        if (best[q] < best[p]) {
          best[p] = best[q];
          arg[p] = arg[q];
        }
      }
  std::vector<double> cover(np, kInf);
  std::vector<std::size_t> pick(np, 0);
  cover[0] = 0.0;
  for (std::size_t s = 1; s < np; ++s) {
    const std::size_t low = s & (~s + 1);
    const std::size_t rest = s & ~low;
    for (std::size_t sub = rest;; sub = (sub - 1) & rest) {
      const std::size_t tmask = sub | low;
      const double v = best[tmask] + cover[s & ~tmask];
      if (v < cover[s]) {
        cover[s] = v;
        pick[s] = tmask;
      }
      if (sub == 0) break;
    }
  }
  if (cover[np - 1] == kInf) return out;
  out.value = cover[np - 1];
  for (std::size_t s = np - 1; s != 0; s &= ~pick[s]) {
    out.blocks.push_back(SubsetMask(arg[pick[s]]));
    out.weights.push_back(1.0);
  }
  return out;
}

/// Non-redundant constraints of the canonical polyhedron. A finite set A is
/// kept iff the covering LP of A without A's own constraint exceeds F(A);
/// an exact tie means the constraint is implied and is dropped.
inline CoreSet core_set(const SetFunction& f) {
  if (f.d() > 14) throw CapabilityError("core set extraction requires d <= 14");
  const int d = f.d();
  const std::uint64_t n = std::uint64_t{1} << d;
  const auto t = f.table();
  CoreSet out;
  for (std::uint64_t m = 1; m < n; ++m) {
    const double fa = t[m];
    if (fa == kInf) continue;
    const SubsetMask a(m);
    const double tol = 1e-7 * std::max(1.0, fa);
    // cheap implications: a superset no more expensive, or a cheaper split
    bool implied = false;
    for (std::uint64_t sup = (m + 1) | m; sup < n && !implied; sup = (sup + 1) | m)
      implied = t[sup] <= fa;
    if (!implied) {
      const std::uint64_t low = m & (~m + 1), rest = m & ~low;
      for (std::uint64_t sub = rest; sub != 0 && !implied; sub = (sub - 1) & rest) {
        const std::uint64_t part = sub | low;
        if (part == m) continue;
        implied = t[part] + t[m & ~part] <= fa;
      }
    }
    if (implied) continue;
    const auto pc = detail::pattern_costs(f, a, a);
    std::vector<SubsetMask> cols;
    std::vector<double> cost;
    detail::undominated(pc, a.size(), cols, cost);
    double value = kInf;
    if (!cols.empty()) {
      auto res = solve_cover(a.size(), cols, cost, std::vector<double>(a.size(), 1.0));
      if (res.status == LpStatus::Optimal) value = res.value;
    }
    if (value > fa + tol) {
      out.sets.push_back(a);
      out.values.push_back(fa);
    } else if (value > fa - tol) {
      out.near_ties.push_back(a);
    }
  }
  return out;
}

/// Upper combinatorial envelope: F on the core set, +inf elsewhere.
inline SetFunction uce(const SetFunction& f, const CoreSet& core) {
  return SetFunction::block_code(f.d(), core.sets, core.values);
}

/// Materialized lower envelope as a table.
inline SetFunction lce_function(const SetFunction& f) {
  if (f.d() > 12) throw CapabilityError("materializing the LCE requires d <= 12");
  std::vector<double> t(std::size_t{1} << f.d());
  for (std::uint64_t m = 0; m < t.size(); ++m) t[m] = lce_lp(f, SubsetMask(m));
  return SetFunction::explicit_table(f.d(), std::move(t));
}

struct MembershipResult {
  bool inside = true;
  SubsetMask violated;  ///< most violated constraint when outside
  double excess = 0.0;  ///< s(A) - F(A) at that constraint
};

/// s in P_F  iff  s >= 0 and s(A) <= F(A) for all A.
inline MembershipResult polyhedron_member(const SetFunction& f, const std::vector<double>& s, double tol = 1e-9) {
  check_length(f, s.size());
  for (double v : s)
    if (v < 0.0) throw InvalidArgument("polyhedron membership expects a nonnegative vector");
  MembershipResult out;
  if (f.d() <= kMaxExhaustive) {
    const std::uint64_t n = std::uint64_t{1} << f.d();
    double worst = -kInf;
    for (std::uint64_t m = 1; m < n; ++m) {
      const SubsetMask a(m);
      const double fa = f(a);
      if (fa == kInf) continue;
      const double ex = subset_sum(s, a) - fa;
      if (ex > worst) {
        worst = ex;
        out.violated = a;
      }
    }
    out.excess = worst;
    out.inside = !(worst > tol * std::max(1.0, std::abs(f(out.violated))));
    if (out.inside) out.violated = SubsetMask();
    return out;
  }
  if (!known_submodular(f)) throw CapabilityError("membership for d > 20 requires a submodular function");
  const auto r = sfm(f, s);
  out.excess = -r.value;
  out.inside = !(out.excess > tol * std::max(1.0, f(r.a)));
  if (!out.inside) out.violated = r.a;
  return out;
}

/// Set function A -> g(1_A).
inline SetFunction induced_setfn(const std::function<double(const std::vector<double>&)>& g, int d) {
  if (d < 1 || d > kMaxExhaustive) throw InvalidArgument("induced set function requires 1 <= d <= 20");
  std::vector<double> t(std::size_t{1} << d);
  std::vector<double> ind(d);
  for (std::uint64_t m = 0; m < t.size(); ++m) {
    for (int i = 0; i < d; ++i) ind[i] = ((m >> i) & 1u) ? 1.0 : 0.0;
    t[m] = g(ind);
    if (!std::isfinite(t[m])) throw InvalidArgument("induced set function needs finite g values");
  }
  return SetFunction::explicit_table(d, std::move(t));
}

}  // namespace struktnorm
