#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "struktnorm/subset.hpp"

namespace struktnorm {

enum class Family {
  ExplicitTable,
  Cardinality,
  IndicatorNonEmpty,
  PartitionGroupCount,
  OverlapCount,
  Range,
  ModifiedRange,
  ProjectedRange2D,
  ExclusiveHard,
  ExclusiveMaxOverlap,
  BlockCode,
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::ExplicitTable: return "table";
    case Family::Cardinality: return "cardinality";
    case Family::IndicatorNonEmpty: return "indicator_nonempty";
    case Family::PartitionGroupCount: return "partition_group_count";
    case Family::OverlapCount: return "overlap_count";
    case Family::Range: return "range";
    case Family::ModifiedRange: return "modified_range";
    case Family::ProjectedRange2D: return "projected_range_2d";
    case Family::ExclusiveHard: return "exclusive_hard";
    case Family::ExclusiveMaxOverlap: return "exclusive_max_overlap";
    case Family::BlockCode: return "block_code";
  }
  return "?";
}

enum class Claim { Unknown, Yes, No };

/// Structural properties. Structured families ship proven claims; tables
/// start out Unknown until a checker runs.
struct Claims {
  Claim monotone = Claim::Unknown;
  Claim submodular = Claim::Unknown;
};

namespace detail {

/// Base function over the original ground set {0..d-1}.
struct Body {
  Family family = Family::Cardinality;
  int d = 0;
  std::vector<double> table;           // ExplicitTable, size 2^d, +inf allowed
  std::vector<SubsetMask> groups;      // group / block families
  std::vector<double> weights;         // per group (counts) or per block (costs)
  std::unordered_map<std::uint64_t, double> block_cost;
  int d1 = 0, d2 = 0;                  // ProjectedRange2D grid, index k = row * d2 + col

  double eval(SubsetMask a) const {
    if (a.empty()) return 0.0;
    switch (family) {
      case Family::ExplicitTable: return table[a.bits()];
      case Family::Cardinality: return a.size();
      case Family::IndicatorNonEmpty: return 1.0;
      case Family::PartitionGroupCount:
      case Family::OverlapCount: {
        double s = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g)
          if (!(groups[g] & a).empty()) s += weights[g];
        return s;
      }
      case Family::Range: return a.max_index() - a.min_index() + 1;
      case Family::ModifiedRange: return d + a.max_index() - a.min_index();
      case Family::ProjectedRange2D: {
        int rmin = d1, rmax = -1, cmin = d2, cmax = -1;
        a.for_each([&](int k) {
          const int r = k / d2, c = k % d2;
          rmin = std::min(rmin, r);
          rmax = std::max(rmax, r);
          cmin = std::min(cmin, c);
          cmax = std::max(cmax, c);
        });
        return (d1 + rmax - rmin) + (d2 + cmax - cmin);
      }
      case Family::ExclusiveHard:
      case Family::ExclusiveMaxOverlap: {
        int m = 0;
        for (auto g : groups) m = std::max(m, (g & a).size());
        if (family == Family::ExclusiveMaxOverlap) return m;
        return m <= 1 ? 1.0 : kInf;
      }
      case Family::BlockCode: {
        auto it = block_cost.find(a.bits());
        return it == block_cost.end() ? kInf : it->second;
      }
    }
    return kInf;
  }
};

}  // namespace detail

/// A set function F: 2^V -> [0, +inf] with F(empty) = 0.
///
/// Internally a function is a minor of a base family member: restriction and
/// contraction never materialize a table, they re-index the ground set and
/// remember the contracted base set. A minor evaluates
///   G(A) = F_base(map(A) | C) - F_base(C).
/// Values are returned as doubles (+inf for infinite); `evaluate` returns the
/// checked ExtReal form.
class SetFunction {
 public:
  SetFunction() = default;

  int d() const { return d_; }
  Family family() const { return base_->family; }
  const Claims& claims() const { return claims_; }
  bool is_minor() const { return !map_.empty() || !contracted_.empty(); }

  double operator()(SubsetMask a) const {
    if (map_.empty()) {
      if (contracted_.empty()) return base_->eval(a);
      return minus_offset(base_->eval(a | contracted_));
    }
    return minus_offset(base_->eval(to_base(a) | contracted_));
  }

  ExtReal evaluate(SubsetMask a) const {
    if (!a.within(d_)) throw InvalidArgument("subset outside the ground set");
    return ExtReal((*this)(a));
  }

  /// Restriction F_J: A -> F(A & J), ground re-indexed to J (ascending).
  SetFunction restrict_to(SubsetMask j) const {
    if (j.empty()) throw InvalidArgument("restriction to the empty set");
    if (!j.within(d_)) throw InvalidArgument("restriction set outside the ground set");
    SetFunction r = *this;
    r.map_.clear();
    j.for_each([&](int i) { r.map_.push_back(base_index(i)); });
    r.d_ = j.size();
    r.claims_ = {keep_yes(claims_.monotone), keep_yes(claims_.submodular)};
    r.normalize_map();
    return r;
  }

  /// Contraction F^J: A -> F(A | J) - F(J), ground re-indexed to V \ J.
  SetFunction contract_by(SubsetMask j) const {
    if (!j.within(d_)) throw InvalidArgument("contraction set outside the ground set");
    if (j == SubsetMask::full(d_)) throw InvalidArgument("contraction by the whole ground set leaves no variables");
    const double fj = (*this)(j);
    if (fj == kInf) throw InvalidArgument("contraction requires F(J) finite");
    SetFunction r = *this;
    r.map_.clear();
    for (int i = 0; i < d_; ++i)
      if (!j.contains(i)) r.map_.push_back(base_index(i));
    r.contracted_ = contracted_ | to_base(j);
    r.offset_ = base_->eval(r.contracted_);
    r.d_ = d_ - j.size();
    r.claims_ = {keep_yes(claims_.monotone), keep_yes(claims_.submodular)};
    r.normalize_map();
    return r;
  }

  SetFunction with_claims(Claims c) const {
    SetFunction r = *this;
    r.claims_ = c;
    return r;
  }

  /// Dense table of all 2^d values.
  std::vector<double> table() const {
    if (d_ > kMaxExhaustive) throw CapabilityError("table materialization requires d <= 20");
    std::vector<double> t(std::size_t{1} << d_);
    for (std::uint64_t m = 0; m < t.size(); ++m) t[m] = (*this)(SubsetMask(m));
    return t;
  }

  // Structure access for specialized oracles.
  const detail::Body& base() const { return *base_; }
  int base_index(int i) const { return map_.empty() ? i : map_[i]; }
  SubsetMask contracted() const { return contracted_; }
  double offset() const { return offset_; }
  SubsetMask to_base(SubsetMask a) const {
    if (map_.empty()) return a;
    std::uint64_t b = 0;
    a.for_each([&](int i) { b |= std::uint64_t{1} << map_[i]; });
    return SubsetMask(b);
  }

  // Factories -----------------------------------------------------------

  static SetFunction explicit_table(int d, std::vector<double> values) {
    check_d(d);
    if (d > kMaxExhaustive) throw InvalidArgument("explicit tables require d <= 20");
    if (values.size() != (std::size_t{1} << d))
      throw InvalidArgument("table must have 2^d entries");
    if (values[0] != 0.0) throw InvalidArgument("F(empty) must be 0");
    SubsetMask covered;
    for (std::uint64_t m = 1; m < values.size(); ++m) {
      const double v = values[m];
      if (std::isnan(v) || v <= 0.0)
        throw InvalidArgument("F(A) must be > 0 for nonempty A (violated at " + to_string(SubsetMask(m)) + ")");
      if (v != kInf) covered = covered | SubsetMask(m);
    }
    if (covered != SubsetMask::full(d)) throw InvalidArgument("domain of F does not cover V");
    auto b = std::make_shared<detail::Body>();
    b->family = Family::ExplicitTable;
    b->d = d;
    b->table = std::move(values);
    return SetFunction(std::move(b), {});
  }

  static SetFunction cardinality(int d) { return simple(Family::Cardinality, d, {Claim::Yes, Claim::Yes}); }
  static SetFunction indicator_nonempty(int d) {
    return simple(Family::IndicatorNonEmpty, d, {Claim::Yes, Claim::Yes});
  }
  static SetFunction range(int d) {
    return simple(Family::Range, d, {Claim::Yes, d <= 2 ? Claim::Yes : Claim::No});
  }
  /// F(A) = d - 1 + range(A) for nonempty A.
  static SetFunction modified_range(int d) {
    return simple(Family::ModifiedRange, d, {Claim::Yes, Claim::Yes});
  }
  /// F(A) = MR_{d1}(rows(A)) + MR_{d2}(cols(A)); element k sits at (k / d2, k % d2).
  static SetFunction projected_range_2d(int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw InvalidArgument("grid dimensions must be positive");
    auto f = simple(Family::ProjectedRange2D, d1 * d2, {Claim::Yes, Claim::Yes});
    auto b = std::make_shared<detail::Body>(*f.base_);
    b->d1 = d1;
    b->d2 = d2;
    f.base_ = std::move(b);
    return f;
  }

  static SetFunction partition_group_count(int d, std::vector<SubsetMask> groups, std::vector<double> weights = {}) {
    check_partition(d, groups);
    return grouped(Family::PartitionGroupCount, d, std::move(groups), std::move(weights));
  }
  static SetFunction overlap_count(int d, std::vector<SubsetMask> groups, std::vector<double> weights = {}) {
    return grouped(Family::OverlapCount, d, std::move(groups), std::move(weights));
  }
  static SetFunction exclusive_hard(int d, std::vector<SubsetMask> partition) {
    check_partition(d, partition);
    auto f = grouped(Family::ExclusiveHard, d, std::move(partition), {});
    f.claims_ = {Claim::Yes, Claim::Unknown};
    return f;
  }
  static SetFunction exclusive_max_overlap(int d, std::vector<SubsetMask> partition) {
    check_partition(d, partition);
    auto f = grouped(Family::ExclusiveMaxOverlap, d, std::move(partition), {});
    f.claims_ = {Claim::Yes, Claim::Unknown};
    return f;
  }
  /// Finite costs on the listed blocks, +inf on every other nonempty set.
  static SetFunction block_code(int d, std::vector<SubsetMask> blocks, std::vector<double> costs) {
    check_d(d);
    if (blocks.size() != costs.size()) throw InvalidArgument("block_code needs one cost per block");
    auto b = std::make_shared<detail::Body>();
    b->family = Family::BlockCode;
    b->d = d;
    SubsetMask covered;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      if (blocks[i].empty() || !blocks[i].within(d)) throw InvalidArgument("invalid block");
      if (!(costs[i] > 0.0) || !std::isfinite(costs[i])) throw InvalidArgument("block costs must be finite and > 0");
      auto [it, fresh] = b->block_cost.emplace(blocks[i].bits(), costs[i]);
      if (!fresh) throw InvalidArgument("duplicate block " + to_string(blocks[i]));
      covered = covered | blocks[i];
    }
    if (covered != SubsetMask::full(d)) throw InvalidArgument("blocks do not cover V");
    b->groups = std::move(blocks);
    b->weights = std::move(costs);
    return SetFunction(std::move(b), {});
  }

  /// Block code of the three pairs of {1,2,3}, unit costs.
  static SetFunction pairs_block_code() {
    return block_code(3, {SubsetMask(0b011), SubsetMask(0b110), SubsetMask(0b101)}, {1.0, 1.0, 1.0});
  }

 private:
  SetFunction(std::shared_ptr<const detail::Body> b, Claims c) : base_(std::move(b)), d_(base_->d), claims_(c) {}

  static void check_d(int d) {
    if (d < 1 || d > kMaxGround) throw InvalidArgument("ground set size must be in 1..64");
  }
  static Claim keep_yes(Claim c) { return c == Claim::Yes ? Claim::Yes : Claim::Unknown; }

  static SetFunction simple(Family f, int d, Claims c) {
    check_d(d);
    auto b = std::make_shared<detail::Body>();
    b->family = f;
    b->d = d;
    return SetFunction(std::move(b), c);
  }

  static void check_partition(int d, const std::vector<SubsetMask>& groups) {
    SubsetMask seen;
    for (auto g : groups) {
      if (g.empty() || !g.within(d)) throw InvalidArgument("invalid group in partition");
      if (!(seen & g).empty()) throw InvalidArgument("groups overlap; not a partition");
      seen = seen | g;
    }
    if (seen != SubsetMask::full(d)) throw InvalidArgument("groups do not cover V");
  }

  static SetFunction grouped(Family f, int d, std::vector<SubsetMask> groups, std::vector<double> weights) {
    check_d(d);
    if (weights.empty()) weights.assign(groups.size(), 1.0);
    if (weights.size() != groups.size()) throw InvalidArgument("one weight per group required");
    SubsetMask covered;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].empty() || !groups[g].within(d)) throw InvalidArgument("invalid group");
      if (!(weights[g] > 0.0) || !std::isfinite(weights[g])) throw InvalidArgument("group weights must be finite and > 0");
      covered = covered | groups[g];
    }
    if (covered != SubsetMask::full(d)) throw InvalidArgument("groups do not cover V");
    auto b = std::make_shared<detail::Body>();
    b->family = f;
    b->d = d;
    b->groups = std::move(groups);
    b->weights = std::move(weights);
    return SetFunction(std::move(b), {Claim::Yes, Claim::Yes});
  }

  double minus_offset(double v) const { return v == kInf ? kInf : v - offset_; }

  void normalize_map() {
    bool identity = contracted_.empty() && static_cast<int>(map_.size()) == base_->d;
    for (std::size_t i = 0; identity && i < map_.size(); ++i) identity = map_[i] == static_cast<int>(i);
    if (identity) map_.clear();
  }

  std::shared_ptr<const detail::Body> base_;
  int d_ = 0;
  std::vector<int> map_;     // local index -> base index; empty means identity
  SubsetMask contracted_;    // base-coordinates contracted set C
  double offset_ = 0.0;      // F_base(C)
  Claims claims_;
};

/// The overlap-count function of the 1D interval group system
/// {[1,k]} u {[k,d]} (as a set of groups, V counted once).
inline std::vector<SubsetMask> interval_groups_1d(int d) {
  std::vector<SubsetMask> g;
  for (int k = 1; k <= d; ++k) g.push_back(SubsetMask::full(k));                      // [1,k]
  for (int k = 2; k <= d; ++k) g.push_back(SubsetMask::full(d) - SubsetMask::full(k - 1));  // [k,d]
  return g;
}

/// Group system inducing rectangles on a d1 x d2 grid (row/column half-planes, V counted once).
inline std::vector<SubsetMask> rectangle_groups_2d(int d1, int d2) {
  auto rows = [&](int lo, int hi) {
    SubsetMask m;
    for (int r = lo; r <= hi; ++r)
      for (int c = 0; c < d2; ++c) m = m.with(r * d2 + c);
    return m;
  };
  auto cols = [&](int lo, int hi) {
    SubsetMask m;
    for (int r = 0; r < d1; ++r)
      for (int c = lo; c <= hi; ++c) m = m.with(r * d2 + c);
    return m;
  };
  std::vector<SubsetMask> g;
  for (int k = 0; k < d1; ++k) g.push_back(rows(0, k));
  for (int k = 1; k < d1; ++k) g.push_back(rows(k, d1 - 1));
  for (int k = 0; k < d2 - 1; ++k) g.push_back(cols(0, k));
  for (int k = 1; k < d2; ++k) g.push_back(cols(k, d2 - 1));
  return g;
}

// Structural checkers ------------------------------------------------------

enum class Verdict { Holds, Violated, Unverifiable };

struct SubmodularityCheck {
  Verdict verdict = Verdict::Unverifiable;
  SubsetMask a;  ///< witness base set
  int i = -1;    ///< witness elements, 0-based
  int k = -1;
};

struct MonotonicityCheck {
  Verdict verdict = Verdict::Unverifiable;
  SubsetMask smaller;  ///< witness A
  SubsetMask larger;   ///< witness A u {i} with F(A) > F(A u {i})
};

namespace detail {
inline bool less_with_tol(double lhs, double rhs) {
  if (lhs == kInf) return false;
  if (rhs == kInf) return true;
  return lhs < rhs - 1e-12 * (1.0 + std::abs(rhs));
}
}  // namespace detail

/// Exhaustive check of F(A+i) + F(A+k) >= F(A+i+k) + F(A). With infinite
/// values the inequality is read in the extended reals: a finite left side
/// against an infinite right side is a violation.
inline SubmodularityCheck check_submodular(const SetFunction& f) {
  SubmodularityCheck out;
  const int d = f.d();
  if (d > kMaxExhaustive) {
    if (f.claims().submodular == Claim::Yes) out.verdict = Verdict::Holds;
    return out;  // No-claims carry no witness at this size
  }
  const auto t = f.table();
  for (std::uint64_t m = 0; m < t.size(); ++m) {
    for (int i = 0; i < d; ++i) {
      if ((m >> i) & 1u) continue;
      for (int k = i + 1; k < d; ++k) {
        if ((m >> k) & 1u) continue;
        const std::uint64_t bi = std::uint64_t{1} << i, bk = std::uint64_t{1} << k;
        const double lhs = t[m | bi] + t[m | bk];
        const double rhs = t[m | bi | bk] + t[m];
        if (detail::less_with_tol(lhs, rhs)) {
          out.verdict = Verdict::Violated;
          out.a = SubsetMask(m);
          out.i = i;
          out.k = k;
          return out;
        }
      }
    }
  }
  out.verdict = Verdict::Holds;
  return out;
}

inline MonotonicityCheck check_monotone(const SetFunction& f) {
  MonotonicityCheck out;
  const int d = f.d();
  if (d > kMaxExhaustive) {
    if (f.claims().monotone == Claim::Yes) out.verdict = Verdict::Holds;
    return out;
  }
  const auto t = f.table();
  for (std::uint64_t m = 0; m < t.size(); ++m) {
    for (int i = 0; i < d; ++i) {
      if ((m >> i) & 1u) continue;
      const std::uint64_t up = m | (std::uint64_t{1} << i);
      if (detail::less_with_tol(t[up], t[m])) {
        out.verdict = Verdict::Violated;
        out.smaller = SubsetMask(m);
        out.larger = SubsetMask(up);
        return out;
      }
    }
  }
  out.verdict = Verdict::Holds;
  return out;
}

/// Resolves Unknown claims with the exhaustive checkers when d <= 20.
inline SetFunction verify_claims(const SetFunction& f) {
  Claims c = f.claims();
  if (c.submodular == Claim::Unknown && f.d() <= kMaxExhaustive)
    c.submodular = check_submodular(f).verdict == Verdict::Holds ? Claim::Yes : Claim::No;
  if (c.monotone == Claim::Unknown && f.d() <= kMaxExhaustive)
    c.monotone = check_monotone(f).verdict == Verdict::Holds ? Claim::Yes : Claim::No;
  return f.with_claims(c);
}

/// True when F is known (claimed or verified) to be submodular. Unknown
/// claims are resolved by brute force for d <= 16.
inline bool known_submodular(const SetFunction& f) {
  if (f.claims().submodular == Claim::Yes) return true;
  if (f.claims().submodular == Claim::No) return false;
  if (f.d() > 16) return false;
  return check_submodular(f).verdict == Verdict::Holds;
}

/// Materialized copy as an explicit table (claims carried over).
inline SetFunction materialize(const SetFunction& f) {
  auto t = f.table();
  return SetFunction::explicit_table(f.d(), std::move(t)).with_claims(f.claims());
}

}  // namespace struktnorm
