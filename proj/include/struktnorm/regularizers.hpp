#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "struktnorm/norms.hpp"
#include "struktnorm/range.hpp"

namespace struktnorm {

/// Groups as index lists, with optional per-element weights (empty = unit).
struct GroupSystem {
  int d = 0;
  std::vector<std::vector<int>> groups;
  std::vector<std::vector<double>> weights;

  void validate() const {
    if (d < 1) throw InvalidArgument("group system needs d >= 1");
    if (groups.empty()) throw InvalidArgument("group system has no groups");
    if (!weights.empty() && weights.size() != groups.size())
      throw InvalidArgument("one weight vector per group is required");
    std::vector<char> covered(d, 0);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].empty()) throw InvalidArgument("empty group");
      if (!weights.empty() && weights[g].size() != groups[g].size())
        throw InvalidArgument("weight vector length differs from group size");
      for (int i : groups[g]) {
        if (i < 0 || i >= d) throw InvalidArgument("group index out of range");
        covered[i] = 1;
      }
      if (!weights.empty())
        for (double w : weights[g])
          if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("group weights must be positive and finite");
    }
    for (char c : covered)
      if (!c) throw InvalidArgument("groups must cover the ground set");
  }
  double weight(std::size_t g, std::size_t k) const { return weights.empty() ? 1.0 : weights[g][k]; }
};

inline GroupSystem groups_from_masks(int d, const std::vector<SubsetMask>& masks) {
  GroupSystem gs;
  gs.d = d;
  for (auto m : masks) gs.groups.push_back(m.indices());
  gs.validate();
  return gs;
}

/// Prefix and suffix intervals of a chain; the full chain appears once.
/// With beta > 0 each element is weighted by (distance to the open end + 1)^beta.
inline GroupSystem interval_group_system(int d, double beta = 0.0) {
  GroupSystem gs;
  gs.d = d;
  for (int k = 1; k <= d; ++k) {
    std::vector<int> g;
    for (int i = 0; i < k; ++i) g.push_back(i);
    gs.groups.push_back(g);
  }
  for (int k = 1; k < d; ++k) {
    std::vector<int> g;
    for (int i = k; i < d; ++i) g.push_back(i);
    gs.groups.push_back(g);
  }
  if (beta > 0.0) {
    for (std::size_t g = 0; g < gs.groups.size(); ++g) {
      const auto& grp = gs.groups[g];
      const bool prefix = grp.front() == 0;
      std::vector<double> wv;
      for (int i : grp) wv.push_back(std::pow(prefix ? grp.back() - i + 1.0 : i - grp.front() + 1.0, beta));
      gs.weights.push_back(wv);
    }
  }
  gs.validate();
  return gs;
}

/// Row and column half-planes of a d1 x d2 grid (element k at row k / d2).
inline GroupSystem rectangle_group_system(int d1, int d2, double beta = 0.0) {
  GroupSystem gs;
  gs.d = d1 * d2;
  struct Spec {
    bool rows;
    int lo, hi;
    bool prefix;
  };
  std::vector<Spec> specs;
  for (int k = 0; k < d1; ++k) specs.push_back({true, 0, k, true});
  for (int k = 1; k < d1; ++k) specs.push_back({true, k, d1 - 1, false});
  for (int k = 0; k < d2 - 1; ++k) specs.push_back({false, 0, k, true});
  for (int k = 1; k < d2; ++k) specs.push_back({false, k, d2 - 1, false});
  for (const auto& s : specs) {
    std::vector<int> g;
    std::vector<double> wv;
    for (int r = 0; r < d1; ++r)
      for (int c = 0; c < d2; ++c) {
        const int coord = s.rows ? r : c;
        if (coord < s.lo || coord > s.hi) continue;
        g.push_back(r * d2 + c);
        wv.push_back(std::pow(s.prefix ? s.hi - coord + 1.0 : coord - s.lo + 1.0, beta));
      }
    gs.groups.push_back(g);
    if (beta > 0.0) gs.weights.push_back(wv);
  }
  gs.validate();
  return gs;
}

// Closed-form comparison penalties -------------------------------------------

/// sum_B || d^B o w_B ||_p
inline double overlap_group_norm(const GroupSystem& gs, double p, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != gs.d) throw InvalidArgument("vector length does not match d");
  double total = 0.0;
  for (std::size_t g = 0; g < gs.groups.size(); ++g) {
    std::vector<double> v;
    for (std::size_t k = 0; k < gs.groups[g].size(); ++k) v.push_back(gs.weight(g, k) * w[gs.groups[g][k]]);
    total += lp_norm(v, p);
  }
  return total;
}

/// (sum_G ||w_G||_1^p)^(1/p)
inline double exclusive_lp_l1_norm(const GroupSystem& gs, double p, const std::vector<double>& w) {
  if (static_cast<int>(w.size()) != gs.d) throw InvalidArgument("vector length does not match d");
  std::vector<double> sums;
  for (const auto& g : gs.groups) {
    double s = 0.0;
    for (int i : g) s += std::abs(w[i]);
    sums.push_back(s);
  }
  return lp_norm(sums, p);
}

inline double l1_norm(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += std::abs(x);
  return s;
}

inline double ridge_penalty(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x * x;
  return 0.5 * s;
}

inline double elastic_net_penalty(double alpha, const std::vector<double>& w) {
  return alpha * l1_norm(w) + (1.0 - alpha) * ridge_penalty(w);
}

// Regularizers -------------------------------------------------------------

/// Penalty with a proximal operator, used by the solver.
class Regularizer {
 public:
  virtual ~Regularizer() = default;
  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual double value(const std::vector<double>& w) const = 0;
  /// argmin_x 0.5 ||x - z||^2 + lambda * value(x)
  virtual std::vector<double> prox(const std::vector<double>& z, double lambda) const = 0;
  /// Dual norm when the penalty is a norm with a computable dual.
  virtual std::optional<double> dual(const std::vector<double>&) const { return std::nullopt; }
  /// A lambda at or above which zero is optimal for gradient g = X^T y / n.
  virtual double lambda_max(const std::vector<double>& g) const {
    auto dv = dual(g);
    if (!dv) throw CapabilityError(name() + ": no lambda_max rule");
    return *dv;
  }
};

using RegularizerPtr = std::shared_ptr<const Regularizer>;

inline double soft_threshold(double z, double t) {
  return z > t ? z - t : (z < -t ? z + t : 0.0);
}

class L1Regularizer final : public Regularizer {
 public:
  explicit L1Regularizer(int d) : d_(d) {}
  std::string name() const override { return "l1"; }
  int dim() const override { return d_; }
  double value(const std::vector<double>& w) const override { return l1_norm(w); }
  std::vector<double> prox(const std::vector<double>& z, double lambda) const override {
    std::vector<double> x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = soft_threshold(z[i], lambda);
    return x;
  }
  std::optional<double> dual(const std::vector<double>& s) const override { return lp_norm(s, kInf); }

 private:
  int d_;
};

/// 0.5 ||w||^2. Zero is never optimal, so lambda_max is a scale where the
/// solution is strongly shrunk: 10 * ||g||_2.
class RidgeRegularizer final : public Regularizer {
 public:
  explicit RidgeRegularizer(int d) : d_(d) {}
  std::string name() const override { return "ridge"; }
  int dim() const override { return d_; }
  double value(const std::vector<double>& w) const override { return ridge_penalty(w); }
  std::vector<double> prox(const std::vector<double>& z, double lambda) const override {
    std::vector<double> x(z);
    for (double& v : x) v /= 1.0 + lambda;
    return x;
  }
  double lambda_max(const std::vector<double>& g) const override { return 10.0 * lp_norm(g, 2.0); }

 private:
  int d_;
};

class ElasticNetRegularizer final : public Regularizer {
 public:
  ElasticNetRegularizer(int d, double alpha) : d_(d), alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("elastic net alpha must be in (0, 1]");
  }
  std::string name() const override { return "elastic_net"; }
  int dim() const override { return d_; }
  double value(const std::vector<double>& w) const override { return elastic_net_penalty(alpha_, w); }
  std::vector<double> prox(const std::vector<double>& z, double lambda) const override {
    std::vector<double> x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      x[i] = soft_threshold(z[i], lambda * alpha_) / (1.0 + lambda * (1.0 - alpha_));
    return x;
  }
  double lambda_max(const std::vector<double>& g) const override { return lp_norm(g, kInf) / alpha_; }

 private:
  int d_;
  double alpha_;
};

/// Overlapping (optionally weighted) l1/l2 group norm. The prox solves the
/// dual problem  min_u 0.5 ||z - sum_B D_B u_B||^2, ||u_B|| <= lambda
/// by exact block-coordinate descent over groups, warm-started from the
/// previous call, until the duality gap falls below gap_tol.
class OverlapGroupRegularizer final : public Regularizer {
 public:
  OverlapGroupRegularizer(GroupSystem gs, std::string name, double gap_tol = 1e-9, int max_sweeps = 500)
      : gs_(std::move(gs)), name_(std::move(name)), gap_tol_(gap_tol), max_sweeps_(max_sweeps) {
    gs_.validate();
    diag_.assign(gs_.d, 0.0);
    for (std::size_t g = 0; g < gs_.groups.size(); ++g)
      for (std::size_t k = 0; k < gs_.groups[g].size(); ++k) diag_[gs_.groups[g][k]] += sq(gs_.weight(g, k));
  }
  std::string name() const override { return name_; }
  int dim() const override { return gs_.d; }
  const GroupSystem& groups() const { return gs_; }
  double value(const std::vector<double>& w) const override { return overlap_group_norm(gs_, 2.0, w); }

  std::vector<double> prox(const std::vector<double>& z, double lambda) const override {
    if (static_cast<int>(z.size()) != gs_.d) throw InvalidArgument("vector length does not match d");
    if (!(lambda > 0.0)) throw InvalidArgument("lambda must be > 0");
    const std::size_t ng = gs_.groups.size();
    std::vector<std::vector<double>>& u = warm_;
    if (u.size() != ng) {
      u.assign(ng, {});
      for (std::size_t g = 0; g < ng; ++g) u[g].assign(gs_.groups[g].size(), 0.0);
    }
    for (std::size_t g = 0; g < ng; ++g) project(u[g], lambda);
    std::vector<double> w;
    primal_from(u, z, w);
    // tolerances are relative to the scale of the prox objective
    double scale = 0.0;
    for (double x : z) scale += x * x;
    scale = std::max(1.0, 0.5 * scale);
    const double tol = gap_tol_ * scale;
    double gap = kInf;
    std::vector<double> c;
    for (int sweep = 0; sweep < max_sweeps_; ++sweep) {
      for (std::size_t g = 0; g < ng; ++g) {
        const auto& grp = gs_.groups[g];
        c.resize(grp.size());
        for (std::size_t k = 0; k < grp.size(); ++k) c[k] = w[grp[k]] + gs_.weight(g, k) * u[g][k];
        solve_block(g, c, lambda, u[g]);
        for (std::size_t k = 0; k < grp.size(); ++k) w[grp[k]] = c[k] - gs_.weight(g, k) * u[g][k];
      }
      gap = duality_gap(u, w, lambda);
      if (gap <= tol) return round_zero_groups(w, gap);
      if (sweep % 64 == 63) primal_from(u, z, w);  // limit drift of the running residual
    }
    primal_from(u, z, w);
    gap = duality_gap(u, w, lambda);
    // an inexact prox is acceptable to the outer method once the gap is small
    if (gap <= 1e-3 * scale) return round_zero_groups(w, gap);
    throw NumericalError(name_ + " prox: duality gap " + std::to_string(gap) + " after " +
                         std::to_string(max_sweeps_) + " sweeps");
  }

  /// Upper bound on the dual norm from the split u_B,i = g_i d^B_i / sum_B' (d^B'_i)^2.
  double lambda_max(const std::vector<double>& g) const override {
    double best = 0.0;
    for (std::size_t b = 0; b < gs_.groups.size(); ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < gs_.groups[b].size(); ++k) {
        const int i = gs_.groups[b][k];
        s += sq(g[i] * gs_.weight(b, k) / diag_[i]);
      }
      best = std::max(best, std::sqrt(s));
    }
    return best;
  }

 private:
  static double sq(double x) { return x * x; }
  /// The primal iterate is within sqrt(2 gap) of the prox; groups that small
  /// are consistent with an exact zero and are set to zero, since the prox
  /// vanishes on unions of groups.
  std::vector<double> round_zero_groups(std::vector<double> w, double gap) const {
    const double r = std::sqrt(2.0 * std::max(gap, 0.0));
    std::vector<char> zero(w.size(), 0);
    for (const auto& g : gs_.groups) {
      double n = 0.0;
      for (int i : g) n += w[i] * w[i];
      if (std::sqrt(n) <= r)
        for (int i : g) zero[i] = 1;
    }
    for (std::size_t i = 0; i < w.size(); ++i)
      if (zero[i]) w[i] = 0.0;
    return w;
  }
  /// argmin_{||u|| <= r} 0.5 ||c - D u||^2 with D the group's weights.
  void solve_block(std::size_t g, const std::vector<double>& c, double r, std::vector<double>& u) const {
    const std::size_t m = c.size();
    if (gs_.weights.empty()) {
      double n = 0.0;
      for (double x : c) n += x * x;
      n = std::sqrt(n);
      const double s = n > r ? r / n : 1.0;
      for (std::size_t k = 0; k < m; ++k) u[k] = s * c[k];
      return;
    }
    const auto& dw = gs_.weights[g];
    double n = 0.0;
    for (std::size_t k = 0; k < m; ++k) n += sq(c[k] / dw[k]);
    if (std::sqrt(n) <= r) {
      for (std::size_t k = 0; k < m; ++k) u[k] = c[k] / dw[k];
      return;
    }
    // u(mu) = D c / (D^2 + mu); Newton on 1/||u(mu)|| - 1/r, which is concave
    // and increasing in mu, so the iterates increase monotonically to the root.
    double mu = 0.0;
    for (int it = 0; it < 100; ++it) {
      double nn = 0.0, dn = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double den = sq(dw[k]) + mu, uk = dw[k] * c[k] / den;
        nn += uk * uk;
        dn -= 2.0 * uk * uk / den;
      }
      const double norm_u = std::sqrt(nn);
      const double phi = 1.0 / norm_u - 1.0 / r;
      if (std::abs(norm_u - r) <= 1e-14 * r) break;
      const double dphi = -0.5 * dn / (nn * norm_u);
      const double next = mu - phi / dphi;
      if (!(next > mu)) break;
      mu = next;
    }
    for (std::size_t k = 0; k < m; ++k) u[k] = dw[k] * c[k] / (sq(dw[k]) + mu);
    project(u, r);
  }
  static void project(std::vector<double>& u, double r) {
    double n = 0.0;
    for (double x : u) n += x * x;
    n = std::sqrt(n);
    if (n > r)
      for (double& x : u) x *= r / n;
  }
  void primal_from(const std::vector<std::vector<double>>& u, const std::vector<double>& z,
                   std::vector<double>& w) const {
    w = z;
    for (std::size_t g = 0; g < gs_.groups.size(); ++g)
      for (std::size_t k = 0; k < gs_.groups[g].size(); ++k) w[gs_.groups[g][k]] -= gs_.weight(g, k) * u[g][k];
  }
  double duality_gap(const std::vector<std::vector<double>>& u, const std::vector<double>& w, double lambda) const {
    double gap = lambda * value(w);
    for (std::size_t g = 0; g < gs_.groups.size(); ++g)
      for (std::size_t k = 0; k < gs_.groups[g].size(); ++k) gap -= w[gs_.groups[g][k]] * gs_.weight(g, k) * u[g][k];
    return gap;
  }

  GroupSystem gs_;
  std::string name_;
  double gap_tol_;
  int max_sweeps_;
  std::vector<double> diag_;
  mutable std::vector<std::vector<double>> warm_;
};

/// Omega_p for a submodular function through an oracle (decomposition
/// algorithms, Dinkelbach dual).
template <class O>
class StructuredRegularizer final : public Regularizer {
 public:
  StructuredRegularizer(O oracle, double p, std::string name)
      : f_(std::move(oracle)), p_(p), q_(conjugate_exponent(p)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  int dim() const override { return f_.size(); }
  double value(const std::vector<double>& w) const override { return decomposition_norm(f_, w, p_); }
  std::vector<double> prox(const std::vector<double>& z, double lambda) const override {
    return decomposition_prox(f_, z, lambda, p_);
  }
  std::optional<double> dual(const std::vector<double>& s) const override { return dinkelbach_dual(f_, s, q_); }

 private:
  O f_;
  double p_, q_;
  std::string name_;
};

/// Omega_p for any admissible F with d <= 64, through the generic paths.
class NormRegularizer final : public Regularizer {
 public:
  NormRegularizer(NormParams np, std::string name) : np_(std::move(np)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  int dim() const override { return np_.F.d(); }
  const NormParams& params() const { return np_; }
  double value(const std::vector<double>& w) const override { return norm(np_, w); }
  std::vector<double> prox(const std::vector<double>& z, double lambda) const override {
    if (has_decomposition(np_.F)) return struktnorm::prox(np_, lambda, z);
    return prox_generic(np_, lambda, z);
  }
  std::optional<double> dual(const std::vector<double>& s) const override { return dual_norm(np_, s); }

 private:
  NormParams np_;
  std::string name_;
};

/// Omega_p regularizer for a RangeOracle (any d) or a SetFunction.
inline RegularizerPtr structured_regularizer(const RangeOracle& f, double p, std::string name) {
  return std::make_shared<StructuredRegularizer<RangeOracle>>(f, p, std::move(name));
}
inline RegularizerPtr structured_regularizer(const SetFunction& f, double p, std::string name) {
  auto np = NormParams::make(f, p);
  if (has_decomposition(f))
    return std::make_shared<StructuredRegularizer<MaskOracle>>(MaskOracle(f), p, std::move(name));
  return std::make_shared<NormRegularizer>(std::move(np), std::move(name));
}

}  // namespace struktnorm
