#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "struktnorm/norms.hpp"

namespace struktnorm {

struct TheoryConstants {
  double m = 0.0;        ///< min_k F({k})
  double M = 0.0;        ///< max_k F({k})
  double m_tilde = 0.0;  ///< smallest positive marginal gain
  double c = 0.0;        ///< m_tilde / M
  double rho = 0.0;
};

/// Exact constants by enumeration over finite-valued pairs A subset B.
inline TheoryConstants constants(const SetFunction& f) {
  const int d = f.d();
  if (d > 14) throw CapabilityError("constants by enumeration require d <= 14");
  const std::uint64_t n = std::uint64_t{1} << d;
  std::vector<double> v(n);
  for (std::uint64_t a = 0; a < n; ++a) v[a] = f(SubsetMask(a));
  TheoryConstants tc;
  tc.m = kInf;
  tc.M = 0.0;
  for (int k = 0; k < d; ++k) {
    const double fk = v[std::uint64_t{1} << k];
    tc.m = std::min(tc.m, fk);
    tc.M = std::max(tc.M, fk);
  }
  tc.m_tilde = kInf;
  for (std::uint64_t a = 0; a < n; ++a) {
    if (v[a] == kInf) continue;
    for (int k = 0; k < d; ++k) {
      if (a >> k & 1) continue;
      const double fb = v[a | std::uint64_t{1} << k];
      if (fb == kInf) continue;
      const double gain = fb - v[a];
      if (gain > 1e-12 * std::max(1.0, fb)) tc.m_tilde = std::min(tc.m_tilde, gain);
    }
  }
  tc.rho = 1.0;
  for (std::uint64_t b = 1; b < n; ++b) {
    if (v[b] == kInf) continue;
    // proper subsets of b
    for (std::uint64_t a = (b - 1) & b;; a = (a - 1) & b) {
      if (v[a] != kInf && v[b] > v[a] + 1e-12 * std::max(1.0, v[b])) {
        const double rest = v[b & ~a];
        if (rest != kInf && rest > 0.0) tc.rho = std::min(tc.rho, (v[b] - v[a]) / rest);
      }
      if (a == 0) break;
    }
  }
  if (tc.m_tilde == kInf) tc.m_tilde = 0.0;
  tc.c = tc.M > 0.0 && tc.M != kInf ? tc.m_tilde / tc.M : 0.0;
  return tc;
}

// Restriction and contraction norms --------------------------------------------

/// Omega_J(x) for x indexed by J (ascending).
inline double restriction_norm(const SetFunction& f, SubsetMask j, double p, const std::vector<double>& x) {
  if (j.empty()) return 0.0;
  return norm(NormParams::make(f.restrict_to(j), p), x);
}

/// Omega^J(x) for x indexed by the complement of J (ascending).
inline double contraction_norm(const SetFunction& f, SubsetMask j, double p, const std::vector<double>& x) {
  if (j == SubsetMask::full(f.d())) return 0.0;
  if (j.empty()) return norm(NormParams::make(f, p), x);
  return norm(NormParams::make(f.contract_by(j), p), x);
}

inline double contraction_dual_norm(const SetFunction& f, SubsetMask j, double p, const std::vector<double>& s) {
  if (j == SubsetMask::full(f.d())) return 0.0;
  const SetFunction g = j.empty() ? f : f.contract_by(j);
  return dual_norm(NormParams::make(g, p), s);
}

/// Omega_J(w_J) + Omega^J(w_{J^c})
inline double split_norm(const SetFunction& f, SubsetMask j, double p, const std::vector<double>& w) {
  const auto in = j.indices(), out = j.complement(f.d()).indices();
  return restriction_norm(f, j, p, gather(w, in)) + contraction_norm(f, j, p, gather(w, out));
}

// Support recovery certificate ------------------------------------------------

struct RecoveryCertificate {
  SubsetMask J;
  double lhs = 0.0;
  double eta = 0.0;          ///< irrepresentability slack
  double kappa = 0.0;        ///< lambda_min(Q_JJ)
  double nu = 0.0;           ///< min nonzero |w*|
  double lambda_threshold = 0.0;
  bool pass = false;
  std::string verdict;
};

inline RecoveryCertificate irrepresentability(const SetFunction& f, double p, const Eigen::MatrixXd& Q,
                                              const std::vector<double>& wstar, double lambda = 0.0) {
  const int d = f.d();
  if (Q.rows() != d || Q.cols() != d) throw InvalidArgument("Q must be d x d");
  if (static_cast<int>(wstar.size()) != d) throw InvalidArgument("w* has the wrong length");
  std::vector<int> supp;
  RecoveryCertificate rc;
  rc.nu = kInf;
  for (int i = 0; i < d; ++i)
    if (wstar[i] != 0.0) {
      supp.push_back(i);
      rc.nu = std::min(rc.nu, std::abs(wstar[i]));
    }
  if (supp.empty()) throw InvalidArgument("w* must be nonzero");
  rc.J = smallest_stable_superset(f, SubsetMask::from_indices(supp));
  const auto J = rc.J.indices(), Jc = rc.J.complement(d).indices();
  const int nj = static_cast<int>(J.size());
  Eigen::MatrixXd QJJ(nj, nj);
  for (int a = 0; a < nj; ++a)
    for (int b = 0; b < nj; ++b) QJJ(a, b) = Q(J[a], J[b]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(QJJ);
  rc.kappa = std::max(0.0, es.eigenvalues().minCoeff());
  if (rc.kappa <= 1e-12 * std::max(1.0, es.eigenvalues().maxCoeff())) {
    rc.kappa = 0.0;
    rc.verdict = "fail (kappa=0)";
    return rc;
  }
  const double q = conjugate_exponent(p);
  const double fj = f(rc.J);
  rc.lambda_threshold =
      rc.kappa * rc.nu / (2.0 * std::pow(static_cast<double>(nj), 1.0 / p) * std::pow(fj, 1.0 / q));
  std::vector<double> cols;
  const auto ldlt = QJJ.ldlt();
  for (int j : Jc) {
    Eigen::VectorXd qj(nj);
    for (int a = 0; a < nj; ++a) qj[a] = Q(J[a], j);
    const Eigen::VectorXd x = ldlt.solve(qj);
    cols.push_back(restriction_norm(f, rc.J, p, std::vector<double>(x.data(), x.data() + nj)));
  }
  rc.lhs = Jc.empty() ? 0.0 : contraction_dual_norm(f, rc.J, p, cols);
  rc.eta = 1.0 - rc.lhs;
  rc.pass = rc.eta > 0.0 && (lambda <= 0.0 || lambda <= rc.lambda_threshold);
  rc.verdict = rc.pass ? "pass" : (rc.eta > 0.0 ? "fail (lambda above threshold)" : "fail (irrepresentability)");
  return rc;
}

// Restricted eigenvalue -------------------------------------------------------

struct RestrictedEigenvalueEstimate {
  double kappa_hat = kInf;  ///< an upper bound on the true constant, never a certificate
  int samples = 0;
  int in_cone = 0;
};

/// min over sampled cone directions of D'QD / Omega_J(D_J)^2; eigenvectors of
/// Q that fall in the cone are included.
inline RestrictedEigenvalueEstimate restricted_eigenvalue(const SetFunction& f, double p, const Eigen::MatrixXd& Q,
                                                         SubsetMask J, int samples, std::uint64_t seed) {
  const int d = f.d();
  if (Q.rows() != d || Q.cols() != d) throw InvalidArgument("Q must be d x d");
  if (J.empty()) throw InvalidArgument("J must be nonempty");
  const auto in = J.indices(), out = J.complement(d).indices();
  RestrictedEigenvalueEstimate est;
  auto consider = [&](const Eigen::VectorXd& delta) {
    std::vector<double> dv(delta.data(), delta.data() + d);
    const double oj = restriction_norm(f, J, p, gather(dv, in));
    if (!(oj > 0.0)) return;
    const double oc = contraction_norm(f, J, p, gather(dv, out));
    if (oc > 3.0 * oj * (1.0 + 1e-12)) return;
    ++est.in_cone;
    est.kappa_hat = std::min(est.kappa_hat, delta.dot(Q * delta) / (oj * oj));
  };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  for (int k = 0; k < d; ++k) consider(es.eigenvectors().col(k));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    ++est.samples;
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(d);
    for (int i : in) delta[i] = normal(rng);
    if (!out.empty()) {
      std::vector<double> dv(delta.data(), delta.data() + d), tail;
      for (std::size_t k = 0; k < out.size(); ++k) tail.push_back(normal(rng));
      const double oj = restriction_norm(f, J, p, gather(dv, in));
      const double oc = contraction_norm(f, J, p, tail);
      const double scale = oc > 0.0 ? 3.0 * oj * unif(rng) / oc : 0.0;
      for (std::size_t k = 0; k < out.size(); ++k) delta[out[k]] = scale * tail[k];
    }
    consider(delta);
  }
  return est;
}

/// Estimation bounds 24 lambda / (kappa rho^2) and 36 lambda^2 / (kappa rho^2).
inline double omega_error_bound(double lambda, double kappa, double rho) { return 24.0 * lambda / (kappa * rho * rho); }
inline double prediction_error_bound(double lambda, double kappa, double rho) {
  return 36.0 * lambda * lambda / (kappa * rho * rho);
}

// Concentration ------------------------------------------------------------

inline double concentration_bound(const CoreSet& core, double p, double u) {
  if (core.sets.empty()) throw InvalidArgument("empty core set");
  const double q = conjugate_exponent(p);
  double a = 0.0, b = 0.0;
  const double e = std::max(0.0, 1.0 / q - 0.5);
  for (std::size_t k = 0; k < core.sets.size(); ++k) {
    const double sz = core.sets[k].size(), fa = core.values[k];
    a = std::max(a, std::pow(sz / fa, 1.0 / q));
    b = std::max(b, std::pow(sz, e) / std::pow(fa, 1.0 / q));
  }
  return 4.0 * std::sqrt(q * std::log(2.0 * core.sets.size())) * a + u * b;
}

inline double concentration_bound(const SetFunction& f, double p, double u) {
  return concentration_bound(stable_inseparable_sets(f), p, u);
}

struct TailEstimate {
  double threshold = 0.0;
  double frequency = 0.0;
  double std_error = 0.0;
  double bound = 0.0;  ///< exp(-u^2 / 2)
  bool within = false; ///< frequency <= bound + 3 SE
  long draws = 0;
};

/// Empirical P(Omega*(z) >= threshold) for z standard normal.
inline TailEstimate concentration_tail(const SetFunction& f, double p, double u, long draws, std::uint64_t seed) {
  const CoreSet core = stable_inseparable_sets(f);
  TailEstimate te;
  te.threshold = concentration_bound(core, p, u);
  te.bound = std::exp(-0.5 * u * u);
  te.draws = draws;
  const double q = conjugate_exponent(p);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> z(f.d());
  long hits = 0;
  for (long k = 0; k < draws; ++k) {
    for (double& x : z) x = normal(rng);
    if (dual_norm_over(core, z, q) >= te.threshold) ++hits;
  }
  te.frequency = static_cast<double>(hits) / draws;
  te.std_error = std::sqrt(te.frequency * (1.0 - te.frequency) / draws);
  te.within = te.frequency <= te.bound + 3.0 * te.std_error;
  return te;
}

}  // namespace struktnorm
