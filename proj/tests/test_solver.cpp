#include <gtest/gtest.h>

#include "oracles.hpp"
#include "struktnorm/solver.hpp"

using namespace struktnorm;

namespace {

Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, int n, int d) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = g(rng);
  return X;
}

Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = g(rng);
  return y;
}

}  // namespace

TEST(Solver, ZeroLambdaGivesLeastSquares) {
  std::mt19937_64 rng(1);
  auto X = gaussian_matrix(rng, 6, 6);
  auto y = gaussian_vector(rng, 6);
  Problem prob{X, y, std::make_shared<L1Regularizer>(6), 0.0};
  SolveOptions o;
  o.tol = 1e-15;
  o.max_iter = 200000;
  auto rep = solve(prob, o);
  Eigen::VectorXd ls = X.colPivHouseholderQr().solve(y);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(rep.w[i], ls[i], 1e-6);
}

TEST(Solver, ZeroAboveLambdaMax) {
  std::mt19937_64 rng(2);
  auto X = gaussian_matrix(rng, 30, 12);
  auto y = gaussian_vector(rng, 30);
  const auto f = Quadratic::from(X, y);
  for (RegularizerPtr reg : {RegularizerPtr(std::make_shared<L1Regularizer>(12)),
                             structured_regularizer(RangeOracle::modified_range(12), 2.0, "omega2"),
                             structured_regularizer(RangeOracle::modified_range(12), kInf, "omegainf")}) {
    const double lm = *reg->dual(detail::to_std(f.b));
    auto rep = solve(f, *reg, lm * (1 + 1e-9));
    for (double v : rep.w) EXPECT_EQ(v, 0.0) << reg->name();
    auto below = solve(f, *reg, lm * 0.9);
    EXPECT_FALSE(support_of_estimate(below.w).empty()) << reg->name();
  }
}

TEST(Solver, LassoMatchesCoordinateDescent) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    auto X = gaussian_matrix(rng, 40, 15);
    auto y = gaussian_vector(rng, 40);
    const double lam = 0.1;
    Problem prob{X, y, std::make_shared<L1Regularizer>(15), lam};
    SolveOptions o;
    o.tol = 1e-14;
    auto rep = solve(prob, o);
    auto cd = oracle::lasso_cd(X, y, lam);
    for (int i = 0; i < 15; ++i) ASSERT_NEAR(rep.w[i], cd[i], 1e-6);
    ASSERT_LE(*rep.dual_residual, lam * (1 + 1e-5));
  }
}

TEST(Solver, FenchelCertificateForStructuredNorms) {
  std::mt19937_64 rng(4);
  auto X = gaussian_matrix(rng, 50, 20);
  auto y = gaussian_vector(rng, 50);
  const auto f = Quadratic::from(X, y);
  for (double p : {2.0, kInf}) {
    auto reg = structured_regularizer(RangeOracle::modified_range(20), p, "omega");
    const double lm = *reg->dual(detail::to_std(f.b));
    for (double frac : {0.5, 0.1, 0.02}) {
      auto rep = solve(f, *reg, frac * lm);
      ASSERT_TRUE(rep.dual_residual);
      EXPECT_LE(*rep.dual_residual, frac * lm * (1 + 1e-5));
      for (std::size_t k = 1; k < rep.objective.size(); ++k) EXPECT_LE(rep.objective[k], rep.objective[k - 1]);
    }
  }
}

TEST(Solver, ValidatesProblems) {
  Problem p{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3), std::make_shared<L1Regularizer>(3), 0.1};
  EXPECT_THROW(solve(p), InvalidArgument);
  Problem q{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2), std::make_shared<L1Regularizer>(2), 0.1};
  EXPECT_THROW(solve(q), InvalidArgument);
  Problem r{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3), nullptr, 0.1};
  EXPECT_THROW(solve(r), InvalidArgument);
  Problem s{Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(3), std::make_shared<L1Regularizer>(2), -1.0};
  EXPECT_THROW(solve(s), InvalidArgument);
}

TEST(Path, GridAndFirstPointIsZero) {
  std::mt19937_64 rng(5);
  auto X = gaussian_matrix(rng, 40, 16);
  auto y = gaussian_vector(rng, 40);
  const auto f = Quadratic::from(X, y);
  auto reg = structured_regularizer(RangeOracle::modified_range(16), 2.0, "omega2");
  const auto grid = geometric_grid(*reg->dual(detail::to_std(f.b)), 50, 2.0);
  ASSERT_EQ(grid.size(), 50u);
  EXPECT_NEAR(grid.back(), grid.front() / 100.0, 1e-12);
  auto pts = path(f, *reg, grid);
  EXPECT_TRUE(pts.front().support.empty());
  EXPECT_EQ(pts.front().hamming, -1);
  EXPECT_FALSE(pts.back().support.empty());
}

TEST(Path, OrthogonalDesignMatchesSoftThreshold) {
  const int d = 8;
  const double n = d;
  Eigen::MatrixXd X = std::sqrt(n) * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd y(d);
  y << 3.0, -1.0, 0.5, 2.0, -4.0, 0.1, 0.0, 1.5;
  const auto f = Quadratic::from(X, y);
  L1Regularizer reg(d);
  const auto grid = geometric_grid(reg.lambda_max(detail::to_std(f.b)), 20, 2.0);
  std::vector<double> wstar(d, 0.0);
  wstar[0] = 1.0;
  auto pts = path(f, reg, grid, wstar);
  std::vector<int> prev;
  for (const auto& pt : pts) {
    for (int i = 0; i < d; ++i) ASSERT_NEAR(pt.report.w[i], oracle::soft(f.b[i], pt.lambda), 1e-7);
    ASSERT_TRUE(std::includes(pt.support.begin(), pt.support.end(), prev.begin(), prev.end()));
    prev = pt.support;
    ASSERT_GE(pt.hamming, 0);
  }
}

TEST(Path, RejectsBadGrids) {
  const auto f = Quadratic::from(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Ones(2));
  L1Regularizer reg(2);
  EXPECT_THROW(path(f, reg, {}), InvalidArgument);
  EXPECT_THROW(path(f, reg, {0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(path(f, reg, {0.1, 0.1}), InvalidArgument);
  EXPECT_THROW(geometric_grid(0.0, 5, 1.0), InvalidArgument);
}

TEST(Path, Deterministic) {
  std::mt19937_64 a(6), b(6);
  auto Xa = gaussian_matrix(a, 30, 10), Xb = gaussian_matrix(b, 30, 10);
  auto ya = gaussian_vector(a, 30), yb = gaussian_vector(b, 30);
  auto reg = structured_regularizer(RangeOracle::modified_range(10), 2.0, "omega2");
  const auto fa = Quadratic::from(Xa, ya), fb = Quadratic::from(Xb, yb);
  const auto grid = geometric_grid(*reg->dual(detail::to_std(fa.b)), 10, 2.0);
  auto pa = path(fa, *reg, grid), pb = path(fb, *reg, grid);
  for (std::size_t k = 0; k < pa.size(); ++k) ASSERT_EQ(pa[k].report.w, pb[k].report.w);
}

TEST(Metrics, HammingAndSupport) {
  EXPECT_EQ(support_of_estimate({0.0, 1e-8, 2.0, -1.0}), (std::vector<int>{2, 3}));
  EXPECT_EQ(hamming_distance({0, 1, 2}, {1, 2, 3}, 5), 2);
  EXPECT_TRUE(support_of_estimate({0.0, 0.0}).empty());
}

TEST(Solver, NoiselessRecoveryWithManySamples) {
  // sigma = 0, n >> d, small lambda: the structured estimator finds the interval
  std::mt19937_64 rng(7);
  const int d = 30, n = 300;
  auto X = gaussian_matrix(rng, n, d);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  for (int i = 8; i < 20; ++i) w[i] = 1.0;
  Eigen::VectorXd y = X * w;
  auto reg = structured_regularizer(RangeOracle::modified_range(d), 2.0, "omega2");
  const auto f = Quadratic::from(X, y);
  const auto grid = geometric_grid(*reg->dual(detail::to_std(f.b)), 30, 3.0);
  auto pts = path(f, *reg, grid, detail::to_std(w));
  int best = d;
  for (const auto& pt : pts) best = std::min(best, pt.hamming);
  EXPECT_EQ(best, 0);
  EXPECT_LT(pts.back().l2_error, 0.05);
}
