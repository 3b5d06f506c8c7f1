// Tour of the library: envelopes, norms, prox and a small regression.

#include <iostream>
#include <random>

#include "struktnorm/envelope.hpp"
#include "struktnorm/experiment.hpp"

using namespace struktnorm;

int main() {
  // Block coding with pairs on {1,2,3}: the relaxation sees only the envelope.
  const auto pairs = SetFunction::pairs_block_code();
  const auto all = SubsetMask::full(3);
  std::cout << "F(V) = " << pairs(all) << ", integer cover = " << integer_cover(pairs, all).value
            << ", lower envelope = " << lce(pairs, all) << "\n";

  // Norm and prox for the modified range function, which favours interval supports.
  const auto mr = SetFunction::modified_range(8);
  const auto np = NormParams::make(mr, 2.0);
  const std::vector<double> z = {0.1, 2.0, 1.5, 1.8, -0.2, 0.05, 0.0, 0.3};
  std::cout << "Omega_2(z) = " << norm(np, z) << "\nprox(z, 0.6) =";
  for (double v : prox(np, 0.6, z)) std::cout << ' ' << v;
  std::cout << "\n";

  // Regularized least squares on an interval-supported signal.
  const int d = 30, n = 80;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) X(i, j) = normal(rng);
  std::vector<double> wstar(d, 0.0);
  for (int j = 10; j < 18; ++j) wstar[j] = 1.0;
  Eigen::VectorXd y = X * detail::to_eigen(wstar);
  for (int i = 0; i < n; ++i) y[i] += 0.2 * normal(rng);

  const auto f = Quadratic::from(X, y);
  const auto reg = structured_regularizer(RangeOracle::modified_range(d), 2.0, "omega2");
  const auto grid = geometric_grid(reg->lambda_max(detail::to_std(f.b)), 20, 2.0);
  int best = d;
  double best_lambda = 0.0;
  for (const auto& pt : path(f, *reg, grid, wstar))
    if (pt.hamming < best) best = pt.hamming, best_lambda = pt.lambda;
  std::cout << "best Hamming distance along the path: " << best << " at lambda = " << best_lambda << "\n";
}
