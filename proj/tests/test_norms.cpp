#include <gtest/gtest.h>

#include "oracles.hpp"
#include "struktnorm/envelope.hpp"
#include "struktnorm/norms.hpp"
#include "struktnorm/regularizers.hpp"
#include "struktnorm/theory.hpp"

using namespace struktnorm;

namespace {

const double kSqrt13 = std::sqrt(13.0);

std::vector<SetFunction> submodular_suite(int d) {
  return {SetFunction::cardinality(d), SetFunction::indicator_nonempty(d), SetFunction::modified_range(d),
          SetFunction::overlap_count(d, interval_groups_1d(d), std::vector<double>(2 * d - 1, 0.7)),
          SetFunction::partition_group_count(d, {SubsetMask::full(2), SubsetMask::full(d) - SubsetMask::full(2)},
                                             {1.0, 2.5})};
}

std::vector<SetFunction> general_suite(int d) {
  auto s = submodular_suite(d);
  const std::vector<SubsetMask> half = {SubsetMask::full(d / 2), SubsetMask::full(d) - SubsetMask::full(d / 2)};
  s.push_back(SetFunction::range(d));
  s.push_back(SetFunction::exclusive_hard(d, half));
  s.push_back(SetFunction::exclusive_max_overlap(d, half));
  return s;
}

std::vector<double> soft_threshold_vec(const std::vector<double>& z, double t) {
  std::vector<double> out;
  for (double x : z) out.push_back(oracle::soft(x, t));
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> minus(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace

TEST(DualNorm, Examples) {
  EXPECT_NEAR(dual_norm(NormParams::make(SetFunction::cardinality(2), 2.0), {3, -4}), 4.0, 1e-12);
  EXPECT_NEAR(dual_norm(NormParams::make(SetFunction::indicator_nonempty(2), 2.0), {3, -4}), 5.0, 1e-12);
  auto eh = SetFunction::exclusive_hard(4, {SubsetMask(0b0011), SubsetMask(0b1100)});
  EXPECT_NEAR(dual_norm(NormParams::make(eh, 2.0), {1, 2, 3, 1}), kSqrt13, 1e-12);
}

TEST(DualNorm, DinkelbachAgreesWithEnumeration) {
  std::mt19937_64 rng(21);
  for (const auto& f : submodular_suite(8))
    for (double p : {1.5, 2.0, 3.0, kInf}) {
      const double q = conjugate_exponent(p);
      for (int k = 0; k < 30; ++k) {
        auto s = oracle::gaussian(rng, 8);
        const double want = oracle::dual_norm(f, s, p);
        ASSERT_NEAR(dinkelbach_dual(MaskOracle(f), s, q), want, 1e-9 * (1 + want));
        ASSERT_NEAR(dual_norm(NormParams::make(f, p), s), want, 1e-9 * (1 + want));
      }
    }
}

TEST(DualNorm, LargeModifiedRangeThroughOracle) {
  std::mt19937_64 rng(5);
  auto mr = RangeOracle::modified_range(256);
  auto s = oracle::gaussian(rng, 256);
  // a lower bound from every interval is attained by the Dinkelbach value
  const double v = dinkelbach_dual(mr, s, 2.0);
  double best = 0.0;
  for (int a = 0; a < 256; ++a) {
    double acc = 0.0;
    for (int b = a; b < 256; ++b) {
      acc += s[b] * s[b];
      best = std::max(best, std::sqrt(acc / (255.0 + b - a + 1)));
    }
  }
  EXPECT_NEAR(v, best, 1e-9);
}

TEST(Norm, Examples) {
  EXPECT_NEAR(norm(NormParams::make(SetFunction::cardinality(2), 2.0), {3, -4}), 7.0, 1e-12);
  auto pg = SetFunction::partition_group_count(3, {SubsetMask(0b011), SubsetMask(0b100)});
  EXPECT_NEAR(norm(NormParams::make(pg, 2.0), {3, 4, -2}), 7.0, 1e-12);
  EXPECT_NEAR(norm(NormParams::make(SetFunction::pairs_block_code(), kInf), {1, 1, 1}), 1.5, 1e-9);
}

TEST(Norm, LargeModifiedRangeThroughOracle) {
  auto mr = RangeOracle::modified_range(256);
  std::vector<double> ones(256, 1.0);
  EXPECT_NEAR(decomposition_norm(mr, ones, kInf), 511.0, 1e-9);
  std::vector<double> e3(256, 0.0);
  e3[2] = 1.0;
  EXPECT_NEAR(decomposition_norm(mr, e3, 2.0), std::sqrt(256.0), 1e-9);
}

TEST(Norm, ClosedFormIdentities) {
  std::mt19937_64 rng(1);
  const int d = 6;
  auto card = SetFunction::cardinality(d), ind = SetFunction::indicator_nonempty(d);
  std::vector<SubsetMask> part = {SubsetMask(0b000011), SubsetMask(0b011100), SubsetMask(0b100000)};
  auto pg = SetFunction::partition_group_count(d, part);
  auto eh = SetFunction::exclusive_hard(d, part);
  for (double p : {1.5, 2.0, 3.0, kInf}) {
    for (int k = 0; k < 25; ++k) {
      auto w = oracle::gaussian(rng, d);
      ASSERT_NEAR(norm(NormParams::make(card, p), w), oracle::lp(w, 1.0), 1e-9);
      ASSERT_NEAR(norm(NormParams::make(ind, p), w), oracle::lp(w, p), 1e-9);
      double gl = 0.0, sums = 0.0;
      std::vector<double> l1s;
      for (auto g : part) {
        gl += oracle::lp(oracle::pick(w, g), p);
        l1s.push_back(oracle::lp(oracle::pick(w, g), 1.0));
      }
      (void)sums;
      ASSERT_NEAR(norm(NormParams::make(pg, p), w), gl, 1e-9);
      ASSERT_NEAR(norm(NormParams::make(eh, p), w), oracle::lp(l1s, p), 1e-8);
    }
  }
}

TEST(Norm, DecompositionAgreesWithLatentLp) {
  std::mt19937_64 rng(7);
  for (const auto& f : submodular_suite(6))
    for (double p : {1.5, 2.0, 4.0, kInf}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 10; ++k) {
        auto w = oracle::gaussian(rng, 6);
        const double a = norm(np, w), b = norm_lp(np, w);
        ASSERT_NEAR(a, b, 1e-7 * (1 + a));
      }
    }
}

TEST(Norm, DualityWithBruteForceDual) {
  // s = gradient direction of the norm attains Cauchy-Schwarz: check s'w <= norm * dual
  std::mt19937_64 rng(9);
  for (const auto& f : general_suite(6))
    for (double p : {2.0, kInf}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 20; ++k) {
        auto w = oracle::gaussian(rng, 6), s = oracle::gaussian(rng, 6);
        ASSERT_LE(dot(s, w), norm(np, w) * oracle::dual_norm(f, s, p) + 1e-9);
      }
    }
}

TEST(Norm, Axioms) {
  std::mt19937_64 rng(13);
  for (const auto& f : general_suite(6))
    for (double p : {2.0, kInf}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 20; ++k) {
        auto u = oracle::gaussian(rng, 6), v = oracle::gaussian(rng, 6);
        const double nu = norm(np, u), nv = norm(np, v);
        std::vector<double> sum(6), scaled(6), absu(6);
        for (int i = 0; i < 6; ++i) {
          sum[i] = u[i] + v[i];
          scaled[i] = -2.5 * u[i];
          absu[i] = std::abs(u[i]);
        }
        ASSERT_LE(norm(np, sum), nu + nv + 1e-9);
        ASSERT_NEAR(norm(np, scaled), 2.5 * nu, 1e-9 * (1 + nu));
        ASSERT_NEAR(norm(np, absu), nu, 1e-9 * (1 + nu));
      }
    }
}

TEST(Norm, EnvelopeOfTheta) {
  std::mt19937_64 rng(17);
  for (const auto& f : general_suite(6))
    for (double p : {2.0, kInf}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 20; ++k) {
        auto w = oracle::gaussian(rng, 6);
        if (k % 2) w[k % 6] = 0.0;
        ASSERT_LE(norm(np, w), theta(np, w) + 1e-9);
      }
      // equality at indicators of core sets for p = inf
      if (!np.p_inf()) continue;
      for (auto a : core_set(f).sets) {
        std::vector<double> ind(6, 0.0);
        a.for_each([&](int i) { ind[i] = 1.0; });
        ASSERT_NEAR(norm(np, ind), theta(np, ind), 1e-9);
      }
    }
}

TEST(Norm, EqualsNormOfLowerEnvelope) {
  std::mt19937_64 rng(19);
  for (const auto& f : general_suite(6)) {
    const auto fm = lce_function(f);
    for (double p : {2.0, kInf}) {
      for (int k = 0; k < 10; ++k) {
        auto w = oracle::gaussian(rng, 6);
        const double a = norm_lp(NormParams::make(f, p), w), b = norm_lp(NormParams::make(fm, p), w);
        ASSERT_NEAR(a, b, 1e-8 * (1 + a));
      }
    }
  }
}

TEST(Norm, AppendixInequalities) {
  std::mt19937_64 rng(23);
  for (const auto& f : submodular_suite(6)) {
    const auto tc = constants(f);
    const double fv = f(SubsetMask::full(6));
    for (double p : {1.5, 2.0, kInf}) {
      const double q = conjugate_exponent(p);
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 20; ++k) {
        auto w = oracle::gaussian(rng, 6);
        const double n = norm(np, w);
        ASSERT_LE(std::pow(tc.m, 1.0 / q) * oracle::lp(w, p), n + 1e-9);
        ASSERT_LE(n, std::pow(tc.M, 1.0 / q) * oracle::lp(w, 1.0) + 1e-9);
        ASSERT_LE(n, std::pow(fv, 1.0 / q) * oracle::lp(w, p) + 1e-9);
      }
    }
  }
}

TEST(Norm, ExclusiveLassoIdentity) {
  std::mt19937_64 rng(29);
  std::vector<SubsetMask> part = {SubsetMask(0b00000111), SubsetMask(0b00111000), SubsetMask(0b11000000)};
  auto f = SetFunction::exclusive_max_overlap(8, part);
  for (int k = 0; k < 30; ++k) {
    auto w = oracle::gaussian(rng, 8);
    double want = 0.0;
    for (auto g : part) want = std::max(want, oracle::lp(oracle::pick(w, g), 1.0));
    ASSERT_NEAR(norm(NormParams::make(f, kInf), w), want, 1e-8);
  }
}

TEST(Prox, Examples) {
  auto x = prox(NormParams::make(SetFunction::indicator_nonempty(2), 2.0), 2.0, {3, 4});
  EXPECT_NEAR(x[0], 1.8, 1e-12);
  EXPECT_NEAR(x[1], 2.4, 1e-12);
  auto c = prox(NormParams::make(SetFunction::cardinality(2), 2.0), 2.0, {3, -1});
  EXPECT_NEAR(c[0], 1.0, 1e-12);
  EXPECT_EQ(c[1], 0.0);
  auto z = prox(NormParams::make(SetFunction::modified_range(3), 2.0), 10.0, {1, -1, 1});
  EXPECT_EQ(z, (std::vector<double>{0, 0, 0}));
  auto zero = prox(NormParams::make(SetFunction::modified_range(3), 2.0), 1.0, {0, 0, 0});
  EXPECT_EQ(zero, (std::vector<double>{0, 0, 0}));
}

TEST(Prox, ClosedFormOracles) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    auto z = oracle::gaussian(rng, 7);
    const double lam = std::uniform_real_distribution<double>(0.05, 1.5)(rng);
    auto a = prox(NormParams::make(SetFunction::cardinality(7), 2.0), lam, z);
    auto want = soft_threshold_vec(z, lam);
    for (int i = 0; i < 7; ++i) ASSERT_NEAR(a[i], want[i], 1e-12);
    auto b = prox(NormParams::make(SetFunction::indicator_nonempty(7), 2.0), lam, z);
    const double nz = oracle::lp(z, 2.0), s = std::max(0.0, nz - lam) / nz;
    for (int i = 0; i < 7; ++i) ASSERT_NEAR(b[i], s * z[i], 1e-12);
  }
}

TEST(Prox, FenchelCertificate) {
  std::mt19937_64 rng(37);
  for (const auto& f : submodular_suite(7)) {
    const auto np = NormParams::make(f, 2.0);
    for (int k = 0; k < 30; ++k) {
      auto z = oracle::gaussian(rng, 7, 2.0);
      const double lam = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      auto x = prox(np, lam, z);
      auto r = minus(z, x);
      ASSERT_LE(oracle::dual_norm(f, r, 2.0), lam * (1 + 1e-8));
      ASSERT_NEAR(dot(r, x), lam * norm(np, x), 1e-8 * (1 + lam * norm(np, x)));
    }
  }
}

TEST(Prox, GenericAgreesWithDecomposition) {
  std::mt19937_64 rng(41);
  for (const auto& f : submodular_suite(6)) {
    const auto np = NormParams::make(f, 2.0);
    for (int k = 0; k < 10; ++k) {
      auto z = oracle::gaussian(rng, 6, 2.0);
      const double lam = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
      auto a = prox(np, lam, z), b = prox_generic(np, lam, z);
      for (int i = 0; i < 6; ++i) ASSERT_NEAR(a[i], b[i], 1e-6);
    }
  }
}

TEST(Prox, GenericCertificateForOtherExponents) {
  std::mt19937_64 rng(43);
  for (const auto& f : general_suite(6)) {
    for (double p : {1.5, 3.0}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 4; ++k) {
        auto z = oracle::gaussian(rng, 6, 2.0);
        const double lam = 0.3;
        auto x = prox_generic(np, lam, z);
        auto r = minus(z, x);
        ASSERT_LE(oracle::dual_norm(f, r, p), lam * (1 + 1e-6));
        ASSERT_GE(dot(r, x), lam * norm(np, x) * (1 - 1e-6) - 1e-9);
      }
    }
  }
}

TEST(Prox, GenericLimits) {
  const auto np = NormParams::make(SetFunction::modified_range(4), 3.0);
  std::vector<double> z = {1.0, -2.0, 0.5, 3.0};
  auto x = prox_generic(np, 1e-10, z);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(x[i], z[i], 1e-8);
  EXPECT_EQ(prox_generic(np, 1.0, {0, 0, 0, 0}), (std::vector<double>{0, 0, 0, 0}));
}

TEST(Prox, LargeModifiedRangeCertificate) {
  std::mt19937_64 rng(47);
  auto mr = RangeOracle::modified_range(256);
  auto z = oracle::gaussian(rng, 256);
  for (int i = 100; i < 160; ++i) z[i] += 3.0;
  const double lam = 0.5;
  auto x = decomposition_prox(mr, z, lam, 2.0);
  auto r = minus(z, x);
  EXPECT_LE(dinkelbach_dual(mr, r, 2.0), lam * (1 + 1e-8));
  EXPECT_NEAR(dot(r, x), lam * decomposition_norm(mr, x, 2.0), 1e-7);
}

TEST(EtaDecomposition, Examples) {
  auto a = eta_decomposition(NormParams::make(SetFunction::indicator_nonempty(2), 2.0), {3, 4});
  ASSERT_EQ(a.sets.size(), 1u);
  EXPECT_NEAR(a.eta[0], 5.0, 1e-12);
  EXPECT_NEAR(a.reconstruct({3, 4}, 2.0), 5.0, 1e-12);
  auto c = eta_decomposition(NormParams::make(SetFunction::cardinality(2), 2.0), {3, -1});
  ASSERT_EQ(c.sets.size(), 2u);
  EXPECT_EQ(c.sets[0], SubsetMask(0b01));
  EXPECT_NEAR(c.eta[0], 3.0, 1e-12);
  EXPECT_NEAR(c.eta[1], 1.0, 1e-12);
  EXPECT_NEAR(c.reconstruct({3, -1}, 2.0), 4.0, 1e-12);
  auto pg = SetFunction::partition_group_count(3, {SubsetMask(0b011), SubsetMask(0b100)});
  EXPECT_NEAR(eta_decomposition(NormParams::make(pg, 2.0), {3, 4, -2}).reconstruct({3, 4, -2}, 2.0), 7.0, 1e-12);
  EXPECT_THROW(eta_decomposition(NormParams::make(pg, 2.0), {0, 0, 0}), InvalidArgument);
}

TEST(EtaDecomposition, ReconstructsNormAndOrdersLevels) {
  std::mt19937_64 rng(53);
  for (const auto& f : submodular_suite(7))
    for (double p : {1.5, 2.0, 3.0}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 20; ++k) {
        auto w = oracle::gaussian(rng, 7);
        const auto lv = eta_decomposition(np, w);
        ASSERT_NEAR(lv.reconstruct(w, p), norm(np, w), 1e-8);
        for (std::size_t j = 0; j + 1 < lv.eta.size(); ++j) ASSERT_GT(lv.eta[j], lv.eta[j + 1]);
        for (double g : lv.gains) ASSERT_GT(g, 0.0);
      }
    }
}

TEST(LatentDecomposition, Examples) {
  auto pg = SetFunction::partition_group_count(3, {SubsetMask(0b011), SubsetMask(0b100)});
  auto ld = latent_decomposition(NormParams::make(pg, 2.0), {3, 4, -2});
  ASSERT_EQ(ld.blocks.size(), 2u);
  EXPECT_NEAR(ld.objective, 7.0, 1e-8);
  for (std::size_t b = 0; b < 2; ++b) {
    if (ld.blocks[b] == SubsetMask(0b011)) {
      EXPECT_NEAR(ld.vectors[b][0], 3.0, 1e-8);
      EXPECT_NEAR(ld.vectors[b][1], 4.0, 1e-8);
    } else {
      EXPECT_EQ(ld.blocks[b], SubsetMask(0b100));
      EXPECT_NEAR(ld.vectors[b][2], -2.0, 1e-8);
    }
  }
  for (double p : {1.5, 2.0, kInf}) {
    auto c = latent_decomposition(NormParams::make(SetFunction::cardinality(3), p), {0, 5, 0});
    ASSERT_EQ(c.blocks.size(), 1u);
    EXPECT_EQ(c.blocks[0], SubsetMask(0b010));
    EXPECT_NEAR(c.vectors[0][1], 5.0, 1e-8);
  }
  auto e = latent_decomposition(NormParams::make(SetFunction::pairs_block_code(), kInf), {1, 1, 1});
  ASSERT_EQ(e.blocks.size(), 3u);
  for (double dlt : e.delta) EXPECT_NEAR(dlt, 0.5, 1e-9);
}

TEST(LatentDecomposition, SumsToVectorAndAttainsNorm) {
  std::mt19937_64 rng(59);
  for (const auto& f : general_suite(6))
    for (double p : {2.0, kInf}) {
      const auto np = NormParams::make(f, p);
      for (int k = 0; k < 5; ++k) {
        auto w = oracle::gaussian(rng, 6);
        auto ld = latent_decomposition(np, w);
        std::vector<double> sum(6, 0.0);
        double obj = 0.0;
        for (std::size_t b = 0; b < ld.blocks.size(); ++b) {
          for (int i = 0; i < 6; ++i) {
            sum[i] += ld.vectors[b][i];
            if (!ld.blocks[b].contains(i)) {
              ASSERT_EQ(ld.vectors[b][i], 0.0);
            }
          }
          obj += std::pow(f(ld.blocks[b]), 1.0 / np.q) * oracle::lp(ld.vectors[b], p);
        }
        for (int i = 0; i < 6; ++i) ASSERT_NEAR(sum[i], w[i], 1e-8);
        ASSERT_NEAR(obj, norm(np, w), 1e-6 * (1 + obj));
      }
    }
}

TEST(ComparisonNorms, Examples) {
  auto gs = groups_from_masks(4, {SubsetMask(0b0011), SubsetMask(0b1100)});
  EXPECT_NEAR(exclusive_lp_l1_norm(gs, 2.0, {1, 1, 1, 0}), std::sqrt(5.0), 1e-15);
  EXPECT_EQ(overlap_group_norm(gs, 2.0, {0, 0, 0, 0}), 0.0);
  std::mt19937_64 rng(61);
  std::vector<SubsetMask> part = {SubsetMask(0b0011), SubsetMask(0b1100)};
  auto pg = SetFunction::partition_group_count(4, part);
  for (int k = 0; k < 20; ++k) {
    auto w = oracle::gaussian(rng, 4);
    ASSERT_NEAR(overlap_group_norm(gs, 2.0, w), norm(NormParams::make(pg, 2.0), w), 1e-12);
  }
  EXPECT_NEAR(elastic_net_penalty(0.5, {1, -2}), 0.5 * 3 + 0.5 * 2.5, 1e-15);
  EXPECT_NEAR(ridge_penalty({3, 4}), 12.5, 1e-15);
  EXPECT_NEAR(l1_norm({3, -4}), 7.0, 1e-15);
}

TEST(ComparisonNorms, IntervalLinfGroupNormEqualsRangeNorm) {
  std::mt19937_64 rng(67);
  for (int d : {5, 12, 40}) {
    auto gs = interval_group_system(d);
    for (int k = 0; k < 100 / (d / 5); ++k) {
      auto w = oracle::gaussian(rng, d);
      ASSERT_NEAR(overlap_group_norm(gs, kInf, w),
                  decomposition_norm(RangeOracle::modified_range(d), w, kInf), 1e-8 * d);
    }
  }
}

TEST(WeightedL1, MaxContainingSetWeights) {
  auto f = SetFunction::modified_range(4);
  auto dk = weighted_l1_weights(f);
  for (double x : dk) EXPECT_EQ(x, 7.0);
  EXPECT_EQ(weighted_l1_norm(dk, {1, -1, 0, 0}), 14.0);
}

TEST(RelaxationConstant, Values) {
  EXPECT_NEAR(relaxation_constant(2.0, 1.0, 1.0), 2.0, 1e-15);
  EXPECT_NEAR(relaxation_constant(kInf, 3.0, 1.0), 3.0, 1e-15);
  EXPECT_THROW(relaxation_constant(2.0, 0.0, 1.0), InvalidArgument);
}

TEST(Decomposability, WeakInequality) {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<std::uint64_t> mask(1, 62);
  for (const auto& f : submodular_suite(6))
    for (double p : {2.0, kInf}) {
      for (int k = 0; k < 30; ++k) {
        const SubsetMask J(mask(rng));
        auto w = oracle::gaussian(rng, 6);
        ASSERT_GE(norm(NormParams::make(f, p), w), split_norm(f, J, p, w) - 1e-9);
      }
    }
}
