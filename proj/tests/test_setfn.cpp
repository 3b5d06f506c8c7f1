#include <gtest/gtest.h>

#include "oracles.hpp"
#include "struktnorm/io.hpp"
#include "struktnorm/range.hpp"
#include "struktnorm/setfn.hpp"

using namespace struktnorm;

namespace {

SubsetMask one(std::vector<int> v, int d) { return SubsetMask::from_one_based(v, d); }

}  // namespace

TEST(SetFunction, RangeValue) { EXPECT_EQ(SetFunction::range(8)(one({2, 5, 6}, 8)), 5.0); }

TEST(SetFunction, ModifiedRangeSingletonAtLargeD) {
  EXPECT_EQ(RangeOracle::modified_range(256).value({2}), 256.0);
  EXPECT_EQ(SetFunction::modified_range(64)(one({3}, 64)), 64.0);
}

TEST(SetFunction, EmptySetIsZero) {
  EXPECT_EQ(SetFunction::cardinality(5)(SubsetMask()), 0.0);
  EXPECT_EQ(SetFunction::modified_range(5)(SubsetMask()), 0.0);
  EXPECT_EQ(SetFunction::pairs_block_code()(SubsetMask()), 0.0);
}

TEST(SetFunction, ExtendedRealEvaluation) {
  auto f = SetFunction::exclusive_hard(4, {SubsetMask(0b0011), SubsetMask(0b1100)});
  EXPECT_EQ(f(SubsetMask(0b0101)), 1.0);
  EXPECT_TRUE(f.evaluate(SubsetMask(0b0011)).is_inf());
  EXPECT_THROW(f.evaluate(SubsetMask(0b10000)), InvalidArgument);
}

TEST(SetFunction, ConstructionValidation) {
  EXPECT_THROW(SetFunction::explicit_table(2, {1, 1, 1, 1}), InvalidArgument);  // F(empty) != 0
  EXPECT_THROW(SetFunction::explicit_table(2, {0, 0, 1, 1}), InvalidArgument);  // F({1}) = 0
  EXPECT_THROW(SetFunction::explicit_table(2, {0, 1, kInf, kInf}), InvalidArgument);  // {2} not covered
  EXPECT_THROW(SetFunction::explicit_table(2, {0, 1, 1}), InvalidArgument);
  EXPECT_THROW(SetFunction::cardinality(0), InvalidArgument);
  EXPECT_THROW(SetFunction::cardinality(65), InvalidArgument);
  EXPECT_THROW(SetFunction::partition_group_count(3, {SubsetMask(0b011), SubsetMask(0b110)}), InvalidArgument);
  EXPECT_THROW(SetFunction::overlap_count(3, {SubsetMask(0b011)}), InvalidArgument);
  EXPECT_THROW(SetFunction::overlap_count(3, {SubsetMask(0b111)}, {-1.0}), InvalidArgument);
}

TEST(Restriction, Examples) {
  auto c = SetFunction::cardinality(4).restrict_to(one({1, 2}, 4));
  EXPECT_EQ(c.d(), 2);
  EXPECT_EQ(c(one({2}, 2)), 1.0);
  // J = {2,3,4} of MR(5); A' = {1,3} of J is {2,4}
  auto m = SetFunction::modified_range(5).restrict_to(one({2, 3, 4}, 5));
  EXPECT_EQ(m(one({1, 3}, 3)), 7.0);
  EXPECT_EQ(m(SubsetMask()), 0.0);
  EXPECT_THROW(SetFunction::cardinality(3).restrict_to(SubsetMask()), InvalidArgument);
}

TEST(Contraction, Examples) {
  auto c = SetFunction::cardinality(3).contract_by(one({1}, 3));
  EXPECT_EQ(c(one({1, 2}, 2)), 2.0);
  auto e = SetFunction::indicator_nonempty(3).contract_by(one({1}, 3));
  EXPECT_EQ(e(one({1}, 2)), 0.0);
  EXPECT_EQ(e(one({1, 2}, 2)), 0.0);
  // Range(5), J={2,4}, remaining {1,3,5}; A'={5} is index 3
  auto r = SetFunction::range(5).contract_by(one({2, 4}, 5));
  EXPECT_EQ(r(one({3}, 3)), 1.0);
  EXPECT_EQ(r(SubsetMask()), 0.0);
  auto x = SetFunction::exclusive_hard(4, {SubsetMask(0b0011), SubsetMask(0b1100)});
  EXPECT_THROW(x.contract_by(SubsetMask(0b0011)), InvalidArgument);
}

TEST(Contraction, ComposesWithRestriction) {
  std::mt19937_64 rng(11);
  const int d = 8;
  const std::vector<SetFunction> fs = {SetFunction::modified_range(d), SetFunction::range(d),
                                       SetFunction::overlap_count(d, interval_groups_1d(d)),
                                       SetFunction::cardinality(d)};
  std::uniform_int_distribution<std::uint64_t> mask(1, (1u << d) - 1);
  for (const auto& f : fs) {
    for (int trial = 0; trial < 40; ++trial) {
      const SubsetMask J(mask(rng));
      const SubsetMask K(mask(rng) & J.bits());
      if (K == J) continue;
      const auto fj = f.restrict_to(J);
      // K in J's local coordinates
      const auto jidx = J.indices();
      SubsetMask kl;
      for (int a = 0; a < static_cast<int>(jidx.size()); ++a)
        if (K.contains(jidx[a])) kl = kl.with(a);
      const auto g = fj.contract_by(kl);
      std::vector<int> rest;
      for (int a = 0; a < static_cast<int>(jidx.size()); ++a)
        if (!kl.contains(a)) rest.push_back(jidx[a]);
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << g.d()); ++m) {
        SubsetMask A;
        for (int b = 0; b < g.d(); ++b)
          if ((m >> b) & 1u) A = A.with(rest[b]);
        const double expect = f((A | K) & J) - f(K & J);
        ASSERT_DOUBLE_EQ(g(SubsetMask(m)), expect);
      }
    }
  }
}

TEST(Families, AgreeWithMaterializedTables) {
  const int d = 10;
  const std::vector<SetFunction> fs = {
      SetFunction::cardinality(d), SetFunction::indicator_nonempty(d), SetFunction::range(d),
      SetFunction::modified_range(d), SetFunction::projected_range_2d(2, 5),
      SetFunction::overlap_count(d, interval_groups_1d(d)),
      SetFunction::exclusive_max_overlap(d, {SubsetMask(0b11111), SubsetMask(0b1111100000)})};
  for (const auto& f : fs) {
    const auto t = materialize(f);
    for (std::uint64_t m = 0; m < (1u << d); ++m) ASSERT_EQ(f(SubsetMask(m)), t(SubsetMask(m)));
  }
}

TEST(Families, ClosedFormsByHand) {
  const int d = 10;
  auto mr = SetFunction::modified_range(d);
  auto r = SetFunction::range(d);
  for (std::uint64_t m = 1; m < (1u << d); ++m) {
    const SubsetMask a(m);
    const auto idx = a.indices();
    const double range = idx.back() - idx.front() + 1;
    ASSERT_EQ(r(a), range);
    ASSERT_EQ(mr(a), d - 1 + range);
  }
}

TEST(Families, OverlapCountWithPartitionIsGroupCount) {
  const int d = 9;
  std::vector<SubsetMask> part = {SubsetMask(0b000000111), SubsetMask(0b000111000), SubsetMask(0b111000000)};
  std::vector<double> w = {1.5, 2.0, 0.5};
  auto a = SetFunction::overlap_count(d, part, w);
  auto b = SetFunction::partition_group_count(d, part, w);
  for (std::uint64_t m = 0; m < (1u << d); ++m) ASSERT_EQ(a(SubsetMask(m)), b(SubsetMask(m)));
}

TEST(Families, IntervalGroupOverlapCountIsModifiedRange) {
  for (int d = 1; d <= 12; ++d) {
    auto a = SetFunction::overlap_count(d, interval_groups_1d(d));
    auto b = SetFunction::modified_range(d);
    for (std::uint64_t m = 0; m < (1u << d); ++m) ASSERT_EQ(a(SubsetMask(m)), b(SubsetMask(m))) << d;
  }
}

TEST(Families, ProjectedRange2DIsSumOfAxisRanges) {
  const int d1 = 3, d2 = 3;
  auto f = SetFunction::projected_range_2d(d1, d2);
  auto mr = SetFunction::modified_range(3);
  for (std::uint64_t m = 1; m < (1u << 9); ++m) {
    SubsetMask rows, cols;
    SubsetMask(m).for_each([&](int k) {
      rows = rows.with(k / d2);
      cols = cols.with(k % d2);
    });
    ASSERT_EQ(f(SubsetMask(m)), mr(rows) + mr(cols));
  }
  // RangeOracle agrees with the mask family
  auto o = RangeOracle::projected_range_2d(d1, d2);
  for (std::uint64_t m = 1; m < (1u << 9); ++m) ASSERT_EQ(o.value(SubsetMask(m).indices()), f(SubsetMask(m)));
}

TEST(Families, ExclusiveHardValues) {
  auto f = SetFunction::exclusive_hard(4, {SubsetMask(0b0011), SubsetMask(0b1100)});
  EXPECT_EQ(f(SubsetMask(0b0001)), 1.0);
  EXPECT_EQ(f(SubsetMask(0b0101)), 1.0);
  EXPECT_EQ(f(SubsetMask(0b0111)), kInf);
  auto g = SetFunction::exclusive_max_overlap(4, {SubsetMask(0b0011), SubsetMask(0b1100)});
  EXPECT_EQ(g(SubsetMask(0b0111)), 2.0);
}

TEST(Checkers, Submodularity) {
  EXPECT_EQ(check_submodular(SetFunction::cardinality(4)).verdict, Verdict::Holds);
  auto r = check_submodular(SetFunction::range(3));
  ASSERT_EQ(r.verdict, Verdict::Violated);
  // witness A = {}, i = 1, k = 3: F({1}) + F({3}) = 2 < F({1,3}) + F({}) = 3
  EXPECT_TRUE(r.a.empty());
  EXPECT_EQ(r.i, 0);
  EXPECT_EQ(r.k, 2);
  EXPECT_EQ(check_submodular(SetFunction::modified_range(6)).verdict, Verdict::Holds);
}

TEST(Checkers, Monotonicity) {
  EXPECT_EQ(check_monotone(SetFunction::cardinality(5)).verdict, Verdict::Holds);
  auto t = SetFunction::explicit_table(2, {0, 2, 1, 1});
  auto m = check_monotone(t);
  ASSERT_EQ(m.verdict, Verdict::Violated);
  EXPECT_EQ(m.smaller, SubsetMask(0b01));
  EXPECT_EQ(m.larger, SubsetMask(0b11));
}

TEST(Checkers, OverlapCountIsMonotoneSubmodular) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::uint64_t> mask(1, (1u << 8) - 1);
  std::uniform_real_distribution<double> wt(0.1, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SubsetMask> g = {SubsetMask::full(8)};
    std::vector<double> w = {wt(rng)};
    for (int k = 0; k < 5; ++k) {
      g.push_back(SubsetMask(mask(rng)));
      w.push_back(wt(rng));
    }
    auto f = materialize(SetFunction::overlap_count(8, g, w)).with_claims({});
    EXPECT_EQ(check_monotone(f).verdict, Verdict::Holds);
    EXPECT_EQ(check_submodular(f).verdict, Verdict::Holds);
  }
}

TEST(Checkers, LargeUnclaimedIsUnverifiable) {
  auto f = SetFunction::range(30);
  EXPECT_EQ(check_submodular(f).verdict, Verdict::Unverifiable);
  EXPECT_EQ(check_submodular(SetFunction::modified_range(30)).verdict, Verdict::Holds);
}

TEST(Io, ParsesFamiliesAndTables) {
  auto p = parse_function(nlohmann::json::parse(R"({"d": 3, "family": "cardinality"})"));
  ASSERT_TRUE(p.fn);
  EXPECT_EQ((*p.fn)(SubsetMask(0b111)), 3.0);
  auto t = parse_function(nlohmann::json::parse(R"({"d": 2, "table": [0, 1, "inf", 1]})"));
  ASSERT_TRUE(t.fn);
  EXPECT_EQ((*t.fn)(SubsetMask(0b10)), kInf);
  auto big = parse_function(nlohmann::json::parse(R"({"d": 256, "family": "modified_range"})"));
  EXPECT_FALSE(big.fn);
  ASSERT_TRUE(big.range);
  EXPECT_EQ(big.range->value({2}), 256.0);
  EXPECT_THROW(parse_function(nlohmann::json::parse(R"({"d": 3, "family": "nope"})")), InvalidArgument);
  EXPECT_THROW(parse_function(nlohmann::json::parse(R"({"d": 100, "family": "cardinality"})")), std::exception);
  EXPECT_EQ(parse_p("inf"), kInf);
  EXPECT_THROW(parse_p("1"), InvalidArgument);
  EXPECT_THROW(parse_p("abc"), InvalidArgument);
}

TEST(Io, RoundTripsSubsetsOneBased) {
  auto s = parse_subset(nlohmann::json::parse("[1, 3]"), 4);
  EXPECT_EQ(s, SubsetMask(0b0101));
  EXPECT_EQ(subset_to_json(s), nlohmann::json::parse("[1, 3]"));
  EXPECT_THROW(parse_subset(nlohmann::json::parse("[0]"), 4), InvalidArgument);
  EXPECT_THROW(parse_subset(nlohmann::json::parse("[5]"), 4), InvalidArgument);
}
