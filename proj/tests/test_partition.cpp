#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"

namespace ts = toric_szego;
using ts::BigInt;
using ts::Point;

TEST(Partition, MatchesSequenceEnumeration) {
  for (const char* name : {"simplex1.json", "simplex2.json", "veronese.json", "square.json", "hexagon.json",
                           "remark-simplex.json", "simplex3.json"}) {
    const auto p = oracle::load(name);
    const int max_n = p.lattice_points().size() > 4 ? 3 : 5;
    for (int n = 1; n <= max_n; ++n) {
      const auto t = ts::partition_counts(p, n);
      const auto brute = oracle::sequence_counts(p.lattice_points(), n);
      for (std::size_t i = 0; i < t.support.size(); ++i) {
        auto it = brute.find(t.support[i]);
        const std::int64_t want = it == brute.end() ? 0 : it->second;
        EXPECT_EQ(t.counts[i], BigInt(want)) << name << " N=" << n << " alpha=" << ts::to_string(t.support[i]);
      }
      for (const auto& [alpha, c] : brute) EXPECT_TRUE(t.support.contains(alpha)) << ts::to_string(alpha);
    }
  }
}

TEST(Partition, SumRule) {
  for (const char* name : {"simplex2.json", "square.json", "hexagon.json", "remark-simplex.json"}) {
    const auto p = oracle::load(name);
    for (int n = 1; n <= 8; ++n) {
      BigInt want = 1;
      for (int k = 0; k < n; ++k) want *= static_cast<std::int64_t>(p.lattice_points().size());
      EXPECT_EQ(ts::partition_counts(p, n).total(), want) << name << " N=" << n;
    }
  }
}

TEST(Partition, ConvolutionSemigroup) {
  for (const char* name : {"square.json", "hexagon.json", "remark-simplex.json", "veronese.json"}) {
    const auto p = oracle::load(name);
    for (int a = 1; a <= 3; ++a)
      for (int b = 1; b <= 3; ++b) {
        const auto direct = ts::partition_counts(p, a + b);
        const auto conv = ts::convolve(p, ts::partition_counts(p, a), ts::partition_counts(p, b));
        EXPECT_EQ(direct.support, conv.support);
        EXPECT_EQ(direct.counts, conv.counts) << name << " " << a << "+" << b;
      }
  }
}

TEST(Partition, SimplexGivesMultinomials) {
  const auto s2 = oracle::load("simplex2.json");
  for (int n = 1; n <= 10; ++n) {
    const auto t = ts::partition_counts(s2, n);
    for (std::size_t i = 0; i < t.support.size(); ++i) {
      const auto& a = t.support[i];
      const double want = oracle::factorial(n) /
                          (oracle::factorial(static_cast<int>(a[0])) * oracle::factorial(static_cast<int>(a[1])) *
                           oracle::factorial(n - static_cast<int>(a[0] + a[1])));
      EXPECT_EQ(t.counts[i].convert_to<double>(), want);
    }
  }
}

TEST(Partition, LargeCountsStayExact) {
  // 3^40 sequences on [0,2]: beyond 64-bit range
  const auto t = ts::partition_counts(oracle::load("veronese.json"), 40);
  BigInt want = 1;
  for (int k = 0; k < 40; ++k) want *= 3;
  EXPECT_EQ(t.total(), want);
  // trinomial symmetry
  for (std::size_t i = 0; i < t.support.size(); ++i) EXPECT_EQ(t.counts[i], t.count({80 - t.support[i][0]}));
}

TEST(Partition, NonNormalSimplexMissesInteriorPoint) {
  const auto p = oracle::load("remark-simplex.json");
  const auto t = ts::partition_counts(p, 2);
  EXPECT_TRUE(t.support.contains({1, 1, 1}));
  EXPECT_EQ(t.count({1, 1, 1}), BigInt(0));
  EXPECT_EQ(ts::decomposability_check(t), (std::vector<Point>{{1, 1, 1}}));
  EXPECT_TRUE(ts::decomposability_check(oracle::load("square.json"), 4).empty());
}

TEST(Partition, CountOffSupportIsZero) {
  const auto t = ts::partition_counts(oracle::load("square.json"), 2);
  EXPECT_EQ(t.count({5, 5}), BigInt(0));
  EXPECT_EQ(t.count({1, 1}), BigInt(4));
}

TEST(Partition, CellCapIsEnforced) {
  EXPECT_THROW(ts::partition_counts(oracle::load("simplex3.json"), 200, 1000), ts::ValidationError);
}

TEST(Partition, CsvLayout) {
  std::ostringstream os;
  ts::write_partition_csv(os, ts::partition_counts(oracle::load("simplex1.json"), 3));
  EXPECT_EQ(os.str(), "alpha_1,count\n0,1\n1,3\n2,3\n3,1\n");
}

TEST(Partition, RandomPolytopesSatisfySumRuleAndSemigroup) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 1 + trial % 3;
    const auto p = ts::LatticePolytope::from_vertices(oracle::random_vertices(rng, m, m == 3 ? 2 : 3, m + 3));
    BigInt want = 1;
    for (int k = 0; k < 3; ++k) want *= static_cast<std::int64_t>(p.lattice_points().size());
    const auto t3 = ts::partition_counts(p, 3);
    EXPECT_EQ(t3.total(), want);
    EXPECT_EQ(ts::convolve(p, ts::partition_counts(p, 1), ts::partition_counts(p, 2)).counts, t3.counts);
  }
}
