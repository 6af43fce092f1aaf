#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace ts = toric_szego;
using ts::Point;

namespace {

const char* kSamples[] = {"simplex1.json", "simplex2.json", "simplex3.json", "veronese.json",
                          "square.json",   "hexagon.json",  "remark-simplex.json"};

}  // namespace

TEST(Polytope, LatticePointsMatchHullScan) {
  for (const char* name : kSamples) {
    const auto p = oracle::load(name);
    for (int n = 1; n <= 3; ++n) {
      const auto got = ts::lattice_points(p, n);
      EXPECT_EQ(got.points(), oracle::lattice_scan(p.vertices(), n)) << name << " N=" << n;
      EXPECT_EQ(static_cast<std::size_t>(ts::ehrhart_count(p, n)), got.size());
    }
  }
}

TEST(Polytope, KnownEhrhartCounts) {
  const auto square = oracle::load("square.json");
  const auto s2 = oracle::load("simplex2.json");
  const auto s3 = oracle::load("simplex3.json");
  const auto hex = oracle::load("hexagon.json");
  for (int n = 1; n <= 6; ++n) {
    EXPECT_EQ(ts::ehrhart_count(square, n), (n + 1) * (n + 1));
    EXPECT_EQ(ts::ehrhart_count(s2, n), (n + 1) * (n + 2) / 2);
    EXPECT_EQ(ts::ehrhart_count(s3, n), (n + 1) * (n + 2) * (n + 3) / 6);
    EXPECT_EQ(ts::ehrhart_count(hex, n), 3 * n * n + 3 * n + 1);
  }
  EXPECT_EQ(ts::ehrhart_count(square, 3), 16);
}

TEST(Polytope, NonNormalSimplexContainsCenterOfTwoP) {
  const auto p = oracle::load("remark-simplex.json");
  EXPECT_TRUE(p.contains({1, 1, 1}, 2));
  EXPECT_TRUE(p.interior_contains({1, 1, 1}, 2));
  EXPECT_EQ(ts::ehrhart_count(p, 1), 4);
  EXPECT_EQ(ts::ehrhart_count(p, 2), 11);
}

TEST(Polytope, FacetsSupportEveryVertexAndContainHull) {
  for (const char* name : kSamples) {
    const auto p = oracle::load(name);
    for (const auto& f : p.facets()) {
      int tight = 0;
      for (const auto& v : p.vertices()) {
        EXPECT_LE(ts::detail::dot(f.normal, v), f.offset);
        tight += ts::detail::dot(f.normal, v) == f.offset;
      }
      EXPECT_GE(tight, p.dim()) << name;
      EXPECT_EQ(ts::detail::content(f.normal), 1) << "normal must be primitive";
    }
  }
}

TEST(Polytope, VolumeMatchesIndependentFormulas) {
  EXPECT_EQ(ts::euclidean_volume(oracle::load("simplex1.json")), ts::Rational(1));
  EXPECT_EQ(ts::euclidean_volume(oracle::load("veronese.json")), ts::Rational(2));
  EXPECT_EQ(ts::euclidean_volume(oracle::load("simplex3.json")), ts::Rational(1, 6));
  // the non-normal simplex: |det of edge vectors| / 3!
  EXPECT_EQ(ts::euclidean_volume(oracle::load("remark-simplex.json")), ts::Rational(2, 6));
  for (const char* name : {"simplex2.json", "square.json", "hexagon.json"}) {
    const auto p = oracle::load(name);
    EXPECT_EQ(ts::euclidean_volume(p), oracle::shoelace_area(p.vertices())) << name;
  }
}

TEST(Polytope, DelzantCertificates) {
  for (const char* name : {"simplex1.json", "simplex2.json", "simplex3.json", "veronese.json", "square.json",
                           "hexagon.json"})
    EXPECT_TRUE(ts::is_delzant(oracle::load(name)).delzant) << name;

  const auto cert = ts::is_delzant(oracle::load("remark-simplex.json"));
  ASSERT_FALSE(cert.delzant);
  ASSERT_NE(cert.first_failure(), nullptr);
  EXPECT_EQ(cert.first_failure()->vertex, (Point{0, 0, 0}));
  EXPECT_EQ(std::abs(cert.first_failure()->determinant), 2);
  for (const auto& v : cert.vertices) EXPECT_EQ(v.edges.size(), 3u);

  // weighted projective plane P(1,1,2): the apex (0,1) has |det| = 2
  const auto wpp = ts::LatticePolytope::from_vertices({{0, 0}, {2, 0}, {0, 1}});
  const auto c2 = ts::is_delzant(wpp);
  EXPECT_FALSE(c2.delzant);
  EXPECT_EQ(c2.first_failure()->vertex, (Point{0, 1}));
  EXPECT_EQ(std::abs(c2.first_failure()->determinant), 2);

  // a 3D vertex with four edges is not simple
  const auto pyramid = ts::LatticePolytope::from_vertices({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {2, 2, 0}, {1, 1, 1}});
  EXPECT_FALSE(ts::is_delzant(pyramid).delzant);
}

TEST(Polytope, DelzantIsInvariantUnderUnimodularShift) {
  const auto a = ts::LatticePolytope::from_vertices({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
  const auto b = ts::LatticePolytope::from_vertices({{3, 5}, {4, 5}, {3, 6}, {4, 6}});
  EXPECT_EQ(ts::is_delzant(a).delzant, ts::is_delzant(b).delzant);
  EXPECT_EQ(ts::euclidean_volume(a), ts::euclidean_volume(b));
  EXPECT_EQ(ts::ehrhart_count(a, 4), ts::ehrhart_count(b, 4));
}

TEST(Polytope, RandomPolytopesAgreeWithOracles) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + trial % 3;
    const auto verts = oracle::random_vertices(rng, m, m == 3 ? 2 : 4, m + 3);
    const auto p = ts::LatticePolytope::from_vertices(verts);
    EXPECT_EQ(p.vertices().size(), verts.size());
    for (int n = 1; n <= 2; ++n) EXPECT_EQ(ts::lattice_points(p, n).points(), oracle::lattice_scan(verts, n));
    // Ehrhart count grows at least like N^m vol
    EXPECT_GE(static_cast<double>(ts::ehrhart_count(p, 2)),
              std::pow(2.0, m) * ts::euclidean_volume(p).convert_to<double>());
  }
}

TEST(Polytope, ParseAcceptsIntegralFloatsAndWeights) {
  const auto p = ts::parse_polytope(R"({"dim": 1, "vertices": [[0.0], [2]],
      "weights": [{"point": [1], "c": 1.5}]})");
  EXPECT_EQ(p.vertices().size(), 2u);
  EXPECT_DOUBLE_EQ(p.weight({1}), 1.5);
  EXPECT_DOUBLE_EQ(p.weight({0}), 1.0);
  EXPECT_FALSE(p.unit_weights());
}

TEST(Polytope, ParseErrors) {
  EXPECT_THROW(ts::parse_polytope("{not json"), ts::ParseError);
  EXPECT_THROW(ts::parse_polytope(R"({"vertices": [[0]]})"), ts::ParseError);
  EXPECT_THROW(ts::parse_polytope(R"({"dim": 1})"), ts::ParseError);
  EXPECT_THROW(ts::parse_polytope(R"({"dim": 1, "vertices": [[0.5], [1]]})"), ts::ParseError);
  EXPECT_THROW(ts::parse_polytope(R"({"dim": 2, "vertices": [[0], [1]]})"), ts::ParseError);
}

TEST(Polytope, ValidationErrors) {
  EXPECT_THROW(ts::parse_polytope(R"({"dim": 1, "vertices": []})"), ts::ValidationError);
  // outside the positive quadrant
  EXPECT_THROW(ts::LatticePolytope::from_vertices({{-1}, {1}}), ts::ValidationError);
  // not full-dimensional
  EXPECT_THROW(ts::LatticePolytope::from_vertices({{0, 0}, {1, 1}, {2, 2}}), ts::ValidationError);
  // a listed point that is not a vertex
  EXPECT_THROW(ts::LatticePolytope::from_vertices({{0}, {1}, {2}}), ts::ValidationError);
  // H-representation inconsistent with the vertices
  std::vector<ts::Facet> wrong = {{{-1}, 0}, {{1}, 3}};
  EXPECT_THROW(ts::LatticePolytope::from_vertices({{0}, {2}}, wrong), ts::ValidationError);
  std::vector<ts::Facet> right = {{{1}, 2}, {{-1}, 0}};
  EXPECT_NO_THROW(ts::LatticePolytope::from_vertices({{0}, {2}}, right));
}
