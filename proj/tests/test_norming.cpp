#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

namespace ts = toric_szego;
using ts::Point;
using ts::Rational;

namespace {

ts::QuadratureConfig quadrature_only() {
  ts::QuadratureConfig c;
  c.allow_closed_form = false;
  return c;
}

// Q_1(alpha) on [0,2] with unit weights by the trapezoid rule on a uniform
// grid; f'' from the explicit three-term formula.
double trapezoid_veronese(int alpha, std::size_t points) {
  const double lo = -25.0, hi = 25.0;
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double s = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double r = lo + h * static_cast<double>(i);
    const double e1 = std::exp(r), e2 = std::exp(2 * r);
    const double z = 1 + e1 + e2;
    const double mean = (e1 + 2 * e2) / z;
    const double f2 = (e1 + 4 * e2) / z - mean * mean;
    const double w = (i == 0 || i + 1 == points) ? 0.5 : 1.0;
    s += w * std::exp(alpha * r) / z * f2;
  }
  return s * h;
}

}  // namespace

TEST(Norming, ClosedFormReferenceValues) {
  EXPECT_EQ(ts::closed_form_projective_norm(1, 1, {0}), Rational(1, 2));
  EXPECT_EQ(ts::closed_form_projective_norm(2, 1, {0, 0}), Rational(1, 6));
  EXPECT_EQ(ts::closed_form_projective_norm(1, 4, {2}), Rational(1, 30));
  EXPECT_EQ(ts::closed_form_projective_norm(1, 2, {1}), Rational(1, 6));
  EXPECT_EQ(ts::closed_form_projective_norm(2, 1, {1, 0}), Rational(1, 6));
  EXPECT_THROW(ts::closed_form_projective_norm(1, 2, {3}), ts::ValidationError);
}

TEST(Norming, TrapezoidOracleOnVeronese) {
  const ts::KahlerPotential pot(oracle::load("veronese.json"));
  for (int a : {0, 1, 2}) {
    const auto e = ts::monomial_norm(pot, 1, {a}, quadrature_only());
    const double want = trapezoid_veronese(a, 1000000);
    EXPECT_NEAR(e.value, want, 1e-7 * want) << "alpha=" << a;
    EXPECT_FALSE(e.flagged);
  }
}

TEST(Norming, QuadratureCalibratesAgainstProjectiveClosedForms) {
  for (const char* name : {"simplex1.json", "simplex2.json"}) {
    const auto p = oracle::load(name);
    const ts::KahlerPotential pot(p);
    for (int n = 1; n <= 6; ++n) {
      const auto t = ts::norm_table(pot, n, quadrature_only());
      for (const auto& e : t.entries) {
        const double want = ts::closed_form_projective_norm(p.dim(), n, e.alpha).convert_to<double>();
        EXPECT_NEAR(e.value / want, 1.0, 1e-6) << name << " N=" << n << " alpha=" << ts::to_string(e.alpha);
        EXPECT_EQ(e.method, ts::NormMethod::Quadrature);
        EXPECT_FALSE(e.flagged);
      }
    }
  }
}

TEST(Norming, BinomialWeightsScaleTheProjectiveForm) {
  const auto p = oracle::load("veronese-binomial.json");
  ASSERT_EQ(ts::projective_scale(p), std::optional<std::int64_t>(2));
  const ts::KahlerPotential pot(p);
  for (int n = 1; n <= 4; ++n) {
    const auto quad = ts::norm_table(pot, n, quadrature_only());
    const auto fast = ts::norm_table(pot, n);
    for (std::size_t i = 0; i < quad.entries.size(); ++i) {
      EXPECT_EQ(fast.entries[i].method, ts::NormMethod::ClosedForm);
      EXPECT_EQ(*fast.entries[i].exact, 2 * ts::closed_form_projective_norm(1, 2 * n, quad.entries[i].alpha));
      EXPECT_NEAR(quad.entries[i].value / fast.entries[i].value, 1.0, 1e-6);
    }
  }
  EXPECT_FALSE(ts::projective_scale(oracle::load("veronese.json")).has_value());
  EXPECT_EQ(ts::projective_scale(oracle::load("simplex3.json")), std::optional<std::int64_t>(1));
}

TEST(Norming, SimplexTableAtLevelThree) {
  const ts::KahlerPotential pot(oracle::load("simplex1.json"));
  const auto t = ts::norm_table(pot, 3);
  const std::vector<Rational> want = {Rational(1, 4), Rational(1, 12), Rational(1, 12), Rational(1, 4)};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(*t.entries[i].exact, want[i]);
}

TEST(Norming, SquareFactorsIntoSegmentNorms) {
  const ts::KahlerPotential pot(oracle::load("square.json"));
  for (int n = 1; n <= 4; ++n) {
    const auto t = ts::norm_table(pot, n, quadrature_only());
    for (const auto& e : t.entries) {
      const double want = (ts::closed_form_projective_norm(1, n, {e.alpha[0]}) *
                           ts::closed_form_projective_norm(1, n, {e.alpha[1]}))
                              .convert_to<double>();
      EXPECT_NEAR(e.value / want, 1.0, 1e-7) << ts::to_string(e.alpha);
    }
  }
}

TEST(Norming, LatticeSymmetriesPreserveNorms) {
  const auto cfg = quadrature_only();
  {
    const ts::KahlerPotential pot(oracle::load("square.json"));
    const auto t = ts::norm_table(pot, 3, cfg);
    for (const auto& e : t.entries) {
      const Point swapped{e.alpha[1], e.alpha[0]};
      const Point reflected{3 - e.alpha[0], e.alpha[1]};
      EXPECT_NEAR(t.at(swapped).value / e.value, 1.0, 1e-8);
      EXPECT_NEAR(t.at(reflected).value / e.value, 1.0, 1e-8);
    }
    const auto t1 = ts::norm_table(pot, 1, cfg);
    for (const auto& e : t1.entries) EXPECT_NEAR(e.value / t1.entries[0].value, 1.0, 1e-8);
  }
  {
    const ts::KahlerPotential pot(oracle::load("veronese.json"));
    const auto t = ts::norm_table(pot, 5, cfg);
    for (const auto& e : t.entries) EXPECT_NEAR(t.at({10 - e.alpha[0]}).value / e.value, 1.0, 1e-8);
  }
  {
    // the hexagon is invariant under (x, y) -> (2 - x, 2 - y) and the swap
    const ts::KahlerPotential pot(oracle::load("hexagon.json"));
    const auto t = ts::norm_table(pot, 2, cfg);
    for (const auto& e : t.entries) {
      EXPECT_GT(e.value, 0.0);
      EXPECT_NEAR(t.at({4 - e.alpha[0], 4 - e.alpha[1]}).value / e.value, 1.0, 1e-8);
      EXPECT_NEAR(t.at({e.alpha[1], e.alpha[0]}).value / e.value, 1.0, 1e-8);
    }
  }
}

TEST(Norming, TotalVolumeMatchesPolytopeVolume) {
  auto cfg = quadrature_only();
  for (const char* name : {"simplex1.json", "simplex2.json", "veronese.json", "veronese-binomial.json", "square.json",
                           "hexagon.json"}) {
    const ts::KahlerPotential pot(oracle::load(name));
    const auto v = ts::total_volume_check(pot, cfg);
    EXPECT_TRUE(v.converged);
    EXPECT_LT(v.gap, 1e-8) << name;
  }
  cfg.rel_tol = 1e-6;
  const ts::KahlerPotential s3(oracle::load("simplex3.json"));
  const auto v3 = ts::total_volume_check(s3, cfg);
  EXPECT_EQ(v3.exact, Rational(1, 6));
  EXPECT_LT(v3.gap, 1e-6);
}

TEST(Norming, BoundaryEntriesAreMarked) {
  const ts::KahlerPotential pot(oracle::load("veronese.json"));
  const auto t = ts::norm_table(pot, 2, quadrature_only());
  for (const auto& e : t.entries) EXPECT_EQ(e.boundary, e.alpha[0] == 0 || e.alpha[0] == 4);
}

TEST(Norming, ResultsIndependentOfThreadCount) {
  const ts::KahlerPotential pot(oracle::load("square.json"));
  auto cfg = quadrature_only();
  const auto one = ts::norm_table(pot, 3, cfg);
  cfg.threads = 3;
  const auto many = ts::norm_table(pot, 3, cfg);
  for (std::size_t i = 0; i < one.entries.size(); ++i) EXPECT_EQ(one.entries[i].value, many.entries[i].value);
}

TEST(Norming, ConfigValidation) {
  const ts::KahlerPotential pot(oracle::load("simplex1.json"));
  ts::QuadratureConfig c;
  c.rel_tol = 0.5;
  EXPECT_THROW(ts::monomial_norm(pot, 1, {0}, c), ts::ValidationError);
  c = {};
  c.radius = 3;
  EXPECT_THROW(ts::monomial_norm(pot, 1, {0}, c), ts::ValidationError);
  EXPECT_THROW(ts::monomial_norm(pot, 1, {2}), ts::ValidationError);
  EXPECT_THROW(ts::monomial_norm(pot, 0, {0}), ts::ValidationError);
}

TEST(Norming, CsvLayout) {
  const ts::KahlerPotential pot(oracle::load("simplex1.json"));
  std::ostringstream os;
  ts::write_norms_csv(os, ts::norm_table(pot, 1));
  EXPECT_EQ(os.str(), "alpha_1,Q,err,method,boundary_flag\n0,0.5,0,closed-form,1\n1,0.5,0,closed-form,1\n");
}
