// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "oracles.hpp"

namespace ts = toric_szego;
using ts::Complex;
using ts::Rational;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

const char* kQuadraturePolytopes[] = {"simplex1.json", "simplex2.json", "veronese.json", "square.json", "hexagon.json"};

Outcome projective_calibration() {
  Outcome o;
  ts::QuadratureConfig cfg;
  cfg.allow_closed_form = false;
  double worst = 0.0;
  for (const char* name : {"simplex1.json", "simplex2.json"}) {
    const ts::KahlerPotential pot(oracle::load(name));
    for (int n = 1; n <= 6; ++n)
      for (const auto& e : ts::norm_table(pot, n, cfg).entries) {
        const double want = ts::closed_form_projective_norm(pot.dim(), n, e.alpha).convert_to<double>();
        worst = std::max(worst, std::abs(e.value / want - 1.0));
      }
  }
  o.require(worst <= 1e-6, "relative error " + fmt(worst));
  o.detail = o.pass ? "max rel err " + fmt(worst) : o.detail;
  return o;
}

Outcome multiplier_constancy() {
  Outcome o;
  ts::QuadratureConfig quad;
  quad.allow_closed_form = false;
  double worst = 0.0;
  for (const char* name : {"simplex1.json", "simplex2.json"}) {
    const auto p = oracle::load(name);
    const ts::KahlerPotential pot(p);
    for (int n = 1; n <= 6; ++n) {
      double want = 1;
      for (int k = 1; k <= p.dim(); ++k) want *= n + k;
      const auto part = ts::partition_counts(p, n);
      for (const auto& e : ts::multiplier_table(part, ts::norm_table(pot, n)).entries)
        o.require(e.exact_eigenvalue && *e.exact_eigenvalue == Rational(static_cast<std::int64_t>(want)),
                  std::string(name) + " exact eigenvalue off");
      for (const auto& e : ts::multiplier_table(part, ts::norm_table(pot, n, quad)).entries)
        worst = std::max(worst, std::abs(e.eigenvalue / want - 1.0));
    }
  }
  o.require(worst <= 1e-6, "quadrature eigenvalue rel err " + fmt(worst));
  if (o.pass) o.detail = "exact on rational path, quadrature rel err " + fmt(worst);
  return o;
}

Outcome factorization() {
  Outcome o;
  double worst_exact = 0.0, worst_quad = 0.0;
  for (const char* name : {"simplex1.json", "veronese.json", "square.json"}) {
    const ts::KahlerPotential pot(oracle::load(name));
    const bool exact = ts::projective_scale(pot.polytope()).has_value();
    for (int n = 1; n <= 6; ++n) {
      const auto rep = ts::verify_factorization(pot, n, 20, 7);
      (exact ? worst_exact : worst_quad) = std::max(exact ? worst_exact : worst_quad, rep.max_resid_rel);
    }
  }
  o.require(worst_exact <= 1e-10, "exact-path residual " + fmt(worst_exact));
  o.require(worst_quad <= 1e-6, "quadrature-path residual " + fmt(worst_quad));
  if (o.pass) o.detail = "max resid exact " + fmt(worst_exact) + ", quadrature " + fmt(worst_quad);
  return o;
}

Outcome normality_counterexample() {
  Outcome o;
  const auto p = oracle::load("remark-simplex.json");
  const auto t = ts::partition_counts(p, 2);
  o.require(p.contains({1, 1, 1}, 2), "(1,1,1) not in 2P");
  o.require(t.count({1, 1, 1}) == 0, "P_2((1,1,1)) nonzero");
  const auto cert = ts::is_delzant(p);
  o.require(!cert.delzant, "accepted as Delzant");
  o.require(cert.first_failure() && std::abs(cert.first_failure()->determinant) == 2, "certificate is not 2");
  if (o.pass) o.detail = "P_2((1,1,1)) = 0, |det| = 2 at (0,0,0)";
  return o;
}

Outcome dimension_trace() {
  Outcome o;
  ts::QuadratureConfig cfg;
  double worst = 0.0;
  for (const char* name : kQuadraturePolytopes) {
    const auto p = oracle::load(name);
    const ts::KahlerPotential pot(p);
    for (int n = 1; n <= 4; ++n) {
      const double want = static_cast<double>(ts::ehrhart_count(p, n));
      worst = std::max(worst, std::abs(ts::diagonal_trace(pot, ts::norm_table(pot, n, cfg), cfg).value / want - 1.0));
    }
  }
  o.require(worst <= 1e-5, "rel err " + fmt(worst));
  if (o.pass) o.detail = "max rel err " + fmt(worst);
  return o;
}

Outcome character_suite() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 2 * std::numbers::pi);
  double worst = 0.0;
  for (const char* name : kQuadraturePolytopes) {
    const ts::KahlerPotential pot(oracle::load(name));
    for (int n = 1; n <= 4; ++n) {
      const auto norms = ts::norm_table(pot, n);
      for (int k = 0; k < 5; ++k) {
        std::vector<double> phi;
        for (int j = 0; j < pot.dim(); ++j) phi.push_back(u(rng));
        const Complex ex = ts::character_exact(pot.polytope(), n, phi);
        const Complex tr = ts::character_trace(pot, norms, phi).value;
        worst = std::max(worst, std::abs(tr - ex) / std::max(std::abs(ex), 1.0));
      }
    }
  }
  o.require(worst <= 1e-5, "trace rel err " + fmt(worst));

  const ts::KahlerPotential sq(oracle::load("square.json"));
  const double l20 = ts::character_leading(sq, 20, {0.0, 0.0}).value.real();
  const double l40 = ts::character_leading(sq, 40, {0.0, 0.0}).value.real();
  o.require(std::abs(l20 - 400.0) <= 1e-6 * 400.0, "leading N=20 is " + fmt(l20));
  o.require(std::abs(l40 - 1600.0) <= 1e-6 * 1600.0, "leading N=40 is " + fmt(l40));
  o.require(ts::character_exact(sq.polytope(), 20, {0.0, 0.0}).real() == 441.0, "exact N=20");
  o.require(ts::character_exact(sq.polytope(), 40, {0.0, 0.0}).real() == 1681.0, "exact N=40");
  const double g20 = (441.0 - l20) / l20, g40 = (1681.0 - l40) / l40;
  const double halving = g20 / g40;
  o.require(halving >= 1.7 && halving <= 2.3, "gap ratio " + fmt(halving));
  if (o.pass)
    o.detail = "trace rel err " + fmt(worst) + ", leading 400/441 and 1600/1681, gap ratio " + fmt(halving);
  return o;
}

Outcome symbol_asymptotics() {
  Outcome o;
  {
    const ts::KahlerPotential pot(oracle::load("simplex1.json"));
    for (const auto& e : ts::symbol_ratio(pot, {0.5}, {2, 4, 8, 16, 32}).entries)
      o.require(e.exact_ratio && *e.exact_ratio == Rational(e.dilation, e.dilation + 1), "simplex1 ratio");
  }
  {
    const ts::KahlerPotential pot(oracle::load("simplex2.json"));
    for (const auto& e : ts::symbol_ratio(pot, {0.25, 0.25}, {4, 8, 16, 32}).entries) {
      const std::int64_t n = e.dilation;
      o.require(e.exact_ratio && *e.exact_ratio == Rational(n * n, (n + 1) * (n + 2)), "simplex2 ratio");
    }
  }
  std::string trend;
  for (auto [name, ray] : {std::pair<const char*, std::vector<double>>{"veronese.json", {1.0}},
                           std::pair<const char*, std::vector<double>>{"square.json", {0.5, 0.5}}}) {
    const ts::KahlerPotential pot(oracle::load(name));
    const auto s = ts::symbol_ratio(pot, ray, {8, 16, 32});
    for (const auto& e : s.entries) o.require(!e.flagged && e.ratio > 0.0, std::string(name) + " flagged entry");
    const double shrink = std::abs(s.differences[0]) / std::abs(s.differences[1]);
    o.require(shrink > 1.0, std::string(name) + " differences do not shrink");
    trend += std::string(trend.empty() ? "" : ", ") + name + " difference ratio " + fmt(shrink);
  }
  if (o.pass) o.detail = "exact on simplices; " + trend;
  return o;
}

Outcome property_suites() {
  Outcome o;
  // sum rule and semigroup
  for (const char* name : kQuadraturePolytopes) {
    const auto p = oracle::load(name);
    for (int n = 1; n <= 6; ++n) {
      ts::BigInt want = 1;
      for (int k = 0; k < n; ++k) want *= static_cast<std::int64_t>(p.lattice_points().size());
      o.require(ts::partition_counts(p, n).total() == want, std::string(name) + " sum rule");
    }
    o.require(ts::convolve(p, ts::partition_counts(p, 2), ts::partition_counts(p, 3)).counts ==
                  ts::partition_counts(p, 5).counts,
              std::string(name) + " semigroup");
  }
  // |m-hat|^2 sums to one, gradient and Hessian by finite differences
  double worst_sum = 0.0, worst_grad = 0.0, worst_hess = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const char* name : kQuadraturePolytopes) {
    const ts::KahlerPotential pot(oracle::load(name));
    const int m = pot.dim();
    for (int k = 0; k < 20; ++k) {
      ts::Vec rho(m);
      for (int j = 0; j < m; ++j) rho[j] = u(rng);
      const auto x = ts::make_orbit_point(std::vector<double>(rho.data(), rho.data() + m), std::vector<double>(m, 0.0));
      double s = 0.0;
      for (const auto& a : pot.polytope().lattice_points()) s += std::norm(ts::weighted_monomial(pot, a, x));
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      const auto l = pot.evaluate(rho);
      const double h = 1e-4;
      ts::Mat fd(m, m);
      for (int j = 0; j < m; ++j) {
        ts::Vec e = ts::Vec::Zero(m);
        e[j] = h;
        worst_grad = std::max(worst_grad, std::abs((pot.value(rho + e) - pot.value(rho - e)) / (2 * h) - l.gradient[j]));
        fd.col(j) = (pot.moment_map(rho + e) - pot.moment_map(rho - e)) / (2 * h);
      }
      worst_hess = std::max(worst_hess, std::abs(fd.determinant() / l.density - 1.0));
    }
  }
  o.require(worst_sum <= 1e-12, "sum-to-one " + fmt(worst_sum));
  o.require(worst_grad <= 1e-6, "gradient " + fmt(worst_grad));
  o.require(worst_hess <= 1e-4, "hessian " + fmt(worst_hess));
  // weight-operator eigenvalue residual is O(h^2): halving h quarters it
  const ts::KahlerPotential pot(oracle::load("square.json"));
  const auto x = ts::make_orbit_point({0.3, -0.2}, {0.7, 1.1}, 0.4);
  const auto r1 = ts::weight_eigenvalue_check(pot, {1, 1}, 1, x, 1e-2);
  const auto r2 = ts::weight_eigenvalue_check(pot, {1, 1}, 1, x, 5e-3);
  const double order = r1.torus[0] / r2.torus[0];
  o.require(order > 3.5 && order < 4.5, "eigenvalue residual ratio " + fmt(order));
  if (o.pass)
    o.detail = "sum-to-one " + fmt(worst_sum) + ", grad " + fmt(worst_grad) + ", hess " + fmt(worst_hess) +
               ", h-halving ratio " + fmt(order);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"1 projective calibration", 30, projective_calibration},
      {"2 multiplier constancy", 10, multiplier_constancy},
      {"3 factorization identity", 120, factorization},
      {"4 normality counterexample", 1, normality_counterexample},
      {"5 dimension trace", 60, dimension_trace},
      {"6 character suite", 120, character_suite},
      {"7 symbol asymptotics", 180, symbol_asymptotics},
      {"8 property suites", 60, property_suites},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && secs > c.budget_s) {
      o.pass = false;
      o.detail = "over runtime budget of " + fmt(c.budget_s) + " s";
    }
    std::printf("%s  criterion %-28s %7.2f s  %s\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
