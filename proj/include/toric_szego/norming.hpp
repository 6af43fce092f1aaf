#pragma once

// Monomial norming function
//
//   Q_N(alpha) = int_{M_P} |chi_alpha|^2_{h^N} dVol
//              = int_{R^m} exp(<alpha, rho> - N f(rho)) det hess f(rho) d rho,
//
// the second form after the fiber and torus angles are integrated out with
// dVol = omega^m/m! and omega = (i/2pi) dd-bar log h. The reduction is checked
// against the Fubini-Study closed forms for projective space.

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "parallel.hpp"
#include "quadrature.hpp"

namespace toric_szego {

struct QuadratureConfig {
  double rel_tol = 1e-8;
  std::size_t max_intervals = 2000;
  double radius = 12.0;  // window half-width in standard deviations
  std::uint64_t seed = 0;
  bool allow_closed_form = true;
  int threads = 1;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2)) throw ValidationError("quadrature tolerance must lie in (0, 1e-2]");
    if (!(radius >= 6.0)) throw ValidationError("truncation radius must be >= 6 standard deviations");
    if (max_intervals < 1) throw ValidationError("max subdivisions must be positive");
    if (threads < 1) throw ValidationError("thread count must be positive");
  }

  QuadratureLimits limits() const { return {rel_tol, 0.0, max_intervals}; }
};

enum class NormMethod { ClosedForm, Quadrature };

inline const char* to_string(NormMethod m) { return m == NormMethod::ClosedForm ? "closed-form" : "quadrature"; }

struct NormEntry {
  Point alpha;
  double value = 0.0;
  double error = 0.0;
  NormMethod method = NormMethod::Quadrature;
  bool boundary = false;  // alpha/N on the boundary of P: no interior critical point
  bool flagged = false;   // tolerance not met
  std::optional<Rational> exact;
};

struct NormTable {
  int dilation = 0;
  LatticePointSet support;
  std::vector<NormEntry> entries;  // aligned with support

  const NormEntry& at(const Point& alpha) const {
    auto i = support.index_of(alpha);
    if (!i) throw ValidationError("norm table has no entry for " + to_string(alpha));
    return entries[*i];
  }
  bool any_flagged() const {
    for (const auto& e : entries)
      if (e.flagged) return true;
    return false;
  }
};

namespace detail {

inline BigInt factorial(std::int64_t n) {
  BigInt r = 1;
  for (std::int64_t k = 2; k <= n; ++k) r *= k;
  return r;
}

/// p! / ((p - |alpha|)! alpha_1! ... alpha_m!)
inline BigInt multinomial(std::int64_t p, const Point& alpha) {
  std::int64_t deg = 0;
  BigInt den = 1;
  for (auto a : alpha) {
    deg += a;
    den *= factorial(a);
  }
  return factorial(p) / (den * factorial(p - deg));
}

}  // namespace detail

/// Fubini-Study L^2 norm ||chi_alpha||^2 = p! / ((p+m)! binom(p, alpha)) on CP^m.
inline Rational closed_form_projective_norm(int m, std::int64_t p, const Point& alpha) {
  std::int64_t deg = 0;
  for (auto a : alpha) {
    if (a < 0) throw ValidationError("negative exponent in " + to_string(alpha));
    deg += a;
  }
  if (static_cast<int>(alpha.size()) != m) throw ValidationError("exponent has wrong dimension");
  if (deg > p) throw ValidationError("|alpha| exceeds p in closed-form projective norm");
  return Rational(detail::factorial(p), detail::factorial(p + m) * detail::multinomial(p, alpha));
}

/// p if P = p * standard simplex with the binomial weights c*_beta = binom(p, beta)^{1/2}
/// (for p = 1 these are the unit weights); the Kähler structure is then p times
/// Fubini-Study and the level-N norm is p^m times the degree-pN projective one.
inline std::optional<std::int64_t> projective_scale(const LatticePolytope& poly) {
  const int m = poly.dim();
  const auto& v = poly.vertices();
  if (static_cast<int>(v.size()) != m + 1) return std::nullopt;
  const std::int64_t p = v.back()[0] != 0 ? v.back()[0] : -1;
  std::vector<Point> expected;
  expected.push_back(Point(static_cast<std::size_t>(m), 0));
  for (int j = 0; j < m; ++j) {
    Point e(static_cast<std::size_t>(m), 0);
    e[static_cast<std::size_t>(j)] = p;
    expected.push_back(e);
  }
  std::sort(expected.begin(), expected.end());
  if (p < 1 || expected != v) return std::nullopt;
  const auto& pts = poly.lattice_points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double c2 = poly.weights()[i] * poly.weights()[i];
    const double want = detail::multinomial(p, pts[i]).convert_to<double>();
    if (std::abs(c2 - want) > 1e-12 * want) return std::nullopt;
  }
  return p;
}

namespace detail {

inline Vec vertex_barycenter(const LatticePolytope& poly) {
  Vec b = Vec::Zero(poly.dim());
  for (const auto& v : poly.vertices()) b += to_vec(v);
  return b / static_cast<double>(poly.vertices().size());
}

inline bool on_boundary(const LatticePolytope& poly, const Point& alpha, int level) {
  return !poly.interior_contains(alpha, level);
}

// Critical point of <alpha, rho> - N f(rho), or of an interior-shifted target
// when alpha/N lies on the boundary.
struct Center {
  Vec rho;
  bool boundary = false;
  bool newton_ok = true;
};

inline Center laplace_center(const KahlerPotential& pot, const Point& alpha, int level) {
  const LatticePolytope& poly = pot.polytope();
  Center c;
  Vec target = to_vec(alpha) / static_cast<double>(level);
  c.boundary = on_boundary(poly, alpha, level);
  if (c.boundary) {
    // move alpha a half lattice step toward the barycenter of N P
    const Vec bary = vertex_barycenter(poly);
    const Vec dir = bary * level - to_vec(alpha);
    const double t = std::min(0.5, 0.5 / dir.norm());
    target = (to_vec(alpha) + t * dir) / static_cast<double>(level);
  }
  auto inv = pot.invert_moment_map(target);
  c.newton_ok = inv.converged;
  if (!inv.converged) {
    const Vec bary = vertex_barycenter(poly);
    inv = pot.invert_moment_map(bary);
    c.boundary = true;
  }
  c.rho = inv.rho;
  return c;
}

}  // namespace detail

/// Q_N(alpha) by nested adaptive quadrature around the Laplace peak, or by
/// the exact projective formula when it applies and is allowed.
inline NormEntry monomial_norm(const KahlerPotential& pot, int level, const Point& alpha,
                               const QuadratureConfig& cfg = {}) {
  cfg.validate();
  const LatticePolytope& poly = pot.polytope();
  if (level < 1) throw ValidationError("dilation must be >= 1");
  if (!poly.contains(alpha, level))
    throw ValidationError("exponent " + to_string(alpha) + " is not in " + std::to_string(level) + "P");

  NormEntry e;
  e.alpha = alpha;
  e.boundary = detail::on_boundary(poly, alpha, level);
  if (cfg.allow_closed_form) {
    if (auto p = projective_scale(poly)) {
      // f = p f_FS, so the volume form carries p^m and the level is pN
      BigInt pm = 1;
      for (int j = 0; j < poly.dim(); ++j) pm *= *p;
      e.exact = Rational(pm) * closed_form_projective_norm(poly.dim(), *p * level, alpha);
      e.value = e.exact->convert_to<double>();
      e.method = NormMethod::ClosedForm;
      return e;
    }
  }

  const auto center = detail::laplace_center(pot, alpha, level);
  const auto loc = pot.evaluate(center.rho);
  const Vec a = to_vec(alpha);
  const double log_peak = a.dot(center.rho) - level * loc.value;

  LaplaceWindow w;
  w.center = center.rho;
  w.covariance = (static_cast<double>(level) * loc.hessian).inverse();
  w.radius = center.boundary ? 2.0 * cfg.radius : cfg.radius;

  auto integrand = [&](const Vec& rho) {
    const auto l = pot.evaluate(rho);
    return std::exp(a.dot(rho) - level * l.value - log_peak) * l.density;
  };
  const auto r = integrate_rm<double>(integrand, w, cfg.limits());
  const double scale = std::exp(log_peak);
  e.value = r.value * scale;
  e.error = r.error * scale;
  e.method = NormMethod::Quadrature;
  e.boundary = e.boundary || center.boundary;
  e.flagged = !r.converged || !(e.value > 0.0) || e.error > cfg.rel_tol * e.value * 10.0;
  return e;
}

/// Q_N over N P∩Z^m; entries are independent, so the table is the same for
/// any thread count.
inline NormTable norm_table(const KahlerPotential& pot, int level, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  NormTable t;
  t.dilation = level;
  t.support = lattice_points(pot.polytope(), level);
  t.entries.resize(t.support.size());
  parallel_for(t.support.size(), cfg.threads,
               [&](std::size_t i) { t.entries[i] = monomial_norm(pot, level, t.support[i], cfg); });
  return t;
}

struct VolumeCheck {
  double quadrature = 0.0;
  double error = 0.0;
  Rational exact;
  double gap = 0.0;  // relative
  bool converged = true;
};

/// int_{R^m} det hess f d rho against the Euclidean volume of P.
inline VolumeCheck total_volume_check(const KahlerPotential& pot, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  const auto inv = pot.invert_moment_map(detail::vertex_barycenter(pot.polytope()));
  LaplaceWindow w;
  w.center = inv.rho;
  w.covariance = pot.evaluate(inv.rho).hessian.inverse();
  w.radius = cfg.radius;
  auto integrand = [&](const Vec& rho) { return pot.hessian_density(rho); };
  const auto r = integrate_rm<double>(integrand, w, cfg.limits());
  VolumeCheck v;
  v.quadrature = r.value;
  v.error = r.error;
  v.exact = euclidean_volume(pot.polytope());
  const double ex = v.exact.convert_to<double>();
  v.gap = std::abs(v.quadrature - ex) / ex;
  v.converged = r.converged;
  return v;
}

/// CSV: alpha_1..alpha_m,Q,err,method,boundary_flag
inline void write_norms_csv(std::ostream& os, const NormTable& t) {
  const std::size_t m = t.support.size() ? t.support[0].size() : 0;
  for (std::size_t j = 0; j < m; ++j) os << "alpha_" << (j + 1) << ',';
  os << "Q,err,method,boundary_flag\n";
  const auto old = os.precision(17);
  for (const auto& e : t.entries) {
    for (auto x : e.alpha) os << x << ',';
    os << e.value << ',' << e.error << ',' << to_string(e.method) << ',' << (e.boundary ? 1 : 0) << '\n';
  }
  os.precision(old);
}

}  // namespace toric_szego
