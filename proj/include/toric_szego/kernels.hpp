#pragma once

// Szegő kernels of M_P, the pulled-back projective kernels, and the Fourier
// multiplier with eigenvalues 1/(P_N(alpha) Q_N(alpha)) that carries the
// N-th power of the level-one pullback onto Pi_N.

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <numbers>
#include <random>
#include <vector>

#include "norming.hpp"
#include "partition.hpp"

namespace toric_szego {

// ---------------------------------------------------------------------------
// Kernel evaluations

/// <iota(x), conj(iota(y))> = sum_{beta in P} m-hat_beta(x) conj(m-hat_beta(y)).
inline Complex pullback_base(const KahlerPotential& pot, const OrbitPoint& x, const OrbitPoint& y) {
  const double fx = pot.value(x.rho), fy = pot.value(y.rho);
  const Vec rs = 0.5 * (x.rho + y.rho);
  const Vec dphi = x.phi - y.phi;
  Complex s = 0.0;
  const auto& ex = pot.exponents();
  for (std::size_t i = 0; i < ex.size(); ++i)
    s += std::polar(std::exp(pot.log_weights()[i] + ex[i].dot(rs) - 0.5 * (fx + fy)), ex[i].dot(dphi));
  return s * std::polar(1.0, x.theta - y.theta);
}

/// Pi_1^N = (pullback_base)^N in log-polar form.
inline Complex pullback_kernel_N(const KahlerPotential& pot, int level, const OrbitPoint& x, const OrbitPoint& y) {
  const Complex b = pullback_base(pot, x, y);
  if (b == 0.0) return 0.0;
  return std::polar(std::exp(level * std::log(std::abs(b))), level * std::arg(b));
}

namespace detail {

using LongComplex = std::complex<long double>;

// chi-hat_alpha(x) conj(chi-hat_alpha(y)) with unit coefficient, in extended
// precision: off-diagonal kernel sums cancel heavily, so per-term rounding
// would otherwise dominate the residuals between evaluation paths
inline LongComplex monomial_pair(const Point& alpha, int level, const OrbitPoint& x, const OrbitPoint& y, long double fx,
                                 long double fy, long double log_coeff) {
  long double mag = -0.5L * level * (fx + fy) + log_coeff;
  long double arg = static_cast<long double>(level) * (static_cast<long double>(x.theta) - y.theta);
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const auto a = static_cast<long double>(alpha[j]);
    mag += 0.5L * a * (static_cast<long double>(x.rho[k]) + y.rho[k]);
    arg += a * (static_cast<long double>(x.phi[k]) - y.phi[k]);
  }
  return std::polar(std::exp(mag), arg);
}

inline Complex to_double(const LongComplex& z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

inline void check_table(const NormTable& norms, const LatticePolytope& poly, int level) {
  if (norms.dilation != level) throw ValidationError("norm table was built for a different dilation");
  if (!(norms.support == lattice_points(poly, level))) throw ValidationError("norm table is missing entries of NP");
}

}  // namespace detail

/// Pi_N(x, y) = sum_{alpha in NP} chi-hat_alpha(x) conj(chi-hat_alpha(y)) / Q_N(alpha).
inline Complex szego_kernel(const KahlerPotential& pot, int level, const NormTable& norms, const OrbitPoint& x,
                            const OrbitPoint& y) {
  detail::check_table(norms, pot.polytope(), level);
  const double fx = pot.value(x.rho), fy = pot.value(y.rho);
  detail::LongComplex s = 0.0L;
  for (const auto& e : norms.entries)
    s += detail::monomial_pair(e.alpha, level, x, y, fx, fy, -std::log(static_cast<long double>(e.value)));
  return detail::to_double(s);
}

/// Closed form on CP^m: ((N+m)!/N!) <x-hat, conj(y-hat)>^N, with x-hat the
/// normalized homogeneous lift (1, z)/|(1, z)| times the fiber phase.
inline Complex projective_szego(int m, int level, const OrbitPoint& x, const OrbitPoint& y) {
  if (x.rho.size() != m || y.rho.size() != m) throw ValidationError("orbit point has wrong dimension");
  Complex inner = 1.0;
  double nx = 1.0, ny = 1.0;
  for (int j = 0; j < m; ++j) {
    inner += std::polar(std::exp(0.5 * (x.rho[j] + y.rho[j])), x.phi[j] - y.phi[j]);
    nx += std::exp(x.rho[j]);
    ny += std::exp(y.rho[j]);
  }
  const Complex b = inner / std::sqrt(nx * ny) * std::polar(1.0, x.theta - y.theta);
  double pref = 1.0;
  for (int k = 1; k <= m; ++k) pref *= static_cast<double>(level + k);
  return pref * std::polar(std::exp(level * std::log(std::abs(b))), level * std::arg(b));
}

// ---------------------------------------------------------------------------
// Multiplier

struct MultiplierEntry {
  Point alpha;
  BigInt partition;
  double norm = 0.0;
  double eigenvalue = 0.0;  // 1 / (P Q)
  double symbol = 0.0;      // N^m P Q
  std::optional<Rational> exact_eigenvalue;
};

struct MultiplierTable {
  int dilation = 0;
  std::vector<MultiplierEntry> entries;
  std::vector<Point> excluded;  // P_N(alpha) = 0: the multiplier is undefined there

  const MultiplierEntry* find(const Point& alpha) const {
    for (const auto& e : entries)
      if (e.alpha == alpha) return &e;
    return nullptr;
  }
};

/// Entrywise 1/(P_N Q_N); P is converted to floating point only here.
inline MultiplierTable multiplier_table(const PartitionTable& partition, const NormTable& norms) {
  if (partition.dilation != norms.dilation) throw ValidationError("partition and norm tables have different N");
  if (!(partition.support == norms.support)) throw ValidationError("partition and norm tables have different support");
  MultiplierTable t;
  t.dilation = partition.dilation;
  const int m = partition.support.size() ? static_cast<int>(partition.support[0].size()) : 0;
  const double nm = std::pow(static_cast<double>(t.dilation), m);
  for (std::size_t i = 0; i < partition.support.size(); ++i) {
    if (partition.counts[i].is_zero()) {
      t.excluded.push_back(partition.support[i]);
      continue;
    }
    MultiplierEntry e;
    e.alpha = partition.support[i];
    e.partition = partition.counts[i];
    e.norm = norms.entries[i].value;
    const double pq = partition.counts[i].convert_to<double>() * e.norm;
    e.eigenvalue = 1.0 / pq;
    e.symbol = nm * pq;
    if (norms.entries[i].exact) e.exact_eigenvalue = Rational(1) / (Rational(partition.counts[i]) * *norms.entries[i].exact);
    if (e.exact_eigenvalue) e.eigenvalue = e.exact_eigenvalue->convert_to<double>();
    t.entries.push_back(std::move(e));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Random orbit points

/// Seeded sampler: moment-map image uniform in P shrunk to 60% about its
/// vertex barycenter, angles uniform.
class OrbitSampler {
 public:
  OrbitSampler(const KahlerPotential& pot, std::uint64_t seed, double shrink = 0.6)
      : pot_(pot), rng_(seed), shrink_(shrink) {}

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  OrbitPoint next() {
    const auto& poly = pot_.polytope();
    const int m = poly.dim();
    const Vec bary = detail::vertex_barycenter(poly);
    const Vec lo = to_vec(poly.lower_corner()), hi = to_vec(poly.upper_corner());
    Vec u(m);
    do {
      for (int j = 0; j < m; ++j) u[j] = lo[j] + (hi[j] - lo[j]) * uniform();
    } while (!poly.interior_contains_real(u));
    const Vec target = bary + shrink_ * (u - bary);
    OrbitPoint x;
    auto inv = pot_.invert_moment_map(target);
    if (!inv.converged) throw NumericError("moment map inversion failed while sampling");
    x.rho = inv.rho;
    x.phi = Vec(m);
    for (int j = 0; j < m; ++j) x.phi[j] = 2.0 * std::numbers::pi * uniform();
    x.theta = 2.0 * std::numbers::pi * uniform();
    return x;
  }

 private:
  const KahlerPotential& pot_;
  std::mt19937_64 rng_;
  double shrink_;
};

// ---------------------------------------------------------------------------
// Factorization check

struct PairRecord {
  OrbitPoint x, y;
  Complex direct;     // Pi_N by the direct monomial sum
  Complex factored;   // multiplier applied to the partition expansion of Pi_1^N
  Complex power;      // Pi_1^N as the N-th power of the base kernel
  Complex expansion;  // sum_alpha P_N(alpha) chi-hat chi-hat-bar
  double resid_abs = 0.0;
  double resid_rel = 0.0;
  double expansion_resid_rel = 0.0;
  double hermitian_resid = 0.0;
};

struct KernelReport {
  int dilation = 0;
  std::uint64_t seed = 0;
  std::vector<PairRecord> pairs;
  double max_resid_rel = 0.0;
  double max_expansion_resid_rel = 0.0;
  double max_hermitian_resid = 0.0;
};

/// Evaluate both sides of Pi_N = M_N o Pi_1^N at seeded random pairs.
inline KernelReport evaluate_factorization(const KahlerPotential& pot, const PartitionTable& partition,
                                           const NormTable& norms, int samples, std::uint64_t seed, int threads = 1) {
  const int level = partition.dilation;
  detail::check_table(norms, pot.polytope(), level);
  const auto mult = multiplier_table(partition, norms);
  if (!mult.excluded.empty())
    throw ValidationError("partition function vanishes at " + to_string(mult.excluded.front()) +
                          "; the multiplier is undefined");

  KernelReport rep;
  rep.dilation = level;
  rep.seed = seed;
  rep.pairs.resize(static_cast<std::size_t>(samples));
  OrbitSampler sampler(pot, seed);
  for (auto& pr : rep.pairs) {
    pr.x = sampler.next();
    pr.y = sampler.next();
  }

  parallel_for(rep.pairs.size(), threads, [&](std::size_t k) {
    auto& pr = rep.pairs[k];
    pr.direct = szego_kernel(pot, level, norms, pr.x, pr.y);
    pr.power = pullback_kernel_N(pot, level, pr.x, pr.y);
    const double fx = pot.value(pr.x.rho), fy = pot.value(pr.y.rho);
    detail::LongComplex factored = 0.0L, expansion = 0.0L;
    for (const auto& e : mult.entries) {
      const auto term = detail::monomial_pair(e.alpha, level, pr.x, pr.y, fx, fy, 0.0L);
      const auto p = e.partition.convert_to<long double>();
      const long double eigenvalue = 1.0L / (p * static_cast<long double>(e.norm));
      expansion += p * term;
      factored += eigenvalue * (p * term);
    }
    pr.factored = detail::to_double(factored);
    pr.expansion = detail::to_double(expansion);
    pr.resid_abs = std::abs(pr.direct - pr.factored);
    pr.resid_rel = pr.resid_abs / std::max(std::abs(pr.direct), 1e-300);
    pr.expansion_resid_rel = std::abs(pr.power - pr.expansion) / std::max(std::abs(pr.power), 1e-300);
    const Complex swapped = szego_kernel(pot, level, norms, pr.y, pr.x);
    pr.hermitian_resid = std::abs(swapped - std::conj(pr.direct)) / std::max(std::abs(pr.direct), 1e-300);
  });
  for (const auto& pr : rep.pairs) {
    rep.max_resid_rel = std::max(rep.max_resid_rel, pr.resid_rel);
    rep.max_expansion_resid_rel = std::max(rep.max_expansion_resid_rel, pr.expansion_resid_rel);
    rep.max_hermitian_resid = std::max(rep.max_hermitian_resid, pr.hermitian_resid);
  }
  return rep;
}

/// The factorization is stated for unit weights on a Delzant polytope.
inline void require_factorization_setting(const LatticePolytope& poly) {
  if (!poly.unit_weights()) throw ValidationError("factorization check requires unit weights c_alpha = 1");
  const auto cert = is_delzant(poly);
  if (!cert.delzant) {
    const auto* bad = cert.first_failure();
    throw ValidationError("polytope is not Delzant (vertex " + to_string(bad->vertex) +
                          ": |det|=" + std::to_string(std::abs(bad->determinant)) + ")");
  }
}

/// Factorization check that builds the partition and norm tables itself.
inline KernelReport verify_factorization(const KahlerPotential& pot, int level, int samples, std::uint64_t seed,
                                         const QuadratureConfig& cfg = {}) {
  require_factorization_setting(pot.polytope());
  const auto partition = power_expansion_coefficients(pot.polytope(), level);
  const auto norms = norm_table(pot, level, cfg);
  return evaluate_factorization(pot, partition, norms, samples, seed, cfg.threads);
}

// ---------------------------------------------------------------------------
// Diagonal trace and symbol asymptotics

/// int_M Pi_N(x, x) dVol by quadrature; equals dim H^0(M, L^N).
inline Integral<double> diagonal_trace(const KahlerPotential& pot, const NormTable& norms, const QuadratureConfig& cfg) {
  const int level = norms.dilation;
  detail::check_table(norms, pot.polytope(), level);
  std::vector<Vec> alphas;
  std::vector<double> log_q;
  for (const auto& e : norms.entries) {
    alphas.push_back(to_vec(e.alpha));
    log_q.push_back(std::log(e.value));
  }
  const auto inv = pot.invert_moment_map(detail::vertex_barycenter(pot.polytope()));
  LaplaceWindow w{inv.rho, pot.evaluate(inv.rho).hessian.inverse(), cfg.radius};
  auto integrand = [&](const Vec& rho) {
    const auto l = pot.evaluate(rho);
    double s = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) s += std::exp(alphas[i].dot(rho) - level * l.value - log_q[i]);
    return s * l.density;
  };
  return integrate_rm<double>(integrand, w, cfg.limits());
}

struct SymbolEntry {
  int dilation = 0;
  Point alpha;
  BigInt partition;
  double norm = 0.0;
  double ratio = 0.0;  // N^m P_N(alpha_N) Q_N(alpha_N)
  std::optional<Rational> exact_ratio;
  bool flagged = false;
};

struct SymbolSeries {
  std::vector<double> ray;
  std::vector<SymbolEntry> entries;
  std::vector<double> differences;  // ratio(N_{k+1}) - ratio(N_k)
  double richardson_limit = 0.0;    // from the last two entries, assuming ratio = L + a/N
};

/// N^m P_N Q_N along the lattice points nearest N * ray, ray interior to P.
inline SymbolSeries symbol_ratio(const KahlerPotential& pot, const std::vector<double>& ray,
                                 const std::vector<int>& levels, const QuadratureConfig& cfg = {}) {
  const auto& poly = pot.polytope();
  const int m = poly.dim();
  if (static_cast<int>(ray.size()) != m) throw ValidationError("ray direction has wrong dimension");
  Vec r(m);
  for (int j = 0; j < m; ++j) r[j] = ray[static_cast<std::size_t>(j)];
  if (!poly.interior_contains_real(r)) throw ValidationError("ray direction must lie in the interior of P");

  SymbolSeries s;
  s.ray = ray;
  for (int n : levels) {
    SymbolEntry e;
    e.dilation = n;
    for (int j = 0; j < m; ++j) e.alpha.push_back(static_cast<std::int64_t>(std::llround(n * ray[static_cast<std::size_t>(j)])));
    if (!poly.contains(e.alpha, n)) {
      e.flagged = true;
      s.entries.push_back(e);
      continue;
    }
    const auto part = partition_counts(poly, n);
    e.partition = part.count(e.alpha);
    const auto q = monomial_norm(pot, n, e.alpha, cfg);
    e.norm = q.value;
    e.flagged = q.flagged || e.partition.is_zero();
    const double nm = std::pow(static_cast<double>(n), m);
    e.ratio = nm * e.partition.convert_to<double>() * q.value;
    if (q.exact) {
      BigInt nmi = 1;
      for (int j = 0; j < m; ++j) nmi *= n;
      e.exact_ratio = Rational(nmi) * Rational(e.partition) * *q.exact;
      e.ratio = e.exact_ratio->convert_to<double>();
    }
    s.entries.push_back(std::move(e));
  }
  for (std::size_t k = 1; k < s.entries.size(); ++k) s.differences.push_back(s.entries[k].ratio - s.entries[k - 1].ratio);
  if (s.entries.size() >= 2) {
    const auto& a = s.entries[s.entries.size() - 2];
    const auto& b = s.entries.back();
    s.richardson_limit = (b.dilation * b.ratio - a.dilation * a.ratio) / (b.dilation - a.dilation);
  }
  return s;
}

}  // namespace toric_szego
