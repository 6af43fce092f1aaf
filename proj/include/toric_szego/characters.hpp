#pragma once

// Polytope characters chi_{NP}(phi) = sum_{alpha in NP} e^{i<phi, alpha>}:
// the exact lattice sum, the trace of the torus action on Pi_N, and the
// principal term N^m int Pi_1^N(e^{i phi} x, x) dVol.

#include <cmath>
#include <complex>
#include <ostream>
#include <vector>

#include "kernels.hpp"

namespace toric_szego {

/// Direct sum over NP∩Z^m.
inline Complex character_exact(const LatticePolytope& poly, int level, const std::vector<double>& phi) {
  if (static_cast<int>(phi.size()) != poly.dim()) throw ValidationError("phi has wrong dimension");
  Complex s = 0.0;
  for (const auto& a : lattice_points(poly, level)) {
    double t = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) t += phi[j] * static_cast<double>(a[j]);
    s += std::polar(1.0, t);
  }
  return s;
}

/// int_M Pi_N(e^{i phi} x, x) dVol by quadrature over rho.
inline Integral<Complex> character_trace(const KahlerPotential& pot, const NormTable& norms,
                                         const std::vector<double>& phi, const QuadratureConfig& cfg = {}) {
  cfg.validate();
  const int level = norms.dilation;
  const int m = pot.dim();
  if (static_cast<int>(phi.size()) != m) throw ValidationError("phi has wrong dimension");
  detail::check_table(norms, pot.polytope(), level);
  std::vector<Vec> alphas;
  std::vector<double> log_q;
  std::vector<Complex> phase;
  for (const auto& e : norms.entries) {
    alphas.push_back(to_vec(e.alpha));
    log_q.push_back(std::log(e.value));
    double t = 0.0;
    for (int j = 0; j < m; ++j) t += phi[static_cast<std::size_t>(j)] * static_cast<double>(e.alpha[static_cast<std::size_t>(j)]);
    phase.push_back(std::polar(1.0, t));
  }
  const auto inv = pot.invert_moment_map(detail::vertex_barycenter(pot.polytope()));
  LaplaceWindow w{inv.rho, pot.evaluate(inv.rho).hessian.inverse(), cfg.radius};
  auto integrand = [&](const Vec& rho) -> Complex {
    const auto l = pot.evaluate(rho);
    Complex s = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i)
      s += phase[i] * std::exp(alphas[i].dot(rho) - level * l.value - log_q[i]);
    return s * l.density;
  };
  // |integrand| sums to the lattice count, which sets the absolute scale
  auto lim = cfg.limits();
  lim.abs_tol = 1e-2 * cfg.rel_tol * static_cast<double>(alphas.size());
  return integrate_rm<Complex>(integrand, w, lim);
}

/// N^m int [sum_beta p_beta(rho) e^{i<phi, beta>}]^N det hess f d rho, with
/// p_beta the Gibbs weights; the integrand is Pi_1^N(e^{i phi} x, x).
inline Integral<Complex> character_leading(const KahlerPotential& pot, int level, const std::vector<double>& phi,
                                           const QuadratureConfig& cfg = {}) {
  cfg.validate();
  const int m = pot.dim();
  if (static_cast<int>(phi.size()) != m) throw ValidationError("phi has wrong dimension");
  if (level < 1) throw ValidationError("dilation must be >= 1");
  const auto& ex = pot.exponents();
  std::vector<Complex> phase;
  for (const auto& b : ex) {
    double t = 0.0;
    for (int j = 0; j < m; ++j) t += phi[static_cast<std::size_t>(j)] * b[j];
    phase.push_back(std::polar(1.0, t));
  }
  const auto inv = pot.invert_moment_map(detail::vertex_barycenter(pot.polytope()));
  LaplaceWindow w{inv.rho, pot.evaluate(inv.rho).hessian.inverse(), 2.0 * cfg.radius};
  auto integrand = [&](const Vec& rho) -> Complex {
    const auto l = pot.evaluate(rho);
    Complex s = 0.0;
    for (std::size_t i = 0; i < ex.size(); ++i)
      s += phase[i] * std::exp(pot.log_weights()[i] + ex[i].dot(rho) - l.value);
    if (s == 0.0) return 0.0;
    return std::polar(std::exp(level * std::log(std::abs(s))), level * std::arg(s)) * l.density;
  };
  // |Pi_1^N| <= 1, so vol(P) bounds the integral of the modulus
  auto lim = cfg.limits();
  lim.abs_tol = 1e-2 * cfg.rel_tol * euclidean_volume(pot.polytope()).convert_to<double>();
  auto r = integrate_rm<Complex>(integrand, w, lim);
  const double nm = std::pow(static_cast<double>(level), m);
  r.value *= nm;
  r.error *= nm;
  return r;
}

struct CharacterValue {
  int dilation = 0;
  std::vector<double> phi;
  Complex exact, trace, leading;
  double gap_trace = 0.0;    // |trace - exact| / max(|exact|, 1)
  double gap_leading = 0.0;  // |exact - leading| / |leading|
  bool flagged = false;
};

inline CharacterValue character_value(const KahlerPotential& pot, const NormTable& norms,
                                      const std::vector<double>& phi, const QuadratureConfig& cfg = {}) {
  CharacterValue v;
  v.dilation = norms.dilation;
  v.phi = phi;
  v.exact = character_exact(pot.polytope(), v.dilation, phi);
  const auto t = character_trace(pot, norms, phi, cfg);
  const auto l = character_leading(pot, v.dilation, phi, cfg);
  v.trace = t.value;
  v.leading = l.value;
  v.gap_trace = std::abs(v.trace - v.exact) / std::max(std::abs(v.exact), 1.0);
  v.gap_leading = std::abs(v.exact - v.leading) / std::max(std::abs(v.leading), 1e-300);
  v.flagged = !t.converged || !l.converged || norms.any_flagged();
  return v;
}

/// Grid of `points` values per axis over [0, 2 pi)^m, row-major in phi_1.
inline std::vector<std::vector<double>> phi_grid(int m, int points) {
  if (points < 1) throw ValidationError("grid needs at least one point per axis");
  std::vector<std::vector<double>> grid;
  std::size_t total = 1;
  for (int j = 0; j < m; ++j) total *= static_cast<std::size_t>(points);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> phi(static_cast<std::size_t>(m));
    std::size_t r = k;
    for (int j = m - 1; j >= 0; --j) {
      phi[static_cast<std::size_t>(j)] = 2.0 * std::numbers::pi * static_cast<double>(r % points) / points;
      r /= static_cast<std::size_t>(points);
    }
    grid.push_back(std::move(phi));
  }
  return grid;
}

/// Character values over a phi list; each entry is independent.
inline std::vector<CharacterValue> character_sweep(const KahlerPotential& pot, const NormTable& norms,
                                                   const std::vector<std::vector<double>>& phis,
                                                   const QuadratureConfig& cfg = {}) {
  std::vector<CharacterValue> out(phis.size());
  parallel_for(phis.size(), cfg.threads, [&](std::size_t i) { out[i] = character_value(pot, norms, phis[i], cfg); });
  return out;
}

/// CSV: phi_1..phi_m,re_exact,im_exact,re_trace,im_trace,re_leading,im_leading,gap_trace,gap_leading
inline void write_character_csv(std::ostream& os, const std::vector<CharacterValue>& values, int m) {
  for (int j = 0; j < m; ++j) os << "phi_" << (j + 1) << ',';
  os << "re_exact,im_exact,re_trace,im_trace,re_leading,im_leading,gap_trace,gap_leading\n";
  const auto old = os.precision(17);
  for (const auto& v : values) {
    for (double p : v.phi) os << p << ',';
    os << v.exact.real() << ',' << v.exact.imag() << ',' << v.trace.real() << ',' << v.trace.imag() << ','
       << v.leading.real() << ',' << v.leading.imag() << ',' << v.gap_trace << ',' << v.gap_leading << '\n';
  }
  os.precision(old);
}

}  // namespace toric_szego
