#pragma once

// Open-orbit Kähler geometry of M_P in log-polar coordinates
// (rho_j = log|z_j|^2, phi_j = arg z_j, theta = fiber angle).

#include <array>
#include <cmath>
#include <numeric>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "polytope.hpp"

namespace toric_szego {

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Complex = std::complex<double>;

/// Point of the circle bundle over the open orbit.
struct OrbitPoint {
  Vec rho;
  Vec phi;
  double theta = 0.0;
};

inline OrbitPoint make_orbit_point(std::vector<double> rho, std::vector<double> phi, double theta = 0.0) {
  OrbitPoint x;
  x.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size()));
  x.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
  x.theta = theta;
  return x;
}

/// Torus action e^{i t} . x (shifts phi).
inline OrbitPoint torus_act(OrbitPoint x, const Vec& shift) {
  x.phi += shift;
  return x;
}

/// Circle action on the fiber.
inline OrbitPoint fiber_act(OrbitPoint x, double t) {
  x.theta += t;
  return x;
}

inline Vec to_vec(const Point& a) {
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t j = 0; j < a.size(); ++j) v[static_cast<Eigen::Index>(j)] = static_cast<double>(a[j]);
  return v;
}

/// The log-potential f(rho) = log sum_beta |c_beta|^2 e^{<beta, rho>} and its
/// derivatives: grad f is the moment map, hess f the covariance of the
/// Gibbs weights w_beta proportional to |c_beta|^2 e^{<beta,rho>}.
class KahlerPotential {
 public:
  struct Local {
    double value = 0.0;
    Vec gradient;
    Mat hessian;
    double density = 0.0;  // det hessian
  };

  struct Inversion {
    Vec rho;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
  };

  explicit KahlerPotential(LatticePolytope p) : polytope_(std::move(p)) {
    for (std::size_t i = 0; i < polytope_.lattice_points().size(); ++i) {
      exponents_.push_back(to_vec(polytope_.lattice_points()[i]));
      const double c = polytope_.weights()[i];
      log_c2_.push_back(2.0 * std::log(c));
    }
    build_simplices();
  }

  const LatticePolytope& polytope() const { return polytope_; }
  int dim() const { return polytope_.dim(); }
  const std::vector<Vec>& exponents() const { return exponents_; }
  const std::vector<double>& log_weights() const { return log_c2_; }

  double value(const Vec& rho) const {
    double smax = -INFINITY;
    for (std::size_t i = 0; i < exponents_.size(); ++i) smax = std::max(smax, log_c2_[i] + exponents_[i].dot(rho));
    double z = 0;
    for (std::size_t i = 0; i < exponents_.size(); ++i) z += std::exp(log_c2_[i] + exponents_[i].dot(rho) - smax);
    return smax + std::log(z);
  }

  Local evaluate(const Vec& rho) const {
    const auto m = static_cast<Eigen::Index>(dim());
    std::size_t top = 0;
    double smax = -INFINITY;
    // small fixed buffer would do for most polytopes; a vector keeps it general
    thread_local std::vector<double> s;
    s.resize(exponents_.size());
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      s[i] = log_c2_[i] + exponents_[i].dot(rho);
      if (s[i] > smax) {
        smax = s[i];
        top = i;
      }
    }
    // moments about the dominant exponent avoid cancellation in the tails
    const Vec& b0 = exponents_[top];
    double z = 0;
    Vec d = Vec::Zero(m);
    Mat e = Mat::Zero(m, m);
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      const double w = std::exp(s[i] - smax);
      z += w;
      const Vec db = exponents_[i] - b0;
      d += w * db;
      e.noalias() += w * db * db.transpose();
    }
    d /= z;
    e /= z;
    Local out;
    out.value = smax + std::log(z);
    out.gradient = b0 + d;
    out.hessian = e - d * d.transpose();
    out.density = simplices_.empty() ? out.hessian.determinant() : simplex_density(s, smax, z);
    return out;
  }

  /// mu(rho) = grad f(rho), a point of the interior of P.
  Vec moment_map(const Vec& rho) const { return evaluate(rho).gradient; }

  /// det hess f(rho): density of omega^m/m! in (rho, phi/(2pi)) coordinates.
  double hessian_density(const Vec& rho) const { return evaluate(rho).density; }

  /// Solve grad f(rho) = target by damped Newton on f(rho) - <target, rho>,
  /// starting from `start` (default 0).
  Inversion invert_moment_map(const Vec& target, const Vec* start = nullptr, double tol = 1e-13,
                              int max_iter = 200) const {
    const auto m = static_cast<Eigen::Index>(dim());
    Inversion r;
    r.rho = start ? *start : Vec::Zero(m);
    auto objective = [&](const Vec& x) { return value(x) - target.dot(x); };
    double fx = objective(r.rho);
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
      const Local loc = evaluate(r.rho);
      const Vec g = loc.gradient - target;
      r.residual = g.lpNorm<Eigen::Infinity>();
      if (r.residual <= tol) {
        r.converged = true;
        return r;
      }
      Vec step = -loc.hessian.ldlt().solve(g);
      if (!step.allFinite()) break;
      double t = 1.0;
      const double slope = g.dot(step);
      // once the predicted decrease is below the resolution of f the line
      // search only sees rounding noise; the full Newton step is safe here
      if (-slope < 1e-14 * (1.0 + std::abs(fx))) {
        r.rho += step;
        fx = objective(r.rho);
        continue;
      }
      bool accepted = false;
      for (int k = 0; k < 60; ++k) {
        const Vec trial = r.rho + t * step;
        const double ft = objective(trial);
        if (std::isfinite(ft) && ft <= fx + 1e-4 * t * slope) {
          r.rho = trial;
          fx = ft;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        // at the floating-point floor the line search stalls; accept if tight
        r.converged = r.residual <= 1e3 * tol;
        return r;
      }
    }
    r.residual = (moment_map(r.rho) - target).lpNorm<Eigen::Infinity>();
    r.converged = r.residual <= 1e3 * tol;
    return r;
  }

 private:
  // det Cov = sum over (m+1)-subsets S of prod_{i in S} p_i * det[beta_i - beta_i0]^2
  // (Cauchy-Binet on the lifted second-moment matrix); every term is positive,
  // so the density stays accurate where the weights concentrate on a vertex.
  struct Simplex {
    std::array<std::size_t, kMaxDim + 1> idx{};
    double det2 = 0.0;
  };
  static constexpr std::size_t kMaxSimplices = 4096;

  void build_simplices() {
    const auto n = exponents_.size();
    const auto k = static_cast<std::size_t>(dim()) + 1;
    if (n < k) return;
    std::vector<std::size_t> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
      Mat d(dim(), dim());
      for (std::size_t r = 1; r < k; ++r) d.col(static_cast<Eigen::Index>(r - 1)) = exponents_[pick[r]] - exponents_[pick[0]];
      const double det = std::round(d.determinant());
      if (det != 0.0) {
        Simplex sx;
        std::copy(pick.begin(), pick.end(), sx.idx.begin());
        sx.det2 = det * det;
        simplices_.push_back(sx);
        if (simplices_.size() > kMaxSimplices) {
          simplices_.clear();
          return;
        }
      }
      // next k-combination of n
      std::size_t i = k;
      while (i-- > 0 && pick[i] == n - k + i) {
      }
      if (i == static_cast<std::size_t>(-1)) break;
      ++pick[i];
      for (std::size_t j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  double simplex_density(const std::vector<double>& s, double smax, double z) const {
    const auto k = static_cast<std::size_t>(dim()) + 1;
    const double logz = std::log(z);
    double total = 0.0;
    for (const auto& sx : simplices_) {
      double e = 0.0;
      for (std::size_t r = 0; r < k; ++r) e += s[sx.idx[r]] - smax - logz;
      total += sx.det2 * std::exp(e);
    }
    return total;
  }

  LatticePolytope polytope_;
  std::vector<Vec> exponents_;
  std::vector<double> log_c2_;
  std::vector<Simplex> simplices_;
};

/// Value of a section in log-magnitude/phase form.
struct LogPolar {
  double log_abs = -INFINITY;
  double phase = 0.0;

  Complex value() const { return std::polar(std::exp(log_abs), phase); }
};

/// Lifted monomial chi_alpha-hat at level N, unit coefficient:
/// e^{i N theta} z^alpha / h(z)^{N/2}.
inline LogPolar lifted_monomial_log(const KahlerPotential& /*pot*/, const Point& alpha, int level, const OrbitPoint& x,
                                    double f_at_x) {
  const Vec a = to_vec(alpha);
  return {0.5 * a.dot(x.rho) - 0.5 * level * f_at_x, a.dot(x.phi) + level * x.theta};
}

inline Complex lifted_monomial(const KahlerPotential& pot, const Point& alpha, int level, const OrbitPoint& x) {
  if (level < 1) throw ValidationError("level must be >= 1");
  if (!pot.polytope().contains(alpha, level))
    throw ValidationError("exponent " + to_string(alpha) + " is not in " + std::to_string(level) + "P");
  return lifted_monomial_log(pot, alpha, level, x, pot.value(x.rho)).value();
}

/// m-hat_alpha = c_alpha chi_alpha-hat for alpha in P∩Z^m (level one). These
/// are the coordinates of the lifted monomial embedding, so sum |m-hat|^2 = 1.
inline Complex weighted_monomial(const KahlerPotential& pot, const Point& alpha, const OrbitPoint& x) {
  const double c = pot.polytope().weight(alpha);
  return c * lifted_monomial(pot, alpha, 1, x);
}

/// Residuals of the joint eigenvalue equations for chi_alpha-hat, by central
/// differences along the torus directions and the fiber.
struct EigenvalueResiduals {
  std::vector<double> torus;
  double fiber = 0.0;
};

inline EigenvalueResiduals weight_eigenvalue_check(const KahlerPotential& pot, const Point& alpha, int level,
                                                   const OrbitPoint& x, double h) {
  if (!(h > 0.0)) throw ValidationError("finite-difference step must be positive");
  const Complex v = lifted_monomial(pot, alpha, level, x);
  if (std::abs(v) == 0.0) throw NumericError("lifted monomial vanishes at the sample point");
  const Complex i1(0.0, 1.0);
  EigenvalueResiduals r;
  const auto m = pot.dim();
  for (int j = 0; j < m; ++j) {
    Vec e = Vec::Zero(m);
    e[j] = h;
    const Complex dp = lifted_monomial(pot, alpha, level, torus_act(x, e));
    const Complex dm = lifted_monomial(pot, alpha, level, torus_act(x, -e));
    const Complex ratio = (dp - dm) / (2.0 * h) / (i1 * v);
    r.torus.push_back(std::abs(ratio - static_cast<double>(alpha[static_cast<std::size_t>(j)])));
  }
  const Complex fp = lifted_monomial(pot, alpha, level, fiber_act(x, h));
  const Complex fm = lifted_monomial(pot, alpha, level, fiber_act(x, -h));
  r.fiber = std::abs((fp - fm) / (2.0 * h) / (i1 * v) - static_cast<double>(level));
  return r;
}

/// alpha-hat = (alpha, N p - |alpha|), p = max_{beta in P} |beta|.
struct HomogenizedWeight {
  Point alpha;
  int level = 0;
  std::int64_t p = 0;
  Point hat;
};

inline HomogenizedWeight homogenize(const Point& alpha, int level, const LatticePolytope& poly) {
  if (!poly.contains(alpha, level))
    throw ValidationError("exponent " + to_string(alpha) + " is not in " + std::to_string(level) + "P");
  HomogenizedWeight h{alpha, level, poly.max_degree(), alpha};
  std::int64_t deg = 0;
  for (auto a : alpha) deg += a;
  h.hat.push_back(level * h.p - deg);
  return h;
}

}  // namespace toric_szego
