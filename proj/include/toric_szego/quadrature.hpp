#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on finite and infinite
// intervals, and nested integration over R^m around a Gaussian-shaped
// window. Works for real and complex integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "geometry.hpp"

namespace toric_szego {

template <class T>
struct Integral {
  T value{};
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

struct QuadratureLimits {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  std::size_t max_intervals = 2000;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

// One 15-point Kronrod panel with the QUADPACK error heuristic.
template <class T, class F>
Segment<T> kronrod_panel(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T resk = fc * kWgk[7];
  T resg = fc * kWg[3];
  double resabs = std::abs(fc) * kWgk[7];
  std::array<T, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    resk += (f1[j] + f2[j]) * kWgk[j];
    resabs += (std::abs(f1[j]) + std::abs(f2[j])) * kWgk[j];
    if (j % 2 == 1) resg += (f1[j] + f2[j]) * kWg[j / 2];
  }
  const T mean = resk * 0.5;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  resk *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, resk, err};
}

template <class T, class F>
Integral<T> adaptive_finite(F& f, double a, double b, const QuadratureLimits& lim) {
  Integral<T> out;
  std::priority_queue<Segment<T>> heap;
  auto first = kronrod_panel<T>(f, a, b);
  out.evaluations = 15;
  T total = first.value;
  double err = first.error;
  heap.push(first);
  std::size_t intervals = 1;
  while (err > std::max(lim.abs_tol, lim.rel_tol * std::abs(total))) {
    if (intervals >= lim.max_intervals) {
      out.converged = false;
      break;
    }
    const Segment<T> worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.converged = false;
      break;
    }
    heap.pop();
    auto left = kronrod_panel<T>(f, worst.a, mid);
    auto right = kronrod_panel<T>(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
    // periodically resum to limit drift in the running totals
    if (intervals % 64 == 0) {
      auto copy = heap;
      total = T{};
      err = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        err += copy.top().error;
        copy.pop();
      }
    }
  }
  out.value = total;
  out.error = err;
  return out;
}

}  // namespace detail

/// Integrate f over [a, b]; either end may be infinite. Semi-infinite pieces
/// use rho = a + scale * t / (1 - t).
template <class T, class F>
Integral<T> integrate(F f, double a, double b, const QuadratureLimits& lim, double scale = 1.0) {
  if (a == b) return {};
  if (a > b) {
    auto r = integrate<T>(f, b, a, lim, scale);
    r.value = -r.value;
    return r;
  }
  const bool lo_inf = std::isinf(a), hi_inf = std::isinf(b);
  if (!lo_inf && !hi_inf) return detail::adaptive_finite<T>(f, a, b, lim);
  if (lo_inf && hi_inf) {
    auto l = integrate<T>(f, -INFINITY, 0.0, lim, scale);
    auto r = integrate<T>(f, 0.0, INFINITY, lim, scale);
    return {l.value + r.value, l.error + r.error, l.converged && r.converged, l.evaluations + r.evaluations};
  }
  if (hi_inf) {
    auto g = [&](double t) -> T {
      const double u = 1.0 - t;
      return f(a + scale * t / u) * (scale / (u * u));
    };
    return detail::adaptive_finite<T>(g, 0.0, 1.0, lim);
  }
  auto g = [&](double t) -> T {
    const double u = 1.0 - t;
    return f(b - scale * t / u) * (scale / (u * u));
  };
  return detail::adaptive_finite<T>(g, 0.0, 1.0, lim);
}

/// Integral over the whole line split into a core window [c - R s, c + R s]
/// and two semi-infinite tails, the tails judged against the core's size.
template <class T, class F>
Integral<T> integrate_line(F&& f, double center, double sd, double radius, const QuadratureLimits& lim) {
  const double lo = center - radius * sd, hi = center + radius * sd;
  auto core = integrate<T>(f, lo, hi, lim);
  QuadratureLimits tail_lim = lim;
  tail_lim.abs_tol = std::max(lim.abs_tol, 0.25 * lim.rel_tol * std::abs(core.value));
  auto left = integrate<T>(f, -INFINITY, lo, tail_lim, sd);
  auto right = integrate<T>(f, hi, INFINITY, tail_lim, sd);
  Integral<T> out;
  out.value = left.value + core.value + right.value;
  out.error = left.error + core.error + right.error;
  out.converged = left.converged && core.converged && right.converged;
  out.evaluations = left.evaluations + core.evaluations + right.evaluations;
  return out;
}

/// Gaussian-shaped integration window on R^m: a center, a covariance used for
/// conditional centering of inner integrals, and a radius in standard
/// deviations.
struct LaplaceWindow {
  Vec center;
  Mat covariance;
  double radius = 12.0;
};

/// Nested adaptive integration of f: R^m -> T over all of R^m. Axis k is
/// centered on the Gaussian conditional mean given the outer coordinates.
/// Set lim.abs_tol when the integral may vanish (oscillatory integrands).
template <class T, class F>
Integral<T> integrate_rm(const F& f, const LaplaceWindow& w, const QuadratureLimits& lim) {
  const int m = static_cast<int>(w.center.size());
  Vec rho = w.center;
  bool all_converged = true;
  std::size_t evals = 0;
  double worst_inner_rel = 0.0;

  std::function<Integral<T>(int, const QuadratureLimits&)> level = [&](int k, const QuadratureLimits& l) {
    double c = w.center[k];
    double var = w.covariance(k, k);
    if (k > 0) {
      const Mat saa = w.covariance.topLeftCorner(k, k);
      const Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim> ska =
          w.covariance.block(k, 0, 1, k);
      const Eigen::Matrix<double, 1, Eigen::Dynamic, Eigen::RowMajor, 1, kMaxDim> gain =
          saa.ldlt().solve(ska.transpose()).transpose();
      // outer nodes deep in a mapped tail would drag the inner window away
      // from the mass; the shift is only trusted inside the outer window
      Vec shift = rho.head(k) - w.center.head(k);
      for (int j = 0; j < k; ++j) {
        const double lim = w.radius * std::sqrt(w.covariance(j, j));
        shift[j] = std::clamp(shift[j], -lim, lim);
      }
      c += gain.dot(shift);
      var -= gain.dot(ska);
    }
    const double sd = std::sqrt(std::max(var, 1e-12 * w.covariance(k, k)));
    QuadratureLimits inner = l;
    inner.rel_tol = l.rel_tol * 0.25;
    // an absolute target spreads over the ~2R sd this axis effectively spans
    inner.abs_tol = l.abs_tol / (2.0 * w.radius * sd);
    auto g = [&](double t) -> T {
      rho[k] = t;
      if (k == m - 1) {
        ++evals;
        return f(rho);
      }
      auto r = level(k + 1, inner);
      all_converged = all_converged && r.converged;
      const double floor = inner.abs_tol > 0.0 ? inner.abs_tol / inner.rel_tol : 0.0;
      const double size = std::max(std::abs(r.value), floor);
      if (size > 0.0) worst_inner_rel = std::max(worst_inner_rel, r.error / size);
      return r.value;
    };
    return integrate_line<T>(g, c, sd, w.radius, l);
  };

  auto out = level(0, lim);
  out.converged = out.converged && all_converged;
  out.error += worst_inner_rel * std::max(std::abs(out.value), lim.abs_tol > 0.0 ? lim.abs_tol / lim.rel_tol : 0.0);
  out.evaluations = evals;
  return out;
}

}  // namespace toric_szego
