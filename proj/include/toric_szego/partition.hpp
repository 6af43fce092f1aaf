#pragma once

// Lattice-path partition function P_N(alpha): the number of length-N
// sequences of lattice points of P summing to alpha. Computed exactly by
// repeated convolution of the indicator of P∩Z^m over a dense box.

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "polytope.hpp"

namespace toric_szego {

/// Refuse dense boxes larger than this many cells unless told otherwise.
inline constexpr std::size_t kDefaultPartitionCellCap = std::size_t{1} << 22;

/// Exact table alpha -> P_N(alpha) over N*P∩Z^m.
struct PartitionTable {
  int dilation = 0;
  LatticePointSet support;
  std::vector<BigInt> counts;  // aligned with support.points()

  /// P_N(alpha); zero off the support.
  BigInt count(const Point& alpha) const {
    auto i = support.index_of(alpha);
    return i ? counts[*i] : BigInt{0};
  }

  BigInt total() const {
    BigInt s = 0;
    for (const auto& c : counts) s += c;
    return s;
  }
};

namespace detail {

// Dense box [0, extent_j] in the coordinates of P translated by its lower corner.
struct DenseBox {
  Point extent;
  std::vector<std::size_t> stride;
  std::size_t cells = 1;

  DenseBox(const Point& ext, std::size_t cap) : extent(ext), stride(ext.size()) {
    for (std::size_t j = 0; j < ext.size(); ++j) {
      stride[j] = cells;
      const auto len = static_cast<std::size_t>(ext[j] + 1);
      if (len != 0 && cells > cap / len)
        throw ValidationError("partition table box exceeds the configured cell cap (" + std::to_string(cap) + ")");
      cells *= len;
    }
    if (cells > cap)
      throw ValidationError("partition table box exceeds the configured cell cap (" + std::to_string(cap) + ")");
  }

  std::size_t offset(const Point& x) const {
    std::size_t o = 0;
    for (std::size_t j = 0; j < x.size(); ++j) o += static_cast<std::size_t>(x[j]) * stride[j];
    return o;
  }

  Point point(std::size_t o) const {
    Point x(extent.size());
    for (std::size_t j = extent.size(); j-- > 0;) {
      x[j] = static_cast<std::int64_t>(o / stride[j]);
      o %= stride[j];
    }
    return x;
  }
};

}  // namespace detail

/// P_N by N successive sparse convolutions with exact integers.
inline PartitionTable partition_counts(const LatticePolytope& p, int dilation,
                                       std::size_t cell_cap = kDefaultPartitionCellCap) {
  if (dilation < 1) throw ValidationError("dilation must be >= 1");
  const int m = p.dim();
  const Point lo = p.lower_corner();
  Point ext = detail::sub(p.upper_corner(), lo);
  for (auto& e : ext) e = detail::checked_mul(e, dilation);
  const detail::DenseBox box(ext, cell_cap);

  std::vector<std::size_t> steps;
  for (const auto& b : p.lattice_points()) steps.push_back(box.offset(detail::sub(b, lo)));

  std::vector<BigInt> layer(box.cells), next(box.cells);
  for (auto s : steps) layer[s] = 1;
  for (int k = 2; k <= dilation; ++k) {
    for (auto& c : next) c = 0;
    for (std::size_t o = 0; o < box.cells; ++o) {
      if (layer[o].is_zero()) continue;
      // every partial sum of k-1 terms lies in (k-1)(P - lo), so o + s stays in the box
      for (auto s : steps) next[o + s] += layer[o];
    }
    layer.swap(next);
  }

  PartitionTable t;
  t.dilation = dilation;
  t.support = lattice_points(p, dilation);
  t.counts.reserve(t.support.size());
  for (const auto& alpha : t.support) {
    Point shifted(m);
    for (int j = 0; j < m; ++j) shifted[j] = alpha[j] - lo[j] * dilation;
    t.counts.push_back(layer[box.offset(shifted)]);
  }
  return t;
}

/// Coefficients of chi_alpha(x) conj(chi_alpha(y)) in the N-th power of the
/// pulled-back level-one kernel (unit weights); identical to partition_counts.
inline PartitionTable power_expansion_coefficients(const LatticePolytope& p, int dilation,
                                                   std::size_t cell_cap = kDefaultPartitionCellCap) {
  return partition_counts(p, dilation, cell_cap);
}

/// Lattice points of N*P that are not sums of N lattice points of P.
inline std::vector<Point> decomposability_check(const PartitionTable& t) {
  std::vector<Point> bad;
  for (std::size_t i = 0; i < t.counts.size(); ++i)
    if (t.counts[i].is_zero()) bad.push_back(t.support[i]);
  return bad;
}

inline std::vector<Point> decomposability_check(const LatticePolytope& p, int dilation) {
  return decomposability_check(partition_counts(p, dilation));
}

/// Table for N1+N2 from tables for N1 and N2 (direct convolution).
inline PartitionTable convolve(const LatticePolytope& p, const PartitionTable& a, const PartitionTable& b) {
  PartitionTable t;
  t.dilation = a.dilation + b.dilation;
  t.support = lattice_points(p, t.dilation);
  t.counts.assign(t.support.size(), 0);
  const std::size_t m = static_cast<std::size_t>(p.dim());
  Point s(m);
  for (std::size_t i = 0; i < a.support.size(); ++i) {
    if (a.counts[i].is_zero()) continue;
    for (std::size_t k = 0; k < b.support.size(); ++k) {
      for (std::size_t j = 0; j < m; ++j) s[j] = a.support[i][j] + b.support[k][j];
      auto idx = t.support.index_of(s);
      if (!idx) throw ValidationError("convolution produced a point outside (N1+N2)P");
      t.counts[*idx] += a.counts[i] * b.counts[k];
    }
  }
  return t;
}

/// CSV: alpha_1..alpha_m,count
inline void write_partition_csv(std::ostream& os, const PartitionTable& t) {
  const std::size_t m = t.support.size() ? t.support[0].size() : 0;
  for (std::size_t j = 0; j < m; ++j) os << "alpha_" << (j + 1) << ',';
  os << "count\n";
  for (std::size_t i = 0; i < t.support.size(); ++i) {
    for (auto x : t.support[i]) os << x << ',';
    os << t.counts[i].str() << '\n';
  }
}

}  // namespace toric_szego
