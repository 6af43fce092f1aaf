#pragma once

// Lattice polytopes in dimension 1..3: V/H representations, dilated lattice
// point enumeration, the Delzant test, exact volume and Ehrhart counts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace toric_szego {

using Point = std::vector<std::int64_t>;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kMaxDim = 3;

inline std::string to_string(const Point& p) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
  os << ')';
  return os.str();
}

namespace detail {

inline std::int64_t dot(const Point& a, const Point& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Point sub(const Point& a, const Point& b) {
  Point r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline std::int64_t content(const Point& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x);
  return g;
}

inline Point primitive(Point v) {
  const std::int64_t g = content(v);
  if (g > 1)
    for (auto& x : v) x /= g;
  return v;
}

/// Determinant of a square integer matrix given by rows (size <= 3).
inline std::int64_t det(const std::vector<Point>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) return 1;
  if (n == 1) return rows[0][0];
  if (n == 2) return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
  const auto& a = rows[0];
  const auto& b = rows[1];
  const auto& c = rows[2];
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

/// Rank of a list of integer vectors (fraction-free elimination).
inline int rank(std::vector<Point> rows) {
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  std::vector<std::vector<__int128>> m(rows.size(), std::vector<__int128>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m[i][j] = rows[i][j];
  int r = 0;
  for (std::size_t c = 0; c < cols && r < static_cast<int>(m.size()); ++c) {
    std::size_t piv = r;
    while (piv < m.size() && m[piv][c] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[r]);
    for (std::size_t i = r + 1; i < m.size(); ++i) {
      const __int128 f = m[i][c];
      const __int128 p = m[r][c];
      for (std::size_t j = 0; j < cols; ++j) m[i][j] = m[i][j] * p - m[r][j] * f;
      // keep entries small
      __int128 g = 0;
      for (auto x : m[i]) {
        __int128 ax = x < 0 ? -x : x;
        __int128 a = g, b = ax;
        while (b != 0) {
          __int128 t = a % b;
          a = b;
          b = t;
        }
        g = a;
      }
      if (g > 1)
        for (auto& x : m[i]) x /= g;
    }
    ++r;
  }
  return r;
}

inline Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw ValidationError("coordinate overflow: dilated polytope does not fit 64-bit integers");
  return r;
}

}  // namespace detail

/// A facet inequality <normal, x> <= offset with primitive integer normal.
struct Facet {
  Point normal;
  std::int64_t offset = 0;

  friend bool operator==(const Facet&, const Facet&) = default;
  friend auto operator<=>(const Facet&, const Facet&) = default;
};

/// Lattice points of a dilate N*P, sorted lexicographically.
class LatticePointSet {
 public:
  LatticePointSet() = default;
  LatticePointSet(int dilation, std::vector<Point> points) : dilation_(dilation), points_(std::move(points)) {
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
    for (std::size_t i = 0; i < points_.size(); ++i) index_.emplace(points_[i], i);
  }

  int dilation() const { return dilation_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  const Point& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  std::optional<std::size_t> index_of(const Point& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const Point& p) const { return index_.count(p) != 0; }

  friend bool operator==(const LatticePointSet& a, const LatticePointSet& b) {
    return a.dilation_ == b.dilation_ && a.points_ == b.points_;
  }

 private:
  int dilation_ = 0;
  std::vector<Point> points_;
  std::map<Point, std::size_t> index_;
};

/// Per-vertex Delzant data: primitive edge directions and their determinant.
struct VertexCertificate {
  Point vertex;
  std::vector<Point> edges;
  std::int64_t determinant = 0;  // 0 when the vertex does not have exactly m edges
  bool smooth = false;
};

struct DelzantCertificate {
  bool delzant = false;
  std::vector<VertexCertificate> vertices;

  /// First failing vertex, if any.
  const VertexCertificate* first_failure() const {
    for (const auto& v : vertices)
      if (!v.smooth) return &v;
    return nullptr;
  }
};

/// Full-dimensional integral convex polytope in the closed positive orthant.
///
/// Construction validates both representations against each other; the
/// object is immutable afterwards. Weights c_alpha live on P∩Z^m and default
/// to 1.
class LatticePolytope {
 public:
  using Weights = std::map<Point, double>;

  static LatticePolytope from_vertices(std::vector<Point> vertices,
                                       std::optional<std::vector<Facet>> facets = std::nullopt,
                                       const Weights& weights = {}) {
    LatticePolytope p;
    p.init(std::move(vertices), std::move(facets), weights);
    return p;
  }

  int dim() const { return dim_; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }

  /// P∩Z^m, sorted.
  const std::vector<Point>& lattice_points() const { return points_; }

  /// c_alpha for alpha in P∩Z^m.
  const std::vector<double>& weights() const { return weights_; }
  double weight(const Point& alpha) const {
    auto it = std::lower_bound(points_.begin(), points_.end(), alpha);
    if (it == points_.end() || *it != alpha)
      throw ValidationError("weight requested at " + to_string(alpha) + " which is not a lattice point of P");
    return weights_[static_cast<std::size_t>(it - points_.begin())];
  }
  bool unit_weights() const {
    return std::all_of(weights_.begin(), weights_.end(), [](double c) { return c == 1.0; });
  }

  /// Membership in N*P via the H-representation.
  bool contains(const Point& x, std::int64_t dilation = 1) const {
    for (const auto& f : facets_)
      if (detail::dot(f.normal, x) > f.offset * dilation) return false;
    return true;
  }

  /// Membership in the relative interior of N*P.
  bool interior_contains(const Point& x, std::int64_t dilation = 1) const {
    for (const auto& f : facets_)
      if (detail::dot(f.normal, x) >= f.offset * dilation) return false;
    return true;
  }

  template <class Vec>
  bool interior_contains_real(const Vec& x, double slack = 0.0) const {
    for (const auto& f : facets_) {
      double s = 0;
      for (int j = 0; j < dim_; ++j) s += static_cast<double>(f.normal[j]) * x[j];
      if (s >= static_cast<double>(f.offset) - slack) return false;
    }
    return true;
  }

  Point lower_corner() const { return lo_; }
  Point upper_corner() const { return hi_; }

  /// Indices of the facets tight at a point of P.
  std::vector<std::size_t> tight_facets(const Point& v) const {
    std::vector<std::size_t> r;
    for (std::size_t i = 0; i < facets_.size(); ++i)
      if (detail::dot(facets_[i].normal, v) == facets_[i].offset) r.push_back(i);
    return r;
  }

  /// max over P∩Z^m of |beta| = sum of coordinates.
  std::int64_t max_degree() const {
    std::int64_t p = 0;
    for (const auto& b : points_) p = std::max(p, std::accumulate(b.begin(), b.end(), std::int64_t{0}));
    return p;
  }

 private:
  void init(std::vector<Point> vertices, std::optional<std::vector<Facet>> facets, const Weights& weights);
  static std::vector<Facet> hull_facets(const std::vector<Point>& v, int m);

  int dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<Facet> facets_;
  std::vector<Point> points_;
  std::vector<double> weights_;
  Point lo_, hi_;
};

inline std::vector<Facet> LatticePolytope::hull_facets(const std::vector<Point>& v, int m) {
  std::set<Facet> found;
  auto consider = [&](Point normal, std::int64_t offset_from) {
    if (detail::content(normal) == 0) return;
    normal = detail::primitive(std::move(normal));
    std::int64_t b = detail::dot(normal, v[static_cast<std::size_t>(offset_from)]);
    bool le = true, ge = true;
    for (const auto& x : v) {
      const auto s = detail::dot(normal, x);
      le = le && s <= b;
      ge = ge && s >= b;
    }
    if (le && !ge) found.insert({normal, b});
    if (ge && !le) {
      for (auto& c : normal) c = -c;
      found.insert({normal, -b});
    }
  };
  const std::size_t n = v.size();
  if (m == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      consider({1}, static_cast<std::int64_t>(i));
    }
  } else if (m == 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const Point d = detail::sub(v[j], v[i]);
        consider({-d[1], d[0]}, static_cast<std::int64_t>(i));
      }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        for (std::size_t k = j + 1; k < n; ++k)
          consider(detail::cross(detail::sub(v[j], v[i]), detail::sub(v[k], v[i])), static_cast<std::int64_t>(i));
  }
  return {found.begin(), found.end()};
}

inline void LatticePolytope::init(std::vector<Point> vertices, std::optional<std::vector<Facet>> facets,
                                  const Weights& weights) {
  if (vertices.empty()) throw ValidationError("empty vertex list");
  dim_ = static_cast<int>(vertices.front().size());
  if (dim_ < 1 || dim_ > kMaxDim) throw ValidationError("dimension must be 1, 2 or 3");
  for (const auto& v : vertices) {
    if (static_cast<int>(v.size()) != dim_) throw ValidationError("vertex " + to_string(v) + " has wrong dimension");
    for (auto x : v)
      if (x < 0) throw ValidationError("vertex " + to_string(v) + " lies outside the positive quadrant");
  }
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());

  std::vector<Point> diffs;
  for (const auto& v : vertices) diffs.push_back(detail::sub(v, vertices.front()));
  if (detail::rank(diffs) != dim_) throw ValidationError("polytope is not full-dimensional");

  facets_ = hull_facets(vertices, dim_);
  vertices_ = std::move(vertices);

  for (const auto& v : vertices_) {
    std::vector<Point> normals;
    for (auto i : tight_facets(v)) normals.push_back(facets_[i].normal);
    if (detail::rank(normals) != dim_)
      throw ValidationError("listed point " + to_string(v) + " is not a vertex of the convex hull");
  }

  if (facets) {
    std::set<Facet> supplied;
    for (auto f : *facets) {
      if (static_cast<int>(f.normal.size()) != dim_) throw ValidationError("facet normal has wrong dimension");
      const auto g = detail::content(f.normal);
      if (g == 0) throw ValidationError("facet normal is zero");
      if (f.offset % g != 0) throw ValidationError("inconsistent supplied H-representation: facet misses the lattice");
      for (auto& c : f.normal) c /= g;
      f.offset /= g;
      supplied.insert(f);
    }
    std::set<Facet> computed(facets_.begin(), facets_.end());
    if (supplied != computed)
      throw ValidationError("inconsistent supplied H-representation: facets do not match the vertex hull");
  }

  lo_ = vertices_.front();
  hi_ = vertices_.front();
  for (const auto& v : vertices_)
    for (int j = 0; j < dim_; ++j) {
      lo_[j] = std::min(lo_[j], v[j]);
      hi_[j] = std::max(hi_[j], v[j]);
    }

  // P∩Z^m by bounding-box scan
  Point x = lo_;
  while (true) {
    if (contains(x)) points_.push_back(x);
    int j = 0;
    for (; j < dim_; ++j) {
      if (++x[j] <= hi_[j]) break;
      x[j] = lo_[j];
    }
    if (j == dim_) break;
  }
  std::sort(points_.begin(), points_.end());

  weights_.assign(points_.size(), 1.0);
  for (const auto& [pt, c] : weights) {
    auto it = std::lower_bound(points_.begin(), points_.end(), pt);
    if (it == points_.end() || *it != pt)
      throw ValidationError("weight given at " + to_string(pt) + " which is not a lattice point of P");
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("weights must be positive and finite");
    weights_[static_cast<std::size_t>(it - points_.begin())] = c;
  }
}

/// Parse the JSON polytope format:
/// {"dim": m, "vertices": [[..]], "facets": [{"normal": [..], "offset": b}], "weights": [{"point": [..], "c": x}]}
inline LatticePolytope parse_polytope(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("polytope file must contain a JSON object");
  if (!j.contains("dim") || !j["dim"].is_number_integer()) throw ParseError("missing integer field \"dim\"");
  const int m = j["dim"].get<int>();
  if (m < 1 || m > kMaxDim) throw ParseError("\"dim\" must be 1, 2 or 3");

  auto read_int = [](const nlohmann::json& v, const char* what) -> std::int64_t {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    }
    throw ParseError(std::string("non-integral ") + what + " coordinate: " + v.dump());
  };
  auto read_point = [&](const nlohmann::json& v, const char* what) {
    if (!v.is_array() || static_cast<int>(v.size()) != m)
      throw ParseError(std::string(what) + " must be an array of length " + std::to_string(m));
    Point p;
    for (const auto& c : v) p.push_back(read_int(c, what));
    return p;
  };

  if (!j.contains("vertices") || !j["vertices"].is_array()) throw ParseError("missing array field \"vertices\"");
  std::vector<Point> verts;
  for (const auto& v : j["vertices"]) verts.push_back(read_point(v, "vertex"));
  if (verts.empty()) throw ValidationError("empty vertex list");

  std::optional<std::vector<Facet>> facets;
  if (j.contains("facets")) {
    if (!j["facets"].is_array()) throw ParseError("\"facets\" must be an array");
    facets.emplace();
    for (const auto& f : j["facets"]) {
      if (!f.is_object() || !f.contains("normal") || !f.contains("offset"))
        throw ParseError("facet entries need \"normal\" and \"offset\"");
      facets->push_back({read_point(f["normal"], "normal"), read_int(f["offset"], "offset")});
    }
  }

  LatticePolytope::Weights weights;
  if (j.contains("weights")) {
    if (!j["weights"].is_array()) throw ParseError("\"weights\" must be an array");
    for (const auto& w : j["weights"]) {
      if (!w.is_object() || !w.contains("point") || !w.contains("c") || !w["c"].is_number())
        throw ParseError("weight entries need \"point\" and numeric \"c\"");
      weights[read_point(w["point"], "weight point")] = w["c"].get<double>();
    }
  }
  return LatticePolytope::from_vertices(std::move(verts), std::move(facets), weights);
}

/// Integer points of N*P: bounding-box scan filtered through the scaled H-rep.
inline LatticePointSet lattice_points(const LatticePolytope& p, int dilation) {
  if (dilation < 1) throw ValidationError("dilation must be >= 1");
  const int m = p.dim();
  Point lo = p.lower_corner(), hi = p.upper_corner();
  for (int j = 0; j < m; ++j) {
    lo[j] = detail::checked_mul(lo[j], dilation);
    hi[j] = detail::checked_mul(hi[j], dilation);
  }
  std::vector<Point> pts;
  Point x = lo;
  while (true) {
    if (p.contains(x, dilation)) pts.push_back(x);
    int j = 0;
    for (; j < m; ++j) {
      if (++x[j] <= hi[j]) break;
      x[j] = lo[j];
    }
    if (j == m) break;
  }
  return LatticePointSet(dilation, std::move(pts));
}

inline std::int64_t ehrhart_count(const LatticePolytope& p, int dilation) {
  return static_cast<std::int64_t>(lattice_points(p, dilation).size());
}

/// Delzant test: at each vertex exactly m primitive edge directions with |det| = 1.
inline DelzantCertificate is_delzant(const LatticePolytope& p) {
  const int m = p.dim();
  DelzantCertificate cert;
  cert.delzant = true;
  const auto& verts = p.vertices();
  for (const auto& v : verts) {
    VertexCertificate vc;
    vc.vertex = v;
    const auto tv = p.tight_facets(v);
    for (const auto& w : verts) {
      if (w == v) continue;
      const auto tw = p.tight_facets(w);
      std::vector<Point> common;
      for (auto i : tv)
        if (std::find(tw.begin(), tw.end(), i) != tw.end()) common.push_back(p.facets()[i].normal);
      // v,w span an edge iff the facets through both cut out a line
      if (detail::rank(common) == m - 1) vc.edges.push_back(detail::primitive(detail::sub(w, v)));
    }
    std::sort(vc.edges.begin(), vc.edges.end());
    if (static_cast<int>(vc.edges.size()) == m) {
      vc.determinant = detail::det(vc.edges);
      vc.smooth = std::abs(vc.determinant) == 1;
    }
    cert.delzant = cert.delzant && vc.smooth;
    cert.vertices.push_back(std::move(vc));
  }
  return cert;
}

namespace detail {

inline int affine_rank(const std::vector<Point>& pts) {
  if (pts.empty()) return -1;
  std::vector<Point> d;
  for (const auto& q : pts) d.push_back(sub(q, pts.front()));
  return rank(d);
}

// Pulling triangulation: cone from the first vertex of each face over the
// subfaces not containing it.
inline void triangulate(const LatticePolytope& p, const std::vector<std::size_t>& face, int d,
                        std::vector<std::vector<std::size_t>>& out, std::vector<std::size_t> prefix) {
  const auto& verts = p.vertices();
  const std::size_t apex = face.front();
  prefix.push_back(apex);
  if (d == 0) {
    out.push_back(prefix);
    return;
  }
  if (d == 1) {
    for (std::size_t k = 1; k < face.size(); ++k) {
      auto s = prefix;
      s.push_back(face[k]);
      out.push_back(s);
    }
    return;
  }
  std::set<std::vector<std::size_t>> seen;
  for (const auto& f : p.facets()) {
    std::vector<std::size_t> sub;
    for (auto i : face)
      if (dot(f.normal, verts[i]) == f.offset) sub.push_back(i);
    if (std::find(sub.begin(), sub.end(), apex) != sub.end()) continue;
    std::vector<Point> sp;
    for (auto i : sub) sp.push_back(verts[i]);
    if (affine_rank(sp) != d - 1) continue;
    if (!seen.insert(sub).second) continue;
    triangulate(p, sub, d - 1, out, prefix);
  }
}

}  // namespace detail

/// Exact Euclidean volume via a pulling triangulation.
inline Rational euclidean_volume(const LatticePolytope& p) {
  const int m = p.dim();
  std::vector<std::size_t> all(p.vertices().size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::vector<std::size_t>> simplices;
  if (m == 1) {
    simplices.push_back({0, all.size() - 1});
  } else {
    std::vector<std::size_t> prefix;
    // cone from vertex 0 over facets not containing it
    const auto& verts = p.vertices();
    std::set<std::vector<std::size_t>> seen;
    for (const auto& f : p.facets()) {
      std::vector<std::size_t> sub;
      for (auto i : all)
        if (detail::dot(f.normal, verts[i]) == f.offset) sub.push_back(i);
      if (sub.front() == 0) continue;
      if (!seen.insert(sub).second) continue;
      detail::triangulate(p, sub, m - 1, simplices, {0});
    }
  }
  BigInt total = 0;
  for (const auto& s : simplices) {
    std::vector<Point> rows;
    for (std::size_t k = 1; k < s.size(); ++k) rows.push_back(detail::sub(p.vertices()[s[k]], p.vertices()[s[0]]));
    total += std::abs(detail::det(rows));
  }
  BigInt fact = 1;
  for (int k = 2; k <= m; ++k) fact *= k;
  return Rational(total, fact);
}

}  // namespace toric_szego
