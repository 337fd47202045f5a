#pragma once

// Integer rectilinear geometry: points, rects, simple polygons, containment,
// intersection area and Manhattan gaps. All coordinates are database units.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "icas/error.hpp"

namespace icas::geom {

using Coord = std::int64_t;
using Area = std::int64_t;
using Wide = __int128;

struct Point {
  Coord x = 0;
  Coord y = 0;

  friend constexpr auto operator<=>(const Point&, const Point&) = default;
  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend std::ostream& operator<<(std::ostream& os, Point p) {
    return os << '(' << p.x << ',' << p.y << ')';
  }
};

/// Closed axis-aligned box [lo.x, hi.x] x [lo.y, hi.y].
struct Rect {
  Point lo;
  Point hi;

  static constexpr Rect from_corners(Point a, Point b) {
    return {{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  }

  constexpr Coord width() const { return hi.x - lo.x; }
  constexpr Coord height() const { return hi.y - lo.y; }
  constexpr Area area() const { return width() * height(); }
  constexpr bool degenerate() const { return width() == 0 || height() == 0; }
  constexpr bool valid() const { return lo.x <= hi.x && lo.y <= hi.y; }

  constexpr bool contains(Point p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  constexpr bool contains(const Rect& r) const { return contains(r.lo) && contains(r.hi); }
  /// Closed-set intersection test (touching counts).
  constexpr bool touches(const Rect& r) const {
    return lo.x <= r.hi.x && r.lo.x <= hi.x && lo.y <= r.hi.y && r.lo.y <= hi.y;
  }
  /// Positive-area overlap test.
  constexpr bool overlaps(const Rect& r) const {
    return lo.x < r.hi.x && r.lo.x < hi.x && lo.y < r.hi.y && r.lo.y < hi.y;
  }
  constexpr Rect intersection(const Rect& r) const {
    return {{std::max(lo.x, r.lo.x), std::max(lo.y, r.lo.y)},
            {std::min(hi.x, r.hi.x), std::min(hi.y, r.hi.y)}};
  }
  constexpr Rect expanded(Coord d) const { return {{lo.x - d, lo.y - d}, {hi.x + d, hi.y + d}}; }
  constexpr Rect translated(Point t) const { return {lo + t, hi + t}; }
  constexpr Rect bounding_union(const Rect& r) const {
    return {{std::min(lo.x, r.lo.x), std::min(lo.y, r.lo.y)},
            {std::max(hi.x, r.hi.x), std::max(hi.y, r.hi.y)}};
  }

  friend constexpr auto operator<=>(const Rect&, const Rect&) = default;
  friend std::ostream& operator<<(std::ostream& os, const Rect& r) {
    return os << '[' << r.lo << '-' << r.hi << ']';
  }
};

struct Polygon {
  std::vector<Point> vertices;

  Polygon() = default;
  explicit Polygon(std::vector<Point> v) : vertices(std::move(v)) {}
  static Polygon from_rect(const Rect& r) {
    return Polygon({r.lo, {r.hi.x, r.lo.y}, r.hi, {r.lo.x, r.hi.y}});
  }

  std::size_t size() const { return vertices.size(); }
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

// ---------------------------------------------------------------------------
// Scalar helpers

constexpr Coord gap(Coord alo, Coord ahi, Coord blo, Coord bhi) {
  return std::max<Coord>({0, blo - ahi, alo - bhi});
}

/// L1 gap between two closed boxes; zero when they touch or overlap.
constexpr Coord manhattan_rect_distance(const Rect& a, const Rect& b) {
  return gap(a.lo.x, a.hi.x, b.lo.x, b.hi.x) + gap(a.lo.y, a.hi.y, b.lo.y, b.hi.y);
}

constexpr Rect point_rect(Point p) { return {p, p}; }

inline Wide cross(Point o, Point a, Point b) {
  return Wide(a.x - o.x) * Wide(b.y - o.y) - Wide(a.y - o.y) * Wide(b.x - o.x);
}

/// Twice the signed shoelace area (positive for counter-clockwise rings).
inline Wide twice_signed_area(const Polygon& poly) {
  Wide s = 0;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    s += Wide(a.x) * Wide(b.y) - Wide(b.x) * Wide(a.y);
  }
  return s;
}

/// Absolute area, rounded half away from zero for non-rectilinear rings.
inline Area area(const Polygon& poly) {
  Wide t = twice_signed_area(poly);
  if (t < 0) t = -t;
  return static_cast<Area>((t + 1) / 2);
}

inline Rect bounding_box(const Polygon& poly) {
  if (poly.vertices.empty()) throw GeometryError("bounding box of empty polygon");
  Rect r{poly.vertices.front(), poly.vertices.front()};
  for (const Point& p : poly.vertices) r = r.bounding_union(point_rect(p));
  return r;
}

inline bool is_rectilinear(const Polygon& poly) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point& a = v[i];
    const Point& b = v[(i + 1) % n];
    if (a.x != b.x && a.y != b.y) return false;
  }
  return true;
}

namespace detail {

inline bool on_segment(Point p, Point a, Point b) {
  return cross(a, b, p) == 0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

inline int sign(Wide v) { return (v > 0) - (v < 0); }

inline bool segments_intersect(Point a, Point b, Point c, Point d) {
  const int d1 = sign(cross(c, d, a));
  const int d2 = sign(cross(c, d, b));
  const int d3 = sign(cross(a, b, c));
  const int d4 = sign(cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && on_segment(a, c, d)) || (d2 == 0 && on_segment(b, c, d)) ||
         (d3 == 0 && on_segment(c, a, b)) || (d4 == 0 && on_segment(d, a, b));
}

/// Drops repeated consecutive vertices (including the implicit closing pair).
inline std::vector<Point> dedup_ring(const std::vector<Point>& in) {
  std::vector<Point> out;
  out.reserve(in.size());
  for (const Point& p : in)
    if (out.empty() || out.back() != p) out.push_back(p);
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  return out;
}

}  // namespace detail

/// Throws GeometryError unless `poly` is a simple ring of at least 3 vertices.
inline void validate(const Polygon& poly) {
  const auto v = detail::dedup_ring(poly.vertices);
  const std::size_t n = v.size();
  if (n < 3) throw GeometryError("polygon has fewer than 3 distinct vertices");
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = v[i], b = v[(i + 1) % n];
    // Adjacent edges may only share their common vertex: reject spikes.
    const Point c = v[(i + 2) % n];
    if (cross(a, b, c) == 0) {
      const Wide dot = Wide(b.x - a.x) * Wide(c.x - b.x) + Wide(b.y - a.y) * Wide(c.y - b.y);
      if (dot < 0)
        throw GeometryError("polygon folds back on itself at vertex " + std::to_string((i + 1) % n));
    }
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through closure
      const Point c2 = v[j], d2 = v[(j + 1) % n];
      if (detail::segments_intersect(a, b, c2, d2))
        throw GeometryError("polygon self-intersects between edges " + std::to_string(i) + " and " +
                            std::to_string(j));
    }
  }
  if (twice_signed_area(Polygon(v)) == 0) throw GeometryError("polygon has zero area");
}

/// A polygon whose simplicity has been checked once, for repeated queries.
class SimplePolygon {
public:
  explicit SimplePolygon(Polygon poly) : poly_(std::move(poly)) {
    validate(poly_);
    poly_.vertices = detail::dedup_ring(poly_.vertices);
    box_ = bounding_box(poly_);
  }

  const Polygon& polygon() const { return poly_; }
  const Rect& box() const { return box_; }

private:
  Polygon poly_;
  Rect box_;
};

/// Crossing-number containment with the boundary counted as inside.
inline bool point_in_polygon(Point p, const SimplePolygon& sp) {
  if (!sp.box().contains(p)) return false;
  const auto& v = sp.polygon().vertices;
  bool inside = false;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point a = v[i];
    const Point b = v[(i + 1) % n];
    if (detail::on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      // Crossing lies right of p iff orientation of (a, b, p) agrees with edge direction.
      const Wide c = cross(a, b, p);
      if ((b.y > a.y) ? c > 0 : c < 0) inside = !inside;
    }
  }
  return inside;
}

inline bool point_in_polygon(Point p, const Polygon& poly) {
  return point_in_polygon(p, SimplePolygon(poly));
}

/// Splits a simple rectilinear polygon into interior-disjoint rectangles by
/// horizontal slabs.
inline std::vector<Rect> decompose_rectilinear(const Polygon& poly) {
  const auto v = detail::dedup_ring(poly.vertices);
  if (!is_rectilinear(Polygon(v))) throw GeometryError("decompose_rectilinear: non-rectilinear polygon");
  std::vector<Coord> ys;
  for (const Point& p : v) ys.push_back(p.y);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  struct VEdge {
    Coord x, ylo, yhi;
  };
  std::vector<VEdge> edges;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point a = v[i], b = v[(i + 1) % n];
    if (a.x == b.x && a.y != b.y) edges.push_back({a.x, std::min(a.y, b.y), std::max(a.y, b.y)});
  }

  std::vector<Rect> out;
  std::vector<Coord> xs;
  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    const Coord y0 = ys[k], y1 = ys[k + 1];
    xs.clear();
    for (const VEdge& e : edges)
      if (e.ylo <= y0 && e.yhi >= y1) xs.push_back(e.x);
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2)
      if (xs[i] < xs[i + 1]) out.push_back({{xs[i], y0}, {xs[i + 1], y1}});
  }
  return out;
}

/// Area of the union of rectangles (sweep over x with a covered-length tree on y).
inline Area union_area(std::span<const Rect> rects) {
  std::vector<Coord> ys;
  ys.reserve(rects.size() * 2);
  for (const Rect& r : rects)
    if (!r.degenerate()) {
      ys.push_back(r.lo.y);
      ys.push_back(r.hi.y);
    }
  if (ys.empty()) return 0;
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const std::size_t m = ys.size() - 1;

  struct Event {
    Coord x;
    int delta;
    std::size_t ylo, yhi;
  };
  std::vector<Event> events;
  events.reserve(rects.size() * 2);
  for (const Rect& r : rects) {
    if (r.degenerate()) continue;
    const auto lo = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), r.lo.y) - ys.begin());
    const auto hi = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), r.hi.y) - ys.begin());
    events.push_back({r.lo.x, +1, lo, hi});
    events.push_back({r.hi.x, -1, lo, hi});
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });

  std::vector<int> cover(4 * m, 0);
  std::vector<Coord> len(4 * m, 0);
  auto update = [&](auto&& self, std::size_t node, std::size_t l, std::size_t r, std::size_t ql,
                    std::size_t qr, int d) -> void {
    if (qr <= l || r <= ql) return;
    if (ql <= l && r <= qr) {
      cover[node] += d;
    } else {
      const std::size_t mid = (l + r) / 2;
      self(self, node * 2, l, mid, ql, qr, d);
      self(self, node * 2 + 1, mid, r, ql, qr, d);
    }
    if (cover[node] > 0)
      len[node] = ys[r] - ys[l];
    else if (r - l == 1)
      len[node] = 0;
    else
      len[node] = len[node * 2] + len[node * 2 + 1];
  };

  Wide total = 0;
  Coord prev_x = events.front().x;
  for (const Event& e : events) {
    total += Wide(len[1]) * Wide(e.x - prev_x);
    prev_x = e.x;
    update(update, 1, 0, m, e.ylo, e.yhi, e.delta);
  }
  return static_cast<Area>(total);
}

namespace detail {

struct FPoint {
  long double x, y;
};

inline long double fcross(FPoint o, FPoint a, FPoint b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Area of the intersection of two counter-clockwise triangles (convex clip).
inline long double convex_overlap(std::vector<FPoint> subject, const std::vector<FPoint>& clip) {
  for (std::size_t i = 0, n = clip.size(); i < n && !subject.empty(); ++i) {
    const FPoint a = clip[i], b = clip[(i + 1) % n];
    std::vector<FPoint> out;
    for (std::size_t j = 0, m = subject.size(); j < m; ++j) {
      const FPoint p = subject[j], q = subject[(j + 1) % m];
      const long double sp = fcross(a, b, p), sq = fcross(a, b, q);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const long double t = sp / (sp - sq);
        out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
    subject = std::move(out);
  }
  long double s = 0;
  for (std::size_t j = 0, m = subject.size(); j < m; ++j)
    s += subject[j].x * subject[(j + 1) % m].y - subject[(j + 1) % m].x * subject[j].y;
  return s / 2;
}

/// General simple-polygon overlap via signed fan triangles: the signed
/// indicator of each ring is a sum of triangle indicators, so the overlap is
/// the signed sum of pairwise convex overlaps.
inline long double fan_overlap(const std::vector<Point>& a, const std::vector<Point>& b) {
  auto fan = [](const std::vector<Point>& ring) {
    std::vector<std::pair<int, std::vector<FPoint>>> tris;
    const Point o = ring.front();
    for (std::size_t i = 1; i + 1 < ring.size(); ++i) {
      const Wide c = cross(o, ring[i], ring[i + 1]);
      if (c == 0) continue;
      std::vector<FPoint> t{{(long double)o.x, (long double)o.y},
                            {(long double)ring[i].x, (long double)ring[i].y},
                            {(long double)ring[i + 1].x, (long double)ring[i + 1].y}};
      if (c < 0) std::swap(t[1], t[2]);
      tris.emplace_back(c > 0 ? 1 : -1, std::move(t));
    }
    return tris;
  };
  const auto ta = fan(a), tb = fan(b);
  long double s = 0;
  for (const auto& [sa, triA] : ta)
    for (const auto& [sb, triB] : tb) s += sa * sb * convex_overlap(triA, triB);
  return s;
}

}  // namespace detail

/// Exact overlap area of two simple polygons. Rectilinear pairs go through an
/// exact rectangle decomposition; other rings use signed triangle clipping and
/// round to the nearest dbu^2.
inline Area clip_intersection_area(const Polygon& a, const Polygon& b) {
  const auto va = detail::dedup_ring(a.vertices), vb = detail::dedup_ring(b.vertices);
  if (va.size() < 3 || vb.size() < 3) return 0;
  const Polygon pa(va), pb(vb);
  if (twice_signed_area(pa) == 0 || twice_signed_area(pb) == 0) return 0;
  validate(pa);
  validate(pb);
  if (!bounding_box(pa).overlaps(bounding_box(pb))) return 0;

  if (is_rectilinear(pa) && is_rectilinear(pb)) {
    const auto ra = decompose_rectilinear(pa), rb = decompose_rectilinear(pb);
    Area s = 0;
    for (const Rect& x : ra)
      for (const Rect& y : rb)
        if (x.overlaps(y)) s += x.intersection(y).area();
    return s;
  }
  long double s = detail::fan_overlap(va, vb);
  if (twice_signed_area(pa) < 0) s = -s;
  if (twice_signed_area(pb) < 0) s = -s;
  return static_cast<Area>(std::llround(std::max<long double>(0, s)));
}

}  // namespace icas::geom
