#pragma once

// Trigger spaces, net blockage and route distance over a LayoutDb.
//
// Every accumulation is integral or rational so results do not depend on the
// number of worker threads; floating point appears only in the final sigma
// values, each computed from integers independently.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "icas/error.hpp"
#include "icas/geom.hpp"
#include "icas/layout.hpp"
#include "icas/rational.hpp"

namespace icas::metrics {

using geom::Area;
using geom::Coord;
using geom::Point;
using geom::Rect;
using layout::LayoutDb;
using layout::PlacementGrid;

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; callers write results into per-index slots.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Trigger spaces

struct TriggerSpace {
  int id = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> sites;  // (col, row), BFS order from the seed
  std::int64_t size = 0;
  Rect bbox;              // in dbu
  std::vector<Rect> runs;  // row-wise maximal runs of sites, in dbu, sorted

  std::pair<std::int64_t, std::int64_t> seed() const { return sites.front(); }
};

struct TriggerSpaceResult {
  std::vector<TriggerSpace> regions;
  std::map<std::int64_t, std::int64_t> histogram;  // size -> count
};

/// Maximal 4-connected regions of empty or filler sites, numbered in scanline
/// order of their first site.
inline TriggerSpaceResult trigger_spaces(const PlacementGrid& grid) {
  TriggerSpaceResult out;
  const std::int64_t W = grid.cols, H = grid.rows;
  std::vector<int> label(static_cast<std::size_t>(W * H), -1);
  std::vector<std::int64_t> queue;
  for (std::int64_t r = 0; r < H; ++r)
    for (std::int64_t c = 0; c < W; ++c) {
      const std::size_t k0 = static_cast<std::size_t>(r * W + c);
      if (label[k0] >= 0 || !grid.open(c, r)) continue;
      TriggerSpace ts;
      ts.id = static_cast<int>(out.regions.size());
      queue.assign(1, static_cast<std::int64_t>(k0));
      label[k0] = ts.id;
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::int64_t k = queue[qi], x = k % W, y = k / W;
        ts.sites.emplace_back(x, y);
        const std::int64_t nx[] = {x + 1, x - 1, x, x}, ny[] = {y, y, y + 1, y - 1};
        for (int d = 0; d < 4; ++d) {
          if (nx[d] < 0 || ny[d] < 0 || nx[d] >= W || ny[d] >= H) continue;
          const std::size_t nk = static_cast<std::size_t>(ny[d] * W + nx[d]);
          if (label[nk] >= 0 || !grid.open(nx[d], ny[d])) continue;
          label[nk] = ts.id;
          queue.push_back(static_cast<std::int64_t>(nk));
        }
      }
      ts.size = static_cast<std::int64_t>(ts.sites.size());
      out.regions.push_back(std::move(ts));
    }
  // Row runs and bounding boxes from a single scan.
  for (std::int64_t r = 0; r < H; ++r)
    for (std::int64_t c = 0; c < W;) {
      const int id = label[static_cast<std::size_t>(r * W + c)];
      std::int64_t e = c + 1;
      while (e < W && label[static_cast<std::size_t>(r * W + e)] == id) ++e;
      if (id >= 0) {
        TriggerSpace& ts = out.regions[static_cast<std::size_t>(id)];
        const Rect run{grid.site_rect(c, r).lo, grid.site_rect(e - 1, r).hi};
        ts.bbox = ts.runs.empty() ? run : ts.bbox.bounding_union(run);
        ts.runs.push_back(run);
      }
      c = e;
    }
  for (const TriggerSpace& ts : out.regions) ++out.histogram[ts.size];
  return out;
}

// ---------------------------------------------------------------------------
// Net blockage

struct BlockageConfig {
  Coord g = 1;                 // perimeter sampling granularity
  std::optional<Coord> d;      // extension distance; default is the pitch of each segment's layer
  unsigned threads = 1;
};

/// Equally spaced open attachment points: start + i * step for i in [0, count).
struct OpenRun {
  int layer = 0;
  Point start;
  Point step;
  std::int64_t count = 1;

  Point at(std::int64_t i) const { return {start.x + i * step.x, start.y + i * step.y}; }
  friend bool operator==(const OpenRun&, const OpenRun&) = default;
};

struct NetBlockage {
  std::string net;
  Rational same_layer;
  Rational adjacent_layer;
  Rational overall;
  Coord perimeter = 0;
  Coord perimeter_blocked = 0;
  Area area = 0;          // adjacent-layer denominator (footprint area per adjacent layer)
  Area area_blocked = 0;
  std::vector<OpenRun> open_points;

  std::int64_t open_point_count() const {
    std::int64_t n = 0;
    for (const OpenRun& r : open_points) n += r.count;
    return n;
  }
};

struct DesignBlockage {
  Rational same_layer;
  Rational adjacent_layer;
  Rational overall;
};

struct BlockageResult {
  std::vector<NetBlockage> per_net;  // sorted by net name
  DesignBlockage design;
  std::vector<std::string> warnings;

  const NetBlockage* find(const std::string& n) const {
    for (const NetBlockage& b : per_net)
      if (b.net == n) return &b;
    return nullptr;
  }
};

inline Rational weighted_overall(const Rational& same, const Rational& adjacent) {
  return Rational(2, 3) * same + Rational(1, 3) * adjacent;
}

namespace detail {

struct Interval {
  std::int64_t lo, hi;  // closed
};

inline std::vector<Interval> merge(std::vector<Interval> v) {
  std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& i : v) {
    if (i.lo > i.hi) continue;
    if (!out.empty() && i.lo <= out.back().hi + 1) out.back().hi = std::max(out.back().hi, i.hi);
    else out.push_back(i);
  }
  return out;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }
inline std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

struct PerimeterResult {
  Coord perimeter = 0;
  Coord blocked = 0;
  std::vector<OpenRun> open;
};

/// Samples the loop around `net_rect` expanded by d at spacing g. A sample is
/// blocked when a foreign rect contains it (boundary included). Open stretches
/// narrower than `min_open` are then counted as blocked.
inline PerimeterResult sample_perimeter(const Rect& net_rect, Coord d, Coord g, Coord min_open,
                                        const std::vector<Rect>& foreign, int layer) {
  PerimeterResult res;
  const Rect loop = net_rect.expanded(d);
  const Coord W = loop.width(), H = loop.height();
  const Coord P = 2 * (W + H);
  res.perimeter = P;
  // Sides in counter-clockwise order from the lower-left corner; t is arc length.
  struct Side {
    Point start;
    Point dir;
    Coord len;
    Coord t0;
  };
  const Side sides[4] = {{loop.lo, {1, 0}, W, 0},
                         {{loop.hi.x, loop.lo.y}, {0, 1}, H, W},
                         {loop.hi, {-1, 0}, W, W + H},
                         {{loop.lo.x, loop.hi.y}, {0, -1}, H, 2 * W + H}};
  const std::int64_t K = (P + g - 1) / g;  // samples at t = k*g, k in [0, K)
  std::vector<Interval> blocked;
  for (const Side& s : sides) {
    const Point end{s.start.x + s.dir.x * s.len, s.start.y + s.dir.y * s.len};
    const Rect seg = Rect::from_corners(s.start, end);
    for (const Rect& f : foreign) {
      if (!f.touches(seg)) continue;
      const Rect x = f.intersection(seg);
      // Arc-length range covered on this side.
      Coord a, b;
      if (s.dir.x) {
        a = s.dir.x > 0 ? x.lo.x - s.start.x : s.start.x - x.hi.x;
        b = s.dir.x > 0 ? x.hi.x - s.start.x : s.start.x - x.lo.x;
      } else {
        a = s.dir.y > 0 ? x.lo.y - s.start.y : s.start.y - x.hi.y;
        b = s.dir.y > 0 ? x.hi.y - s.start.y : s.start.y - x.lo.y;
      }
      const std::int64_t klo = ceil_div(s.t0 + a, g), khi = std::min<std::int64_t>(floor_div(s.t0 + b, g), K - 1);
      if (klo <= khi) blocked.push_back({klo, khi});
    }
  }
  blocked = merge(std::move(blocked));
  auto weight = [&](std::int64_t lo, std::int64_t hi) -> Coord {  // total arc length of samples lo..hi
    if (lo > hi) return 0;
    Coord w = (hi - lo + 1) * g;
    if (hi == K - 1) w -= K * g - P;  // last sample is shorter
    return w;
  };
  // Open gaps between blocked intervals (cyclic).
  std::vector<Interval> open;
  if (blocked.empty()) {
    open.push_back({0, K - 1});
  } else {
    for (std::size_t i = 0; i + 1 < blocked.size(); ++i) open.push_back({blocked[i].hi + 1, blocked[i + 1].lo - 1});
    const Interval head{0, blocked.front().lo - 1}, tail{blocked.back().hi + 1, K - 1};
    open.push_back(tail);
    open.push_back(head);
  }
  Coord blocked_w = 0;
  for (const Interval& b : blocked) blocked_w += weight(b.lo, b.hi);
  // The head and tail gaps are one cyclic stretch when both touch the seam.
  auto stretch_weight = [&](std::size_t i) -> Coord {
    if (blocked.empty()) return weight(open[i].lo, open[i].hi);
    const std::size_t n = open.size();
    if (i >= n - 2) return weight(open[n - 2].lo, open[n - 2].hi) + weight(open[n - 1].lo, open[n - 1].hi);
    return weight(open[i].lo, open[i].hi);
  };
  auto point_at = [&](std::int64_t k) -> std::pair<const Side*, Coord> {
    const Coord t = k * g;
    for (int s = 3; s >= 0; --s)
      if (t >= sides[s].t0) return {&sides[s], t - sides[s].t0};
    return {&sides[0], t};
  };
  for (std::size_t i = 0; i < open.size(); ++i) {
    const Interval o = open[i];
    if (o.lo > o.hi) continue;
    const Coord w = stretch_weight(i);
    if (!blocked.empty() && w < min_open) {
      blocked_w += weight(o.lo, o.hi);
      continue;
    }
    // Emit the samples lo..hi split at corners.
    for (std::int64_t k = o.lo; k <= o.hi;) {
      auto [side, off] = point_at(k);
      const Coord remaining_on_side = side->len - off;  // samples with offset < len stay on this side
      const std::int64_t n_side = std::min<std::int64_t>(o.hi - k + 1, (remaining_on_side + g - 1) / g);
      const Point p{side->start.x + side->dir.x * off, side->start.y + side->dir.y * off};
      res.open.push_back({layer, p, {side->dir.x * g, side->dir.y * g}, std::max<std::int64_t>(n_side, 1)});
      k += std::max<std::int64_t>(n_side, 1);
    }
  }
  res.blocked = blocked_w;
  return res;
}

struct AreaResult {
  Area area = 0;
  Area blocked = 0;
  std::vector<OpenRun> open;
};

/// Blocked part of `footprint` on an adjacent layer: the union of foreign
/// shapes clipped to it, plus free patches too small to hold a w×h via cut.
inline AreaResult project_area(const Rect& footprint, const std::vector<Rect>& foreign, Coord cut_w, Coord cut_h,
                               int layer) {
  AreaResult res;
  res.area = footprint.area();
  std::vector<Rect> clipped;
  for (const Rect& f : foreign)
    if (f.overlaps(footprint)) clipped.push_back(f.intersection(footprint));
  std::vector<Coord> xs{footprint.lo.x, footprint.hi.x}, ys{footprint.lo.y, footprint.hi.y};
  for (const Rect& c : clipped) {
    xs.push_back(c.lo.x);
    xs.push_back(c.hi.x);
    ys.push_back(c.lo.y);
    ys.push_back(c.hi.y);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  const std::size_t nx = xs.size() - 1, ny = ys.size() - 1;
  auto xi = [&](Coord v) { return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), v) - xs.begin()); };
  auto yi = [&](Coord v) { return static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), v) - ys.begin()); };
  // Coverage by 2-D difference array.
  std::vector<std::int32_t> diff((nx + 1) * (ny + 1), 0);
  auto D = [&](std::size_t i, std::size_t j) -> std::int32_t& { return diff[j * (nx + 1) + i]; };
  for (const Rect& c : clipped) {
    const std::size_t i0 = xi(c.lo.x), i1 = xi(c.hi.x), j0 = yi(c.lo.y), j1 = yi(c.hi.y);
    ++D(i0, j0);
    --D(i1, j0);
    --D(i0, j1);
    ++D(i1, j1);
  }
  std::vector<std::uint8_t> covered(nx * ny, 0);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      if (i) D(i, j) += D(i - 1, j);
      if (j) D(i, j) += D(i, j - 1);
      if (i && j) D(i, j) -= D(i - 1, j - 1);
      covered[j * nx + i] = D(i, j) > 0;
    }
  auto cell_area = [&](std::size_t i, std::size_t j) { return (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]); };
  // Free patches (4-connected over cells sharing an edge).
  std::vector<int> patch(nx * ny, -1);
  std::vector<std::vector<std::size_t>> patches;
  for (std::size_t k0 = 0; k0 < nx * ny; ++k0) {
    if (covered[k0] || patch[k0] >= 0) continue;
    const int id = static_cast<int>(patches.size());
    patches.emplace_back();
    auto& cells = patches.back();
    cells.push_back(k0);
    patch[k0] = id;
    for (std::size_t q = 0; q < cells.size(); ++q) {
      const std::size_t k = cells[q], i = k % nx, j = k / nx;
      const std::size_t nb[4] = {i + 1 < nx ? k + 1 : SIZE_MAX, i > 0 ? k - 1 : SIZE_MAX, j + 1 < ny ? k + nx : SIZE_MAX,
                                 j > 0 ? k - nx : SIZE_MAX};
      for (std::size_t n : nb)
        if (n != SIZE_MAX && !covered[n] && patch[n] < 0) {
          patch[n] = id;
          cells.push_back(n);
        }
    }
  }
  // A via fits somewhere in a patch iff it fits with its lower-left on a grid
  // corner (slide it left, then down, until it meets an edge).
  std::vector<std::int64_t> pre((nx + 1) * (ny + 1), 0);  // prefix count of covered cells
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i)
      pre[(j + 1) * (nx + 1) + i + 1] =
          covered[j * nx + i] + pre[j * (nx + 1) + i + 1] + pre[(j + 1) * (nx + 1) + i] - pre[j * (nx + 1) + i];
  auto covered_in = [&](std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1) {  // cells [i0,i1)×[j0,j1)
    return pre[j1 * (nx + 1) + i1] - pre[j0 * (nx + 1) + i1] - pre[j1 * (nx + 1) + i0] + pre[j0 * (nx + 1) + i0];
  };
  std::vector<char> fits(patches.size(), 0);
  const bool has_cut = cut_w > 0 && cut_h > 0;
  if (!has_cut) std::fill(fits.begin(), fits.end(), 1);
  const std::pair<Coord, Coord> dims[2] = {{cut_w, cut_h}, {cut_h, cut_w}};
  for (std::size_t j = 0; has_cut && j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const int id = patch[j * nx + i];
      if (id < 0 || fits[static_cast<std::size_t>(id)]) continue;
      for (auto [w, h] : dims) {
        const Coord x1 = xs[i] + w, y1 = ys[j] + h;
        if (x1 > footprint.hi.x || y1 > footprint.hi.y) continue;
        const std::size_t ie = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x1) - xs.begin());
        const std::size_t je = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), y1) - ys.begin());
        if (covered_in(i, ie, j, je) == 0) {
          fits[static_cast<std::size_t>(id)] = 1;
          break;
        }
      }
    }
  Area free_area = 0;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    if (!fits[p]) continue;
    __int128 ax = 0, ay = 0, a = 0;
    std::size_t best = patches[p].front();
    Area best_area = -1;
    for (std::size_t k : patches[p]) {
      const std::size_t i = k % nx, j = k / nx;
      const Area ca = cell_area(i, j);
      a += ca;
      ax += __int128(ca) * (xs[i] + xs[i + 1]);
      ay += __int128(ca) * (ys[j] + ys[j + 1]);
      if (ca > best_area) {
        best_area = ca;
        best = k;
      }
    }
    free_area += static_cast<Area>(a);
    // Area centroid, floored; if it falls outside the patch use the centre of its largest cell.
    Point c{static_cast<Coord>(ax / (2 * a)), static_cast<Coord>(ay / (2 * a))};
    bool inside = false;
    {
      const std::size_t ci = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), c.x) - xs.begin());
      const std::size_t cj = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), c.y) - ys.begin());
      for (std::size_t di = 0; di < 2 && !inside; ++di)
        for (std::size_t dj = 0; dj < 2 && !inside; ++dj) {
          if (ci < 1 + di || cj < 1 + dj) continue;
          const std::size_t i = ci - 1 - di, j = cj - 1 - dj;
          if (i >= nx || j >= ny) continue;
          if (patch[j * nx + i] == static_cast<int>(p) && c.x >= xs[i] && c.x <= xs[i + 1] && c.y >= ys[j] &&
              c.y <= ys[j + 1])
            inside = true;
        }
    }
    if (!inside) {
      const std::size_t i = best % nx, j = best / nx;
      c = {(xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2};
    }
    res.open.push_back({layer, c, {0, 0}, 1});
  }
  res.blocked = res.area - free_area;
  return res;
}

/// Cut layer sitting between two stack layers, if any.
inline const lefdef::ViaRule* cut_between(const lefdef::Lef& lef, const lefdef::TechLayer& a, const lefdef::TechLayer& b) {
  const int lo = std::min(a.stack_index, b.stack_index), hi = std::max(a.stack_index, b.stack_index);
  for (const lefdef::TechLayer& l : lef.layers)
    if (l.kind == lefdef::LayerKind::Cut && l.stack_index > lo && l.stack_index < hi)
      if (const lefdef::ViaRule* vr = lef.via_rule(l.name)) return vr;
  return nullptr;
}

inline const lefdef::ViaRule* smallest_cut(const lefdef::Lef& lef) {
  const lefdef::ViaRule* best = nullptr;
  for (const lefdef::ViaRule& v : lef.via_rules)
    if (!best || v.w * v.h < best->w * best->h) best = &v;
  return best;
}

}  // namespace detail

inline NetBlockage net_blockage_one(const LayoutDb& db, const layout::NetGeometry& net, const BlockageConfig& cfg) {
  NetBlockage nb;
  nb.net = net.name;
  const lefdef::Lef& lef = *db.lef;
  Area adj_den = 0, adj_blocked = 0;
  for (const auto& [li, r] : net.wires) {
    const lefdef::TechLayer& L = db.layer(li);
    const Coord d = cfg.d.value_or(L.pitch);
    if (d < 1 || cfg.g < 1) throw MetricError("granularity and extension must be at least 1 dbu");
    const Rect probe = r.expanded(d);
    const auto foreign = db.shapes[static_cast<std::size_t>(li)].foreign(probe, net.owner);
    auto per = detail::sample_perimeter(r, d, cfg.g, L.min_width + L.min_spacing, foreign, li);
    nb.perimeter += per.perimeter;
    nb.perimeter_blocked += per.blocked;
    nb.open_points.insert(nb.open_points.end(), per.open.begin(), per.open.end());

    auto [below, above] = lef.adjacent_layers(L.name);
    for (const lefdef::TechLayer* A : {below, above}) {
      if (!A) continue;
      const int ai = db.layer_index(A->name);
      const lefdef::ViaRule* cut = detail::cut_between(lef, L, *A);
      if (!cut) cut = detail::smallest_cut(lef);
      const auto f = db.shapes[static_cast<std::size_t>(ai)].foreign(r, net.owner);
      auto ar = detail::project_area(r, f, cut ? cut->w : 0, cut ? cut->h : 0, ai);
      adj_den += ar.area;
      adj_blocked += ar.blocked;
      nb.open_points.insert(nb.open_points.end(), ar.open.begin(), ar.open.end());
    }
  }
  nb.area = adj_den;
  nb.area_blocked = adj_blocked;
  nb.same_layer = nb.perimeter ? Rational(nb.perimeter_blocked, nb.perimeter) : Rational(1);
  // With no adjacent layer there is nothing to attach through, which counts as blocked.
  nb.adjacent_layer = adj_den ? Rational(adj_blocked, adj_den) : Rational(1);
  nb.overall = weighted_overall(nb.same_layer, nb.adjacent_layer);
  return nb;
}

inline BlockageResult net_blockage(const LayoutDb& db, const BlockageConfig& cfg = {}) {
  BlockageResult res;
  if (cfg.g < 1 || (cfg.d && *cfg.d < 1)) throw MetricError("granularity and extension must be at least 1 dbu");
  std::vector<const layout::NetGeometry*> nets;
  for (const std::string& n : db.critical_nets) {
    const layout::NetGeometry* g = db.net(n);
    if (!g || g->wires.empty()) {
      res.warnings.push_back("critical net '" + n + "' has no routed geometry; excluded from blockage");
      continue;
    }
    nets.push_back(g);
  }
  res.per_net.resize(nets.size());
  parallel_for(nets.size(), cfg.threads, [&](std::size_t i) { res.per_net[i] = net_blockage_one(db, *nets[i], cfg); });
  Coord p = 0, pb = 0;
  Area a = 0, ab = 0;
  for (const NetBlockage& nb : res.per_net) {
    p += nb.perimeter;
    pb += nb.perimeter_blocked;
    a += nb.area;
    ab += nb.area_blocked;
  }
  res.design.same_layer = p ? Rational(pb, p) : Rational(0);
  res.design.adjacent_layer = a ? Rational(ab, a) : Rational(res.per_net.empty() ? 0 : 1);
  res.design.overall = weighted_overall(res.design.same_layer, res.design.adjacent_layer);
  return res;
}

// ---------------------------------------------------------------------------
// Net length statistics

struct NetLengthStats {
  std::int64_t n = 0;
  __int128 sum = 0;
  __int128 sum_sq = 0;
  std::vector<std::pair<std::string, Coord>> lengths;

  double mean() const { return static_cast<double>(static_cast<long double>(sum) / n); }
  double stddev() const {
    const __int128 v = __int128(n) * sum_sq - sum * sum;  // n^2 * variance
    return static_cast<double>(std::sqrt(static_cast<long double>(v)) / n);
  }
  /// (m - mean) / stddev, with the zero-variance case mapped to 0 or +infinity.
  double sigma(Coord m) const {
    const __int128 num = __int128(n) * m - sum;
    const __int128 v = __int128(n) * sum_sq - sum * sum;
    if (v == 0) return num == 0 ? 0.0 : (num > 0 ? std::numeric_limits<double>::infinity()
                                                : -std::numeric_limits<double>::infinity());
    return static_cast<double>(static_cast<long double>(num) / std::sqrt(static_cast<long double>(v)));
  }
};

inline NetLengthStats net_length_stats(const LayoutDb& db, bool include_special = false) {
  NetLengthStats s;
  for (const layout::NetGeometry& g : db.nets) {
    if (g.special && !include_special) continue;
    if (g.length <= 0) continue;
    s.lengths.emplace_back(g.name, g.length);
  }
  std::sort(s.lengths.begin(), s.lengths.end());
  for (const auto& [n, l] : s.lengths) {
    ++s.n;
    s.sum += l;
    s.sum_sq += __int128(l) * l;
  }
  if (s.n < 2) throw MetricError("net-length statistics need at least two routed nets, found " + std::to_string(s.n));
  return s;
}

// ---------------------------------------------------------------------------
// Route distance

struct HeatmapConfig {
  std::vector<std::int64_t> size_edges;  // ascending lower edges; empty = powers of two
  std::vector<double> sigma_edges{0.5, 1.0, 2.0, 3.0};  // upper-closed bin boundaries
};

struct RouteEntry {
  std::string net;
  int region = 0;
  Coord manhattan = 0;
  double sigma = 0;
};

struct Heatmap {
  std::vector<std::int64_t> size_edges;  // column c covers [edges[c], edges[c+1])
  std::vector<double> sigma_edges;
  std::vector<std::vector<std::int64_t>> counts;  // [column][sigma bin]
  std::vector<std::vector<double>> fractions;

  std::string size_label(std::size_t c) const {
    return c + 1 < size_edges.size() ? "[" + std::to_string(size_edges[c]) + "," + std::to_string(size_edges[c + 1]) + ")"
                                     : ">=" + std::to_string(size_edges[c]);
  }
  std::string sigma_label(std::size_t b) const {
    auto f = [](double v) {
      std::string s = std::to_string(v);
      while (s.back() == '0') s.pop_back();
      if (s.back() == '.') s.pop_back();
      return s;
    };
    if (b == 0) return "<=" + f(sigma_edges[0]);
    if (b == sigma_edges.size()) return ">" + f(sigma_edges.back());
    return "(" + f(sigma_edges[b - 1]) + "," + f(sigma_edges[b]) + "]";
  }
};

struct RouteDistanceMatrix {
  std::vector<RouteEntry> entries;  // sorted by (net, region)
  Heatmap heatmap;
  std::vector<std::string> warnings;

  const RouteEntry* find(const std::string& net, int region) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair{net, region}, [](const RouteEntry& e, const auto& k) {
      return std::tie(e.net, e.region) < std::tie(k.first, k.second);
    });
    return it != entries.end() && it->net == net && it->region == region ? &*it : nullptr;
  }
};

/// Minimum L1 distance from any point of the run to the closed rect.
inline Coord run_rect_distance(const OpenRun& run, const Rect& r) {
  auto eval = [&](std::int64_t i) {
    return geom::manhattan_rect_distance(geom::point_rect(run.at(i)), r);
  };
  if (run.count <= 1 || (run.step.x == 0 && run.step.y == 0)) return eval(0);
  const bool horiz = run.step.x != 0;
  const Coord s = horiz ? run.step.x : run.step.y;
  const Coord p0 = horiz ? run.start.x : run.start.y;
  const Coord lo = horiz ? r.lo.x : r.lo.y, hi = horiz ? r.hi.x : r.hi.y;
  Coord best = std::numeric_limits<Coord>::max();
  for (Coord target : {lo, hi}) {
    const std::int64_t base = detail::floor_div(target - p0, s);
    for (std::int64_t i : {base - 1, base, base + 1}) best = std::min(best, eval(std::clamp<std::int64_t>(i, 0, run.count - 1)));
  }
  best = std::min({best, eval(0), eval(run.count - 1)});
  return best;
}

inline Coord net_region_distance(const NetBlockage& nb, const TriggerSpace& ts) {
  Coord best = std::numeric_limits<Coord>::max();
  for (const OpenRun& run : nb.open_points) {
    // Cheap lower bound against the region's bounding box first.
    if (run_rect_distance(run, ts.bbox) >= best) continue;
    for (const Rect& r : ts.runs) {
      best = std::min(best, run_rect_distance(run, r));
      if (best == 0) return 0;
    }
  }
  return best;
}

inline std::vector<std::int64_t> default_size_edges(std::int64_t max_size) {
  std::vector<std::int64_t> e{1};
  while (e.back() * 2 <= std::max<std::int64_t>(max_size, 1)) e.push_back(e.back() * 2);
  return e;
}

inline std::size_t sigma_bin(double sigma, const std::vector<double>& edges) {
  for (std::size_t b = 0; b < edges.size(); ++b)
    if (sigma <= edges[b]) return b;
  return edges.size();  // includes +infinity
}

inline std::size_t size_bin(std::int64_t size, const std::vector<std::int64_t>& edges) {
  const auto it = std::upper_bound(edges.begin(), edges.end(), size);
  return it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin() - 1);
}

inline RouteDistanceMatrix route_distance(const TriggerSpaceResult& regions, const BlockageResult& blockage,
                                          const NetLengthStats& stats, const HeatmapConfig& hcfg = {},
                                          unsigned threads = 1) {
  RouteDistanceMatrix m;
  std::vector<const NetBlockage*> nets;
  for (const NetBlockage& nb : blockage.per_net)
    if (nb.overall < Rational(1)) nets.push_back(&nb);
  std::sort(nets.begin(), nets.end(), [](auto* a, auto* b) { return a->net < b->net; });
  if (nets.empty()) m.warnings.push_back("no unblocked critical nets; route-distance matrix is empty");
  const std::size_t R = regions.regions.size();
  m.entries.resize(nets.size() * R);
  parallel_for(nets.size(), threads, [&](std::size_t i) {
    for (std::size_t r = 0; r < R; ++r) {
      const Coord d = net_region_distance(*nets[i], regions.regions[r]);
      m.entries[i * R + r] = {nets[i]->net, static_cast<int>(r), d, stats.sigma(d)};
    }
  });

  Heatmap& h = m.heatmap;
  std::int64_t max_size = 1;
  for (const TriggerSpace& ts : regions.regions) max_size = std::max(max_size, ts.size);
  h.size_edges = hcfg.size_edges.empty() ? default_size_edges(max_size) : hcfg.size_edges;
  h.sigma_edges = hcfg.sigma_edges;
  h.counts.assign(h.size_edges.size(), std::vector<std::int64_t>(h.sigma_edges.size() + 1, 0));
  for (const RouteEntry& e : m.entries)
    ++h.counts[size_bin(regions.regions[static_cast<std::size_t>(e.region)].size, h.size_edges)]
              [sigma_bin(e.sigma, h.sigma_edges)];
  h.fractions.assign(h.counts.size(), std::vector<double>(h.sigma_edges.size() + 1, 0.0));
  for (std::size_t c = 0; c < h.counts.size(); ++c) {
    const std::int64_t total = std::accumulate(h.counts[c].begin(), h.counts[c].end(), std::int64_t{0});
    if (!total) continue;
    for (std::size_t b = 0; b < h.counts[c].size(); ++b)
      h.fractions[c][b] = static_cast<double>(h.counts[c][b]) / static_cast<double>(total);
  }
  return m;
}

}  // namespace icas::metrics
