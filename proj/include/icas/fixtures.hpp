#pragma once

// Deterministic synthetic layouts with planted, known-answer features.
//
// A fixture is a LEF/DEF/netlist/GDSII set on a fixed four-metal technology.
// Planted open regions are fenced by one-site tap cells so their size is
// exact. Planted nets are single metal3 wires whose surroundings follow a
// recipe, which fixes their blockage in closed form. The expected record is
// computed here from the generator's own bookkeeping, without the metrics
// code, so tests can hold the two against each other.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icas/error.hpp"
#include "icas/gdsii.hpp"
#include "icas/geom.hpp"
#include "icas/layout.hpp"
#include "icas/lefdef.hpp"
#include "icas/rational.hpp"

namespace icas::fixtures {

using geom::Coord;
using geom::Point;
using geom::Rect;

inline const char* technology_lef() {
  return R"(VERSION 5.8 ;
BUSBITCHARS "[]" ;
DIVIDERCHAR "/" ;
UNITS
  DATABASE MICRONS 2000 ;
END UNITS
MANUFACTURINGGRID 0.0005 ;

SITE core
  CLASS CORE ;
  SIZE 0.19 BY 1.71 ;
END core

LAYER poly
  TYPE MASTERSLICE ;
END poly
LAYER metal1
  TYPE ROUTING ;
  DIRECTION HORIZONTAL ;
  PITCH 0.19 ;
  WIDTH 0.07 ;
  SPACING 0.065 ;
END metal1
LAYER via1
  TYPE CUT ;
  WIDTH 0.065 ;
END via1
LAYER metal2
  TYPE ROUTING ;
  DIRECTION VERTICAL ;
  PITCH 0.19 ;
  WIDTH 0.07 ;
  SPACING 0.065 ;
END metal2
LAYER via2
  TYPE CUT ;
  WIDTH 0.07 ;
END via2
LAYER metal3
  TYPE ROUTING ;
  DIRECTION HORIZONTAL ;
  PITCH 0.28 ;
  WIDTH 0.14 ;
  SPACING 0.14 ;
END metal3
LAYER via3
  TYPE CUT ;
  WIDTH 0.12 ;
END via3
LAYER metal4
  TYPE ROUTING ;
  DIRECTION VERTICAL ;
  PITCH 0.28 ;
  WIDTH 0.14 ;
  SPACING 0.14 ;
END metal4

VIA via1_0 DEFAULT
  LAYER metal1 ;
    RECT -0.035 -0.035 0.035 0.035 ;
  LAYER via1 ;
    RECT -0.0325 -0.0325 0.0325 0.0325 ;
  LAYER metal2 ;
    RECT -0.035 -0.035 0.035 0.035 ;
END via1_0
VIA via2_0 DEFAULT
  LAYER metal2 ;
    RECT -0.035 -0.035 0.035 0.035 ;
  LAYER via2 ;
    RECT -0.035 -0.035 0.035 0.035 ;
  LAYER metal3 ;
    RECT -0.07 -0.07 0.07 0.07 ;
END via2_0
VIA via3_0 DEFAULT
  LAYER metal3 ;
    RECT -0.07 -0.07 0.07 0.07 ;
  LAYER via3 ;
    RECT -0.06 -0.06 0.06 0.06 ;
  LAYER metal4 ;
    RECT -0.07 -0.07 0.07 0.07 ;
END via3_0

MACRO TAP1
  CLASS CORE ;
  SIZE 0.19 BY 1.71 ;
  SITE core ;
  OBS
    LAYER metal1 ;
      RECT 0.06 0.6 0.13 1.1 ;
  END
END TAP1
MACRO INV
  CLASS CORE ;
  SIZE 0.38 BY 1.71 ;
  SITE core ;
  PIN A
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.05 0.6 0.12 1.1 ;
    END
  END A
  PIN Y
    DIRECTION OUTPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.26 0.6 0.33 1.1 ;
    END
  END Y
  OBS
    LAYER metal1 ;
      RECT 0.05 0.2 0.33 0.27 ;
  END
END INV
MACRO BUF
  CLASS CORE ;
  SIZE 0.57 BY 1.71 ;
  SITE core ;
  PIN A
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.05 0.6 0.12 1.1 ;
    END
  END A
  PIN Y
    DIRECTION OUTPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.45 0.6 0.52 1.1 ;
    END
  END Y
  OBS
    LAYER metal1 ;
      RECT 0.05 0.2 0.52 0.27 ;
  END
END BUF
MACRO NAND2
  CLASS CORE ;
  SIZE 0.76 BY 1.71 ;
  SITE core ;
  PIN A
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.05 0.6 0.12 1.1 ;
    END
  END A
  PIN B
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.24 0.6 0.31 1.1 ;
    END
  END B
  PIN Y
    DIRECTION OUTPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.64 0.6 0.71 1.1 ;
    END
  END Y
  OBS
    LAYER metal1 ;
      RECT 0.05 0.2 0.71 0.27 ;
  END
END NAND2
MACRO DFF
  CLASS CORE ;
  SIZE 1.52 BY 1.71 ;
  SITE core ;
  PIN D
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.05 0.6 0.12 1.1 ;
    END
  END D
  PIN CLK
    DIRECTION INPUT ;
    PORT
      LAYER metal1 ;
        RECT 0.43 0.6 0.5 1.1 ;
    END
  END CLK
  PIN Q
    DIRECTION OUTPUT ;
    PORT
      LAYER metal1 ;
        RECT 1.4 0.6 1.47 1.1 ;
    END
  END Q
  OBS
    LAYER metal1 ;
      RECT 0.05 0.2 1.47 0.27 ;
      RECT 0.62 1.3 1.28 1.37 ;
  END
END DFF
MACRO BISA1
  CLASS CORE ;
  SIZE 0.19 BY 1.71 ;
  SITE core ;
  OBS
    LAYER metal1 ;
      RECT 0.06 0.2 0.13 0.27 ;
  END
END BISA1
MACRO FILL1
  CLASS CORE ;
  SIZE 0.19 BY 1.71 ;
  SITE core ;
END FILL1
MACRO FILL2
  CLASS CORE ;
  SIZE 0.38 BY 1.71 ;
  SITE core ;
END FILL2
MACRO DECAP4
  CLASS CORE ;
  SIZE 0.76 BY 1.71 ;
  SITE core ;
END DECAP4

END LIBRARY
)";
}

/// The four attacks of the defensive-coverage set, as an attack file.
inline const char* reference_attacks() {
  return "attack A2 Analog\ncells 2\nsites 20\ntiming_critical false\n\n"
         "attack A2 Digital\ncells 91\nsites 1444\ntiming_critical true\n\n"
         "attack Privilege Escalation\ncells 25\nsites 342\ntiming_critical true\n\n"
         "attack Key Leak\ncells 187\nsites 2553\ntiming_critical true\n";
}

/// GDSII layer number for each LEF layer (datatype 0): 10 + stack position.
/// With `only` non-empty, layers outside it are left out.
inline std::string layer_map(const lefdef::Lef& lef, const std::set<std::string>& only = {}) {
  std::ostringstream o;
  o << "# lef-layer purpose gds-layer gds-datatype\n";
  for (std::size_t i = 0; i < lef.layers.size(); ++i)
    if (only.empty() || only.count(lef.layers[i].name)) o << lef.layers[i].name << " drawing " << 10 + i << " 0\n";
  return o.str();
}

enum class Recipe { None, Ring, CoverAbove, Full };

inline const char* recipe_name(Recipe r) {
  switch (r) {
    case Recipe::None: return "none";
    case Recipe::Ring: return "ring";
    case Recipe::CoverAbove: return "cover-above";
    case Recipe::Full: return "full";
  }
  return "?";
}

inline Recipe parse_recipe(std::string_view s) {
  for (Recipe r : {Recipe::None, Recipe::Ring, Recipe::CoverAbove, Recipe::Full})
    if (s == recipe_name(r)) return r;
  throw Error("unknown obstruction recipe '" + std::string(s) + "'");
}

/// Blockage fractions (same layer, adjacent layers) a recipe produces on metal3.
inline std::pair<Rational, Rational> recipe_blockage(Recipe r) {
  switch (r) {
    case Recipe::None: return {Rational(0), Rational(0)};
    case Recipe::Ring: return {Rational(1), Rational(0)};
    case Recipe::CoverAbove: return {Rational(0), Rational(1, 2)};
    case Recipe::Full: return {Rational(1), Rational(1)};
  }
  return {Rational(0), Rational(0)};
}

struct PlantedRegion {
  std::int64_t size = 0;
  std::int64_t col = 0;  // anchor: lower-left site
  std::int64_t row = 0;
  std::int64_t width = 0;  // sites per row; 0 picks ceil(sqrt(size))
};

struct PlantedNet {
  std::string name;
  Point from;  // metal3 centreline, dbu
  Point to;
  Recipe recipe = Recipe::None;
  std::string driver;  // planted net feeding this one through a BUF; empty for a primary input
};

struct FixtureSpec {
  std::uint64_t seed = 1;
  std::int64_t cols = 64;
  std::int64_t rows = 32;
  double density = 0.6;         // target fraction of sites holding non-filler cells
  double filler_ratio = 0.2;    // fraction of the remaining empty sites given filler cells
  std::vector<PlantedRegion> regions;
  std::vector<PlantedNet> nets;
  double fill_fraction = 0.0;   // directed filling around critical nets
  std::int64_t random_nets = 50;
  Coord max_span = 20000;       // random-net extent per axis, dbu
  int depth = 2;                // fan-in depth assumed by the expected record
  std::string root_prefix = "sec_";
  std::string design = "fixture";
};

struct ExpectedNet {
  std::string name;
  Recipe recipe = Recipe::None;
  int depth = 0;
  Rational same_layer;
  Rational adjacent_layer;
  Rational overall;
  Coord length = 0;
};

struct Expected {
  std::uint64_t seed = 0;
  int depth = 2;
  std::vector<std::int64_t> planted_sizes;
  std::map<std::int64_t, std::int64_t> histogram;
  std::int64_t total_sites = 0;
  std::int64_t occupied_sites = 0;
  std::int64_t filler_sites = 0;
  std::int64_t regular_nets = 0;
  std::int64_t polygons = 0;
  std::vector<ExpectedNet> critical;  // sorted by name
  double mean_length = 0;
  double stddev_length = 0;
  std::vector<std::pair<std::string, std::int64_t>> viable;  // per attack of reference_attacks(), in order
};

struct Fixture {
  std::string lef;
  std::string def;
  std::string netlist;
  std::string layermap;
  std::string attacks;
  std::vector<std::uint8_t> gds;
  Expected expected;
};

// ---------------------------------------------------------------------------
// Directed filling

/// Site-unit Manhattan distance from (c, r) to the sites a rect overlaps.
inline std::int64_t site_distance(std::int64_t c, std::int64_t r, const Rect& rect, const layout::PlacementGrid& g) {
  auto fdiv = [](Coord a, Coord b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); };
  const std::int64_t c0 = fdiv(rect.lo.x - g.origin.x, g.site_w);
  const std::int64_t c1 = std::max(c0, -fdiv(-(rect.hi.x - g.origin.x), g.site_w) - 1);
  const std::int64_t r0 = fdiv(rect.lo.y - g.origin.y, g.site_h);
  const std::int64_t r1 = std::max(r0, -fdiv(-(rect.hi.y - g.origin.y), g.site_h) - 1);
  const std::int64_t dc = c < c0 ? c0 - c : (c > c1 ? c - c1 : 0);
  const std::int64_t dr = r < r0 ? r0 - r : (r > r1 ? r - r1 : 0);
  return dc + dr;
}

/// The floor(fraction * #open) open sites nearest to any of `rects`, ties in scanline order.
inline std::vector<std::pair<std::int64_t, std::int64_t>> nearest_open_sites(const layout::PlacementGrid& g,
                                                                             const std::vector<Rect>& rects,
                                                                             double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("fill fraction must lie in [0, 1]");
  struct Cand {
    std::int64_t dist, row, col;
  };
  std::vector<Cand> cands;
  for (std::int64_t r = 0; r < g.rows; ++r)
    for (std::int64_t c = 0; c < g.cols; ++c) {
      if (!g.open(c, r)) continue;
      std::int64_t best = std::numeric_limits<std::int64_t>::max();
      for (const Rect& rect : rects) best = std::min(best, site_distance(c, r, rect, g));
      cands.push_back({best, r, c});
    }
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(cands.size())));
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.dist < b.dist; });
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(cands[i].col, cands[i].row);
  return out;
}

namespace detail {

/// Puts `macro` on each chosen site, dropping filler cells that overlap a chosen site.
inline void fill_sites(lefdef::FloorplanDef& def, const lefdef::Lef& lef, const layout::PlacementGrid& g,
                       const std::vector<std::pair<std::int64_t, std::int64_t>>& sites, const std::string& macro,
                       const std::vector<std::string>& filler_prefixes) {
  const lefdef::Macro* m = lef.macro(macro);
  if (!m || m->w != g.site_w || m->h != g.site_h) throw Error("fill macro '" + macro + "' must be one site");
  if (layout::has_prefix(macro, filler_prefixes)) throw Error("fill macro '" + macro + "' would count as a filler");
  std::set<std::pair<std::int64_t, std::int64_t>> chosen(sites.begin(), sites.end());
  std::vector<lefdef::Component> kept;
  for (lefdef::Component& c : def.components) {
    const lefdef::Macro* cm = lef.macro(c.macro);
    bool drop = false;
    if (c.placed && cm && layout::has_prefix(c.macro, filler_prefixes)) {
      const std::int64_t c0 = (c.location.x - g.origin.x) / g.site_w, r0 = (c.location.y - g.origin.y) / g.site_h;
      const std::int64_t span = (lefdef::orient_swaps_axes(c.orient) ? cm->h : cm->w) / g.site_w;
      for (std::int64_t k = 0; k < span; ++k) drop = drop || chosen.count({c0 + k, r0});
    }
    if (!drop) kept.push_back(std::move(c));
  }
  def.components = std::move(kept);
  for (auto [c, r] : sites) {
    const Point at{g.origin.x + c * g.site_w, g.origin.y + r * g.site_h};
    lefdef::Orient o = lefdef::Orient::N;
    for (const lefdef::Row& row : def.rows)
      if (row.origin.y == at.y) o = row.orient;
    def.components.push_back({"bisa_" + std::to_string(c) + "_" + std::to_string(r), macro, at, o, true});
  }
}

}  // namespace detail

/// Occupies the `fraction` of open sites nearest the named nets' geometry with
/// one-site `macro` cells. Fraction 0 returns the input unchanged.
inline std::string apply_filling(const lefdef::Lef& lef, std::string_view def_text,
                                 const std::vector<std::string>& critical_nets, double fraction,
                                 const std::string& macro = "BISA1",
                                 const std::vector<std::string>& filler_prefixes = layout::default_filler_prefixes()) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("fill fraction must lie in [0, 1]");
  if (fraction == 0.0) return std::string(def_text);
  lefdef::FloorplanDef def = lefdef::parse_def(def_text, lef);
  auto shared = std::make_shared<lefdef::Lef>(lef);
  const layout::LayoutDb db = layout::build_layout(shared, def, {}, filler_prefixes);
  std::vector<Rect> rects;
  for (const std::string& n : critical_nets)
    if (const layout::NetGeometry* ng = db.net(n))
      for (const auto& [li, r] : ng->rects) rects.push_back(r);
  if (rects.empty()) throw Error("none of the named nets has routed geometry");
  detail::fill_sites(def, lef, db.grid, nearest_open_sites(db.grid, rects, fraction), macro, filler_prefixes);
  return lefdef::emit_def(def, lef);
}

// ---------------------------------------------------------------------------
// Generator

namespace detail {

enum : std::uint8_t { kFree = 0, kPlanted = 1, kOccupied = 2, kFiller = 3 };

/// Orientation as a GDSII reference: reflect about x, quarter turns, offset from the DEF location.
inline gds::Reference orient_sref(const std::string& cell, lefdef::Orient o, Point at, Coord w, Coord h) {
  using O = lefdef::Orient;
  switch (o) {
    case O::N: return gds::make_sref(cell, at);
    case O::S: return gds::make_sref(cell, {at.x + w, at.y + h}, false, 2);
    case O::W: return gds::make_sref(cell, {at.x + h, at.y}, false, 1);
    case O::E: return gds::make_sref(cell, {at.x, at.y + w}, false, 3);
    case O::FN: return gds::make_sref(cell, {at.x + w, at.y}, true, 2);
    case O::FS: return gds::make_sref(cell, {at.x, at.y + h}, true, 0);
    case O::FW: return gds::make_sref(cell, {at.x + h, at.y + w}, true, 3);
    case O::FE: return gds::make_sref(cell, at, true, 1);
  }
  return gds::make_sref(cell, at);
}

/// Uniform draw in [0, n) from the raw 64-bit stream (std distributions are not portable).
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return n ? rng() % n : 0; }
inline bool chance(std::mt19937_64& rng, double p) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p;
}

struct Builder {
  const FixtureSpec& spec;
  const lefdef::Lef& lef;
  std::mt19937_64 rng;
  Coord sw, sh;
  std::vector<std::uint8_t> state;  // per site
  lefdef::FloorplanDef def;
  std::int64_t cell_seq = 0;

  Builder(const FixtureSpec& s, const lefdef::Lef& l) : spec(s), lef(l), rng(s.seed) {
    const lefdef::Site* site = lef.site("core");
    sw = site->w;
    sh = site->h;
    state.assign(static_cast<std::size_t>(spec.cols * spec.rows), kFree);
  }

  std::uint8_t& at(std::int64_t c, std::int64_t r) { return state[static_cast<std::size_t>(r * spec.cols + c)]; }
  bool inside(std::int64_t c, std::int64_t r) const { return c >= 0 && r >= 0 && c < spec.cols && r < spec.rows; }
  lefdef::Orient row_orient(std::int64_t r) const { return r % 2 ? lefdef::Orient::FS : lefdef::Orient::N; }

  void place(const std::string& name, const std::string& macro, std::int64_t c, std::int64_t r, std::uint8_t mark) {
    const lefdef::Macro* m = lef.macro(macro);
    for (std::int64_t k = 0; k < m->w / sw; ++k) at(c + k, r) = mark;
    def.components.push_back({name, macro, {c * sw, r * sh}, row_orient(r), true});
  }
  std::string next_name() { return "c" + std::to_string(cell_seq++); }

  bool run_free(std::int64_t c, std::int64_t r, std::int64_t n) {
    if (c + n > spec.cols) return false;
    for (std::int64_t k = 0; k < n; ++k)
      if (at(c + k, r) != kFree) return false;
    return true;
  }
};

inline std::vector<std::pair<std::int64_t, std::int64_t>> region_sites(const PlantedRegion& pr) {
  const std::int64_t w = pr.width > 0 ? pr.width : static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(pr.size))));
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (std::int64_t i = 0; i < pr.size; ++i) out.emplace_back(pr.col + i % w, pr.row + i / w);
  return out;
}

/// Open regions of the generator's own occupancy map (breadth-first, 4-connected).
inline std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> open_regions(const std::vector<std::uint8_t>& state,
                                                                                    std::int64_t cols, std::int64_t rows) {
  std::vector<char> seen(state.size(), 0);
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> out;
  auto open = [&](std::int64_t c, std::int64_t r) { return state[static_cast<std::size_t>(r * cols + c)] != kOccupied; };
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c) {
      if (!open(c, r) || seen[static_cast<std::size_t>(r * cols + c)]) continue;
      out.emplace_back();
      std::deque<std::pair<std::int64_t, std::int64_t>> q{{c, r}};
      seen[static_cast<std::size_t>(r * cols + c)] = 1;
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        out.back().emplace_back(x, y);
        const std::pair<std::int64_t, std::int64_t> nb[4] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
        for (auto [nx, ny] : nb)
          if (nx >= 0 && ny >= 0 && nx < cols && ny < rows && open(nx, ny) && !seen[static_cast<std::size_t>(ny * cols + nx)]) {
            seen[static_cast<std::size_t>(ny * cols + nx)] = 1;
            q.emplace_back(nx, ny);
          }
      }
    }
  return out;
}

}  // namespace detail

inline Fixture generate(const FixtureSpec& spec) {
  using namespace detail;
  if (spec.cols < 1 || spec.rows < 1) throw Error("fixture grid must have at least one site");
  if (!(spec.density >= 0 && spec.density <= 1)) throw Error("density must lie in [0, 1]");
  if (!(spec.filler_ratio >= 0 && spec.filler_ratio <= 1)) throw Error("filler ratio must lie in [0, 1]");
  if (!(spec.fill_fraction >= 0 && spec.fill_fraction <= 1)) throw Error("fill fraction must lie in [0, 1]");
  if (spec.depth < 0) throw Error("fan-in depth must be non-negative");

  Fixture fx;
  fx.lef = technology_lef();
  const lefdef::Lef lef = lefdef::parse_lef(fx.lef, "technology");
  Builder b(spec, lef);
  const Coord W = spec.cols * b.sw, H = spec.rows * b.sh;
  b.def.design = spec.design;
  b.def.units = lef.dbu_per_micron;
  b.def.die_area = {{0, 0}, {W, H}};
  for (std::int64_t r = 0; r < spec.rows; ++r)
    b.def.rows.push_back({"row_" + std::to_string(r), "core", {0, r * b.sh}, b.row_orient(r), spec.cols, 1, b.sw, 0});

  // Planted regions, each fenced by tap cells.
  for (const PlantedRegion& pr : spec.regions) {
    if (pr.size < 1) throw Error("planted region size must be positive");
    for (auto [c, r] : region_sites(pr)) {
      if (!b.inside(c, r)) throw Error("planted region of size " + std::to_string(pr.size) + " exceeds the grid");
      if (b.at(c, r) != kFree) throw Error("planted regions overlap");
      b.at(c, r) = kPlanted;
    }
  }
  for (const PlantedRegion& pr : spec.regions)
    for (auto [c, r] : region_sites(pr)) {
      const std::pair<std::int64_t, std::int64_t> nb[4] = {{c + 1, r}, {c - 1, r}, {c, r + 1}, {c, r - 1}};
      for (auto [nc, nr] : nb) {
        if (!b.inside(nc, nr)) continue;
        if (b.at(nc, nr) == kFree) b.place("tap" + std::to_string(b.cell_seq++), "TAP1", nc, nr, kOccupied);
      }
    }
  // Two planted regions may only touch through a fence.
  {
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> owner;
    for (std::size_t i = 0; i < spec.regions.size(); ++i)
      for (auto s : region_sites(spec.regions[i])) owner[s] = i;
    for (const auto& [s, i] : owner) {
      const std::pair<std::int64_t, std::int64_t> nb[2] = {{s.first + 1, s.second}, {s.first, s.second + 1}};
      for (auto n : nb)
        if (auto it = owner.find(n); it != owner.end() && it->second != i) throw Error("planted regions are adjacent");
    }
  }

  // Planted nets: validation, keep-out zones, driver cells.
  const lefdef::TechLayer* m3 = lef.layer("metal3");
  const Coord d3 = m3->pitch, w3 = m3->min_width;
  std::vector<Rect> keepout;
  std::map<std::string, const PlantedNet*> planted;
  for (const PlantedNet& pn : spec.nets) {
    if (pn.name.empty() || !planted.emplace(pn.name, &pn).second) throw Error("planted net names must be unique");
    if ((pn.from.x != pn.to.x) == (pn.from.y != pn.to.y)) throw Error("planted net " + pn.name + " must be one axis-parallel segment");
    const Rect wire = lefdef::Segment{"metal3", pn.from, pn.to, w3}.rect();
    const Rect zone = wire.expanded(2 * d3 + w3);
    if (!b.def.die_area.contains(zone)) throw Error("planted net " + pn.name + " is too close to the die edge");
    for (const Rect& k : keepout)
      if (k.touches(zone)) throw Error("planted net " + pn.name + " is too close to another planted net");
    keepout.push_back(zone);
  }
  for (const PlantedNet& pn : spec.nets)
    if (!pn.driver.empty() && !planted.count(pn.driver))
      throw Error("planted net " + pn.name + " is driven by unknown net " + pn.driver);
  std::map<std::string, std::string> driver_cell;  // net -> BUF instance driving it
  for (const PlantedNet& pn : spec.nets) {
    if (pn.driver.empty()) continue;
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const auto c = static_cast<std::int64_t>(draw(b.rng, static_cast<std::uint64_t>(spec.cols)));
      const auto r = static_cast<std::int64_t>(draw(b.rng, static_cast<std::uint64_t>(spec.rows)));
      if (!b.run_free(c, r, 3)) continue;
      b.place("u_" + pn.name, "BUF", c, r, kOccupied);
      driver_cell[pn.name] = "u_" + pn.name;
      placed = true;
    }
    if (!placed) throw Error("no room for the driver of " + pn.name);
  }

  // Background cells at the requested density, then fillers.
  {
    struct Choice {
      const char* macro;
      std::int64_t span;
    };
    const Choice choices[] = {{"INV", 2}, {"BUF", 3}, {"NAND2", 4}, {"NAND2", 4}, {"DFF", 8}};
    const double mean_span = (2 + 3 + 4 + 4 + 8) / 5.0;
    const double d = spec.density;
    const double p = d >= 1.0 ? 1.0 : d / (mean_span * (1 - d) + d);
    for (std::int64_t r = 0; r < spec.rows; ++r)
      for (std::int64_t c = 0; c < spec.cols;) {
        if (b.at(c, r) != kFree || !chance(b.rng, p)) {
          ++c;
          continue;
        }
        const Choice& ch = choices[draw(b.rng, 5)];
        std::int64_t span = ch.span;
        const char* macro = ch.macro;
        for (const Choice& alt : {Choice{"DFF", 8}, Choice{"NAND2", 4}, Choice{"BUF", 3}, Choice{"INV", 2}, Choice{"TAP1", 1}})
          if (!b.run_free(c, r, span) && alt.span < span) {
            span = alt.span;
            macro = alt.macro;
          }
        if (!b.run_free(c, r, span)) {
          ++c;
          continue;
        }
        b.place(b.next_name(), macro, c, r, kOccupied);
        c += span;
      }
    for (std::int64_t r = 0; r < spec.rows; ++r)
      for (std::int64_t c = 0; c < spec.cols;) {
        if (b.at(c, r) == kOccupied || b.at(c, r) == kFiller || !chance(b.rng, spec.filler_ratio)) {
          ++c;
          continue;
        }
        const bool two = c + 1 < spec.cols && (b.at(c + 1, r) == kFree || b.at(c + 1, r) == kPlanted) && draw(b.rng, 2);
        b.place("fill" + std::to_string(b.cell_seq++), two ? "FILL2" : "FILL1", c, r, kFiller);
        c += two ? 2 : 1;
      }
  }

  // Routing: planted nets with their obstruction recipes, then random background nets.
  std::vector<lefdef::RoutedNet> special;
  for (const PlantedNet& pn : spec.nets) {
    lefdef::RoutedNet n;
    n.name = pn.name;
    if (auto it = driver_cell.find(pn.name); it != driver_cell.end()) n.pins.emplace_back(it->second, "Y");
    for (const PlantedNet& other : spec.nets)
      if (other.driver == pn.name) n.pins.emplace_back(driver_cell.at(other.name), "A");
    n.segments.push_back({"metal3", pn.from, pn.to, w3});
    b.def.nets.push_back(n);

    const Rect wire = n.segments[0].rect();
    const Rect loop = wire.expanded(d3);
    if (pn.recipe == Recipe::Ring || pn.recipe == Recipe::Full) {
      lefdef::RoutedNet ring;
      ring.name = "ring_" + pn.name;
      const Coord e = w3 / 2;
      ring.segments.push_back({"metal3", {loop.lo.x - e, loop.lo.y}, {loop.hi.x + e, loop.lo.y}, w3});
      ring.segments.push_back({"metal3", {loop.lo.x - e, loop.hi.y}, {loop.hi.x + e, loop.hi.y}, w3});
      ring.segments.push_back({"metal3", {loop.lo.x, loop.lo.y}, {loop.lo.x, loop.hi.y}, w3});
      ring.segments.push_back({"metal3", {loop.hi.x, loop.lo.y}, {loop.hi.x, loop.hi.y}, w3});
      special.push_back(ring);
    }
    auto cover = [&](const std::string& layer) {
      lefdef::RoutedNet cv;
      cv.name = "cover_" + layer + "_" + pn.name;
      const Rect c = wire.expanded(w3 / 2);
      if (c.width() >= c.height())
        cv.segments.push_back({layer, {c.lo.x, (c.lo.y + c.hi.y) / 2}, {c.hi.x, (c.lo.y + c.hi.y) / 2}, c.height()});
      else
        cv.segments.push_back({layer, {(c.lo.x + c.hi.x) / 2, c.lo.y}, {(c.lo.x + c.hi.x) / 2, c.hi.y}, c.width()});
      special.push_back(cv);
    };
    if (pn.recipe == Recipe::CoverAbove || pn.recipe == Recipe::Full) cover("metal4");
    if (pn.recipe == Recipe::Full) cover("metal2");
  }
  std::sort(special.begin(), special.end(), [](auto& a, auto& c) { return a.name < c.name; });
  b.def.special_nets = special;

  const lefdef::ViaDef* v1 = lef.via("via1_0");
  Rect v1_m2;
  for (const lefdef::LayerRect& lr : v1->rects)
    if (lr.layer == "metal2") v1_m2 = lr.rect;
  const Coord w1 = lef.layer("metal1")->min_width, w2 = lef.layer("metal2")->min_width;
  const Coord margin = 200;
  for (std::int64_t i = 0; i < spec.random_nets; ++i) {
    lefdef::RoutedNet n;
    n.name = "n" + std::to_string(i);
    for (int attempt = 0; attempt < 16; ++attempt) {
      const Coord x0 = margin + static_cast<Coord>(draw(b.rng, static_cast<std::uint64_t>(W - 2 * margin)));
      const Coord y0 = margin + static_cast<Coord>(draw(b.rng, static_cast<std::uint64_t>(H - 2 * margin)));
      auto span = [&](Coord lo, Coord hi, Coord from) {
        const Coord a = std::max(lo, from - spec.max_span), z = std::min(hi, from + spec.max_span);
        return a + static_cast<Coord>(draw(b.rng, static_cast<std::uint64_t>(z - a + 1)));
      };
      Coord x1 = span(margin, W - margin, x0), y1 = span(margin, H - margin, y0);
      if (x1 == x0 && y1 == y0) x1 = x0 == margin ? x0 + 1 : x0 - 1;
      n.segments.clear();
      n.vias.clear();
      if (x1 != x0) n.segments.push_back({"metal1", {x0, y0}, {x1, y0}, w1});
      if (y1 != y0) {
        n.segments.push_back({"metal2", {x1, y0}, {x1, y1}, w2});
        if (x1 != x0) n.vias.push_back({"via1_0", {x1, y0}});
      }
      bool clear = true;
      for (const Rect& k : keepout) {
        for (const lefdef::Segment& s : n.segments)
          if (s.layer == "metal2" && s.rect().touches(k)) clear = false;
        for (const lefdef::ViaUse& v : n.vias)
          if (v1_m2.translated(v.at).touches(k)) clear = false;
      }
      if (clear) break;
      // Fall back to a metal1 stub, which no planted net can see.
      if (attempt == 15) {
        n.vias.clear();
        n.segments = {{"metal1", {x0, y0}, {x0 == W - margin ? x0 - 1 : x0 + 1, y0}, w1}};
      }
    }
    b.def.nets.push_back(n);
  }

  // Directed filling around the critical nets.
  std::map<std::string, int> depth_of;
  for (const PlantedNet& pn : spec.nets)
    if (pn.name.rfind(spec.root_prefix, 0) == 0) {
      const PlantedNet* cur = &pn;
      for (int dpt = 0; cur && dpt <= spec.depth; ++dpt) {
        auto [it, fresh] = depth_of.emplace(cur->name, dpt);
        if (!fresh) it->second = std::min(it->second, dpt);
        cur = cur->driver.empty() ? nullptr : planted.at(cur->driver);
      }
    }
  if (spec.fill_fraction > 0 && !depth_of.empty()) {
    layout::PlacementGrid g(spec.cols, spec.rows, {0, 0}, b.sw, b.sh);
    for (std::int64_t r = 0; r < spec.rows; ++r)
      for (std::int64_t c = 0; c < spec.cols; ++c)
        if (b.at(c, r) == kOccupied) g.at(c, r) = layout::SiteState::Occupied;
    std::vector<Rect> rects;
    for (const lefdef::RoutedNet& n : b.def.nets)
      if (depth_of.count(n.name))
        for (const lefdef::Segment& s : n.segments) rects.push_back(s.rect());
    const auto chosen = nearest_open_sites(g, rects, spec.fill_fraction);
    detail::fill_sites(b.def, lef, g, chosen, "BISA1", layout::default_filler_prefixes());
    // Dropped fillers leave their other sites empty.
    for (std::uint8_t& s : b.state)
      if (s == kFiller) s = kFree;
    for (const lefdef::Component& c : b.def.components)
      if (layout::has_prefix(c.macro, layout::default_filler_prefixes()))
        for (std::int64_t k = 0; k < lef.macro(c.macro)->w / b.sw; ++k) b.at(c.location.x / b.sw + k, c.location.y / b.sh) = kFiller;
    for (auto [c, r] : chosen) b.at(c, r) = kOccupied;
  }

  fx.def = lefdef::emit_def(b.def, lef);

  // Netlist: a BUF per driven planted net.
  {
    std::ostringstream o;
    std::vector<std::string> inputs, outputs, wires;
    std::set<std::string> drives;
    for (const PlantedNet& pn : spec.nets)
      if (!pn.driver.empty()) drives.insert(pn.driver);
    for (const PlantedNet& pn : spec.nets) {
      if (pn.driver.empty()) inputs.push_back(pn.name);
      else if (!drives.count(pn.name)) outputs.push_back(pn.name);
      else wires.push_back(pn.name);
    }
    o << "// generated fixture netlist, seed " << spec.seed << "\nmodule " << spec.design << " (";
    bool first = true;
    for (const auto* group : {&inputs, &outputs})
      for (const std::string& n : *group) {
        o << (first ? "" : ", ") << n;
        first = false;
      }
    o << ");\n";
    for (const std::string& n : inputs) o << "  input " << n << ";\n";
    for (const std::string& n : outputs) o << "  output " << n << ";\n";
    for (const std::string& n : wires) o << "  wire " << n << ";\n";
    for (const PlantedNet& pn : spec.nets)
      if (!pn.driver.empty()) o << "  BUF u_" << pn.name << " (.A(" << pn.driver << "), .Y(" << pn.name << "));\n";
    o << "endmodule\n";
    fx.netlist = o.str();
  }

  // GDSII: one structure per macro, the top referencing them, wires as PATHs.
  std::set<std::string> used_layers;
  {
    gds::Library lib = gds::Library::with_dbu_per_micron(spec.design, static_cast<double>(lef.dbu_per_micron));
    std::map<std::string, int> layer_numbers;
    for (std::size_t i = 0; i < lef.layers.size(); ++i) layer_numbers[lef.layers[i].name] = static_cast<int>(10 + i);
    auto gl = [&](const std::string& name) {
      used_layers.insert(name);
      return layer_numbers.at(name);
    };
    std::set<std::string> used;
    for (const lefdef::Component& c : b.def.components) used.insert(c.macro);
    for (const std::string& name : used) {
      const lefdef::Macro* m = lef.macro(name);
      gds::Cell cell;
      cell.name = name;
      for (const lefdef::MacroPin& p : m->pins)
        for (const lefdef::LayerRect& lr : p.rects) cell.elements.push_back(gds::make_boundary(gl(lr.layer), 0, lr.rect));
      for (const lefdef::LayerRect& lr : m->obstructions) cell.elements.push_back(gds::make_boundary(gl(lr.layer), 0, lr.rect));
      lib.cells.push_back(std::move(cell));
    }
    gds::Cell top;
    top.name = spec.design;
    for (const lefdef::Component& c : b.def.components) {
      const lefdef::Macro* m = lef.macro(c.macro);
      top.elements.push_back(orient_sref(c.macro, c.orient, c.location, m->w, m->h));
    }
    for (const auto* list : {&b.def.special_nets, &b.def.nets})
      for (const lefdef::RoutedNet& n : *list) {
        for (const lefdef::Segment& s : n.segments) top.elements.push_back(gds::make_path(gl(s.layer), 0, s.width, {s.p1, s.p2}));
        for (const lefdef::ViaUse& v : n.vias)
          for (const lefdef::LayerRect& lr : lef.via(v.via)->rects)
            top.elements.push_back(gds::make_boundary(gl(lr.layer), 0, lr.rect.translated(v.at)));
      }
    lib.cells.push_back(std::move(top));
    fx.gds = gds::write_gds(lib);
  }
  fx.layermap = layer_map(lef, used_layers);
  fx.attacks = reference_attacks();

  // Expected record.
  Expected& ex = fx.expected;
  ex.seed = spec.seed;
  ex.depth = spec.depth;
  for (const PlantedRegion& pr : spec.regions) ex.planted_sizes.push_back(pr.size);
  ex.total_sites = spec.cols * spec.rows;
  for (std::uint8_t s : b.state) {
    ex.occupied_sites += s == kOccupied;
    ex.filler_sites += s == kFiller;
  }
  const auto regions = open_regions(b.state, spec.cols, spec.rows);
  for (const auto& r : regions) ++ex.histogram[static_cast<std::int64_t>(r.size())];
  for (const lefdef::Component& c : b.def.components) {
    const lefdef::Macro* m = lef.macro(c.macro);
    for (const lefdef::MacroPin& p : m->pins) ex.polygons += static_cast<std::int64_t>(p.rects.size());
    ex.polygons += static_cast<std::int64_t>(m->obstructions.size());
  }
  for (const auto* list : {&b.def.special_nets, &b.def.nets})
    for (const lefdef::RoutedNet& n : *list) {
      ex.polygons += static_cast<std::int64_t>(n.segments.size());
      for (const lefdef::ViaUse& v : n.vias) ex.polygons += static_cast<std::int64_t>(lef.via(v.via)->rects.size());
    }

  long double S = 0, SS = 0;
  std::int64_t count = 0;
  std::vector<Coord> lengths;
  for (const lefdef::RoutedNet& n : b.def.nets)
    if (n.length() > 0) {
      ++count;
      S += n.length();
      SS += static_cast<long double>(n.length()) * n.length();
    }
  ex.regular_nets = count;
  if (count >= 2) {
    ex.mean_length = static_cast<double>(S / count);
    ex.stddev_length = static_cast<double>(std::sqrt(static_cast<long double>(count) * SS - S * S) / count);
  }
  auto sigma_of = [&](Coord m) -> double {
    const long double num = static_cast<long double>(count) * m - S;
    const long double var = static_cast<long double>(count) * SS - S * S;
    if (var == 0) return num == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(num / std::sqrt(var));
  };

  struct Open {
    bool loop = false;
    Rect loop_rect;
    std::vector<Point> points;
  };
  std::vector<Open> open_sets;
  for (const auto& [name, dpt] : depth_of) {
    const PlantedNet& pn = *planted.at(name);
    ExpectedNet en;
    en.name = name;
    en.recipe = pn.recipe;
    en.depth = dpt;
    std::tie(en.same_layer, en.adjacent_layer) = recipe_blockage(pn.recipe);
    en.overall = (Rational(2) * en.same_layer + en.adjacent_layer) / Rational(3);
    en.length = std::abs(pn.to.x - pn.from.x) + std::abs(pn.to.y - pn.from.y);
    ex.critical.push_back(en);
    const Rect wire = lefdef::Segment{"metal3", pn.from, pn.to, w3}.rect();
    Open o;
    o.loop = en.same_layer < Rational(1);
    o.loop_rect = wire.expanded(d3);
    if (en.adjacent_layer < Rational(1)) o.points.push_back({(wire.lo.x + wire.hi.x) / 2, (wire.lo.y + wire.hi.y) / 2});
    open_sets.push_back(o);
  }
  // Distance from a site to an open set: the sampled loop is every integer point on its boundary.
  auto distance = [&](const Rect& site, const Open& o) {
    Coord best = std::numeric_limits<Coord>::max();
    if (o.loop) {
      const Rect& L = o.loop_rect;
      const bool strictly_inside = site.lo.x > L.lo.x && site.hi.x < L.hi.x && site.lo.y > L.lo.y && site.hi.y < L.hi.y;
      if (strictly_inside)
        best = std::min({site.lo.x - L.lo.x, L.hi.x - site.hi.x, site.lo.y - L.lo.y, L.hi.y - site.hi.y});
      else
        best = geom::manhattan_rect_distance(site, L);
    }
    for (const Point& p : o.points) best = std::min(best, geom::manhattan_rect_distance(site, geom::point_rect(p)));
    return best;
  };
  const auto attacks = layout::parse_attacks(reference_attacks());
  for (const layout::AttackSpec& a : attacks) {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < ex.critical.size(); ++i) {
      if (!(ex.critical[i].overall < Rational(1))) continue;
      for (const auto& region : regions) {
        if (static_cast<std::int64_t>(region.size()) < a.placement_sites) continue;
        if (a.timing_critical) {
          Coord m = std::numeric_limits<Coord>::max();
          for (auto [c, r] : region) m = std::min(m, distance({{c * b.sw, r * b.sh}, {(c + 1) * b.sw, (r + 1) * b.sh}}, open_sets[i]));
          if (!(sigma_of(m) <= 3.0)) continue;
        }
        ++n;
      }
    }
    ex.viable.emplace_back(a.name, n);
  }
  return fx;
}

// ---------------------------------------------------------------------------
// Presets

/// Small design with one region per attack size class and one net per recipe.
inline FixtureSpec demo_spec() {
  FixtureSpec s;
  s.seed = 20240601;
  s.cols = 160;
  s.rows = 72;
  s.density = 0.55;
  s.filler_ratio = 0.25;
  s.random_nets = 400;
  s.max_span = 24000;
  s.design = "demo";
  // Key Leak (2553), A2 Digital (1444), Privilege Escalation (342) and A2 Analog (20) sized regions.
  s.regions = {{2600, 2, 2, 52}, {1500, 60, 2, 30}, {400, 96, 2, 20}, {30, 120, 2, 6}, {25, 130, 40, 5}, {12, 140, 60, 4}};
  const Coord sh = 3420;
  s.nets = {
      {"key_in", {10000, 58 * sh + 1000}, {24000, 58 * sh + 1000}, Recipe::CoverAbove, ""},
      {"sec_key", {30000, 60 * sh}, {46000, 60 * sh}, Recipe::None, "key_in"},
      {"mode_in", {50000, 64 * sh}, {57000, 64 * sh}, Recipe::Full, ""},
      {"sec_mode", {48000, 56 * sh}, {56000, 56 * sh}, Recipe::Ring, "mode_in"},
      {"sec_priv", {40000, 20 * sh}, {40000, 30 * sh}, Recipe::None, ""},
      {"sec_debug", {52000, 48 * sh}, {54000, 48 * sh}, Recipe::Full, ""},
  };
  return s;
}

/// Large design for the runtime envelope: 512 x 512 sites, 10k random nets.
inline FixtureSpec scale_spec() {
  FixtureSpec s;
  s.seed = 7;
  s.cols = 512;
  s.rows = 512;
  s.density = 0.6;
  s.filler_ratio = 0.2;
  s.random_nets = 10000;
  s.max_span = 40000;
  s.design = "scale";
  s.regions = {{2600, 10, 10, 52}, {1500, 100, 10, 30}, {400, 200, 10, 20}, {25, 300, 10, 5}};
  const Coord sh = 3420;
  s.nets = {
      {"key_in", {20000, 100 * sh}, {40000, 100 * sh}, Recipe::CoverAbove, ""},
      {"sec_key", {60000, 120 * sh}, {90000, 120 * sh}, Recipe::None, "key_in"},
      {"sec_mode", {120000, 200 * sh}, {140000, 200 * sh}, Recipe::Ring, ""},
      {"sec_debug", {150000, 300 * sh}, {160000, 300 * sh}, Recipe::Full, ""},
      {"sec_priv", {100000, 400 * sh}, {100000, 420 * sh}, Recipe::None, ""},
  };
  return s;
}

}  // namespace icas::fixtures
