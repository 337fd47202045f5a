#pragma once

// LayoutDb: placement-site bitmap, per-layer shape index with owners, routed
// net geometry and the critical-net marking. Also the attack-file reader and
// the DEF-versus-GDSII geometry audit.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "icas/error.hpp"
#include "icas/gdsii.hpp"
#include "icas/geom.hpp"
#include "icas/lefdef.hpp"
#include "icas/netlist.hpp"

namespace icas::layout {

using geom::Coord;
using geom::Point;
using geom::Rect;

enum class SiteState : std::uint8_t { Empty = 0, Filler = 1, Occupied = 2 };

struct PlacementGrid {
  std::int64_t cols = 0;
  std::int64_t rows = 0;
  Point origin;
  Coord site_w = 1;
  Coord site_h = 1;
  std::vector<SiteState> cells;  // row-major

  PlacementGrid() = default;
  PlacementGrid(std::int64_t c, std::int64_t r, Point o = {0, 0}, Coord w = 1, Coord h = 1)
      : cols(c), rows(r), origin(o), site_w(w), site_h(h), cells(static_cast<std::size_t>(c * r), SiteState::Empty) {}

  SiteState at(std::int64_t c, std::int64_t r) const { return cells[static_cast<std::size_t>(r * cols + c)]; }
  SiteState& at(std::int64_t c, std::int64_t r) { return cells[static_cast<std::size_t>(r * cols + c)]; }
  bool open(std::int64_t c, std::int64_t r) const { return at(c, r) != SiteState::Occupied; }
  Rect site_rect(std::int64_t c, std::int64_t r) const {
    const Point lo{origin.x + c * site_w, origin.y + r * site_h};
    return {lo, {lo.x + site_w, lo.y + site_h}};
  }
  std::int64_t count(SiteState s) const { return std::count(cells.begin(), cells.end(), s); }
};

// ---------------------------------------------------------------------------
// Shape index

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;
using BPoint = bg::model::point<Coord, 2, bg::cs::cartesian>;
using BBox = bg::model::box<BPoint>;

inline BBox to_box(const Rect& r) { return BBox(BPoint(r.lo.x, r.lo.y), BPoint(r.hi.x, r.hi.y)); }

struct Shape {
  Rect rect;
  std::uint32_t owner = 0;
};

/// All shapes on one layer, with an R-tree over their boxes.
class LayerShapes {
public:
  void add(const Rect& r, std::uint32_t owner) {
    if (r.degenerate()) return;
    shapes_.push_back({r, owner});
    built_ = false;
  }

  void build() {
    std::vector<std::pair<BBox, std::uint32_t>> values;
    values.reserve(shapes_.size());
    for (std::uint32_t i = 0; i < shapes_.size(); ++i) values.emplace_back(to_box(shapes_[i].rect), i);
    tree_ = Tree(values.begin(), values.end());
    built_ = true;
  }

  const std::vector<Shape>& shapes() const { return shapes_; }

  /// Indices of shapes whose closed boxes touch `r`, in ascending order.
  std::vector<std::uint32_t> query(const Rect& r) const {
    if (!built_) throw LayoutError("shape index queried before build");
    std::vector<std::pair<BBox, std::uint32_t>> hits;
    tree_.query(bgi::intersects(to_box(r)), std::back_inserter(hits));
    std::vector<std::uint32_t> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.second);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Rects of shapes touching `r` whose owner differs from `exclude`.
  std::vector<Rect> foreign(const Rect& r, std::uint32_t exclude) const {
    std::vector<Rect> out;
    for (std::uint32_t i : query(r))
      if (shapes_[i].owner != exclude) out.push_back(shapes_[i].rect);
    return out;
  }

private:
  using Tree = bgi::rtree<std::pair<BBox, std::uint32_t>, bgi::rstar<16>>;
  std::vector<Shape> shapes_;
  Tree tree_;
  bool built_ = false;
};

// ---------------------------------------------------------------------------
// Database

struct NetGeometry {
  std::string name;
  bool special = false;
  std::uint32_t owner = 0;
  Coord length = 0;  // sum of segment centerline lengths
  std::vector<std::pair<int, Rect>> rects;  // (layer index, rect): wires and via shapes
  std::vector<std::pair<int, Rect>> wires;  // (layer index, rect): wire segments only
};

struct LayoutDb {
  std::shared_ptr<const lefdef::Lef> lef;
  PlacementGrid grid;
  Rect die_area;
  std::int64_t dbu_per_micron = 0;
  std::vector<std::string> owners;      // owner id -> net or instance name
  std::vector<LayerShapes> shapes;      // per LEF layer index
  std::vector<NetGeometry> nets;        // regular nets, then special nets
  std::unordered_map<std::string, int> net_index;
  netlist::CriticalSet critical;        // restricted to nets present in DEF
  std::vector<std::string> critical_nets;  // members present, sorted
  std::vector<std::string> unmatched;      // members absent from DEF, sorted
  std::vector<std::string> warnings;

  int layer_index(const std::string& name) const {
    for (std::size_t i = 0; i < lef->layers.size(); ++i)
      if (lef->layers[i].name == name) return static_cast<int>(i);
    return -1;
  }
  const lefdef::TechLayer& layer(int i) const { return lef->layers[static_cast<std::size_t>(i)]; }
  const NetGeometry* net(const std::string& n) const {
    auto it = net_index.find(n);
    return it == net_index.end() ? nullptr : &nets[static_cast<std::size_t>(it->second)];
  }
};

inline const std::vector<std::string>& default_filler_prefixes() {
  static const std::vector<std::string> p{"FILL", "DECAP"};
  return p;
}

inline bool has_prefix(const std::string& s, const std::vector<std::string>& prefixes) {
  for (const std::string& p : prefixes)
    if (s.rfind(p, 0) == 0) return true;
  return false;
}

/// DEF may escape bus brackets; netlist names never are.
inline std::string normalize_net_name(std::string n) {
  n.erase(std::remove(n.begin(), n.end(), '\\'), n.end());
  return n;
}

inline LayoutDb build_layout(std::shared_ptr<const lefdef::Lef> lef, const lefdef::FloorplanDef& def,
                             const netlist::CriticalSet& critical,
                             const std::vector<std::string>& filler_prefixes = default_filler_prefixes()) {
  LayoutDb db;
  db.lef = lef;
  db.die_area = def.die_area;
  db.dbu_per_micron = lef->dbu_per_micron;
  const lefdef::GridSpec gs = lefdef::grid_spec(def, *lef);
  db.grid = PlacementGrid(gs.cols, gs.rows, gs.origin, gs.site_w, gs.site_h);
  db.shapes.resize(lef->layers.size());

  // Owners: nets first, then instances.
  auto add_nets = [&](const std::vector<lefdef::RoutedNet>& list, bool special) {
    for (const lefdef::RoutedNet& n : list) {
      NetGeometry g;
      g.name = normalize_net_name(n.name);
      g.special = special;
      g.owner = static_cast<std::uint32_t>(db.owners.size());
      if (db.net_index.count(g.name)) throw LayoutError("net '" + g.name + "' defined twice in DEF");
      db.owners.push_back(g.name);
      db.net_index.emplace(g.name, static_cast<int>(db.nets.size()));
      g.length = n.length();
      for (const lefdef::Segment& s : n.segments) {
        const int li = db.layer_index(s.layer);
        g.rects.emplace_back(li, s.rect());
        g.wires.emplace_back(li, s.rect());
      }
      for (const lefdef::ViaUse& v : n.vias) {
        const lefdef::ViaDef* vd = nullptr;
        for (const lefdef::ViaDef& d : def.vias)
          if (d.name == v.via) vd = &d;
        if (!vd) vd = lef->via(v.via);
        if (!vd) throw LayoutError("net '" + g.name + "' uses unknown via '" + v.via + "'");
        for (const lefdef::LayerRect& lr : vd->rects) g.rects.emplace_back(db.layer_index(lr.layer), lr.rect.translated(v.at));
      }
      db.nets.push_back(std::move(g));
    }
  };
  add_nets(def.nets, false);
  add_nets(def.special_nets, true);

  std::map<std::pair<std::string, std::string>, std::uint32_t> pin_owner;
  for (const lefdef::RoutedNet& n : def.nets)
    for (const auto& [inst, pin] : n.pins) pin_owner[{inst, pin}] = db.nets[db.net_index.at(normalize_net_name(n.name))].owner;

  for (const NetGeometry& g : db.nets)
    for (const auto& [li, r] : g.rects) db.shapes[static_cast<std::size_t>(li)].add(r, g.owner);

  // Occupancy and component shapes. Components are processed in name order so
  // overlap diagnostics do not depend on declaration order.
  std::vector<const lefdef::Component*> comps;
  for (const lefdef::Component& c : def.components)
    if (c.placed) comps.push_back(&c);
  std::sort(comps.begin(), comps.end(), [](auto* a, auto* b) { return a->name < b->name; });
  std::vector<int> holder(db.grid.cells.size(), -1);  // index into comps of the non-filler occupant
  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const lefdef::Component& c = *comps[ci];
    const lefdef::Macro& m = *lef->macro(c.macro);
    const bool swap = lefdef::orient_swaps_axes(c.orient);
    const Coord fw = swap ? m.h : m.w, fh = swap ? m.w : m.h;
    if (fw % gs.site_w || fh % gs.site_h)
      throw LayoutError("component '" + c.name + "' footprint is not a whole number of sites in orientation " +
                        lefdef::orient_name(c.orient));
    const std::int64_t c0 = (c.location.x - gs.origin.x) / gs.site_w, r0 = (c.location.y - gs.origin.y) / gs.site_h;
    const std::int64_t nc = fw / gs.site_w, nr = fh / gs.site_h;
    if (c0 < 0 || r0 < 0 || c0 + nc > gs.cols || r0 + nr > gs.rows)
      throw LayoutError("component '" + c.name + "' lies outside the placement rows");
    const bool filler = has_prefix(c.macro, filler_prefixes);
    for (std::int64_t r = r0; r < r0 + nr; ++r)
      for (std::int64_t col = c0; col < c0 + nc; ++col) {
        const std::size_t k = static_cast<std::size_t>(r * gs.cols + col);
        if (filler) {
          if (db.grid.cells[k] == SiteState::Empty) db.grid.cells[k] = SiteState::Filler;
          continue;
        }
        if (holder[k] >= 0)
          throw LayoutError("components '" + comps[static_cast<std::size_t>(holder[k])]->name + "' and '" + c.name +
                            "' overlap");
        holder[k] = static_cast<int>(ci);
        db.grid.cells[k] = SiteState::Occupied;
      }
    const std::uint32_t inst_owner = static_cast<std::uint32_t>(db.owners.size());
    db.owners.push_back(c.name);
    for (const lefdef::MacroPin& p : m.pins) {
      auto it = pin_owner.find({c.name, p.name});
      const std::uint32_t owner = it == pin_owner.end() ? inst_owner : it->second;
      for (const lefdef::LayerRect& lr : p.rects)
        db.shapes[static_cast<std::size_t>(db.layer_index(lr.layer))].add(
            lefdef::orient_rect(c.orient, lr.rect, m.w, m.h, c.location), owner);
    }
    for (const lefdef::LayerRect& lr : m.obstructions)
      db.shapes[static_cast<std::size_t>(db.layer_index(lr.layer))].add(
          lefdef::orient_rect(c.orient, lr.rect, m.w, m.h, c.location), inst_owner);
  }
  for (LayerShapes& ls : db.shapes) ls.build();

  // Critical marking.
  db.critical.roots.clear();
  for (const auto& [n, d] : critical.members) {
    const NetGeometry* g = db.net(n);
    if (g && !g->special) {
      db.critical.members[n] = d;
      db.critical_nets.push_back(n);
    } else {
      db.unmatched.push_back(n);
    }
  }
  for (const std::string& r : critical.roots)
    if (db.critical.members.count(r)) db.critical.roots.insert(r);
  for (const auto& [root, set] : critical.per_root) {
    auto& dst = db.critical.per_root[root];
    for (const std::string& n : set)
      if (db.critical.members.count(n)) dst.insert(n);
  }
  for (const auto& e : critical.edges)
    if (db.critical.members.count(e.from) && db.critical.members.count(e.to)) db.critical.edges.push_back(e);
  db.critical.warnings = critical.warnings;
  if (!db.unmatched.empty())
    db.warnings.push_back(std::to_string(db.unmatched.size()) + " critical net(s) have no routed DEF net: " +
                          db.unmatched.front() + (db.unmatched.size() > 1 ? ", ..." : ""));
  return db;
}

// ---------------------------------------------------------------------------
// Attack descriptions

struct AttackSpec {
  std::string name;
  std::int64_t std_cells = 0;
  std::int64_t placement_sites = 0;
  bool timing_critical = false;
  std::vector<std::string> target_nets;
  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

inline std::vector<AttackSpec> parse_attacks(std::string_view text, const std::string& source = "attacks") {
  std::vector<AttackSpec> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0, block_line = 0;
  std::optional<AttackSpec> cur;
  std::set<std::string> keys;
  auto finish = [&] {
    if (!cur) return;
    for (const char* k : {"sites", "cells", "timing_critical"})
      if (!keys.count(k)) throw ParseError(source, block_line, "attack '" + cur->name + "' is missing '" + k + "'");
    if (cur->std_cells < 1 || cur->placement_sites < cur->std_cells)
      throw ParseError(source, block_line, "attack '" + cur->name + "' needs sites >= cells >= 1");
    for (const AttackSpec& a : out)
      if (a.name == cur->name) throw ParseError(source, block_line, "attack '" + cur->name + "' defined twice");
    out.push_back(std::move(*cur));
    cur.reset();
    keys.clear();
  };
  auto to_int = [&](const std::string& v) {
    std::int64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw ParseError(source, line, "'" + v + "' is not an integer");
    return x;
  };
  while (std::getline(in, raw)) {
    ++line;
    if (const auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    const auto b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
      finish();
      continue;
    }
    const auto e = raw.find_last_not_of(" \t\r");
    const std::string content = raw.substr(b, e - b + 1);
    const auto sp = content.find_first_of(" \t");
    const std::string key = content.substr(0, sp);
    std::string value = sp == std::string::npos ? "" : content.substr(content.find_first_not_of(" \t", sp));
    if (key == "attack") {
      finish();
      if (value.empty()) throw ParseError(source, line, "attack needs a name");
      cur = AttackSpec{value, 0, 0, false, {}};
      block_line = line;
      continue;
    }
    if (!cur) throw ParseError(source, line, "'" + key + "' outside an attack block");
    if (!keys.insert(key).second) throw ParseError(source, line, "duplicate key '" + key + "'");
    if (key == "sites") cur->placement_sites = to_int(value);
    else if (key == "cells") cur->std_cells = to_int(value);
    else if (key == "timing_critical") {
      if (value != "true" && value != "false") throw ParseError(source, line, "timing_critical must be true or false");
      cur->timing_critical = value == "true";
    } else if (key == "targets") {
      std::istringstream ts(value);
      for (std::string t; std::getline(ts, t, ',');) {
        const auto tb = t.find_first_not_of(" \t"), te = t.find_last_not_of(" \t");
        if (tb != std::string::npos) cur->target_nets.push_back(t.substr(tb, te - tb + 1));
      }
    } else {
      throw ParseError(source, line, "unknown key '" + key + "'");
    }
  }
  finish();
  return out;
}

// ---------------------------------------------------------------------------
// GDSII cross-check

struct CrosscheckLayer {
  std::string layer;
  geom::Area def_area = 0;
  geom::Area gds_area = 0;
  geom::Area def_only = 0;
  geom::Area gds_only = 0;
  double mismatch = 0;  // (def_only + gds_only) / union area
};

struct CrosscheckReport {
  std::vector<CrosscheckLayer> layers;
  std::vector<std::string> warnings;
  bool pass = true;
};

inline CrosscheckReport crosscheck_gds(const LayoutDb& db, const gds::FlatGeometry& flat, const lefdef::LayerMap& map,
                                       double epsilon = 0.01) {
  CrosscheckReport rep;
  std::set<std::string> names;
  for (const auto& e : map.entries) names.insert(e.layer);
  for (const std::string& name : names) {
    std::vector<Rect> a, b;
    if (const int li = db.layer_index(name); li >= 0)
      for (const Shape& s : db.shapes[static_cast<std::size_t>(li)].shapes()) a.push_back(s.rect);
    for (auto key : map.lookup(name))
      if (auto it = flat.find(key); it != flat.end())
        for (const geom::Polygon& p : it->second) {
          if (!geom::is_rectilinear(p)) throw LayoutError("non-rectilinear GDSII polygon on layer " + name);
          auto parts = geom::decompose_rectilinear(p);
          b.insert(b.end(), parts.begin(), parts.end());
        }
    if (a.empty() && b.empty()) {
      rep.warnings.push_back("layer " + name + " has no shapes in DEF or GDSII");
      continue;
    }
    CrosscheckLayer cl;
    cl.layer = name;
    cl.def_area = geom::union_area(a);
    cl.gds_area = geom::union_area(b);
    std::vector<Rect> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const geom::Area u = geom::union_area(both);
    cl.def_only = u - cl.gds_area;
    cl.gds_only = u - cl.def_area;
    cl.mismatch = u ? static_cast<double>(cl.def_only + cl.gds_only) / static_cast<double>(u) : 0.0;
    if (cl.mismatch >= epsilon) rep.pass = false;
    rep.layers.push_back(cl);
  }
  return rep;
}

}  // namespace icas::layout
