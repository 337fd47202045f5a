// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "icas/cli.hpp"
#include "icas/fixtures.hpp"
#include "icas/geom.hpp"
#include "icas/pipeline.hpp"
#include "support/blobs.hpp"
#include "support/oracles.hpp"
#include "support/random_netlist.hpp"

using namespace icas;
namespace fs = std::filesystem;
using geom::Coord;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects the first few failure messages of a criterion.
struct Check {
  bool ok = true;
  int failures = 0;
  std::ostringstream first;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures++ < 3) first << (failures > 1 ? "; " : "") << what;
  }
  Outcome done(const std::string& summary) {
    if (ok) return {true, summary};
    return {false, summary + " | " + std::to_string(failures) + " failure(s): " + first.str()};
  }
};

fixtures::FixtureSpec small_spec(std::uint64_t seed) {
  fixtures::FixtureSpec s;
  s.seed = seed;
  s.cols = 48;
  s.rows = 24;
  s.density = 0.6;
  s.random_nets = 60;
  s.max_span = 6000;
  s.regions = {{25, 2, 2, 5}, {20, 30, 3, 4}};
  s.nets = {
      {"sec_none", {4000, 14 * 3420}, {8000, 14 * 3420}, fixtures::Recipe::None, "drv"},
      {"drv", {12000, 20 * 3420}, {14000, 20 * 3420}, fixtures::Recipe::CoverAbove, ""},
      {"sec_ring", {13000, 4 * 3420}, {13000, 8 * 3420}, fixtures::Recipe::Ring, ""},
      {"sec_full", {16000, 14 * 3420}, {16000, 16 * 3420}, fixtures::Recipe::Full, ""},
  };
  return s;
}

pipeline::Inputs inputs_of(const fixtures::Fixture& fx) {
  pipeline::Inputs in;
  in.lef = fx.lef;
  in.def = fx.def;
  in.netlist = fx.netlist;
  in.attacks = fx.attacks;
  in.gds = fx.gds;
  in.layermap = fx.layermap;
  return in;
}

std::vector<fixtures::Fixture> fixture_corpus() {
  std::vector<fixtures::Fixture> out;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) out.push_back(fixtures::generate(small_spec(seed)));
  out.push_back(fixtures::generate(fixtures::demo_spec()));
  fixtures::FixtureSpec filled = fixtures::demo_spec();
  filled.fill_fraction = 0.5;
  out.push_back(fixtures::generate(filled));
  return out;
}

// ---------------------------------------------------------------------------

Outcome trigger_space_oracle() {
  Check c;
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const std::uint64_t p = 20 + rng() % 60;  // percent occupied
    std::vector<std::vector<bool>> open(64, std::vector<bool>(64));
    layout::PlacementGrid g(64, 64);
    for (int r = 0; r < 64; ++r)
      for (int col = 0; col < 64; ++col) {
        open[r][col] = rng() % 100 >= p;
        if (!open[r][col]) g.at(col, r) = layout::SiteState::Occupied;
      }
    const auto want = test::flood_fill_regions(open);
    const auto got = metrics::trigger_spaces(g);
    std::map<std::int64_t, std::int64_t> hist;
    for (const auto& s : want) ++hist[static_cast<std::int64_t>(s.size())];
    c.expect(got.histogram == hist, "histogram differs on bitmap " + std::to_string(t));
    std::set<std::set<test::Cell>> a(want.begin(), want.end()), b;
    for (const auto& ts : got.regions) b.insert(std::set<test::Cell>(ts.sites.begin(), ts.sites.end()));
    c.expect(a == b, "regions differ on bitmap " + std::to_string(t));
  }
  return c.done("1000 random 64x64 bitmaps");
}

Outcome weighted_combination() {
  Check c;
  std::size_t nets = 0;
  for (const auto& fx : fixture_corpus()) {
    const auto a = pipeline::analyze(inputs_of(fx), {});
    for (const auto& nb : a.blockage.per_net) {
      ++nets;
      c.expect(nb.overall == (Rational(2) * nb.same_layer + nb.adjacent_layer) / Rational(3), nb.net + " overall");
    }
    Coord p = 0, pb = 0;
    geom::Area ar = 0, ab = 0;
    for (const auto& nb : a.blockage.per_net) {
      p += nb.perimeter;
      pb += nb.perimeter_blocked;
      ar += nb.area;
      ab += nb.area_blocked;
    }
    c.expect(a.blockage.design.same_layer == Rational(pb, p), "design same-layer is not a ratio of sums");
    c.expect(a.blockage.design.adjacent_layer == Rational(ab, ar), "design adjacent-layer is not a ratio of sums");
  }
  // Two nets: a short ringed one and a long open one.
  fixtures::FixtureSpec s = small_spec(9);
  s.nets = {{"sec_short", {4000, 14 * 3420}, {5000, 14 * 3420}, fixtures::Recipe::Ring, ""},
            {"sec_long", {3000, 6 * 3420}, {15000, 6 * 3420}, fixtures::Recipe::None, ""}};
  const auto a = pipeline::analyze(inputs_of(fixtures::generate(s)), {});
  const auto* sh = a.blockage.find("sec_short");
  const auto* lg = a.blockage.find("sec_long");
  c.expect(sh && lg, "two-net fixture lost a net");
  if (sh && lg) {
    const Rational ratio_of_sums(sh->perimeter_blocked + lg->perimeter_blocked, sh->perimeter + lg->perimeter);
    const Rational mean_of_ratios = (sh->same_layer + lg->same_layer) / Rational(2);
    c.expect(a.blockage.design.same_layer == ratio_of_sums, "two-net design value is not the ratio of sums");
    c.expect(ratio_of_sums != mean_of_ratios, "two-net fixture does not separate the two forms");
    std::ostringstream o;
    o << nets << " fixture nets exact; two-net design same-layer " << ratio_of_sums << " vs mean-of-ratios "
      << mean_of_ratios;
    return c.done(o.str());
  }
  return c.done("two-net fixture");
}

Outcome blockage_extremes() {
  Check c;
  int none = 0, full = 0, ring = 0;
  for (const auto& fx : fixture_corpus()) {
    const auto a = pipeline::analyze(inputs_of(fx), {});
    for (const auto& en : fx.expected.critical) {
      const auto* nb = a.blockage.find(en.name);
      c.expect(nb != nullptr, en.name + " missing");
      if (!nb) continue;
      switch (en.recipe) {
        case fixtures::Recipe::None:
          ++none;
          c.expect(nb->overall == Rational(0), en.name + " overall " + nb->overall.str());
          break;
        case fixtures::Recipe::Full:
          ++full;
          c.expect(nb->overall == Rational(1), en.name + " overall " + nb->overall.str());
          break;
        case fixtures::Recipe::Ring:
          ++ring;
          c.expect(nb->same_layer == Rational(1) && nb->adjacent_layer == Rational(0) && nb->overall == Rational(2, 3),
                   en.name + " ring " + nb->overall.str());
          break;
        case fixtures::Recipe::CoverAbove: break;
      }
    }
  }
  return c.done(std::to_string(none) + " none / " + std::to_string(full) + " full / " + std::to_string(ring) +
                " ring nets");
}

Outcome geometry_oracles() {
  Check c;
  std::mt19937_64 rng(4);
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const auto a = test::random_blob(rng, 64, 100 + static_cast<int>(rng() % 1500));
    const auto b = test::random_blob(rng, 64, 100 + static_cast<int>(rng() % 1500));
    std::int64_t both = 0;
    for (int i = 0; i < 64 * 64; ++i) both += a.cells[i] && b.cells[i];
    const geom::Polygon pa = test::blob_polygon(a, 1), pb = test::blob_polygon(b, 1);
    const geom::Area got = geom::clip_intersection_area(pa, pb);
    const double err = both ? std::abs(static_cast<double>(got - both)) / static_cast<double>(both) : (got ? 1.0 : 0.0);
    worst = std::max(worst, err);
    c.expect(err <= 0.005, "intersection area off by " + std::to_string(err) + " on pair " + std::to_string(t));
    for (const auto* blob : {&a, &b}) {
      const geom::SimplePolygon sp(test::blob_polygon(*blob, 2));
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
          c.expect(geom::point_in_polygon({2 * x + 1, 2 * y + 1}, sp) == blob->at(x, y),
                   "containment differs at cell " + std::to_string(x) + "," + std::to_string(y));
    }
  }
  auto boundary = [](const geom::Rect& r) {
    std::vector<geom::Point> pts;
    for (Coord x = r.lo.x; x <= r.hi.x; ++x) pts.push_back({x, r.lo.y}), pts.push_back({x, r.hi.y});
    for (Coord y = r.lo.y; y <= r.hi.y; ++y) pts.push_back({r.lo.x, y}), pts.push_back({r.hi.x, y});
    return pts;
  };
  for (int t = 0; t < 200; ++t) {
    auto rnd = [&] {
      const Coord x = static_cast<Coord>(rng() % 40), y = static_cast<Coord>(rng() % 40);
      return geom::Rect{{x, y}, {x + static_cast<Coord>(rng() % 8), y + static_cast<Coord>(rng() % 8)}};
    };
    const geom::Rect ra = rnd(), rb = rnd();
    Coord best = std::numeric_limits<Coord>::max();
    const auto pa = boundary(ra), pb = boundary(rb);
    for (const auto& p : pa)
      for (const auto& q : pb) best = std::min(best, std::abs(p.x - q.x) + std::abs(p.y - q.y));
    // Boundary enumeration misses containment; overlapping rects are at distance 0.
    if (ra.touches(rb)) best = 0;
    c.expect(geom::manhattan_rect_distance(ra, rb) == best, "rect distance differs on pair " + std::to_string(t));
  }
  std::ostringstream o;
  o << "100 polygon pairs (worst area error " << worst * 100 << "%), 4096 centres x 200 polygons, 200 rect pairs";
  return c.done(o.str());
}

Outcome route_distance_oracle() {
  Check c;
  std::int64_t entries = 0, max_pairs = 0;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    fixtures::FixtureSpec s = small_spec(seed);
    s.cols = 24;
    s.rows = 12;
    s.regions = {{9, 2, 2, 3}};
    s.nets = {{"sec_a", {3000, 8 * 3420}, {4000, 8 * 3420}, fixtures::Recipe::None, ""},
              {"sec_b", {6000, 3 * 3420}, {6000, 4 * 3420}, fixtures::Recipe::CoverAbove, ""}};
    s.random_nets = 20;
    s.max_span = 3000;
    const auto fx = fixtures::generate(s);
    pipeline::Config cfg;
    cfg.blockage.g = 400;
    const auto a = pipeline::analyze(inputs_of(fx), cfg);
    const std::int64_t open_sites = a.db.grid.count(layout::SiteState::Empty) + a.db.grid.count(layout::SiteState::Filler);
    std::int64_t pairs = 0;
    for (const auto& nb : a.blockage.per_net)
      if (nb.overall < Rational(1)) pairs += nb.open_point_count() * open_sites;
    max_pairs = std::max(max_pairs, pairs);
    c.expect(pairs <= 10000, "fixture has " + std::to_string(pairs) + " site-point pairs");
    for (const auto& nb : a.blockage.per_net) {
      if (!(nb.overall < Rational(1))) continue;
      std::vector<geom::Point> pts;
      for (const auto& r : nb.open_points)
        for (std::int64_t i = 0; i < r.count; ++i) pts.push_back(r.at(i));
      for (const auto& ts : a.regions.regions) {
        std::vector<geom::Rect> sites;
        for (auto [col, row] : ts.sites) sites.push_back(a.db.grid.site_rect(col, row));
        const auto* e = a.matrix.find(nb.net, ts.id);
        c.expect(e != nullptr, "missing entry");
        if (!e) continue;
        ++entries;
        c.expect(e->manhattan == test::exhaustive_distance(pts, sites), nb.net + " region " + std::to_string(ts.id));
        c.expect(e->sigma == a.stats.sigma(e->manhattan), "sigma of " + nb.net);
      }
    }
  }
  return c.done(std::to_string(entries) + " matrix entries, at most " + std::to_string(max_pairs) + " site-point pairs per fixture");
}

Outcome viability_semantics() {
  Check c;
  for (const auto& fx : fixture_corpus()) {
    const auto a = pipeline::analyze(inputs_of(fx), {});
    for (const auto& v : a.viability.attacks) {
      if (v.attack.timing_critical) continue;
      const auto scope = attacks::attack_scope(v.attack, a.db.critical);
      std::int64_t unblocked = 0, big = 0;
      for (const auto& nb : a.blockage.per_net) unblocked += scope.count(nb.net) && nb.overall < Rational(1);
      for (const auto& ts : a.regions.regions) big += ts.size >= v.attack.placement_sites;
      c.expect(v.count == big * unblocked, v.attack.name + " count " + std::to_string(v.count));
    }
  }
  const auto fx = fixtures::generate(fixtures::demo_spec());
  const auto lef = lefdef::parse_lef(fx.lef);
  const auto base = pipeline::analyze(inputs_of(fx), {});
  std::map<std::string, std::vector<std::int64_t>> series;
  for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    pipeline::Inputs in = inputs_of(fx);
    in.gds.clear();
    in.def = fixtures::apply_filling(lef, fx.def, base.db.critical_nets, f);
    for (const auto& v : pipeline::analyze(in, {}).viability.attacks) series[v.attack.name].push_back(v.count);
  }
  std::ostringstream o;
  o << "cross-product holds; counts at fill 0/.25/.5/.75/1:";
  for (const auto& v : base.viability.attacks) {
    const auto& s = series[v.attack.name];
    o << ' ' << v.attack.name << " [";
    for (std::size_t i = 0; i < s.size(); ++i) o << (i ? "," : "") << s[i];
    o << ']';
    for (std::size_t i = 1; i < s.size(); ++i)
      c.expect(s[i] <= s[i - 1], v.attack.name + " rises at step " + std::to_string(i));
  }
  return c.done(o.str());
}

Outcome fanin_oracle() {
  Check c;
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 50; ++t) {
    const int gates = 20 + static_cast<int>(rng() % 81);
    const auto nl = test::random_dag_netlist(rng, gates, 1 + static_cast<int>(rng() % 3));
    const auto g = netlist::parse_netlist(nl.text);
    std::set<std::string> prev;
    for (int depth = 0; depth <= 4; ++depth) {
      std::map<std::string, int> oracle;
      for (const std::string& n : nl.nets)
        if (n.rfind("sec_", 0) == 0) test::enumerate_paths(nl, n, 0, depth, oracle);
      const auto cs = netlist::trace_fanin(g, {"sec_", depth});
      c.expect(cs.members == oracle, "netlist " + std::to_string(t) + " depth " + std::to_string(depth));
      std::set<std::string> now;
      for (const auto& [n, d] : cs.members) now.insert(n);
      c.expect(std::includes(now.begin(), now.end(), prev.begin(), prev.end()), "not monotone in depth");
      prev = now;
    }
  }
  return c.done("50 random DAG netlists, depths 0..4");
}

// 3x3 integer affine matrices for the composition oracle.
using M3 = std::array<std::array<std::int64_t, 3>, 3>;

M3 mul(const M3& a, const M3& b) {
  M3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

M3 sref_matrix(bool reflect, int quarter, geom::Point at) {
  static const std::int64_t cs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};  // cos, sin
  const auto [co, si] = cs[((quarter % 4) + 4) % 4];
  const std::int64_t f = reflect ? -1 : 1;
  return M3{{{co, -si * f, at.x}, {si, co * f, at.y}, {0, 0, 1}}};
}

geom::Point transform(const M3& m, geom::Point p) { return {m[0][0] * p.x + m[0][1] * p.y + m[0][2], m[1][0] * p.x + m[1][1] * p.y + m[1][2]}; }

std::multiset<std::vector<geom::Point>> shapes(const std::vector<geom::Polygon>& polys) {
  std::multiset<std::vector<geom::Point>> out;
  for (const auto& p : polys) out.insert(p.vertices);
  return out;
}

Outcome gds_round_trip() {
  Check c;
  int files = 0;
  std::int64_t placed = 0;
  auto corpus = fixture_corpus();
  corpus.push_back(fixtures::generate(fixtures::scale_spec()));
  for (const auto& fx : corpus) {
    ++files;
    const gds::Library lib = gds::read_gds(fx.gds);
    c.expect(gds::write_gds(lib) == fx.gds, "write(read(gds)) differs");
    const auto flat = gds::flatten(lib, lib.top_cell());
    // Oracle: every SREF of the top cell applied to its child's boundaries via matrices.
    std::map<gds::LayerKey, std::vector<geom::Polygon>> want;
    const gds::Cell& top = *lib.find(lib.top_cell());
    std::int64_t instances = 0;
    for (const gds::Element& el : top.elements) {
      if (const auto* r = std::get_if<gds::Reference>(&el)) {
        ++instances;
        const bool refl = r->strans && r->strans->reflect_x();
        const int q = r->strans && r->strans->angle ? static_cast<int>(std::lround(r->strans->angle->value() / 90.0)) : 0;
        const M3 m = sref_matrix(refl, q, r->origin);
        for (const gds::Boundary* b : lib.find(r->cell)->all<gds::Boundary>()) {
          geom::Polygon p = b->polygon;
          for (auto& v : p.vertices) v = transform(m, v);
          want[{b->layer, b->datatype}].push_back(p);
        }
      } else if (const auto* b = std::get_if<gds::Boundary>(&el)) {
        want[{b->layer, b->datatype}].push_back(b->polygon);
      } else if (const auto* pa = std::get_if<gds::Path>(&el)) {
        const Coord w = pa->width.value_or(0);
        for (std::size_t i = 0; i + 1 < pa->points.size(); ++i) {
          const geom::Point u = pa->points[i], v = pa->points[i + 1];
          const Coord below = w / 2, above = w - w / 2;
          const geom::Rect seg = u.y == v.y ? geom::Rect{{std::min(u.x, v.x), u.y - below}, {std::max(u.x, v.x), u.y + above}}
                                            : geom::Rect{{u.x - below, std::min(u.y, v.y)}, {u.x + above, std::max(u.y, v.y)}};
          if (!seg.degenerate()) want[{pa->layer, pa->datatype}].push_back(geom::Polygon::from_rect(seg));
        }
      }
    }
    placed += instances;
    std::int64_t polys = 0;
    for (const auto& [k, v] : flat) polys += static_cast<std::int64_t>(v.size());
    c.expect(polys == fx.expected.polygons, "flattened polygon count " + std::to_string(polys));
    c.expect(want.size() == flat.size(), "layer sets differ");
    for (const auto& [k, v] : want) {
      auto it = flat.find(k);
      c.expect(it != flat.end() && shapes(it->second) == shapes(v), "transformed shapes differ on a layer");
    }
  }
  // Deep hierarchies: flattened vertices equal the product of the reference matrices.
  std::mt19937_64 rng(8);
  const geom::Polygon leaf({{0, 0}, {30, 0}, {30, 10}, {10, 10}, {10, 20}, {0, 20}});
  for (int t = 0; t < 200; ++t) {
    gds::Library lib = gds::Library::with_dbu_per_micron("L", 1000);
    lib.cells.push_back(gds::Cell{"C0", std::vector<std::uint8_t>(24, 0), {}, {gds::Boundary{1, 0, leaf, {}}}});
    const int depth = 1 + static_cast<int>(rng() % 5);
    M3 total{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    for (int k = 1; k <= depth; ++k) {
      const bool refl = rng() & 1;
      const int q = static_cast<int>(rng() % 4);
      const geom::Point at{static_cast<Coord>(rng() % 2001) - 1000, static_cast<Coord>(rng() % 2001) - 1000};
      total = mul(sref_matrix(refl, q, at), total);
      lib.cells.push_back(gds::Cell{"C" + std::to_string(k), std::vector<std::uint8_t>(24, 0), {},
                                    {gds::make_sref("C" + std::to_string(k - 1), at, refl, q)}});
    }
    const auto flat = gds::flatten(lib, "C" + std::to_string(depth));
    geom::Polygon want = leaf;
    for (auto& v : want.vertices) v = transform(total, v);
    c.expect(flat.at({1, 0}).size() == 1 && flat.at({1, 0})[0].vertices == want.vertices,
             "hierarchy " + std::to_string(t) + " vertices differ");
  }
  return c.done(std::to_string(files) + " fixture streams, " + std::to_string(placed) +
                " placed instances, 200 random hierarchies");
}

std::string slurp(const fs::path& p) { return cli::read_text(p.string()); }

cli::RunConfig write_fixture(const fixtures::Fixture& fx, const fs::path& dir) {
  fs::remove_all(dir);
  cli::write_file(dir / "d.lef", fx.lef);
  cli::write_file(dir / "d.def", fx.def);
  cli::write_file(dir / "d.v", fx.netlist);
  cli::write_file(dir / "d.gds", std::string(fx.gds.begin(), fx.gds.end()));
  cli::write_file(dir / "d.map", fx.layermap);
  cli::write_file(dir / "a.txt", fx.attacks);
  cli::RunConfig rc;
  rc.lef = (dir / "d.lef").string();
  rc.def = (dir / "d.def").string();
  rc.netlist = (dir / "d.v").string();
  rc.gds = (dir / "d.gds").string();
  rc.layermap = (dir / "d.map").string();
  rc.attacks = (dir / "a.txt").string();
  return rc;
}

Outcome determinism() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "icas_accept_det";
  cli::RunConfig rc = write_fixture(fixtures::generate(fixtures::demo_spec()), dir);
  std::vector<std::string> reference;
  int runs = 0;
  std::ostringstream err;
  auto run = [&](unsigned threads, int i) {
    rc.threads = threads;
    rc.out = (dir / ("out_" + std::to_string(threads) + "_" + std::to_string(i))).string();
    c.expect(cli::cmd_analyze(rc, err) == cli::kOk, "analyze failed: " + err.str());
    std::vector<std::string> files;
    for (const char* f : cli::kReportFiles) files.push_back(slurp(fs::path(rc.out) / f));
    if (reference.empty()) reference = files;
    c.expect(files == reference, "outputs differ with " + std::to_string(threads) + " threads, run " + std::to_string(i));
    ++runs;
  };
  for (int i = 0; i < 5; ++i) run(1, i);
  for (unsigned t : {4u, 8u}) run(t, 0);
  fs::remove_all(dir);
  return c.done(std::to_string(runs) + " analyze runs (5 x 1 thread, 4 and 8 threads), byte-identical outputs");
}

Outcome performance() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / "icas_accept_perf";
  const fixtures::FixtureSpec spec = fixtures::scale_spec();
  const auto fx = fixtures::generate(spec);
  cli::RunConfig rc = write_fixture(fx, dir);
  rc.threads = 4;
  rc.out = (dir / "out").string();
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream err;
  const int code = cli::cmd_analyze(rc, err);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(code == cli::kOk, "analyze failed: " + err.str());
  c.expect(spec.cols * spec.rows == 512 * 512, "grid is not 512x512");
  c.expect(fx.expected.polygons >= 100000, "only " + std::to_string(fx.expected.polygons) + " polygons");
  c.expect(fx.expected.regular_nets >= 10000, "only " + std::to_string(fx.expected.regular_nets) + " nets");
  c.expect(secs < 300.0, "took " + std::to_string(secs) + " s");
  fs::remove_all(dir);
  std::ostringstream o;
  o << "512x512 sites, " << fx.expected.polygons << " polygons, " << fx.expected.regular_nets << " nets analyzed in "
    << secs << " s (limit 300 s)";
  return c.done(o.str());
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"trigger-space oracle equivalence", trigger_space_oracle},
      {"weighted blockage exactness and ratio-of-sums", weighted_combination},
      {"blockage extremes", blockage_extremes},
      {"geometry oracles", geometry_oracles},
      {"route-distance oracle", route_distance_oracle},
      {"viability semantics and filling monotonicity", viability_semantics},
      {"fan-in tracing oracle", fanin_oracle},
      {"GDSII round trip and flattening", gds_round_trip},
      {"determinism across runs and threads", determinism},
      {"performance envelope", performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%s %2zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
