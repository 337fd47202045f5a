#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "icas/metrics.hpp"
#include "support/oracles.hpp"
#include "support/small_tech.hpp"

using namespace icas;
using namespace icas::metrics;
using icas::test::kLef;

namespace {

std::shared_ptr<const lefdef::Lef> tech() { return std::make_shared<lefdef::Lef>(lefdef::parse_lef(kLef)); }

// cols x rows sites of 380 x 3420 dbu.
std::string floorplan(int cols, int rows, const std::string& body) {
  std::string s = "VERSION 5.8 ;\nDESIGN t ;\nUNITS DISTANCE MICRONS 2000 ;\nDIEAREA ( 0 0 ) ( " +
                  std::to_string(cols * 380) + " " + std::to_string(rows * 3420) + " ) ;\n";
  for (int r = 0; r < rows; ++r)
    s += "ROW r" + std::to_string(r) + " core 0 " + std::to_string(r * 3420) + (r % 2 ? " FS" : " N") + " DO " +
         std::to_string(cols) + " BY 1 STEP 380 0 ;\n";
  return s + body + "END DESIGN\n";
}

netlist::CriticalSet critical(std::initializer_list<std::string> names) {
  netlist::CriticalSet cs;
  for (const auto& n : names) cs.members[n] = 0;
  return cs;
}

LayoutDb make_db(const std::string& def_text, const netlist::CriticalSet& cs) {
  const auto lef = tech();
  return layout::build_layout(lef, lefdef::parse_def(def_text, *lef), cs);
}

PlacementGrid bitmap_grid(const std::vector<std::vector<bool>>& open) {
  PlacementGrid g(static_cast<std::int64_t>(open[0].size()), static_cast<std::int64_t>(open.size()));
  for (std::size_t r = 0; r < open.size(); ++r)
    for (std::size_t c = 0; c < open[r].size(); ++c)
      if (!open[r][c]) g.at(static_cast<std::int64_t>(c), static_cast<std::int64_t>(r)) = layout::SiteState::Occupied;
  return g;
}

std::vector<Point> expand(const std::vector<OpenRun>& runs, int layer = -1) {
  std::vector<Point> pts;
  for (const OpenRun& r : runs)
    if (layer < 0 || r.layer == layer)
      for (std::int64_t i = 0; i < r.count; ++i) pts.push_back(r.at(i));
  return pts;
}

}  // namespace

// ---------------------------------------------------------------------------
// Trigger spaces

TEST(TriggerSpaces, EmptyGridIsOneRegion) {
  const auto res = trigger_spaces(PlacementGrid(4, 4));
  ASSERT_EQ(res.regions.size(), 1u);
  EXPECT_EQ(res.regions[0].size, 16);
  EXPECT_EQ(res.histogram, (std::map<std::int64_t, std::int64_t>{{16, 1}}));
  EXPECT_EQ(res.regions[0].bbox, (Rect{{0, 0}, {4, 4}}));
}

TEST(TriggerSpaces, CheckerboardHasNoDiagonalMerging) {
  std::vector<std::vector<bool>> open(4, std::vector<bool>(4));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) open[r][c] = (r + c) % 2 == 0;
  const auto res = trigger_spaces(bitmap_grid(open));
  EXPECT_EQ(res.regions.size(), 8u);
  EXPECT_EQ(res.histogram, (std::map<std::int64_t, std::int64_t>{{1, 8}}));
}

TEST(TriggerSpaces, FillerSitesAreOpen) {
  PlacementGrid g(3, 1);
  g.at(1, 0) = layout::SiteState::Filler;
  EXPECT_EQ(trigger_spaces(g).regions.size(), 1u);
  g.at(1, 0) = layout::SiteState::Occupied;
  EXPECT_EQ(trigger_spaces(g).regions.size(), 2u);
}

TEST(TriggerSpaces, MatchesFloodFillOnRandomBitmaps) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 300; ++t) {
    const double p = 0.2 + 0.6 * static_cast<double>(rng() % 1000) / 1000.0;
    std::vector<std::vector<bool>> open(64, std::vector<bool>(64));
    for (auto& row : open)
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = static_cast<double>(rng() % 10000) / 10000.0 < p;
    const auto oracle = test::flood_fill_regions(open);
    const auto res = trigger_spaces(bitmap_grid(open));
    ASSERT_EQ(res.regions.size(), oracle.size());
    std::map<std::int64_t, std::int64_t> hist;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      const std::set<test::Cell> got(res.regions[i].sites.begin(), res.regions[i].sites.end());
      ASSERT_EQ(got, oracle[i]);
      EXPECT_EQ(res.regions[i].size, static_cast<std::int64_t>(oracle[i].size()));
      ++hist[static_cast<std::int64_t>(oracle[i].size())];
      total += res.regions[i].size;
      // Row runs tile the region exactly.
      geom::Area run_area = 0;
      for (const Rect& r : res.regions[i].runs) run_area += r.area();
      EXPECT_EQ(run_area, res.regions[i].size);
    }
    EXPECT_EQ(res.histogram, hist);
    std::int64_t open_sites = 0;
    for (const auto& row : open) open_sites += std::count(row.begin(), row.end(), true);
    EXPECT_EQ(total, open_sites);
  }
}

TEST(TriggerSpaces, AddingAnObstacleNeverGrowsRegions) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::vector<bool>> open(16, std::vector<bool>(16));
    for (auto& row : open)
      for (std::size_t c = 0; c < row.size(); ++c) row[c] = rng() % 3 != 0;
    auto before = trigger_spaces(bitmap_grid(open));
    open[rng() % 16][rng() % 16] = false;
    auto after = trigger_spaces(bitmap_grid(open));
    // Every region after lies inside a single region from before.
    std::map<std::pair<std::int64_t, std::int64_t>, int> owner;
    for (const auto& r : before.regions)
      for (const auto& s : r.sites) owner[s] = r.id;
    for (const auto& r : after.regions) {
      const int id = owner.at(r.sites.front());
      for (const auto& s : r.sites) EXPECT_EQ(owner.at(s), id);
      EXPECT_LE(r.size, before.regions[static_cast<std::size_t>(id)].size);
    }
    EXPECT_LE(after.regions.size(), before.regions.size() + 3);
  }
}

// ---------------------------------------------------------------------------
// Blockage sub-algorithms against brute force

TEST(PerimeterSampling, MatchesDenseOracle) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 400; ++t) {
    const Rect r = Rect::from_corners({static_cast<Coord>(rng() % 40), static_cast<Coord>(rng() % 40)},
                                      {static_cast<Coord>(45 + rng() % 60), static_cast<Coord>(45 + rng() % 60)});
    const Coord d = 1 + static_cast<Coord>(rng() % 12);
    const Coord g = 1 + static_cast<Coord>(rng() % 5);
    const Coord min_open = static_cast<Coord>(rng() % 30);
    std::vector<Rect> foreign;
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) {
      const Point a{static_cast<Coord>(rng() % 130) - 15, static_cast<Coord>(rng() % 130) - 15};
      foreign.push_back(Rect::from_corners(a, {a.x + 1 + static_cast<Coord>(rng() % 40), a.y + 1 + static_cast<Coord>(rng() % 40)}));
    }
    const auto oracle = test::perimeter_oracle(r, d, g, min_open, foreign);
    const auto got = detail::sample_perimeter(r, d, g, min_open, foreign, 0);
    ASSERT_EQ(got.perimeter, oracle.perimeter);
    ASSERT_EQ(got.blocked, oracle.blocked) << "trial " << t;
    const auto pts = expand(got.open);
    EXPECT_EQ(std::set<Point>(pts.begin(), pts.end()), oracle.open);
    EXPECT_EQ(pts.size(), oracle.open.size());
  }
}

TEST(AreaProjection, MatchesRasterOracle) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 300; ++t) {
    const Rect fp = Rect::from_corners({0, 0}, {10 + static_cast<Coord>(rng() % 40), 10 + static_cast<Coord>(rng() % 40)});
    const Coord cw = static_cast<Coord>(rng() % 9), ch = static_cast<Coord>(rng() % 9);
    std::vector<Rect> foreign;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      const Point a{static_cast<Coord>(rng() % 60) - 5, static_cast<Coord>(rng() % 60) - 5};
      foreign.push_back(Rect::from_corners(a, {a.x + 1 + static_cast<Coord>(rng() % 25), a.y + 1 + static_cast<Coord>(rng() % 25)}));
    }
    const auto got = detail::project_area(fp, foreign, cw, ch, 0);
    EXPECT_EQ(got.area, fp.area());
    ASSERT_EQ(got.blocked, test::area_oracle(fp, foreign, cw, ch)) << "trial " << t;
    // Each open point sits on a free part of the footprint.
    for (const OpenRun& o : got.open) {
      EXPECT_TRUE(fp.contains(o.start));
      bool strictly_inside_foreign = false;
      for (const Rect& f : foreign)
        strictly_inside_foreign |= o.start.x > f.lo.x && o.start.x < f.hi.x && o.start.y > f.lo.y && o.start.y < f.hi.y;
      EXPECT_FALSE(strictly_inside_foreign);
    }
    EXPECT_EQ(got.open.empty(), got.blocked == got.area);
  }
}

TEST(Blockage, AddingForeignShapesIsMonotone) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    const Rect r{{20, 20}, {60 + static_cast<Coord>(rng() % 30), 34}};
    std::vector<Rect> foreign;
    Coord prev_p = -1, prev_a = -1;
    for (int i = 0; i < 6; ++i) {
      const auto p = detail::sample_perimeter(r, 10, 1, 8, foreign, 0);
      const auto a = detail::project_area(r, foreign, 4, 4, 1);
      EXPECT_GE(p.blocked, prev_p);
      EXPECT_GE(a.blocked, prev_a);
      prev_p = p.blocked;
      prev_a = a.blocked;
      const Point o{static_cast<Coord>(rng() % 100), static_cast<Coord>(rng() % 60)};
      foreign.push_back(Rect::from_corners(o, {o.x + 1 + static_cast<Coord>(rng() % 20), o.y + 1 + static_cast<Coord>(rng() % 20)}));
    }
  }
}

// ---------------------------------------------------------------------------
// Blockage on layouts. Wires sit on metal2, whose only neighbour is metal1.
// metal2 pitch is 380, width 140; the via1 cut is 120 square.

TEST(Blockage, IsolatedWireIsOpen) {
  const LayoutDb db = make_db(floorplan(10, 1, "NETS 1 ;\n- sec_a + ROUTED metal2 ( 2000 1000 ) ( 2000 2000 ) ;\nEND NETS\n"),
                              critical({"sec_a"}));
  const auto res = net_blockage(db);
  ASSERT_EQ(res.per_net.size(), 1u);
  const NetBlockage& b = res.per_net[0];
  EXPECT_EQ(b.same_layer, Rational(0));
  EXPECT_EQ(b.adjacent_layer, Rational(0));
  EXPECT_EQ(b.overall, Rational(0));
  EXPECT_EQ(b.perimeter, 2 * (900 + 1760));
  EXPECT_EQ(b.area, 140 * 1000);
  EXPECT_FALSE(b.open_points.empty());
}

namespace {

const char* kRing =
    "- VSS + ROUTED metal2 200 ( 1400 620 ) ( 2600 620 ) NEW metal2 200 ( 1400 2380 ) ( 2600 2380 )\n"
    "  NEW metal2 200 ( 1550 500 ) ( 1550 2500 ) NEW metal2 200 ( 2450 500 ) ( 2450 2500 ) ;\n";
const char* kCover = "- VDD + ROUTED metal1 400 ( 2000 900 ) ( 2000 2100 ) ;\n";
const char* kWire = "NETS 1 ;\n- sec_a + ROUTED metal2 ( 2000 1000 ) ( 2000 2000 ) ;\nEND NETS\n";

std::string special(const std::vector<const char*>& nets) {
  std::string s = "SPECIALNETS " + std::to_string(nets.size()) + " ;\n";
  for (const char* n : nets) s += n;
  return s + "END SPECIALNETS\n";
}

}  // namespace

TEST(Blockage, RingAndCoverAreFullyBlocked) {
  const LayoutDb full = make_db(floorplan(10, 1, special({kRing, kCover}) + kWire), critical({"sec_a"}));
  const NetBlockage b = net_blockage(full).per_net.at(0);
  EXPECT_EQ(b.same_layer, Rational(1));
  EXPECT_EQ(b.adjacent_layer, Rational(1));
  EXPECT_EQ(b.overall, Rational(1));
  EXPECT_TRUE(b.open_points.empty());

  const LayoutDb ring = make_db(floorplan(10, 1, special({kRing}) + kWire), critical({"sec_a"}));
  const NetBlockage r = net_blockage(ring).per_net.at(0);
  EXPECT_EQ(r.same_layer, Rational(1));
  EXPECT_EQ(r.adjacent_layer, Rational(0));
  EXPECT_EQ(r.overall, Rational(2, 3));
}

TEST(Blockage, EastFaceAgainstDenseOracle) {
  const char* east = "- VSS + ROUTED metal2 200 ( 2550 500 ) ( 2550 2500 ) ;\n";
  const LayoutDb db = make_db(floorplan(10, 1, special({east}) + kWire), critical({"sec_a"}));
  const NetBlockage b = net_blockage(db).per_net.at(0);
  const Rect wire = db.net("sec_a")->wires.at(0).second;
  const auto oracle = test::perimeter_oracle(wire, 380, 1, 140 + 130, {Rect{{2450, 500}, {2650, 2500}}});
  EXPECT_EQ(b.perimeter, oracle.perimeter);
  EXPECT_EQ(b.perimeter_blocked, oracle.blocked);
  EXPECT_EQ(oracle.blocked, 1760 + 1);  // the east side including both its corners
  EXPECT_EQ(b.adjacent_layer, Rational(0));
  EXPECT_EQ(b.overall, Rational(2, 3) * Rational(oracle.blocked, oracle.perimeter));
  EXPECT_EQ(b.overall * Rational(3), Rational(2) * b.same_layer + b.adjacent_layer);
}

TEST(Blockage, DesignValuesAreRatioOfSums) {
  // A short wire fully ringed and a long open wire: per-net fractions 1 and 0.
  const std::string nets =
      "NETS 2 ;\n- sec_a + ROUTED metal2 ( 2000 1000 ) ( 2000 2000 ) ;\n"
      "- sec_b + ROUTED metal2 ( 6000 200 ) ( 6000 6600 ) ;\nEND NETS\n";
  const LayoutDb db = make_db(floorplan(20, 2, special({kRing}) + nets), critical({"sec_a", "sec_b"}));
  const auto res = net_blockage(db);
  const NetBlockage& a = *res.find("sec_a");
  const NetBlockage& b = *res.find("sec_b");
  EXPECT_EQ(a.same_layer, Rational(1));
  EXPECT_EQ(b.same_layer, Rational(0));
  const Rational ratio_of_sums(a.perimeter_blocked + b.perimeter_blocked, a.perimeter + b.perimeter);
  const Rational mean_of_ratios = (a.same_layer + b.same_layer) / Rational(2);
  EXPECT_EQ(res.design.same_layer, ratio_of_sums);
  EXPECT_NE(res.design.same_layer, mean_of_ratios);
  EXPECT_EQ(res.design.adjacent_layer, Rational(a.area_blocked + b.area_blocked, a.area + b.area));
  EXPECT_EQ(res.design.overall, (Rational(2) * res.design.same_layer + res.design.adjacent_layer) / Rational(3));
}

TEST(Blockage, MissingGeometryIsExcludedWithWarning) {
  netlist::CriticalSet cs = critical({"sec_a", "sec_pinonly"});
  const LayoutDb db = make_db(floorplan(10, 1, "NETS 2 ;\n- sec_a + ROUTED metal2 ( 2000 1000 ) ( 2000 2000 ) ;\n"
                                               "- sec_pinonly ( u1 A ) ;\nEND NETS\n"),
                              cs);
  const auto res = net_blockage(db);
  EXPECT_EQ(res.per_net.size(), 1u);
  EXPECT_EQ(res.warnings.size(), 1u);
  EXPECT_THROW(net_blockage(db, {0, std::nullopt, 1}), MetricError);
  EXPECT_THROW(net_blockage(db, {1, Coord{0}, 1}), MetricError);
}

// ---------------------------------------------------------------------------
// Net-length statistics

TEST(NetLengthStats, TwoNets) {
  const LayoutDb db = make_db(floorplan(10, 1, "NETS 2 ;\n- a + ROUTED metal1 ( 100 100 ) ( 200 100 ) ;\n"
                                               "- b + ROUTED metal1 ( 100 500 ) ( 400 500 ) ;\nEND NETS\n"),
                              {});
  const NetLengthStats s = net_length_stats(db);
  EXPECT_EQ(s.mean(), 200.0);
  EXPECT_EQ(s.stddev(), 100.0);
  EXPECT_EQ(s.sigma(400), 2.0);
  EXPECT_EQ(s.sigma(200), 0.0);
}

TEST(NetLengthStats, DegenerateAndErrors) {
  const LayoutDb db = make_db(floorplan(10, 1, "NETS 2 ;\n- a + ROUTED metal1 ( 100 100 ) ( 200 100 ) ;\n"
                                               "- b + ROUTED metal1 ( 100 500 ) ( 200 500 ) ;\nEND NETS\n"),
                              {});
  const NetLengthStats s = net_length_stats(db);
  EXPECT_EQ(s.stddev(), 0.0);
  EXPECT_EQ(s.sigma(100), 0.0);
  EXPECT_EQ(s.sigma(150), std::numeric_limits<double>::infinity());
  const LayoutDb one = make_db(floorplan(10, 1, "NETS 1 ;\n- a + ROUTED metal1 ( 100 100 ) ( 200 100 ) ;\nEND NETS\n"), {});
  EXPECT_THROW(net_length_stats(one), MetricError);
}

TEST(NetLengthStats, MatchesTwoPassRationalOracle) {
  std::mt19937_64 rng(8);
  std::string nets = "NETS 50 ;\n";
  std::vector<Coord> lengths;
  for (int i = 0; i < 50; ++i) {
    const Coord x = 10 * static_cast<Coord>(rng() % 100), y = 10 * static_cast<Coord>(rng() % 300);
    const Coord dx = 10 * (1 + static_cast<Coord>(rng() % 200)), dy = 10 * static_cast<Coord>(rng() % 30);
    nets += "- n" + std::to_string(i) + " + ROUTED metal1 ( " + std::to_string(x) + " " + std::to_string(y) + " ) ( " +
            std::to_string(x + dx) + " * ) NEW metal2 ( " + std::to_string(x + dx) + " " + std::to_string(y) + " ) ( * " +
            std::to_string(y + dy) + " ) ;\n";
    lengths.push_back(dx + dy);
  }
  const LayoutDb db = make_db(floorplan(10, 1, nets + "END NETS\n"), {});
  const NetLengthStats s = net_length_stats(db);
  ASSERT_EQ(s.n, 50);
  Rational mu(0);
  for (Coord l : lengths) mu = mu + Rational(l);
  mu = mu / Rational(50);
  Rational var(0);
  for (Coord l : lengths) var = var + (Rational(l) - mu) * (Rational(l) - mu);
  var = var / Rational(50);
  EXPECT_EQ(Rational(static_cast<std::int64_t>(s.sum), 50), mu);
  EXPECT_EQ(Rational(static_cast<std::int64_t>(s.n * s.sum_sq - s.sum * s.sum), 2500), var);
  EXPECT_NEAR(s.stddev(), std::sqrt(var.to_double()), 1e-9 * s.stddev());
}

// ---------------------------------------------------------------------------
// Route distance

TEST(RouteDistance, PointToRectExamples) {
  EXPECT_EQ(run_rect_distance({0, {0, 0}, {0, 0}, 1}, Rect{{-5, -5}, {5, 5}}), 0);
  EXPECT_EQ(run_rect_distance({0, {0, 0}, {0, 0}, 1}, Rect{{100, 50}, {120, 70}}), 150);
  // A run passing under a rect reaches it vertically.
  EXPECT_EQ(run_rect_distance({0, {0, 0}, {3, 0}, 100}, Rect{{100, 50}, {120, 70}}), 50);
  EXPECT_EQ(run_rect_distance({0, {0, 0}, {7, 0}, 10}, Rect{{100, 50}, {120, 70}}), 50 + 100 - 63);
}

TEST(RouteDistance, RunDistanceMatchesEnumeration) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 2000; ++t) {
    const int dir = static_cast<int>(rng() % 4);
    const Coord s = 1 + static_cast<Coord>(rng() % 9);
    const Point step = dir == 0 ? Point{s, 0} : dir == 1 ? Point{-s, 0} : dir == 2 ? Point{0, s} : Point{0, -s};
    const OpenRun run{0, {static_cast<Coord>(rng() % 200) - 100, static_cast<Coord>(rng() % 200) - 100}, step,
                      1 + static_cast<std::int64_t>(rng() % 40)};
    const Point a{static_cast<Coord>(rng() % 200) - 100, static_cast<Coord>(rng() % 200) - 100};
    const Rect r = Rect::from_corners(a, {a.x + static_cast<Coord>(rng() % 30), a.y + static_cast<Coord>(rng() % 30)});
    std::vector<Point> pts;
    for (std::int64_t i = 0; i < run.count; ++i) pts.push_back(run.at(i));
    ASSERT_EQ(run_rect_distance(run, r), test::exhaustive_distance(pts, {r}));
  }
}

namespace {

// Random multi-row layout with NAND2/FILL1 cells and two-layer L-shaped nets.
std::string random_layout(std::mt19937_64& rng, int cols, int rows, int cells, int nets, int critical_nets) {
  std::vector<std::vector<bool>> used(static_cast<std::size_t>(rows), std::vector<bool>(static_cast<std::size_t>(cols)));
  std::string comps;
  int placed = 0;
  for (int i = 0; i < cells * 4; ++i) {
    if (placed == cells) break;
    const bool filler = rng() % 4 == 0;
    const int span = filler ? 1 : 4;
    const int r = static_cast<int>(rng() % static_cast<unsigned>(rows));
    const int c = static_cast<int>(rng() % static_cast<unsigned>(cols - span + 1));
    bool ok = true;
    for (int k = c; k < c + span; ++k) ok = ok && !used[r][k];
    if (!ok) continue;
    for (int k = c; k < c + span; ++k) used[r][k] = true;
    comps += "- c" + std::to_string(placed++) + (filler ? " FILL1" : " NAND2") + " + PLACED ( " + std::to_string(c * 380) +
             " " + std::to_string(r * 3420) + " ) " + (r % 2 ? "FS" : "N") + " ;\n";
  }
  std::string body = "COMPONENTS " + std::to_string(placed) + " ;\n" + comps + "END COMPONENTS\n";
  body += "NETS " + std::to_string(nets) + " ;\n";
  const Coord W = cols * 380, H = rows * 3420;
  for (int i = 0; i < nets; ++i) {
    const Coord x0 = 10 * static_cast<Coord>(rng() % static_cast<unsigned>(W / 10 - 1)) + 10;
    const Coord y0 = 10 * static_cast<Coord>(rng() % static_cast<unsigned>(H / 10 - 1)) + 10;
    const Coord x1 = 10 * static_cast<Coord>(rng() % static_cast<unsigned>(W / 10 - 1)) + 10;
    const Coord y1 = 10 * static_cast<Coord>(rng() % static_cast<unsigned>(H / 10 - 1)) + 10;
    const std::string name = i < critical_nets ? "sec_" + std::to_string(i) : "n" + std::to_string(i);
    body += "- " + name + " + ROUTED metal1 ( " + std::to_string(x0) + " " + std::to_string(y0) + " ) ( " +
            std::to_string(x1) + " * ) via1_0 ( * " + std::to_string(y1) + " ) ;\n";
  }
  return floorplan(cols, rows, body + "END NETS\n");
}

netlist::CriticalSet prefixed(int n) {
  netlist::CriticalSet cs;
  for (int i = 0; i < n; ++i) cs.members["sec_" + std::to_string(i)] = 0;
  return cs;
}

}  // namespace

TEST(RouteDistance, MatrixMatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 6; ++t) {
    const LayoutDb db = make_db(random_layout(rng, 24, 4, 14, 12, 5), prefixed(5));
    const auto regions = trigger_spaces(db.grid);
    const auto blockage = net_blockage(db);
    const auto stats = net_length_stats(db);
    const auto m = route_distance(regions, blockage, stats);
    std::size_t expected_entries = 0;
    for (const NetBlockage& nb : blockage.per_net) {
      EXPECT_EQ(nb.overall * Rational(3), Rational(2) * nb.same_layer + nb.adjacent_layer);
      if (!(nb.overall < Rational(1))) continue;
      const auto pts = expand(nb.open_points);
      for (const TriggerSpace& ts : regions.regions) {
        std::vector<Rect> sites;
        for (auto [c, r] : ts.sites) sites.push_back(db.grid.site_rect(c, r));
        const RouteEntry* e = m.find(nb.net, ts.id);
        ASSERT_NE(e, nullptr);
        EXPECT_EQ(e->manhattan, test::exhaustive_distance(pts, sites));
        EXPECT_EQ(e->sigma, stats.sigma(e->manhattan));
        ++expected_entries;
      }
    }
    EXPECT_EQ(m.entries.size(), expected_entries);
    for (const auto& col : m.heatmap.fractions) {
      const double sum = std::accumulate(col.begin(), col.end(), 0.0);
      if (sum != 0.0) EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(RouteDistance, IndependentOfEnumerationOrderAndThreads) {
  std::mt19937_64 rng(4);
  const LayoutDb db = make_db(random_layout(rng, 20, 3, 10, 10, 4), prefixed(4));
  const auto regions = trigger_spaces(db.grid);
  const auto stats = net_length_stats(db);
  const auto b1 = net_blockage(db, {1, std::nullopt, 1});
  const auto b4 = net_blockage(db, {1, std::nullopt, 4});
  ASSERT_EQ(b1.per_net.size(), b4.per_net.size());
  for (std::size_t i = 0; i < b1.per_net.size(); ++i) {
    EXPECT_EQ(b1.per_net[i].overall, b4.per_net[i].overall);
    EXPECT_EQ(b1.per_net[i].open_points, b4.per_net[i].open_points);
  }
  auto reversed = b1;
  std::reverse(reversed.per_net.begin(), reversed.per_net.end());
  const auto m1 = route_distance(regions, b1, stats, {}, 1);
  const auto m2 = route_distance(regions, reversed, stats, {}, 3);
  ASSERT_EQ(m1.entries.size(), m2.entries.size());
  for (std::size_t i = 0; i < m1.entries.size(); ++i) {
    EXPECT_EQ(m1.entries[i].net, m2.entries[i].net);
    EXPECT_EQ(m1.entries[i].region, m2.entries[i].region);
    EXPECT_EQ(m1.entries[i].manhattan, m2.entries[i].manhattan);
  }
  EXPECT_EQ(m1.heatmap.counts, m2.heatmap.counts);
}

TEST(RouteDistance, HeatmapBinning) {
  EXPECT_EQ(default_size_edges(1), (std::vector<std::int64_t>{1}));
  EXPECT_EQ(default_size_edges(9), (std::vector<std::int64_t>{1, 2, 4, 8}));
  const std::vector<double> edges{0.5, 1.0, 2.0, 3.0};
  EXPECT_EQ(sigma_bin(-4.0, edges), 0u);
  EXPECT_EQ(sigma_bin(0.5, edges), 0u);
  EXPECT_EQ(sigma_bin(0.51, edges), 1u);
  EXPECT_EQ(sigma_bin(3.0, edges), 3u);
  EXPECT_EQ(sigma_bin(std::numeric_limits<double>::infinity(), edges), 4u);
  EXPECT_EQ(size_bin(1, {1, 2, 4}), 0u);
  EXPECT_EQ(size_bin(3, {1, 2, 4}), 1u);
  EXPECT_EQ(size_bin(400, {1, 2, 4}), 2u);
}

TEST(RouteDistance, NoUnblockedNetsGivesEmptyMatrix) {
  const LayoutDb full = make_db(floorplan(10, 1, special({kRing, kCover}) +
                                                     "NETS 2 ;\n- sec_a + ROUTED metal2 ( 2000 1000 ) ( 2000 2000 ) ;\n"
                                                     "- b + ROUTED metal1 ( 100 100 ) ( 900 100 ) ;\nEND NETS\n"),
                                critical({"sec_a"}));
  const auto m = route_distance(trigger_spaces(full.grid), net_blockage(full), net_length_stats(full));
  EXPECT_TRUE(m.entries.empty());
  EXPECT_EQ(m.warnings.size(), 1u);
}
