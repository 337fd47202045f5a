#include <gtest/gtest.h>

#include <random>

#include "icas/geom.hpp"
#include "support/blobs.hpp"

using namespace icas::geom;

namespace {

Polygon square(Coord x0, Coord y0, Coord side) {
  return Polygon::from_rect({{x0, y0}, {x0 + side, y0 + side}});
}

// Minimum |dx|+|dy| over every integer point of both closed rects.
Coord brute_manhattan(const Rect& a, const Rect& b) {
  Coord best = std::numeric_limits<Coord>::max();
  for (Coord ax = a.lo.x; ax <= a.hi.x; ++ax)
    for (Coord ay = a.lo.y; ay <= a.hi.y; ++ay)
      for (Coord bx = b.lo.x; bx <= b.hi.x; ++bx)
        for (Coord by = b.lo.y; by <= b.hi.y; ++by)
          best = std::min(best, std::abs(ax - bx) + std::abs(ay - by));
  return best;
}

}  // namespace

TEST(PointInPolygon, InteriorExteriorBoundary) {
  const Polygon sq = square(0, 0, 2);
  EXPECT_TRUE(point_in_polygon({1, 1}, sq));
  EXPECT_FALSE(point_in_polygon({3, 1}, sq));
  EXPECT_TRUE(point_in_polygon({2, 1}, sq));
  EXPECT_TRUE(point_in_polygon({0, 0}, sq));
  EXPECT_TRUE(point_in_polygon({2, 2}, sq));
  EXPECT_FALSE(point_in_polygon({2, 3}, sq));
}

TEST(PointInPolygon, ConcaveRing) {
  // U shape: notch (1..2)x(1..3) is outside.
  const Polygon u({{0, 0}, {3, 0}, {3, 3}, {2, 3}, {2, 1}, {1, 1}, {1, 3}, {0, 3}});
  EXPECT_TRUE(point_in_polygon({0, 2}, u));
  EXPECT_FALSE(point_in_polygon({3, 4}, u));
  EXPECT_TRUE(point_in_polygon({1, 2}, u));   // notch wall
  EXPECT_TRUE(point_in_polygon({2, 1}, u));   // notch floor corner
  const SimplePolygon su(Polygon({{0, 0}, {6, 0}, {6, 6}, {4, 6}, {4, 2}, {2, 2}, {2, 6}, {0, 6}}));
  EXPECT_FALSE(point_in_polygon({3, 4}, su));
  EXPECT_TRUE(point_in_polygon({1, 5}, su));
  EXPECT_TRUE(point_in_polygon({5, 5}, su));
}

TEST(PointInPolygon, MalformedPolygonsThrow) {
  EXPECT_THROW(point_in_polygon({0, 0}, Polygon({{0, 0}, {1, 0}})), icas::GeometryError);
  // Bow-tie.
  EXPECT_THROW(point_in_polygon({0, 0}, Polygon({{0, 0}, {2, 2}, {2, 0}, {0, 2}})), icas::GeometryError);
  // Spike folding back along an edge.
  EXPECT_THROW(point_in_polygon({0, 0}, Polygon({{0, 0}, {4, 0}, {2, 0}, {2, 2}})), icas::GeometryError);
}

TEST(PointInPolygon, AgreesWithRasterizationOnRandomRectilinearRings) {
  std::mt19937_64 rng(0x1cA5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto blob = icas::test::random_blob(rng, 64, 50 + static_cast<int>(rng() % 1500));
    const SimplePolygon poly(icas::test::blob_polygon(blob, 2));
    ASSERT_EQ(area(poly.polygon()), 4 * blob.count());
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        ASSERT_EQ(point_in_polygon({2 * x + 1, 2 * y + 1}, poly), blob.at(x, y))
            << "trial " << trial << " cell " << x << "," << y;
  }
}

TEST(ClipIntersectionArea, BasicCases) {
  EXPECT_EQ(clip_intersection_area(square(0, 0, 10), square(0, 0, 10)), 100);
  EXPECT_EQ(clip_intersection_area(square(0, 0, 10), square(20, 20, 10)), 0);
  EXPECT_EQ(clip_intersection_area(square(0, 0, 10), square(5, 5, 10)), 25);
  EXPECT_EQ(clip_intersection_area(square(0, 0, 10), square(10, 0, 10)), 0);  // shared edge
}

TEST(ClipIntersectionArea, DegenerateInputIsZero) {
  EXPECT_EQ(clip_intersection_area(Polygon({{0, 0}, {5, 0}, {10, 0}}), square(0, 0, 10)), 0);
  EXPECT_EQ(clip_intersection_area(Polygon({{0, 0}, {5, 0}}), square(0, 0, 10)), 0);
  EXPECT_EQ(clip_intersection_area(Polygon::from_rect({{0, 0}, {0, 5}}), square(0, 0, 10)), 0);
}

TEST(ClipIntersectionArea, NonRectilinearRings) {
  const Polygon tri({{0, 0}, {10, 0}, {0, 10}});
  EXPECT_EQ(clip_intersection_area(tri, square(0, 0, 10)), 50);
  EXPECT_EQ(clip_intersection_area(square(0, 0, 10), tri), 50);
  // Clockwise copy of the same triangle.
  const Polygon tri_cw({{0, 0}, {0, 10}, {10, 0}});
  EXPECT_EQ(clip_intersection_area(tri_cw, tri), 50);
  // Diamond inside a square: full diamond area.
  const Polygon diamond({{10, 0}, {20, 10}, {10, 20}, {0, 10}});
  EXPECT_EQ(clip_intersection_area(diamond, square(0, 0, 20)), 200);
  // Diamond against left half of the square.
  EXPECT_EQ(clip_intersection_area(diamond, Polygon::from_rect({{0, 0}, {10, 20}})), 100);
  // Concave arrow vs box, hand-computed: arrow = square 0..4 minus triangle notch (area 4).
  const Polygon arrow({{0, 0}, {4, 0}, {4, 4}, {2, 2}, {0, 4}});
  EXPECT_EQ(area(arrow), 12);
  EXPECT_EQ(clip_intersection_area(arrow, square(0, 0, 4)), 12);
  EXPECT_EQ(clip_intersection_area(arrow, Polygon::from_rect({{0, 2}, {4, 4}})), 4);
}

TEST(ClipIntersectionArea, MatchesRasterizationOnRandomPairs) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = icas::test::random_blob(rng, 64, 100 + static_cast<int>(rng() % 1500));
    const auto b = icas::test::random_blob(rng, 64, 100 + static_cast<int>(rng() % 1500));
    int both = 0;
    for (int i = 0; i < 64 * 64; ++i) both += a.cells[i] && b.cells[i];
    const Polygon pa = icas::test::blob_polygon(a, 1), pb = icas::test::blob_polygon(b, 1);
    const Area ab = clip_intersection_area(pa, pb);
    EXPECT_EQ(ab, both) << "trial " << trial;
    EXPECT_EQ(ab, clip_intersection_area(pb, pa));
    EXPECT_EQ(clip_intersection_area(pa, pa), area(pa));
    EXPECT_LE(ab, std::min(area(pa), area(pb)));
  }
}

TEST(ManhattanRectDistance, Examples) {
  EXPECT_EQ(manhattan_rect_distance({{0, 0}, {2, 2}}, {{5, 7}, {6, 8}}), 8);
  EXPECT_EQ(manhattan_rect_distance({{0, 0}, {4, 4}}, {{2, 2}, {6, 6}}), 0);
  EXPECT_EQ(manhattan_rect_distance({{0, 0}, {4, 4}}, {{4, 1}, {6, 2}}), 0);
  EXPECT_EQ(manhattan_rect_distance(point_rect({0, 0}), {{100, 50}, {120, 70}}), 150);
}

TEST(ManhattanRectDistance, MatchesExhaustivePointEnumeration) {
  std::mt19937_64 rng(7);
  auto rnd_rect = [&] {
    const Coord x = static_cast<Coord>(rng() % 20), y = static_cast<Coord>(rng() % 20);
    return Rect{{x, y}, {x + 1 + static_cast<Coord>(rng() % 5), y + 1 + static_cast<Coord>(rng() % 5)}};
  };
  for (int i = 0; i < 200; ++i) {
    const Rect a = rnd_rect(), b = rnd_rect();
    const Coord d = manhattan_rect_distance(a, b);
    ASSERT_EQ(d, brute_manhattan(a, b)) << a << " " << b;
    ASSERT_EQ(d, manhattan_rect_distance(b, a));
  }
}

TEST(UnionArea, OverlapsCountedOnce) {
  const std::vector<Rect> rs{{{0, 0}, {10, 10}}, {{5, 5}, {15, 15}}, {{20, 0}, {21, 1}}, {{0, 0}, {0, 9}}};
  EXPECT_EQ(union_area(rs), 100 + 100 - 25 + 1);
  EXPECT_EQ(union_area(std::span<const Rect>{}), 0);
}

TEST(DecomposeRectilinear, PiecesAreDisjointAndCoverArea) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto blob = icas::test::random_blob(rng, 32, 300);
    const Polygon p = icas::test::blob_polygon(blob, 3);
    const auto parts = decompose_rectilinear(p);
    Area sum = 0;
    for (const Rect& r : parts) sum += r.area();
    EXPECT_EQ(sum, area(p));
    EXPECT_EQ(union_area(parts), area(p));
  }
}
