#pragma once

// Random simple rectilinear polygons built from 4-connected cell blobs, plus
// the unit-cell rasterization they came from (the oracle).

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "icas/geom.hpp"

namespace icas::test {

struct Blob {
  int n = 0;
  std::vector<char> cells;  // row-major, cells[y * n + x]

  bool at(int x, int y) const { return x >= 0 && y >= 0 && x < n && y < n && cells[y * n + x]; }
  void set(int x, int y) { cells[y * n + x] = 1; }
  int count() const {
    int c = 0;
    for (char v : cells) c += v;
    return c;
  }
};

inline Blob random_blob(std::mt19937_64& rng, int n, int steps) {
  Blob b{n, std::vector<char>(n * n, 0)};
  auto pick = [&](int hi) { return static_cast<int>(rng() % static_cast<std::uint64_t>(hi)); };
  std::vector<std::pair<int, int>> members{{pick(n), pick(n)}};
  b.set(members[0].first, members[0].second);
  const int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
  for (int s = 0; s < steps; ++s) {
    auto [x, y] = members[pick(static_cast<int>(members.size()))];
    const int k = pick(4);
    const int nx = x + dx[k], ny = y + dy[k];
    if (nx < 0 || ny < 0 || nx >= n || ny >= n || b.at(nx, ny)) continue;
    b.set(nx, ny);
    members.emplace_back(nx, ny);
  }
  // Repair: fill holes and diagonal pinches until the boundary is one simple ring.
  for (bool changed = true; changed;) {
    changed = false;
    for (int y = 0; y + 1 < n; ++y)
      for (int x = 0; x + 1 < n; ++x) {
        const bool a = b.at(x, y), c = b.at(x + 1, y), d = b.at(x, y + 1), e = b.at(x + 1, y + 1);
        if ((a && e && !c && !d) || (c && d && !a && !e)) {
          if (!a) b.set(x, y);
          else b.set(x + 1, y);
          changed = true;
        }
      }
    std::vector<char> outside((n + 2) * (n + 2), 0);
    std::vector<std::pair<int, int>> stack{{-1, -1}};
    outside[0] = 1;
    while (!stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k], ny = y + dy[k];
        if (nx < -1 || ny < -1 || nx > n || ny > n) continue;
        char& o = outside[(ny + 1) * (n + 2) + nx + 1];
        if (o || b.at(nx, ny)) continue;
        o = 1;
        stack.emplace_back(nx, ny);
      }
    }
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        if (!b.at(x, y) && !outside[(y + 1) * (n + 2) + x + 1]) {
          b.set(x, y);
          changed = true;
        }
  }
  return b;
}

/// Counter-clockwise boundary ring of a repaired blob, coordinates scaled by `scale`.
inline geom::Polygon blob_polygon(const Blob& b, geom::Coord scale) {
  using geom::Point;
  std::map<Point, Point> next;
  for (int y = 0; y < b.n; ++y)
    for (int x = 0; x < b.n; ++x) {
      if (!b.at(x, y)) continue;
      if (!b.at(x, y - 1)) next[{x, y}] = {x + 1, y};
      if (!b.at(x + 1, y)) next[{x + 1, y}] = {x + 1, y + 1};
      if (!b.at(x, y + 1)) next[{x + 1, y + 1}] = {x, y + 1};
      if (!b.at(x - 1, y)) next[{x, y + 1}] = {x, y};
    }
  if (next.empty()) throw std::logic_error("empty blob");
  std::vector<Point> ring;
  const Point start = next.begin()->first;
  Point cur = start;
  std::size_t steps = 0;
  do {
    ring.push_back(cur);
    cur = next.at(cur);
    ++steps;
  } while (cur != start);
  if (steps != next.size()) throw std::logic_error("blob boundary is not a single ring");
  std::vector<Point> simplified;
  const std::size_t m = ring.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Point p = ring[(i + m - 1) % m], c = ring[i], q = ring[(i + 1) % m];
    if (geom::cross(p, c, q) != 0) simplified.push_back({c.x * scale, c.y * scale});
  }
  return geom::Polygon(std::move(simplified));
}

}  // namespace icas::test
