// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <functional>
#include <limits>
#include <queue>
#include <random>

#include "evac/pathfinding.hpp"

using namespace evac;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Forward Dijkstra over the same moves; returns cost-to-come for every cell.
std::vector<double> dijkstra(const NavGrid& g, int start) {
  std::vector<double> dist(g.blocked.size(), kInf);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[start] = 0.0;
  pq.push({0.0, start});
  while (!pq.empty()) {
    const auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[c]) continue;
    const int cx = g.cell_x(c), cy = g.cell_y(c);
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (!dx && !dy) continue;
        if (!g.in_grid(cx + dx, cy + dy)) continue;
        const int n = g.index(cx + dx, cy + dy);
        if (g.blocked[n]) continue;
        if (dx && dy && (g.blocked[g.index(cx + dx, cy)] || g.blocked[g.index(cx, cy + dy)])) continue;
        const double nd = d + step_cost(g, c, n);
        if (nd < dist[n]) {
          dist[n] = nd;
          pq.push({nd, n});
        }
      }
  }
  return dist;
}

double oracle_cost(const NavGrid& g, int start) {
  const auto dist = dijkstra(g, start);
  double best = kInf;
  for (int e : g.exit_cells) best = std::min(best, dist[e]);
  return best;
}

NavGrid random_grid(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> cost(1.0, 4.0), u(0.0, 1.0);
  NavGrid g(n, n, 1.0);
  for (std::size_t i = 0; i < g.cost.size(); ++i) {
    g.cost[i] = cost(rng);
    g.blocked[i] = u(rng) < 0.25;
  }
  const int e = static_cast<int>(u(rng) * g.cost.size());
  g.blocked[e] = 0;
  g.mark_exit(e);
  return g;
}

}  // namespace

TEST_CASE("open grid gives one straight segment of cost 7") {
  NavGrid g(10, 10, 1.0);
  g.mark_exit(g.index(8, 1));
  const auto path = plan(g, g.center(g.index(1, 1)));
  REQUIRE(path);
  CHECK(path->points.size() == 2);
  CHECK(path->total_cost == doctest::Approx(7.0).epsilon(1e-15));
  CHECK(path->points.back() == g.center(g.index(8, 1)));
}

TEST_CASE("a U-shaped wall is routed around at the oracle's cost") {
  NavGrid g(20, 20, 1.0);
  for (int y = 4; y <= 15; ++y) g.blocked[g.index(12, y)] = 1;
  for (int x = 6; x <= 12; ++x) {
    g.blocked[g.index(x, 4)] = 1;
    g.blocked[g.index(x, 15)] = 1;
  }
  g.mark_exit(g.index(18, 10));
  const int start = g.index(9, 10);
  const auto path = plan(g, g.center(start));
  REQUIRE(path);
  CHECK(path->total_cost == oracle_cost(g, start));
  CHECK(path->points.size() > 2);
  for (std::size_t i = 1; i < path->points.size(); ++i)
    CHECK(line_of_sight(g, path->points[i - 1], path->points[i]));
}

TEST_CASE("an enclosed start is unreachable") {
  NavGrid g(10, 10, 1.0);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if (dx || dy) g.blocked[g.index(4 + dx, 4 + dy)] = 1;
  g.mark_exit(g.index(8, 8));
  CHECK_FALSE(plan(g, g.center(g.index(4, 4))));
}

TEST_CASE("diagonals do not cut blocked corners") {
  NavGrid g(3, 3, 1.0);
  g.blocked[g.index(1, 0)] = 1;
  g.blocked[g.index(0, 1)] = 1;
  g.mark_exit(g.index(1, 1));
  CHECK_FALSE(astar_cells(g, g.index(0, 0)));
}

TEST_CASE("plan matches the Dijkstra oracle on random weighted grids") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const NavGrid g = random_grid(rng, 24);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(g.cost.size()) - 1);
    int start = pick(rng);
    while (g.blocked[start]) start = pick(rng);
    const double expect = oracle_cost(g, start);
    const auto path = plan(g, g.center(start));
    if (std::isinf(expect)) {
      CHECK_FALSE(path);
      continue;
    }
    REQUIRE(path);
    CHECK(path->total_cost == expect);
    for (std::size_t i = 1; i < path->points.size(); ++i)
      CHECK(line_of_sight(g, path->points[i - 1], path->points[i]));
  }
}

TEST_CASE("octile heuristic never overestimates the remaining cost") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const NavGrid g = random_grid(rng, 16);
    const int exit = g.exit_cells.front();
    const auto from_exit = dijkstra(g, exit);  // symmetric step costs
    const double mc = g.min_cost();
    for (int c = 0; c < static_cast<int>(g.cost.size()); ++c) {
      if (std::isinf(from_exit[c])) continue;
      const double h = octile(std::abs(g.cell_x(c) - g.cell_x(exit)), std::abs(g.cell_y(c) - g.cell_y(exit))) * mc;
      CHECK(h <= from_exit[c] + 1e-12);
    }
  }
}

TEST_CASE("replanning from a point on the path costs no more than the rest plus a cell") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const NavGrid g = random_grid(rng, 20);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(g.cost.size()) - 1);
    int start = pick(rng);
    while (g.blocked[start]) start = pick(rng);
    const auto cells = astar_cells(g, start);
    if (!cells || cells->cells.size() < 3) continue;
    const std::size_t mid = cells->cells.size() / 2;
    const double remaining = cells->total_cost - cells->g[mid];
    const auto again = plan(g, g.center(cells->cells[mid]));
    REQUIRE(again);
    double max_cost = 0.0;
    for (double c : g.cost) max_cost = std::max(max_cost, c);
    CHECK(again->total_cost <= remaining + max_cost + 1e-9);
  }
}

TEST_CASE("next_waypoint consumption") {
  WaypointPath p;
  p.points = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  SUBCASE("at waypoint 0 returns waypoint 1") {
    CHECK(next_waypoint(p, {0, 0}, 0.3) == Vec2{1, 0});
    CHECK(p.cursor == 1);
  }
  SUBCASE("far from everything returns waypoint 0") {
    CHECK(next_waypoint(p, {0, 5}, 0.3) == Vec2{0, 0});
    CHECK(p.cursor == 0);
  }
  SUBCASE("within range of all but the last returns the last") {
    p.points = {{0, 0}, {0.1, 0}, {0.2, 0}, {5, 0}};
    CHECK(next_waypoint(p, {0.1, 0}, 0.3) == Vec2{5, 0});
    CHECK(p.cursor == 3);
  }
  SUBCASE("walking the path never consumes the last waypoint") {
    for (double x : {0.0, 1.0, 2.0, 3.0}) next_waypoint(p, {x, 0}, 0.3);
    CHECK(p.cursor == 3);
    CHECK(next_waypoint(p, {3, 0}, 0.3) == Vec2{3, 0});
    CHECK(p.cursor == 3);
  }
}

TEST_CASE("supercover visits both neighbours at a corner touch") {
  NavGrid g(4, 4, 1.0);
  const auto cells = supercover_cells(g, {0.5, 0.5}, {2.5, 2.5});
  CHECK(cells.front() == g.index(0, 0));
  CHECK(cells.back() == g.index(2, 2));
  CHECK(cells.size() == 7);
  g.blocked[g.index(1, 0)] = 1;
  CHECK_FALSE(line_of_sight(g, {0.5, 0.5}, {2.5, 2.5}));
}
