// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/pathfinding.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>

namespace evac {

NavGrid::NavGrid(int w, int h, double cs, Vec2 org)
    : width(w),
      height(h),
      cell_size(cs),
      origin(org),
      blocked(static_cast<std::size_t>(w) * h, 0),
      cost(static_cast<std::size_t>(w) * h, 1.0),
      is_exit(static_cast<std::size_t>(w) * h, 0) {}

int NavGrid::cell_at(Vec2 p) const {
  const int cx = static_cast<int>(std::floor((p.x - origin.x) / cell_size));
  const int cy = static_cast<int>(std::floor((p.y - origin.y) / cell_size));
  return in_grid(cx, cy) ? index(cx, cy) : -1;
}

Vec2 NavGrid::center(int idx) const {
  return {origin.x + (cell_x(idx) + 0.5) * cell_size, origin.y + (cell_y(idx) + 0.5) * cell_size};
}

bool NavGrid::blocked_at(Vec2 p) const {
  const int c = cell_at(p);
  return c < 0 || blocked[c] != 0;
}

double NavGrid::min_cost() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cost.size(); ++i)
    if (!blocked[i]) m = std::min(m, cost[i]);
  return std::isfinite(m) ? m : 1.0;
}

void NavGrid::mark_exit(int idx) {
  if (is_exit[idx]) return;
  is_exit[idx] = 1;
  exit_cells.insert(std::upper_bound(exit_cells.begin(), exit_cells.end(), idx), idx);
}

double octile(int dx, int dy) {
  dx = std::abs(dx);
  dy = std::abs(dy);
  const int lo = std::min(dx, dy), hi = std::max(dx, dy);
  return (hi - lo) + std::numbers::sqrt2 * lo;
}

double step_cost(const NavGrid& g, int a, int b) {
  const bool diagonal = g.cell_x(a) != g.cell_x(b) && g.cell_y(a) != g.cell_y(b);
  const double len = diagonal ? std::numbers::sqrt2 : 1.0;
  return len * 0.5 * (g.cost[a] + g.cost[b]);
}

std::vector<int> supercover_cells(const NavGrid& g, Vec2 a, Vec2 b) {
  std::vector<int> out;
  const Vec2 p = (a - g.origin) / g.cell_size;
  const Vec2 q = (b - g.origin) / g.cell_size;
  int x = static_cast<int>(std::floor(p.x)), y = static_cast<int>(std::floor(p.y));
  const int ex = static_cast<int>(std::floor(q.x)), ey = static_cast<int>(std::floor(q.y));
  const Vec2 d = q - p;
  const int sx = (d.x > 0) - (d.x < 0), sy = (d.y > 0) - (d.y < 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double tdx = sx != 0 ? 1.0 / std::abs(d.x) : inf;
  const double tdy = sy != 0 ? 1.0 / std::abs(d.y) : inf;
  double tmx = sx > 0 ? (x + 1 - p.x) / d.x : sx < 0 ? (p.x - x) / -d.x : inf;
  double tmy = sy > 0 ? (y + 1 - p.y) / d.y : sy < 0 ? (p.y - y) / -d.y : inf;

  auto emit = [&](int cx, int cy) { out.push_back(g.in_grid(cx, cy) ? g.index(cx, cy) : -1); };
  emit(x, y);
  const int guard = std::abs(ex - x) + std::abs(ey - y) + 4;
  for (int step = 0; step < guard && (x != ex || y != ey); ++step) {
    if (std::min(tmx, tmy) > 1.0 + 1e-12) break;
    if (std::abs(tmx - tmy) < 1e-9) {
      // Passing through a corner touches both side cells.
      emit(x + sx, y);
      emit(x, y + sy);
      x += sx;
      y += sy;
      tmx += tdx;
      tmy += tdy;
    } else if (tmx < tmy) {
      x += sx;
      tmx += tdx;
    } else {
      y += sy;
      tmy += tdy;
    }
    emit(x, y);
  }
  return out;
}

bool line_of_sight(const NavGrid& g, Vec2 a, Vec2 b) {
  for (int c : supercover_cells(g, a, b))
    if (c < 0 || g.blocked[c]) return false;
  return true;
}

namespace {

struct OpenEntry {
  double f;
  double g;
  int cell;
};

// Min-heap order: smaller f first, then larger g, then smaller index.
struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.cell > b.cell;
  }
};

}  // namespace

std::optional<GridPath> astar_cells(const NavGrid& g, int start) {
  if (start < 0 || g.blocked[start] || g.exit_cells.empty()) return std::nullopt;
  const std::size_t n = g.blocked.size();

  // Octile distance to the exit bounding box never exceeds the distance to
  // the nearest exit cell; the tiny shrink keeps rounding admissible.
  int bx0 = g.width, by0 = g.height, bx1 = -1, by1 = -1;
  for (int e : g.exit_cells) {
    bx0 = std::min(bx0, g.cell_x(e));
    bx1 = std::max(bx1, g.cell_x(e));
    by0 = std::min(by0, g.cell_y(e));
    by1 = std::max(by1, g.cell_y(e));
  }
  const double hscale = g.min_cost() * (1.0 - 1e-12);
  auto heuristic = [&](int c) {
    const int x = g.cell_x(c), y = g.cell_y(c);
    const int dx = std::max({0, bx0 - x, x - bx1});
    const int dy = std::max({0, by0 - y, y - by1});
    return hscale * octile(dx, dy);
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> gval(n, inf);
  std::vector<int> parent(n, -1);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  gval[start] = 0.0;
  open.push({heuristic(start), 0.0, start});

  int best_goal = -1;
  double best_g = inf;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    if (top.f > best_g) break;
    open.pop();
    if (top.g != gval[top.cell]) continue;  // stale
    const int c = top.cell;
    if (g.is_exit[c]) {
      if (top.g < best_g || (top.g == best_g && c < best_goal)) {
        best_g = top.g;
        best_goal = c;
      }
      continue;
    }
    const int cx = g.cell_x(c), cy = g.cell_y(c);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = cx + dx, ny = cy + dy;
        if (!g.in_grid(nx, ny)) continue;
        const int nb = g.index(nx, ny);
        if (g.blocked[nb]) continue;
        if (dx != 0 && dy != 0 && (g.blocked[g.index(cx + dx, cy)] || g.blocked[g.index(cx, cy + dy)]))
          continue;
        const double ng = top.g + step_cost(g, c, nb);
        if (ng < gval[nb]) {
          gval[nb] = ng;
          parent[nb] = c;
          open.push({ng + heuristic(nb), ng, nb});
        }
      }
    }
  }
  if (best_goal < 0) return std::nullopt;

  GridPath path;
  for (int c = best_goal; c >= 0; c = parent[c]) path.cells.push_back(c);
  std::reverse(path.cells.begin(), path.cells.end());
  for (int c : path.cells) path.g.push_back(gval[c]);
  path.total_cost = best_g;
  return path;
}

std::optional<WaypointPath> plan(const NavGrid& g, Vec2 start) {
  const int sc = g.cell_at(start);
  auto cells = astar_cells(g, sc);
  if (!cells) return std::nullopt;

  WaypointPath out;
  out.total_cost = cells->total_cost;
  out.points.push_back(start);
  const auto& cs = cells->cells;
  std::size_t i = 0;
  Vec2 anchor = start;
  while (i + 1 < cs.size()) {
    std::size_t j = i + 1;
    while (j + 1 < cs.size() && line_of_sight(g, anchor, g.center(static_cast<int>(cs[j + 1])))) ++j;
    anchor = g.center(cs[j]);
    out.points.push_back(anchor);
    i = j;
  }
  if (cs.size() == 1) out.points.push_back(g.center(cs[0]));
  return out;
}

int nearest_free_cell(const NavGrid& g, Vec2 p) {
  if (g.width <= 0 || g.height <= 0) return -1;
  const int cx = std::clamp(static_cast<int>(std::floor((p.x - g.origin.x) / g.cell_size)), 0, g.width - 1);
  const int cy = std::clamp(static_cast<int>(std::floor((p.y - g.origin.y) / g.cell_size)), 0, g.height - 1);
  const int start = g.index(cx, cy);
  std::vector<std::uint8_t> seen(g.blocked.size(), 0);
  std::deque<int> queue{start};
  seen[start] = 1;
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (!g.blocked[c]) return c;
    const int x = g.cell_x(c), y = g.cell_y(c);
    const int nbs[4][2] = {{x + 1, y}, {x - 1, y}, {x, y + 1}, {x, y - 1}};
    for (const auto& nb : nbs) {
      if (!g.in_grid(nb[0], nb[1])) continue;
      const int k = g.index(nb[0], nb[1]);
      if (!seen[k]) {
        seen[k] = 1;
        queue.push_back(k);
      }
    }
  }
  return -1;
}

Vec2 next_waypoint(WaypointPath& path, Vec2 pos, double arrive_radius) {
  const std::size_t last = path.points.size() - 1;
  while (path.cursor < last && norm(path.points[path.cursor] - pos) <= arrive_radius) ++path.cursor;
  return path.points[path.cursor];
}

}  // namespace evac
