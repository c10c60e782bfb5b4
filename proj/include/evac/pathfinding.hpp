// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "evac/geometry.hpp"

namespace evac {

/// Occupancy grid with per-cell traversal multipliers. Cell (cx, cy) covers
/// [origin + (cx, cy) * cell_size, origin + (cx + 1, cy + 1) * cell_size).
struct NavGrid {
  int width = 0;
  int height = 0;
  double cell_size = 0.25;
  Vec2 origin;
  std::vector<std::uint8_t> blocked;
  std::vector<double> cost;  // >= 1
  std::vector<int> exit_cells;  // sorted cell indices
  std::vector<std::uint8_t> is_exit;

  NavGrid() = default;
  NavGrid(int w, int h, double cs, Vec2 org = {});

  int index(int cx, int cy) const { return cy * width + cx; }
  int cell_x(int idx) const { return idx % width; }
  int cell_y(int idx) const { return idx / width; }
  bool in_grid(int cx, int cy) const { return cx >= 0 && cy >= 0 && cx < width && cy < height; }
  /// -1 when outside the grid.
  int cell_at(Vec2 p) const;
  Vec2 center(int idx) const;
  bool blocked_at(Vec2 p) const;
  double min_cost() const;
  void mark_exit(int idx);
};

struct WaypointPath {
  std::vector<Vec2> points;
  double total_cost = 0.0;
  std::size_t cursor = 0;  // next unconsumed waypoint
};

/// Cost of one 8-connected step between adjacent cells a and b:
/// step length (1 or sqrt 2) times the mean of both cell costs.
double step_cost(const NavGrid& grid, int a, int b);

/// Octile distance in cells.
double octile(int dx, int dy);

/// True when every cell the segment passes through (corner touches include
/// both neighbours) is inside the grid and unblocked.
bool line_of_sight(const NavGrid& grid, Vec2 a, Vec2 b);

/// Cells visited by the supercover traversal of a segment, in order.
std::vector<int> supercover_cells(const NavGrid& grid, Vec2 a, Vec2 b);

struct GridPath {
  std::vector<int> cells;
  std::vector<double> g;  // cost-to-come at each cell
  double total_cost = 0.0;
};

/// Cost-optimal 8-connected A* to the nearest exit cell. Diagonal moves that
/// would cut a blocked corner are not allowed. nullopt when no exit is
/// reachable from `start_cell`.
std::optional<GridPath> astar_cells(const NavGrid& grid, int start_cell);

/// A* plus greedy line-of-sight string pulling. points[0] is `start`.
std::optional<WaypointPath> plan(const NavGrid& grid, Vec2 start);

/// Nearest unblocked cell by breadth-first search; -1 if none.
int nearest_free_cell(const NavGrid& grid, Vec2 p);

/// Consumes waypoints within `arrive_radius` of `pos` (never the last one)
/// and returns the next target.
Vec2 next_waypoint(WaypointPath& path, Vec2 pos, double arrive_radius);

}  // namespace evac
