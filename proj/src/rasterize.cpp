// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "evac/pathfinding.hpp"
#include "evac/scenario.hpp"

namespace evac {

NavGrid rasterize(const ScenarioSpec& spec) { return rasterize(spec, spec.motor.body_radius); }

NavGrid rasterize(const ScenarioSpec& spec, double radius) {
  const double cs = spec.cell_size;
  const int w = static_cast<int>(std::ceil(spec.bounds.width() / cs - 1e-9));
  const int h = static_cast<int>(std::ceil(spec.bounds.height() / cs - 1e-9));
  NavGrid g(w, h, cs, spec.bounds.min);

  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      const int i = g.index(cx, cy);
      const Rect cell{{g.origin.x + cx * cs, g.origin.y + cy * cs},
                      {g.origin.x + (cx + 1) * cs, g.origin.y + (cy + 1) * cs}};
      for (const auto& wall : spec.walls) {
        if (rect_segment_distance(cell, wall) < radius) {
          g.blocked[i] = 1;
          break;
        }
      }
      // Shrink so zones that merely share an edge with the cell do not count.
      const Rect inner{{cell.min.x + 1e-9, cell.min.y + 1e-9}, {cell.max.x - 1e-9, cell.max.y - 1e-9}};
      for (const auto& z : spec.terrain_zones)
        if (rect_intersects_polygon(inner, z.region))
          g.cost[i] = std::max(g.cost[i], 1.0 / z.speed_scale);
    }
  }

  for (const auto& exit : spec.exits) {
    bool any = false;
    for (int i = 0; i < w * h; ++i) {
      if (g.blocked[i] || !exit.contains(g.center(i))) continue;
      g.mark_exit(i);
      any = true;
    }
    if (!any) {
      // Coarse grids may miss a thin exit zone entirely; flag the nearest free cell.
      const Vec2 mid = (exit.segment.a + exit.segment.b) * 0.5;
      const int c = nearest_free_cell(g, mid);
      if (c >= 0) g.mark_exit(c);
    }
  }
  std::sort(g.exit_cells.begin(), g.exit_cells.end());
  return g;
}

}  // namespace evac
