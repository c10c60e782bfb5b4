// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "evac/geometry.hpp"

namespace evac {

/// Uniform bucket grid over a fixed point set. Buckets list point indices in
/// ascending order, so visiting order depends only on the input.
class SpatialHash {
 public:
  SpatialHash() = default;
  SpatialHash(const std::vector<Vec2>& points, double cell_size);

  /// Calls `fn(index)` for every point whose bucket touches the square of
  /// half-width `range` around `p`. The caller filters by exact distance.
  template <typename Fn>
  void visit(Vec2 p, double range, Fn&& fn) const {
    if (starts_.empty()) return;
    const int x0 = clamp_x(static_cast<int>((p.x - range - origin_.x) / cell_));
    const int x1 = clamp_x(static_cast<int>((p.x + range - origin_.x) / cell_));
    const int y0 = clamp_y(static_cast<int>((p.y - range - origin_.y) / cell_));
    const int y1 = clamp_y(static_cast<int>((p.y + range - origin_.y) / cell_));
    for (int cy = y0; cy <= y1; ++cy)
      for (int cx = x0; cx <= x1; ++cx) {
        const int b = cy * nx_ + cx;
        for (int k = starts_[b]; k < starts_[b + 1]; ++k) fn(items_[k]);
      }
  }

 private:
  int clamp_x(int v) const { return v < 0 ? 0 : (v >= nx_ ? nx_ - 1 : v); }
  int clamp_y(int v) const { return v < 0 ? 0 : (v >= ny_ ? ny_ - 1 : v); }

  double cell_ = 1.0;
  Vec2 origin_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<int> starts_;
  std::vector<int> items_;
};

}  // namespace evac
