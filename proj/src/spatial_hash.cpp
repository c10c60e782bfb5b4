// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/spatial_hash.hpp"

#include <algorithm>
#include <cmath>

namespace evac {

SpatialHash::SpatialHash(const std::vector<Vec2>& points, double cell_size) : cell_(cell_size) {
  if (points.empty()) return;
  Vec2 lo = points.front(), hi = points.front();
  for (const Vec2& p : points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  origin_ = lo;
  nx_ = static_cast<int>((hi.x - lo.x) / cell_) + 1;
  ny_ = static_cast<int>((hi.y - lo.y) / cell_) + 1;
  std::vector<int> bucket(points.size());
  starts_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int cx = clamp_x(static_cast<int>((points[i].x - lo.x) / cell_));
    const int cy = clamp_y(static_cast<int>((points[i].y - lo.y) / cell_));
    bucket[i] = cy * nx_ + cx;
    ++starts_[bucket[i] + 1];
  }
  for (std::size_t b = 1; b < starts_.size(); ++b) starts_[b] += starts_[b - 1];
  items_.resize(points.size());
  std::vector<int> fill(starts_.begin(), starts_.end() - 1);
  for (std::size_t i = 0; i < points.size(); ++i) items_[fill[bucket[i]]++] = static_cast<int>(i);
}

}  // namespace evac
