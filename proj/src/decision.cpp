// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/decision.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include "evac/pathfinding.hpp"

namespace evac {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_blocking(NeighborStatus s) { return s != NeighborStatus::walking; }

}  // namespace

Vec2 drive_force(const DecisionInput& in, const SfmCoefficients& c) {
  return (in.desired_dir * in.v_setting - in.self_vel) / c.tau_relax;
}

Vec2 coincident_direction(int self_id, int other_id) {
  const auto lo = static_cast<std::uint32_t>(std::min(self_id, other_id));
  const auto hi = static_cast<std::uint32_t>(std::max(self_id, other_id));
  const std::uint64_t h = splitmix64((static_cast<std::uint64_t>(lo) << 32) | hi);
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
  const Vec2 u{std::cos(angle), std::sin(angle)};
  return self_id <= other_id ? u : -u;
}

Vec2 repulsive_force(const DecisionInput& in, const SfmCoefficients& c, double body_radius) {
  Vec2 sum;
  for (const Neighbor& nb : in.neighbors) {
    const double d = norm(nb.rel_pos);
    if (d > c.r_interact) continue;
    const Vec2 away = d < 1e-6 ? coincident_direction(in.self_id, nb.id) : -nb.rel_pos / d;
    sum += away * (c.a_rep * std::exp((2.0 * body_radius - d) / c.b_decay));
  }
  return sum;
}

bool side_is_free(const DecisionInput& in, int side, double body_radius, double range) {
  const Vec2 dir = in.desired_dir;
  const Vec2 lateral = perp_left(dir) * static_cast<double>(side);
  const Vec2 start = in.self_pos + lateral * (2.0 * body_radius);
  const Segment probe{start, start + dir * (2.0 * body_radius)};
  for (const Neighbor& nb : in.neighbors) {
    if (norm(nb.rel_pos) > range) continue;
    if (distance_to_segment(in.self_pos + nb.rel_pos, probe) < 2.0 * body_radius) return false;
  }
  if (in.grid != nullptr) {
    const double len = norm(probe.b - probe.a);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * in.grid->cell_size))));
    for (int k = 0; k <= steps; ++k) {
      const Vec2 p = probe.a + (probe.b - probe.a) * (static_cast<double>(k) / steps);
      if (in.grid->blocked_at(p)) return false;
    }
  }
  return true;
}

Vec2 evasive_force(const DecisionInput& in, const SfmCoefficients& c, double body_radius) {
  const Vec2 dir = in.desired_dir;
  if (norm_sq(dir) == 0.0) return {};
  const double cos_half = std::cos(c.sector_half_angle);

  Vec2 mean;
  int in_sector = 0;
  bool obstacle = false;
  for (const Neighbor& nb : in.neighbors) {
    const double d = norm(nb.rel_pos);
    if (d > c.sense_range || d == 0.0) continue;
    if (dot(nb.rel_pos, dir) < cos_half * d) continue;
    mean += nb.rel_pos;
    ++in_sector;
    obstacle = obstacle || is_blocking(nb.status);
  }
  if (!obstacle) return {};

  const bool left = side_is_free(in, +1, body_radius, c.sense_range);
  const bool right = side_is_free(in, -1, body_radius, c.sense_range);
  if (!left && !right) return {};

  const Vec2 lateral = perp_left(dir);
  mean = mean / static_cast<double>(in_sector);
  const int away = dot(mean, lateral) > 0.0 ? -1 : +1;
  int side = away;
  if (!(left && right)) side = left ? +1 : -1;
  return lateral * (c.k_evade * side);
}

Decision decide(const DecisionInput& in, const SfmCoefficients& c, double dt, double v_max,
                double body_radius) {
  Decision out;
  out.drive = drive_force(in, c);
  out.repulsive = repulsive_force(in, c, body_radius);
  out.evasive = c.k_evade > 0.0 ? evasive_force(in, c, body_radius) : Vec2{};
  Vec2 v = in.self_vel + (out.drive + out.repulsive + out.evasive) * dt;
  if (!is_finite(v)) v = is_finite(in.self_vel) ? in.self_vel : Vec2{};
  const double n = norm(v);
  if (n > v_max) {
    v = v * (v_max / n);
    while (norm(v) > v_max) v = v * std::nextafter(1.0, 0.0);
  }
  out.desired_velocity = v;
  return out;
}

}  // namespace evac
