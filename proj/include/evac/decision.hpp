// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <vector>

#include "evac/geometry.hpp"
#include "evac/params.hpp"

namespace evac {

struct NavGrid;

enum class NeighborStatus { walking, stopped, fallen };

struct Neighbor {
  int id = -1;
  Vec2 rel_pos;  // neighbour minus self
  Vec2 vel;
  NeighborStatus status = NeighborStatus::walking;
};

/// What one agent senses at a decision tick. `grid` supplies the blocked
/// cells used by the evasive side-clearance probe and may be null.
struct DecisionInput {
  int self_id = -1;
  Vec2 self_pos;
  Vec2 self_vel;
  Vec2 desired_dir;  // unit
  double v_setting = 0.0;
  std::vector<Neighbor> neighbors;  // ascending distance
  const NavGrid* grid = nullptr;
};

struct Decision {
  Vec2 drive;
  Vec2 repulsive;
  Vec2 evasive;
  Vec2 desired_velocity;
};

/// (v_setting * desired_dir - self_vel) / tau_relax
Vec2 drive_force(const DecisionInput& in, const SfmCoefficients& c);

/// Exponential pairwise repulsion summed over neighbours within r_interact.
Vec2 repulsive_force(const DecisionInput& in, const SfmCoefficients& c, double body_radius);

/// Deterministic unit vector for a coincident pair, oriented for `self_id`.
Vec2 coincident_direction(int self_id, int other_id);

/// Side-step around stopped or fallen agents in the forward 45 degree sector.
/// Points away from their mean position unless only the other side is free.
Vec2 evasive_force(const DecisionInput& in, const SfmCoefficients& c, double body_radius);

/// True when the lateral probe on `side` (+1 left, -1 right) is clear of
/// neighbours within `range` and of blocked cells.
bool side_is_free(const DecisionInput& in, int side, double body_radius,
                  double range = std::numeric_limits<double>::infinity());

/// v + dt * (drive + repulsive + evasive), clamped to v_max.
Decision decide(const DecisionInput& in, const SfmCoefficients& c, double dt, double v_max,
                double body_radius);

}  // namespace evac
