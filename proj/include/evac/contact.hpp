// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "evac/geometry.hpp"

namespace evac {

/// One contact resolved during a motor tick. `agent_b` is -1 for walls and
/// `wall` then holds the wall index (bounds edges follow the scenario walls).
/// The impulse acts on agent_a along +normal and on agent_b along -normal.
struct ContactEvent {
  int agent_a = -1;
  int agent_b = -1;
  int wall = -1;
  Vec2 point;
  Vec2 normal;  // unit, from b (or wall) towards a
  double impulse = 0.0;  // N*s, >= 0
  int part_bin_a = 0;
  int part_bin_b = -1;

  bool is_wall() const { return agent_b < 0; }
};

}  // namespace evac
