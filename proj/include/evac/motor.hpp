// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "evac/contact.hpp"
#include "evac/params.hpp"
#include "evac/pathfinding.hpp"
#include "evac/scenario.hpp"

namespace evac {

enum class AgentStatus { walking, fallen, trampled, escaped, trapped };

std::string_view status_name(AgentStatus s);
std::optional<AgentStatus> parse_status(std::string_view name);

inline bool is_terminal(AgentStatus s) {
  return s == AgentStatus::escaped || s == AgentStatus::trampled;
}
/// Upright bodies take part in rigid separation; fallen and trampled ones are
/// soft obstacles on the floor.
inline bool is_upright(AgentStatus s) {
  return s == AgentStatus::walking || s == AgentStatus::trapped;
}
inline bool is_down(AgentStatus s) {
  return s == AgentStatus::fallen || s == AgentStatus::trampled;
}

struct GaitPhase {
  double value = 0.0;      // [0, 1)
  double frequency = 0.0;  // Hz
};

struct Agent {
  int id = -1;
  ClassId cls = ClassId::non_personalized;
  double mass = 70.0;
  double v_setting = 1.25;
  double v_max = 2.4;
  double fall_robustness = 1.0;
  double gait_loss = 0.0;
  SfmCoefficients sfm;

  Vec2 pos;
  Vec2 vel;
  double heading = 0.0;
  AgentStatus status = AgentStatus::walking;
  GaitPhase gait;

  // Received contact impulse per tick over the fall window.
  std::vector<double> impulse_ring;
  std::size_t ring_pos = 0;
  double contact_accum = 0.0;

  double slow_time = 0.0;  // continuous time below stop_speed
  bool tripped = false;    // set by the motor, consumed by update_status

  // While down.
  double time_down = 0.0;
  double since_heavy = 0.0;
  std::vector<std::pair<int, double>> down_impulse;  // attacker -> N*s, sorted
  std::vector<int> heavy_from;                       // sorted attacker ids

  WaypointPath path;
  std::mt19937_64 rng;
};

/// Builds an agent with its own random stream seeded from (seed, id).
Agent make_agent(int id, const AttributeClass& cls, const ScenarioSpec& spec, Vec2 pos,
                 std::uint64_t seed, double dt);

/// Static geometry the motor collides against: scenario walls followed by the
/// four bounds edges.
struct MotorWorld {
  const ScenarioSpec* spec = nullptr;
  std::vector<Segment> walls;
  double dt = 1.0 / 60.0;

  static MotorWorld from(const ScenarioSpec& spec, double dt);
};

/// 1 - gait_loss * sin^2(2 pi phase)
double gait_speed_factor(double gait_loss, double phase);

/// Advances one motor tick. `agents[i].id` must equal i. Returns contacts
/// sorted by (agent_a, agent_b, wall).
std::vector<ContactEvent> step_motor(std::vector<Agent>& agents, std::span<const Vec2> desired,
                                     const MotorWorld& world);

struct StatusChange {
  int id = -1;
  AgentStatus from = AgentStatus::walking;
  AgentStatus to = AgentStatus::walking;
  bool operator==(const StatusChange&) const = default;
};

/// Applies the fall, recovery, trampling and escape rules for one tick.
/// `contacts` is the full event list of the tick.
std::optional<StatusChange> update_status(Agent& agent, std::span<const ContactEvent> contacts,
                                          const MotorWorld& world);

/// Impulse the agent has to exceed over the window to fall.
double fall_threshold(const Agent& agent, const MotorWorld& world);

}  // namespace evac
