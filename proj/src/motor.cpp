// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/motor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "evac/decision.hpp"
#include "evac/forces.hpp"
#include "evac/spatial_hash.hpp"

namespace evac {

std::string_view status_name(AgentStatus s) {
  switch (s) {
    case AgentStatus::walking: return "walking";
    case AgentStatus::fallen: return "fallen";
    case AgentStatus::trampled: return "trampled";
    case AgentStatus::escaped: return "escaped";
    case AgentStatus::trapped: return "trapped";
  }
  return "walking";
}

std::optional<AgentStatus> parse_status(std::string_view name) {
  for (AgentStatus s : {AgentStatus::walking, AgentStatus::fallen, AgentStatus::trampled,
                        AgentStatus::escaped, AgentStatus::trapped})
    if (status_name(s) == name) return s;
  return std::nullopt;
}

Agent make_agent(int id, const AttributeClass& cls, const ScenarioSpec& spec, Vec2 pos,
                 std::uint64_t seed, double dt) {
  Agent a;
  a.id = id;
  a.cls = cls.id;
  a.mass = cls.mass;
  a.v_setting = cls.v_setting;
  a.v_max = cls.v_max;
  a.fall_robustness = cls.fall_robustness;
  a.gait_loss = cls.gait_loss;
  a.sfm = cls.sfm_overrides.apply(spec.sfm);
  a.pos = pos;
  const auto window = std::max<long>(1, std::lround(spec.motor.fall_window / dt));
  a.impulse_ring.assign(static_cast<std::size_t>(window), 0.0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  a.rng.seed(seq);
  return a;
}

MotorWorld MotorWorld::from(const ScenarioSpec& spec, double dt) {
  MotorWorld w;
  w.spec = &spec;
  w.dt = dt;
  w.walls = spec.walls;
  const Rect& b = spec.bounds;
  const Vec2 c00 = b.min, c10{b.max.x, b.min.y}, c11 = b.max, c01{b.min.x, b.max.y};
  w.walls.push_back({c00, c10});
  w.walls.push_back({c10, c11});
  w.walls.push_back({c11, c01});
  w.walls.push_back({c01, c00});
  return w;
}

double gait_speed_factor(double gait_loss, double phase) {
  const double s = std::sin(2.0 * std::numbers::pi * phase);
  return 1.0 - gait_loss * s * s;
}

double fall_threshold(const Agent& agent, const MotorWorld& world) {
  const TerrainEffect te = terrain_at(*world.spec, agent.pos);
  return world.spec->motor.fall_impulse * agent.fall_robustness * te.friction_scale;
}

namespace {

struct EventKey {
  int a;
  int b;
  int wall;
  auto operator<=>(const EventKey&) const = default;
};

struct EventAccum {
  Vec2 normal;
  double impulse = 0.0;
};

struct UprightPair {
  int i;
  int j;
  double corr = 0.0;  // total separation applied, m
};

}  // namespace

std::vector<ContactEvent> step_motor(std::vector<Agent>& agents, std::span<const Vec2> desired,
                                     const MotorWorld& world) {
  const ScenarioSpec& spec = *world.spec;
  const MotorConstants& mc = spec.motor;
  const double dt = world.dt;
  const double r = mc.body_radius;
  const std::size_t n = agents.size();
  if (desired.size() != n) throw std::invalid_argument("step_motor: desired size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (agents[i].id != static_cast<int>(i)) throw std::invalid_argument("step_motor: id != index");
    if (!is_finite(desired[i])) throw std::invalid_argument("step_motor: non-finite desired velocity");
  }

  auto in_physics = [&](const Agent& a) { return a.status != AgentStatus::escaped; };
  std::map<EventKey, EventAccum> events;

  // Relax towards the commanded velocity and draw the terrain trip.
  for (Agent& a : agents) {
    if (a.status == AgentStatus::walking || a.status == AgentStatus::trapped) {
      const TerrainEffect te = terrain_at(spec, a.pos);
      Vec2 target = desired[a.id] * (te.speed_scale * gait_speed_factor(a.gait_loss, a.gait.value));
      if (a.status == AgentStatus::trapped) target = {};
      const double tau = mc.tau_motor / te.friction_scale;
      const double gain = std::min(1.0, dt / tau);
      a.vel = a.vel + (target - a.vel) * gain;
      if (a.status == AgentStatus::walking) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(a.rng);
        a.tripped = u < te.trip_rate * dt;
      }
    } else {
      a.vel = {};
    }
  }

  // Candidate pairs from positions at the start of the tick.
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = agents[i].pos;
  const double reach = 2.0 * r + 0.1;
  SpatialHash hash(pts, std::max(reach, 0.5));
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_physics(agents[i])) continue;
    hash.visit(pts[i], reach, [&](int j) {
      if (j <= static_cast<int>(i) || !in_physics(agents[j])) return;
      if (is_down(agents[i].status) && is_down(agents[j].status)) return;
      if (norm(pts[j] - pts[i]) < reach) pairs.emplace_back(static_cast<int>(i), j);
    });
  }
  std::sort(pairs.begin(), pairs.end());

  // Penalty impulses: F = max(0, k * overlap + c * approach speed).
  for (auto [i, j] : pairs) {
    Agent& a = agents[i];
    Agent& b = agents[j];
    Vec2 d = a.pos - b.pos;
    double dist = norm(d);
    const double overlap = 2.0 * r - dist;
    if (overlap <= 0.0) continue;
    Vec2 nrm = dist > 1e-9 ? d / dist : coincident_direction(i, j);
    const double approach = -dot(a.vel - b.vel, nrm);
    const double force = std::max(0.0, mc.stiffness * overlap + mc.damping * approach);
    const double j_imp = force * dt;
    if (j_imp <= 0.0) continue;
    if (is_upright(a.status)) a.vel = a.vel + nrm * (j_imp / a.mass);
    if (is_upright(b.status)) b.vel = b.vel - nrm * (j_imp / b.mass);
    auto& ev = events[{i, j, -1}];
    ev.normal = nrm;
    ev.impulse += j_imp;
  }
  for (Agent& a : agents) {
    if (!is_upright(a.status)) continue;
    for (std::size_t w = 0; w < world.walls.size(); ++w) {
      const Vec2 cp = closest_point_on_segment(a.pos, world.walls[w]);
      const Vec2 d = a.pos - cp;
      const double dist = norm(d);
      const double overlap = r - dist;
      if (overlap <= 0.0 || dist <= 1e-9) continue;
      const Vec2 nrm = d / dist;
      const double force = std::max(0.0, mc.stiffness * overlap - mc.damping * dot(a.vel, nrm));
      const double j_imp = force * dt;
      if (j_imp <= 0.0) continue;
      a.vel = a.vel + nrm * (j_imp / a.mass);
      auto& ev = events[{a.id, -1, static_cast<int>(w)}];
      ev.normal = nrm;
      ev.impulse += j_imp;
    }
  }

  // Semi-implicit integration.
  std::vector<Vec2> before(n);
  for (std::size_t i = 0; i < n; ++i) {
    before[i] = agents[i].pos;
    if (is_upright(agents[i].status)) agents[i].pos = agents[i].pos + agents[i].vel * dt;
  }

  // Position projection between upright bodies and against walls.
  std::vector<UprightPair> upright;
  for (auto [i, j] : pairs)
    if (is_upright(agents[i].status) && is_upright(agents[j].status)) upright.push_back({i, j});
  std::vector<std::vector<double>> wall_corr(n);
  const double target_pair = 2.0 * r - mc.contact_slop;
  const double target_wall = r - mc.contact_slop;
  for (int it = 0; it < mc.projection_iterations; ++it) {
    bool moved = false;
    for (UprightPair& p : upright) {
      Agent& a = agents[p.i];
      Agent& b = agents[p.j];
      const Vec2 d = a.pos - b.pos;
      const double dist = norm(d);
      if (dist >= target_pair) continue;
      const Vec2 nrm = dist > 1e-9 ? d / dist : coincident_direction(p.i, p.j);
      const double corr = target_pair - dist;
      const double wa = 1.0 / a.mass, wb = 1.0 / b.mass;
      a.pos = a.pos + nrm * (corr * wa / (wa + wb));
      b.pos = b.pos - nrm * (corr * wb / (wa + wb));
      p.corr += corr;
      moved = true;
    }
    for (Agent& a : agents) {
      if (!is_upright(a.status)) continue;
      for (std::size_t w = 0; w < world.walls.size(); ++w) {
        const Vec2 cp = closest_point_on_segment(a.pos, world.walls[w]);
        const Vec2 d = a.pos - cp;
        const double dist = norm(d);
        if (dist >= target_wall || dist <= 1e-9) continue;
        const double corr = target_wall - dist;
        a.pos = a.pos + d / dist * corr;
        auto& slots = wall_corr[a.id];
        if (slots.empty()) slots.assign(world.walls.size(), 0.0);
        slots[w] += corr;
        moved = true;
      }
    }
    if (!moved) break;
  }
  for (const UprightPair& p : upright) {
    if (p.corr <= 0.0) continue;
    const Agent& a = agents[p.i];
    const Agent& b = agents[p.j];
    const double m_eff = a.mass * b.mass / (a.mass + b.mass);
    auto& ev = events[{p.i, p.j, -1}];
    Vec2 d = a.pos - b.pos;
    const double dist = norm(d);
    ev.normal = dist > 1e-9 ? d / dist : coincident_direction(p.i, p.j);
    ev.impulse += m_eff * p.corr / dt;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (wall_corr[i].empty()) continue;
    for (std::size_t w = 0; w < world.walls.size(); ++w) {
      if (wall_corr[i][w] <= 0.0) continue;
      auto& ev = events[{static_cast<int>(i), -1, static_cast<int>(w)}];
      const Vec2 d = agents[i].pos - closest_point_on_segment(agents[i].pos, world.walls[w]);
      if (norm(d) > 1e-9) ev.normal = d / norm(d);
      ev.impulse += agents[i].mass * wall_corr[i][w] / dt;
    }
  }

  // Velocity from the projected displacement, heading, stop timer and gait.
  for (Agent& a : agents) {
    if (is_upright(a.status)) {
      a.vel = (a.pos - before[a.id]) / dt;
      const double speed = norm(a.vel);
      if (speed > mc.gait_min_speed) a.heading = std::atan2(a.vel.y, a.vel.x);
      a.slow_time = speed < mc.stop_speed ? a.slow_time + dt : 0.0;
      a.gait.frequency = speed < mc.gait_min_speed ? 0.0 : speed / mc.stride_length;
      a.gait.value += a.gait.frequency * dt;
      a.gait.value -= std::floor(a.gait.value);
      if (a.gait.value >= 1.0) a.gait.value = 0.0;
    } else {
      a.gait.frequency = 0.0;
    }
  }

  // Events with part attribution, and the received-impulse window.
  std::vector<ContactEvent> out;
  out.reserve(events.size());
  std::vector<double> received(n, 0.0);
  auto kind_for = [](const Agent& a) {
    return is_down(a.status) ? ContactKind::while_fallen : ContactKind::agent_standing;
  };
  for (const auto& [key, acc] : events) {
    ContactEvent e;
    e.agent_a = key.a;
    e.agent_b = key.b;
    e.wall = key.wall;
    e.normal = acc.normal;
    e.impulse = acc.impulse;
    const Agent& a = agents[key.a];
    if (key.b < 0) {
      e.point = closest_point_on_segment(a.pos, world.walls[key.wall]);
      e.part_bin_a = bin_contact(contact_bearing(a.pos, a.heading, e.point), ContactKind::wall);
    } else {
      const Agent& b = agents[key.b];
      e.point = (a.pos + b.pos) * 0.5;
      e.part_bin_a = bin_contact(contact_bearing(a.pos, a.heading, b.pos), kind_for(a));
      e.part_bin_b = bin_contact(contact_bearing(b.pos, b.heading, a.pos), kind_for(b));
      received[key.b] += e.impulse;
    }
    received[key.a] += e.impulse;
    out.push_back(e);
  }
  for (Agent& a : agents) {
    if (a.impulse_ring.empty()) continue;
    a.impulse_ring[a.ring_pos] = received[a.id];
    a.ring_pos = (a.ring_pos + 1) % a.impulse_ring.size();
    double s = 0.0;
    for (double v : a.impulse_ring) s += v;
    a.contact_accum = s;
  }
  return out;
}

std::optional<StatusChange> update_status(Agent& agent, std::span<const ContactEvent> contacts,
                                          const MotorWorld& world) {
  const ScenarioSpec& spec = *world.spec;
  const MotorConstants& mc = spec.motor;
  const AgentStatus from = agent.status;
  auto change = [&](AgentStatus to) {
    agent.status = to;
    return StatusChange{agent.id, from, to};
  };

  switch (agent.status) {
    case AgentStatus::escaped:
    case AgentStatus::trampled:
    case AgentStatus::trapped:
      return std::nullopt;
    case AgentStatus::walking: {
      for (const ExitRegion& ex : spec.exits) {
        if (ex.contains(agent.pos)) {
          agent.vel = {};
          agent.tripped = false;
          return change(AgentStatus::escaped);
        }
      }
      const bool pushed_over = agent.contact_accum > fall_threshold(agent, world);
      if (agent.tripped || pushed_over) {
        agent.tripped = false;
        agent.vel = {};
        agent.time_down = 0.0;
        agent.since_heavy = 0.0;
        agent.down_impulse.clear();
        agent.heavy_from.clear();
        return change(AgentStatus::fallen);
      }
      return std::nullopt;
    }
    case AgentStatus::fallen: {
      agent.time_down += world.dt;
      agent.since_heavy += world.dt;
      for (const ContactEvent& e : contacts) {
        int other = -1;
        if (e.agent_a == agent.id) other = e.agent_b;
        else if (e.agent_b == agent.id) other = e.agent_a;
        if (other < 0) continue;
        auto it = std::lower_bound(agent.down_impulse.begin(), agent.down_impulse.end(), other,
                                   [](const auto& p, int id) { return p.first < id; });
        if (it == agent.down_impulse.end() || it->first != other)
          it = agent.down_impulse.insert(it, {other, 0.0});
        it->second += e.impulse;
        if (it->second >= mc.step_impulse &&
            !std::binary_search(agent.heavy_from.begin(), agent.heavy_from.end(), other)) {
          agent.heavy_from.insert(
              std::upper_bound(agent.heavy_from.begin(), agent.heavy_from.end(), other), other);
          agent.since_heavy = 0.0;
        }
      }
      if (static_cast<int>(agent.heavy_from.size()) >= mc.trample_contacts)
        return change(AgentStatus::trampled);
      if (agent.since_heavy >= mc.recover_time - 1e-9) {
        std::fill(agent.impulse_ring.begin(), agent.impulse_ring.end(), 0.0);
        agent.contact_accum = 0.0;
        agent.slow_time = 0.0;
        agent.down_impulse.clear();
        agent.heavy_from.clear();
        agent.time_down = 0.0;
        return change(AgentStatus::walking);
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace evac
