// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "evac/motor.hpp"

using namespace evac;

namespace {

constexpr double kDt = 1.0 / 60.0;

ScenarioSpec open_floor() {
  ScenarioSpec s;
  s.name = "floor";
  s.bounds = {{0.0, 0.0}, {10.0, 10.0}};
  s.exits.push_back({{{10.0, 4.0}, {10.0, 6.0}}, 2.0});
  return s;
}

Agent walker(int id, const ScenarioSpec& spec, Vec2 pos) {
  return make_agent(id, spec.classes[ClassId::non_personalized], spec, pos, 7, kDt);
}

ContactEvent hit(int fallen, int other, double impulse) {
  ContactEvent e;
  e.agent_a = other;
  e.agent_b = fallen;
  e.impulse = impulse;
  return e;
}

void knock_down(Agent& a, const MotorWorld& w) {
  a.tripped = true;
  const auto ch = update_status(a, {}, w);
  REQUIRE(ch);
  REQUIRE(ch->to == AgentStatus::fallen);
}

}  // namespace

TEST_CASE("gait factor dips by gait_loss at quarter phase") {
  CHECK(gait_speed_factor(0.04, 0.0) == 1.0);
  CHECK(gait_speed_factor(0.04, 0.25) == doctest::Approx(0.96));
  CHECK(gait_speed_factor(0.04, 0.5) == doctest::Approx(1.0));
  CHECK(gait_speed_factor(0.04, 0.75) == doctest::Approx(0.96));
  CHECK(gait_speed_factor(0.0, 0.3) == 1.0);
}

TEST_CASE("fall threshold scales with robustness and ground friction") {
  ScenarioSpec spec = open_floor();
  spec.terrain_zones.push_back(
      TerrainZone::of_kind(TerrainKind::slippery, rect_polygon({0.0, 0.0}, {5.0, 10.0})));
  const MotorWorld w = MotorWorld::from(spec, kDt);
  Agent a = walker(0, spec, {8.0, 5.0});
  CHECK(fall_threshold(a, w) == doctest::Approx(spec.motor.fall_impulse));
  a.fall_robustness = 0.5;
  CHECK(fall_threshold(a, w) == doctest::Approx(0.5 * spec.motor.fall_impulse));
  a.pos = {2.0, 5.0};
  const double f = terrain_at(spec, a.pos).friction_scale;
  CHECK(f < 1.0);
  CHECK(fall_threshold(a, w) == doctest::Approx(0.5 * spec.motor.fall_impulse * f));
}

TEST_CASE("pushed over only above the threshold, monotone in robustness") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  const double load = 180.0;
  bool fell_before = true;
  for (double rob = 0.5; rob <= 2.0; rob += 0.05) {
    Agent a = walker(0, spec, {5.0, 5.0});
    a.fall_robustness = rob;
    a.contact_accum = load;
    const bool fell = update_status(a, {}, w).has_value();
    CHECK(fell == (load > spec.motor.fall_impulse * rob));
    // Once robust enough to stand, stays standing for larger robustness.
    if (!fell_before) CHECK_FALSE(fell);
    fell_before = fell;
  }
}

TEST_CASE("a fallen agent with no heavy contact recovers after the recovery time") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  Agent a = walker(0, spec, {5.0, 5.0});
  a.vel = {1.0, 0.0};
  knock_down(a, w);
  CHECK(a.vel == Vec2{});
  const int expected = static_cast<int>(std::ceil(spec.motor.recover_time / kDt - 1e-6));
  int tick = 0;
  while (a.status == AgentStatus::fallen && tick < 10000) {
    ++tick;
    update_status(a, {}, w);
  }
  CHECK(a.status == AgentStatus::walking);
  CHECK(tick == expected);
  CHECK(a.contact_accum == 0.0);
}

TEST_CASE("three distinct heavy contacts trample a fallen agent") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  const double heavy = spec.motor.step_impulse;

  SUBCASE("three attackers") {
    Agent a = walker(0, spec, {5.0, 5.0});
    knock_down(a, w);
    std::vector<ContactEvent> ev = {hit(0, 1, heavy), hit(0, 2, heavy)};
    CHECK_FALSE(update_status(a, ev, w));
    ev = {hit(0, 3, heavy)};
    const auto ch = update_status(a, ev, w);
    REQUIRE(ch);
    CHECK(ch->to == AgentStatus::trampled);
  }
  SUBCASE("one attacker many times") {
    Agent a = walker(0, spec, {5.0, 5.0});
    knock_down(a, w);
    for (int i = 0; i < 10; ++i) {
      std::vector<ContactEvent> ev = {hit(0, 1, heavy)};
      update_status(a, ev, w);
    }
    CHECK(a.status == AgentStatus::fallen);
  }
  SUBCASE("light touches accumulate per attacker") {
    Agent a = walker(0, spec, {5.0, 5.0});
    knock_down(a, w);
    for (int i = 0; i < 4; ++i) {
      std::vector<ContactEvent> ev = {hit(0, 1, heavy / 4), hit(0, 2, heavy / 4),
                                      hit(0, 3, heavy / 4 - 1e-6)};
      update_status(a, ev, w);
    }
    CHECK(a.status == AgentStatus::fallen);
    std::vector<ContactEvent> ev = {hit(0, 3, 1e-3)};
    update_status(a, ev, w);
    CHECK(a.status == AgentStatus::trampled);
  }
  SUBCASE("a heavy contact restarts the recovery clock") {
    Agent a = walker(0, spec, {5.0, 5.0});
    knock_down(a, w);
    const int half = static_cast<int>(spec.motor.recover_time / kDt / 2);
    for (int i = 0; i < half; ++i) update_status(a, {}, w);
    std::vector<ContactEvent> ev = {hit(0, 1, heavy)};
    update_status(a, ev, w);
    for (int i = 0; i < half + 2; ++i) update_status(a, {}, w);
    CHECK(a.status == AgentStatus::fallen);
  }
}

TEST_CASE("escaped and trampled are absorbing") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  for (AgentStatus s : {AgentStatus::escaped, AgentStatus::trampled}) {
    Agent a = walker(0, spec, {5.0, 5.0});
    a.status = s;
    a.contact_accum = 1e6;
    a.tripped = true;
    std::vector<ContactEvent> ev = {hit(0, 1, 100.0), hit(0, 2, 100.0), hit(0, 3, 100.0)};
    for (int i = 0; i < 500; ++i) CHECK_FALSE(update_status(a, ev, w));
    CHECK(a.status == s);
  }
}

TEST_CASE("an agent inside the exit region escapes") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  Agent a = walker(0, spec, {9.5, 5.0});
  a.contact_accum = 1e6;
  const auto ch = update_status(a, {}, w);
  REQUIRE(ch);
  CHECK(ch->to == AgentStatus::escaped);
}

TEST_CASE("down agents do not move and keep zero velocity") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  std::vector<Agent> agents = {walker(0, spec, {3.0, 5.0}), walker(1, spec, {6.0, 5.0})};
  agents[0].status = AgentStatus::fallen;
  agents[1].status = AgentStatus::trampled;
  const std::vector<Vec2> desired = {{1.0, 0.0}, {0.0, 1.0}};
  for (int t = 0; t < 60; ++t) step_motor(agents, desired, w);
  for (const Agent& a : agents) {
    CHECK(a.vel == Vec2{});
    CHECK(a.gait.frequency == 0.0);
  }
  CHECK(agents[0].pos == Vec2{3.0, 5.0});
  CHECK(agents[1].pos == Vec2{6.0, 5.0});
}

TEST_CASE("a free walker reaches the commanded speed and advances its gait") {
  ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  std::vector<Agent> agents = {walker(0, spec, {1.0, 5.0})};
  agents[0].gait_loss = 0.0;
  const std::vector<Vec2> desired = {{1.2, 0.0}};
  for (int t = 0; t < 120; ++t) step_motor(agents, desired, w);
  const Agent& a = agents[0];
  CHECK(a.vel.x == doctest::Approx(1.2).epsilon(1e-3));
  CHECK(a.heading == doctest::Approx(0.0));
  CHECK(a.gait.frequency == doctest::Approx(a.vel.x / spec.motor.stride_length));
  const double before = a.gait.value;
  step_motor(agents, desired, w);
  const double step = agents[0].gait.value - before;
  CHECK(step - std::floor(step) == doctest::Approx(agents[0].gait.frequency * kDt));
}

TEST_CASE("overlapping bodies are separated and report impulses on both") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  const double r = spec.motor.body_radius;
  std::vector<Agent> agents = {walker(0, spec, {5.0, 5.0}), walker(1, spec, {5.3, 5.0})};
  const std::vector<Vec2> desired = {{0.0, 0.0}, {0.0, 0.0}};
  const auto ev = step_motor(agents, desired, w);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].agent_a == 0);
  CHECK(ev[0].agent_b == 1);
  CHECK(ev[0].impulse > 0.0);
  CHECK(ev[0].normal.x == doctest::Approx(-1.0));
  CHECK(norm(agents[0].pos - agents[1].pos) >= 2.0 * r - spec.motor.contact_slop - 1e-9);
  CHECK(agents[0].contact_accum == doctest::Approx(ev[0].impulse));
  CHECK(agents[1].contact_accum == doctest::Approx(ev[0].impulse));
}

TEST_CASE("walls stop a body and emit wall contacts") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  const double r = spec.motor.body_radius;
  std::vector<Agent> agents = {walker(0, spec, {5.0, 1.0})};
  const std::vector<Vec2> desired = {{0.0, -1.5}};
  bool saw_wall = false;
  for (int t = 0; t < 120; ++t) {
    for (const ContactEvent& e : step_motor(agents, desired, w)) {
      if (!e.is_wall()) continue;
      saw_wall = true;
      CHECK(e.wall == static_cast<int>(spec.walls.size()));  // bottom bounds edge
      CHECK(e.normal.y == doctest::Approx(1.0));
    }
    CHECK(agents[0].pos.y >= r - spec.motor.contact_slop - 1e-9);
  }
  CHECK(saw_wall);
}

TEST_CASE("a certain trip rate fells a walker on the first tick") {
  ScenarioSpec spec = open_floor();
  TerrainZone z = TerrainZone::of_kind(TerrainKind::uneven, rect_polygon({0.0, 0.0}, {10.0, 10.0}));
  z.trip_rate = 2.0 / kDt;
  spec.terrain_zones.push_back(z);
  const MotorWorld w = MotorWorld::from(spec, kDt);
  std::vector<Agent> agents = {walker(0, spec, {5.0, 5.0})};
  const std::vector<Vec2> desired = {{1.0, 0.0}};
  const auto ev = step_motor(agents, desired, w);
  CHECK(agents[0].tripped);
  const auto ch = update_status(agents[0], ev, w);
  REQUIRE(ch);
  CHECK(ch->to == AgentStatus::fallen);
}

TEST_CASE("class overrides reach the agent coefficients") {
  ScenarioSpec spec = open_floor();
  AttributeClass cls = spec.classes[ClassId::old];
  cls.sfm_overrides.k_evade = 0.0;
  const Agent a = make_agent(0, cls, spec, {1.0, 1.0}, 1, kDt);
  CHECK(a.sfm.k_evade == 0.0);
  CHECK(a.sfm.a_rep == spec.sfm.a_rep);
  CHECK(a.impulse_ring.size() == static_cast<std::size_t>(std::lround(spec.motor.fall_window / kDt)));
}

TEST_CASE("step_motor rejects mismatched input") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  std::vector<Agent> agents = {walker(0, spec, {5.0, 5.0})};
  std::vector<Vec2> desired;
  CHECK_THROWS_AS(step_motor(agents, desired, w), std::invalid_argument);
  desired = {{std::nan(""), 0.0}};
  CHECK_THROWS_AS(step_motor(agents, desired, w), std::invalid_argument);
}

TEST_CASE("slippery ground overshoots a commanded stop further") {
  auto overshoot = [](bool slippery) {
    ScenarioSpec spec = open_floor();
    if (slippery) {
      TerrainZone z =
          TerrainZone::of_kind(TerrainKind::slippery, rect_polygon({0.0, 0.0}, {10.0, 10.0}));
      z.friction_scale = 0.3;
      z.speed_scale = 1.0;
      spec.terrain_zones.push_back(z);
    }
    const MotorWorld w = MotorWorld::from(spec, kDt);
    std::vector<Agent> agents = {walker(0, spec, {1.0, 5.0})};
    agents[0].vel = {1.2, 0.0};
    agents[0].gait_loss = 0.0;
    const std::vector<Vec2> stop = {{0.0, 0.0}};
    for (int t = 0; t < 300; ++t) step_motor(agents, stop, w);
    return agents[0].pos.x - 1.0;
  };
  const double normal = overshoot(false);
  const double slick = overshoot(true);
  CHECK(normal > 0.0);
  // Relaxation time grows by 1/0.3, so does the coasting distance.
  CHECK(slick > normal);
  CHECK(slick == doctest::Approx(normal / 0.3).epsilon(0.05));
}

TEST_CASE("free relaxation reaches the commanded speed within five time constants") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  std::vector<Agent> agents = {walker(0, spec, {1.0, 2.0})};
  agents[0].gait_loss = 0.0;
  const std::vector<Vec2> desired = {{0.9, 0.6}};
  const int ticks = static_cast<int>(std::ceil(5.0 * spec.motor.tau_motor / kDt));
  for (int t = 0; t < ticks; ++t) CHECK(step_motor(agents, desired, w).empty());
  CHECK(norm(agents[0].vel - desired[0]) < 0.01 * norm(desired[0]));
}

TEST_CASE("head-on walkers receive mirror-image impulses") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  std::vector<Agent> agents = {walker(0, spec, {4.0, 5.0}), walker(1, spec, {6.0, 5.0})};
  for (Agent& a : agents) a.gait_loss = 0.0;
  const std::vector<Vec2> desired = {{1.0, 0.0}, {-1.0, 0.0}};
  bool touched = false;
  for (int t = 0; t < 120; ++t) {
    for (const ContactEvent& e : step_motor(agents, desired, w)) {
      touched = true;
      CHECK(std::abs(e.normal.y) < 1e-12);
    }
    CHECK(std::abs(agents[0].contact_accum - agents[1].contact_accum) < 1e-9);
    CHECK(std::abs(agents[0].vel.x + agents[1].vel.x) < 1e-9);
    CHECK(std::abs((agents[0].pos.x - 5.0) + (agents[1].pos.x - 5.0)) < 1e-9);
  }
  CHECK(touched);
}

TEST_CASE("a load just under the threshold leaves the agent standing") {
  const ScenarioSpec spec = open_floor();
  const MotorWorld w = MotorWorld::from(spec, kDt);
  Agent a = walker(0, spec, {5.0, 5.0});
  const double thr = fall_threshold(a, w);
  // Spread the load over the window as step_motor would record it.
  const double per_tick = (thr - 1e-6) / static_cast<double>(a.impulse_ring.size());
  for (double& v : a.impulse_ring) v = per_tick;
  double sum = 0.0;
  for (double v : a.impulse_ring) sum += v;
  a.contact_accum = sum;
  CHECK_FALSE(update_status(a, {}, w));
  a.contact_accum = thr + 1e-6;
  CHECK(update_status(a, {}, w));
}
