// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "evac/decision.hpp"
#include "evac/pathfinding.hpp"

using namespace evac;

namespace {

constexpr double kR = 0.25;

DecisionInput at_rest(Vec2 dir = {1, 0}, double v = 1.5) {
  DecisionInput in;
  in.self_id = 0;
  in.desired_dir = dir;
  in.v_setting = v;
  return in;
}

Neighbor nb(int id, Vec2 rel, NeighborStatus st = NeighborStatus::walking, Vec2 vel = {}) {
  return {id, rel, vel, st};
}

}  // namespace

TEST_CASE("drive force") {
  SfmCoefficients c;
  c.tau_relax = 0.5;
  SUBCASE("zero at the target velocity") {
    DecisionInput in = at_rest({0, 1}, 1.2);
    in.self_vel = {0, 1.2};
    CHECK(norm(drive_force(in, c)) == 0.0);
  }
  SUBCASE("from rest") {
    const Vec2 f = drive_force(at_rest({1, 0}, 1.5), c);
    CHECK(f.x == doctest::Approx(3.0));
    CHECK(f.y == 0.0);
  }
  SUBCASE("perpendicular motion") {
    DecisionInput in = at_rest({1, 0}, 1.0);
    in.self_vel = {0, 1.0};
    const Vec2 f = drive_force(in, c);
    CHECK(f.x == doctest::Approx(2.0));
    CHECK(f.y == doctest::Approx(-2.0));
    CHECK(norm(f) == doctest::Approx(2.0 * std::sqrt(2.0)));
  }
}

TEST_CASE("repulsive force") {
  SfmCoefficients c;
  SUBCASE("nothing in range") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {c.r_interact + 0.01, 0})};
    CHECK(norm(repulsive_force(in, c, kR)) == 0.0);
  }
  SUBCASE("contact distance gives exactly a_rep") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {0, 2 * kR})};
    const Vec2 f = repulsive_force(in, c, kR);
    CHECK(norm(f) == doctest::Approx(c.a_rep).epsilon(1e-15));
    CHECK(f.y < 0.0);
  }
  SUBCASE("symmetric pair ahead pushes straight back") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {0.8, 0.4}), nb(2, {0.8, -0.4})};
    const Vec2 f = repulsive_force(in, c, kR);
    CHECK(std::abs(f.y) < 1e-9);
    CHECK(f.x < 0.0);
  }
  SUBCASE("coincident positions use a deterministic unit vector") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(7, {0, 0})};
    const Vec2 f = repulsive_force(in, c, kR);
    CHECK(std::isfinite(f.x));
    CHECK(norm(f) > 0.0);
    CHECK(norm(coincident_direction(0, 7)) == doctest::Approx(1.0));
    CHECK(coincident_direction(0, 7) == coincident_direction(0, 7));
    CHECK(norm(coincident_direction(0, 7) + coincident_direction(7, 0)) < 1e-12);
  }
}

TEST_CASE("repulsion is antisymmetric for identical agents") {
  SfmCoefficients c;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const Vec2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    DecisionInput ia = at_rest(), ib = at_rest();
    ia.self_id = 0;
    ib.self_id = 1;
    ia.self_pos = a;
    ib.self_pos = b;
    ia.neighbors = {nb(1, b - a)};
    ib.neighbors = {nb(0, a - b)};
    const Vec2 fa = repulsive_force(ia, c, kR), fb = repulsive_force(ib, c, kR);
    CHECK(norm(fa + fb) <= 1e-12 * std::max(1.0, norm(fa)));
  }
}

TEST_CASE("evasive force") {
  SfmCoefficients c;
  SUBCASE("empty sector") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {0, 1.5}, NeighborStatus::fallen)};  // beside, not ahead
    CHECK(norm(evasive_force(in, c, kR)) == 0.0);
  }
  SUBCASE("walking agents ahead do not trigger it") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {2.0, 0.0}, NeighborStatus::walking)};
    CHECK(norm(evasive_force(in, c, kR)) == 0.0);
  }
  SUBCASE("fallen ahead, slightly left, both sides free: steps right") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {2.0, 0.1}, NeighborStatus::fallen)};
    REQUIRE(side_is_free(in, +1, kR));
    REQUIRE(side_is_free(in, -1, kR));
    const Vec2 f = evasive_force(in, c, kR);
    CHECK(f.x == 0.0);
    CHECK(f.y == doctest::Approx(-c.k_evade));
  }
  SUBCASE("stopped agents count as blockers") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {2.0, -0.1}, NeighborStatus::stopped)};
    CHECK(evasive_force(in, c, kR).y == doctest::Approx(c.k_evade));
  }
  SUBCASE("left walled off: steps right whatever the mean says") {
    NavGrid g(40, 40, 0.25, {-5, -5});
    for (int cx = 0; cx < g.width; ++cx)
      for (int cy = 0; cy < g.height; ++cy)
        if (g.center(g.index(cx, cy)).y > 0.35) g.blocked[g.index(cx, cy)] = 1;
    DecisionInput in = at_rest();
    in.grid = &g;
    in.neighbors = {nb(1, {2.0, -0.1}, NeighborStatus::fallen)};  // mean is right of the axis
    REQUIRE_FALSE(side_is_free(in, +1, kR));
    REQUIRE(side_is_free(in, -1, kR));
    const Vec2 f = evasive_force(in, c, kR);
    CHECK(f.y == doctest::Approx(-c.k_evade));
  }
  SUBCASE("no free side gives no force") {
    DecisionInput in = at_rest();
    in.neighbors = {nb(1, {2.0, 0.0}, NeighborStatus::fallen), nb(2, {0.6, 0.5}),
                    nb(3, {0.6, -0.5})};
    CHECK(norm(evasive_force(in, c, kR)) == 0.0);
  }
}

TEST_CASE("decide") {
  SfmCoefficients c;
  c.tau_relax = 0.5;
  SUBCASE("no forces keeps the current velocity") {
    DecisionInput in = at_rest({1, 0}, 1.0);
    in.self_vel = {1.0, 0.0};
    CHECK(decide(in, c, 0.05, 2.0, kR).desired_velocity == Vec2{1.0, 0.0});
  }
  SUBCASE("one step from rest") {
    const Vec2 v = decide(at_rest({1, 0}, 1.5), c, 0.1, 2.4, kR).desired_velocity;
    CHECK(v.x == doctest::Approx(0.3));
    CHECK(v.y == 0.0);
  }
  SUBCASE("frontal blockage slows the agent, matching the hand sum") {
    DecisionInput in = at_rest({1, 0}, 1.5);
    in.self_vel = {1.0, 0.0};
    in.neighbors = {nb(1, {0.55, 0.0}, NeighborStatus::walking), nb(2, {0.7, 0.35}),
                    nb(3, {0.7, -0.35})};
    const Decision d = decide(in, c, 0.05, 2.4, kR);
    const Vec2 hand = in.self_vel + (drive_force(in, c) + repulsive_force(in, c, kR) +
                                     evasive_force(in, c, kR)) * 0.05;
    CHECK(d.desired_velocity.x == doctest::Approx(hand.x).epsilon(1e-15));
    CHECK(d.desired_velocity.y == doctest::Approx(hand.y).epsilon(1e-15));
    CHECK(norm(d.desired_velocity) < in.v_setting);
  }
}

TEST_CASE("decide never exceeds v_max and never returns NaN") {
  SfmCoefficients c;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ang(0.0, 2.0 * std::numbers::pi);
  std::uniform_int_distribution<int> count(0, 8), status(0, 2);
  for (int i = 0; i < 100000; ++i) {
    const double a = ang(rng);
    DecisionInput in = at_rest({std::cos(a), std::sin(a)}, std::abs(u(rng)));
    in.self_vel = {u(rng), u(rng)};
    for (int k = count(rng); k > 0; --k)
      in.neighbors.push_back(nb(k, {u(rng), u(rng)}, static_cast<NeighborStatus>(status(rng))));
    const double v_max = 0.5 + std::abs(u(rng));
    const Vec2 v = decide(in, c, 0.05, v_max, kR).desired_velocity;
    REQUIRE(is_finite(v));
    REQUIRE(norm(v) <= v_max);
  }
}

TEST_CASE("neighbours beyond sense range never change the decision") {
  SfmCoefficients c;
  DecisionInput in = at_rest();
  in.self_vel = {0.8, 0.1};
  in.neighbors = {nb(1, {1.0, 0.1}, NeighborStatus::fallen), nb(2, {0.4, -0.6})};
  const Decision a = decide(in, c, 0.05, 2.4, kR);
  in.neighbors.push_back(nb(3, {c.sense_range + 0.5, 0.0}, NeighborStatus::fallen));
  const Decision b = decide(in, c, 0.05, 2.4, kR);
  CHECK(a.desired_velocity == b.desired_velocity);
}

TEST_CASE("small neighbour perturbations move the output by a comparable amount") {
  SfmCoefficients c;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double eps = 1e-10;
  for (int i = 0; i < 500; ++i) {
    DecisionInput in = at_rest();
    in.self_vel = {u(rng), u(rng)};
    in.neighbors = {nb(1, {u(rng) + 2.0, u(rng)}), nb(2, {u(rng), u(rng) + 2.0})};
    if (norm(in.neighbors[0].rel_pos) < 0.3 || norm(in.neighbors[1].rel_pos) < 0.3) continue;
    const Vec2 base = decide(in, c, 0.05, 10.0, kR).desired_velocity;
    in.neighbors[0].rel_pos += Vec2{eps, -eps};
    const Vec2 moved = decide(in, c, 0.05, 10.0, kR).desired_velocity;
    // Walking neighbours only, so no sector mask is involved.
    CHECK(norm(moved - base) <= 1e4 * eps);
  }
}
