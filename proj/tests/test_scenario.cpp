// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "evac/pathfinding.hpp"
#include "evac/scenario.hpp"

using namespace evac;

namespace {

const char* kRoom = R"({
  "name": "room",
  "bounds": [[0, 0], [20, 10]],
  "seed": 11,
  "walls": [],
  "exits": [{"segment": [[19.75, 4], [19.75, 6]], "width": 0.5}],
  "spawns": [{"region": [[0.5, 0.5], [9, 0.5], [9, 9.5], [0.5, 9.5]], "count": 50,
              "class_mix": {"young": 0.5, "old": 0.5}}]
})";

ScenarioSpec open_room() {
  ScenarioSpec s;
  s.bounds = {{0, 0}, {10, 10}};
  s.exits.push_back({{{9.75, 4}, {9.75, 6}}, 0.5});
  return s;
}

}  // namespace

TEST_CASE("room file parses, validates and spawns every agent") {
  const ScenarioSpec s = parse_scenario(kRoom);
  CHECK(s.name == "room");
  CHECK(s.total_agents() == 50);
  const auto placed = spawn_agents(s);
  CHECK(placed.size() == 50);
  for (std::size_t i = 0; i < placed.size(); ++i)
    for (std::size_t j = i + 1; j < placed.size(); ++j)
      CHECK(norm(placed[i].pos - placed[j].pos) >= 2.0 * s.motor.body_radius - 1e-12);
}

TEST_CASE("serialize then parse gives an equal spec") {
  const ScenarioSpec s = parse_scenario(kRoom);
  CHECK(parse_scenario(serialize_scenario(s)) == s);
  for (TerrainKind k : {TerrainKind::uneven, TerrainKind::slippery}) {
    ScenarioSpec t = make_terrain_scene({k, 30});
    CHECK(parse_scenario(serialize_scenario(t)) == t);
  }
}

TEST_CASE("load_scenario reads from disk") {
  const auto path = std::filesystem::temp_directory_path() / "evacsim_scenario_test.json";
  {
    std::ofstream out(path);
    out << kRoom;
  }
  CHECK(load_scenario(path) == parse_scenario(kRoom));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_scenario(path), ParseError);
}

TEST_CASE("missing exits is a validation error naming the field") {
  ScenarioSpec s = open_room();
  s.exits.clear();
  try {
    validate(s);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "exits");
    CHECK(std::string(e.what()).find("at least one exit") != std::string::npos);
  }
}

TEST_CASE("malformed text is a parse error") {
  CHECK_THROWS_AS(parse_scenario("{\"bounds\": [[0,0],"), ParseError);
}

TEST_CASE("invariant violations are reported by field") {
  auto field_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of(R"({"bounds": [[0,0],[10,10]], "exits": [{"segment": [[9.75,4],[9.75,6]], "width": 0.2}]})")
            .find("width") != std::string::npos);
  CHECK(field_of(R"({"bounds": [[0,0],[10,10]], "cell_size": 5, "exits": [{"segment": [[9.75,4],[9.75,6]]}]})") ==
        "cell_size");
  CHECK(field_of(R"({"bounds": [[0,0],[10,10]], "exits": [{"segment": [[9.75,4],[9.75,6]]}],
      "spawns": [{"region": [[1,1],[2,1],[2,2],[1,2]], "count": 2, "class_mix": {"young": 0.4}}]})")
            .find("class_mix") != std::string::npos);
}

TEST_CASE("exact-fraction class split") {
  const auto split = split_class_counts(40, {{ClassId::young, 0.5}, {ClassId::old, 0.5}});
  REQUIRE(split.size() == 2);
  CHECK(split[0] == std::pair{ClassId::young, 20});
  CHECK(split[1] == std::pair{ClassId::old, 20});
  int total = 0;
  for (auto [c, n] : split_class_counts(7, {{ClassId::young, 1.0 / 3}, {ClassId::old, 1.0 / 3},
                                            {ClassId::patient, 1.0 / 3}}))
    total += n;
  CHECK(total == 7);
}

TEST_CASE("spawning is deterministic for a fixed seed") {
  const ScenarioSpec s = parse_scenario(kRoom);
  CHECK(spawn_agents(s) == spawn_agents(s));
  ScenarioSpec other = s;
  other.seed = 12;
  CHECK(spawn_agents(other) != spawn_agents(s));
}

TEST_CASE("no walls rasterizes to a free uniform grid") {
  const NavGrid g = rasterize(open_room());
  CHECK(g.width == 40);
  CHECK(g.height == 40);
  for (std::size_t i = 0; i < g.cost.size(); ++i) {
    CHECK(!g.blocked[i]);
    CHECK(g.cost[i] == 1.0);
  }
  CHECK(!g.exit_cells.empty());
}

TEST_CASE("a wall with a 2 m gap leaves ceil((2 - 2r) / cell) free cells") {
  ScenarioSpec s = open_room();
  s.walls.push_back({{5, 0}, {5, 4}});
  s.walls.push_back({{5, 6}, {5, 10}});
  const NavGrid g = rasterize(s);
  const double r = s.motor.body_radius;
  const int expected = static_cast<int>(std::ceil((2.0 - 2.0 * r) / s.cell_size - 1e-9));
  // Columns touching x = 5 (cells 19 and 20) both see the gap the same way.
  for (int cx : {19, 20}) {
    int free = 0;
    for (int cy = 0; cy < g.height; ++cy) free += !g.blocked[g.index(cx, cy)];
    CHECK(free == expected);
  }
  // Direct geometry oracle per cell.
  for (int i = 0; i < g.width * g.height; ++i) {
    const double x0 = g.cell_x(i) * s.cell_size, y0 = g.cell_y(i) * s.cell_size;
    const Rect cell{{x0, y0}, {x0 + s.cell_size, y0 + s.cell_size}};
    double d = 1e9;
    for (const auto& w : s.walls) d = std::min(d, rect_segment_distance(cell, w));
    CHECK(static_cast<bool>(g.blocked[i]) == (d < r));
  }
}

TEST_CASE("slippery zone with speed_scale 0.5 costs 2") {
  ScenarioSpec s = open_room();
  TerrainZone z = TerrainZone::of_kind(TerrainKind::slippery, rect_polygon({2, 2}, {4, 4}));
  z.speed_scale = 0.5;
  s.terrain_zones.push_back(z);
  const NavGrid g = rasterize(s);
  CHECK(g.cost[g.cell_at({3.0, 3.0})] == 2.0);
  CHECK(g.cost[g.cell_at({6.0, 6.0})] == 1.0);
}

TEST_CASE("terrain kinds carry their invariants") {
  const Polygon r = rect_polygon({0, 0}, {1, 1});
  const auto normal = TerrainZone::of_kind(TerrainKind::normal, r);
  CHECK(normal.friction_scale == 1.0);
  CHECK(normal.trip_rate == 0.0);
  CHECK(normal.speed_scale == 1.0);
  CHECK(TerrainZone::of_kind(TerrainKind::slippery, r).friction_scale < 1.0);
  CHECK(TerrainZone::of_kind(TerrainKind::uneven, r).trip_rate > 0.0);
  CHECK(TerrainZone::of_kind(TerrainKind::obstacle_field, r).trip_rate > 0.0);
}

TEST_CASE("a larger inflation radius never unblocks a cell") {
  const ScenarioSpec s = make_corridor_scene({});
  const NavGrid a = rasterize(s, 0.2), b = rasterize(s, 0.35);
  for (std::size_t i = 0; i < a.blocked.size(); ++i)
    if (a.blocked[i]) CHECK(b.blocked[i]);
}

TEST_CASE("built-in scenes validate") {
  CHECK_NOTHROW(validate(make_room_scene({})));
  CHECK_NOTHROW(validate(make_corridor_scene({})));
  CHECK_NOTHROW(validate(make_straight_scene({})));
  CHECK_NOTHROW(validate(make_lane_scene({})));
  for (int k = 0; k < 4; ++k) CHECK_NOTHROW(validate(make_terrain_scene({static_cast<TerrainKind>(k), 50})));
}
