// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evac/geometry.hpp"
#include "evac/params.hpp"

namespace evac {

struct NavGrid;

/// Malformed scenario text.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed scenario violating an invariant; `field()` is the JSON path.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class TerrainKind { normal, uneven, obstacle_field, slippery };

std::string_view terrain_kind_name(TerrainKind kind);
std::optional<TerrainKind> parse_terrain_kind(std::string_view name);

struct TerrainZone {
  Polygon region;
  TerrainKind kind = TerrainKind::normal;
  double friction_scale = 1.0;
  double trip_rate = 0.0;  // per second per agent
  double speed_scale = 1.0;

  /// Default coefficients for a kind.
  static TerrainZone of_kind(TerrainKind kind, Polygon region);
  bool operator==(const TerrainZone&) const = default;
};

/// Agents escape once their centre is within width/2 of the segment.
struct ExitRegion {
  Segment segment;
  double width = 0.5;

  bool contains(Vec2 p) const { return distance_to_segment(p, segment) <= 0.5 * width; }
  bool operator==(const ExitRegion&) const = default;
};

struct SpawnGroup {
  Polygon region;
  int count = 0;
  std::vector<std::pair<ClassId, double>> class_mix;  // sorted by ClassId

  bool operator==(const SpawnGroup&) const = default;
};

struct ScenarioSpec {
  std::string name = "scenario";
  Rect bounds;
  std::vector<Segment> walls;
  std::vector<ExitRegion> exits;
  std::vector<TerrainZone> terrain_zones;
  std::vector<SpawnGroup> spawns;
  double cell_size = 0.25;
  std::uint64_t seed = 0;
  Polygon bottleneck;  // optional density probe region
  SfmCoefficients sfm;
  MotorConstants motor;
  ClassTable classes = default_class_table();

  int total_agents() const;
  bool operator==(const ScenarioSpec&) const = default;
};

/// Combined terrain effect at a point (most restrictive zone wins).
struct TerrainEffect {
  double friction_scale = 1.0;
  double trip_rate = 0.0;
  double speed_scale = 1.0;
};

TerrainEffect terrain_at(const ScenarioSpec& spec, Vec2 p);

struct SpawnedAgent {
  Vec2 pos;
  ClassId cls = ClassId::non_personalized;
  bool operator==(const SpawnedAgent&) const = default;
};

/// Throws ValidationError naming the first offending field.
void validate(const ScenarioSpec& spec);

ScenarioSpec parse_scenario(std::string_view text);
ScenarioSpec load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioSpec& spec);

/// Seeded dart-throwing placement with spacing 2 * body_radius.
std::vector<SpawnedAgent> spawn_agents(const ScenarioSpec& spec);

/// Largest-remainder split of `count` over the class mix.
std::vector<std::pair<ClassId, int>> split_class_counts(
    int count, const std::vector<std::pair<ClassId, double>>& mix);

NavGrid rasterize(const ScenarioSpec& spec);
/// Same, with walls inflated by `radius` instead of the body radius.
NavGrid rasterize(const ScenarioSpec& spec, double radius);

/// Built-in parametric scenes. These are also reachable from scenario files
/// through a "template" block.
struct RoomParams {
  double width = 20.0;
  double height = 10.0;
  double exit_width = 2.0;
  int agents = 50;
  bool pillars = true;
  std::vector<std::pair<ClassId, double>> class_mix = {{ClassId::non_personalized, 1.0}};
};
ScenarioSpec make_room_scene(const RoomParams& p);

struct CorridorParams {
  double corridor_width = 2.0;
  double corridor_length = 8.0;
  double room_width = 12.0;
  double room_height = 12.0;
  int agents = 120;
  std::vector<std::pair<ClassId, double>> class_mix = {{ClassId::non_personalized, 1.0}};
};
ScenarioSpec make_corridor_scene(const CorridorParams& p);

struct StraightParams {
  double length = 30.0;
  ClassId cls = ClassId::non_personalized;
};
ScenarioSpec make_straight_scene(const StraightParams& p);

/// Straight corridor with the crowd spawned inside it, exit at the far end.
struct LaneParams {
  double length = 30.0;
  double width = 3.0;
  double spawn_length = 12.0;
  int agents = 60;
  std::vector<std::pair<ClassId, double>> class_mix = {
      {ClassId::young, 0.2}, {ClassId::middle_aged, 0.2}, {ClassId::old, 0.2},
      {ClassId::patient, 0.2}, {ClassId::disabled, 0.2}};
};
ScenarioSpec make_lane_scene(const LaneParams& p);

struct TerrainRoomParams {
  TerrainKind kind = TerrainKind::normal;
  int agents = 50;
};
ScenarioSpec make_terrain_scene(const TerrainRoomParams& p);

}  // namespace evac
