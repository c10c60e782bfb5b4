// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "evac/decision.hpp"
#include "evac/forces.hpp"
#include "evac/metrics.hpp"
#include "evac/motor.hpp"
#include "evac/pathfinding.hpp"
#include "evac/scenario.hpp"
#include "evac/spatial_hash.hpp"
#include "evac/trace.hpp"

namespace evac {

/// Inputs that do not fit together (for example a class without calibration).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TraceOptions {
  std::filesystem::path dir;  // empty: no trace files
  bool gzip = false;
  bool dump_forces = false;   // part records and decision force components
  bool paths = false;         // waypoint paths whenever an agent replans
};

struct SimConfig {
  double dt = 1.0 / 60.0;
  int decision_every = 3;
  std::int64_t max_ticks = 1000;
  std::optional<std::uint64_t> seed;  // replaces the scenario seed when set
  int threads = 0;                    // 0: library default
  double replan_interval = 1.0;       // s
  double replan_min_gap = 0.25;       // s, between blockage-triggered replans
  double arrive_radius = 0.4;         // m
  double fallen_cell_cost = 4.0;      // cost multiplier under fallen bodies
  TraceOptions trace;
};

/// Thread count actually used: EVACSIM_THREADS when set, else `hint`, else
/// the library default.
int resolve_threads(int hint);

struct AgentView {
  int id = -1;
  Vec2 pos;
  Vec2 vel;
  AgentStatus status = AgentStatus::walking;
  double slow_time = 0.0;
};

/// Immutable copy of the agents at the start of a decision tick. Escaped
/// agents are not indexed.
class WorldSnapshot {
 public:
  WorldSnapshot() = default;
  explicit WorldSnapshot(std::vector<AgentView> agents, double cell_size = 2.0);

  const std::vector<AgentView>& agents() const { return agents_; }
  /// Ids with centre distance <= range, ascending by (distance, id).
  std::vector<int> query_neighbors(Vec2 pos, double range, int exclude_id = -1) const;

 private:
  std::vector<AgentView> agents_;
  std::vector<int> indexed_;  // agent indices that are in the hash
  SpatialHash hash_;
};

std::vector<int> query_neighbors(const WorldSnapshot& snap, Vec2 pos, double range,
                                 int exclude_id = -1);

/// One simulation instance. Not copyable; the motor world points into it.
class Simulation {
 public:
  Simulation(const ScenarioSpec& spec, const SimConfig& config, const CalibrationTable& calib);
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;
  ~Simulation();

  const ScenarioSpec& spec() const { return spec_; }
  const SimConfig& config() const { return config_; }
  std::int64_t tick() const { return tick_; }
  bool done() const;

  const std::vector<Agent>& agents() const { return agents_; }
  std::vector<Agent>& agents() { return agents_; }
  const std::vector<ContactEvent>& contacts() const { return contacts_; }
  const std::vector<PartForceRecord>& part_forces() const { return forces_; }
  const std::vector<Vec2>& desired() const { return desired_; }

  TraceMeta meta() const;
  TraceFrame initial_frame() const;
  /// Advances one motor tick and returns the frame describing its end.
  TraceFrame step();

  WorldSnapshot snapshot() const;

 private:
  struct Impl;
  void decision_phase(TraceFrame& frame);
  void rebuild_overlay();

  ScenarioSpec spec_;
  SimConfig config_;
  MotorWorld world_;
  NavGrid base_grid_;
  NavGrid overlay_;
  std::vector<int> overlay_down_;  // down agent ids the overlay was built for
  std::vector<Agent> agents_;
  std::vector<Vec2> desired_;
  std::vector<std::int64_t> next_replan_;
  std::vector<std::int64_t> last_replan_;
  std::vector<ContactEvent> contacts_;
  std::vector<PartForceRecord> forces_;
  std::unique_ptr<Impl> impl_;
  std::int64_t tick_ = 0;
};

struct RunResult {
  RunMetrics metrics;
  std::int64_t ticks = 0;
};

/// Runs to max_ticks or until every agent is terminal. Frames go to the trace
/// directory from `config.trace` when set and to `sink` when given.
RunResult run(const ScenarioSpec& spec, const SimConfig& config, const CalibrationTable& calib,
              TraceSink* sink = nullptr);

}  // namespace evac
