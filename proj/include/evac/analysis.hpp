// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "evac/engine.hpp"
#include "evac/metrics.hpp"
#include "evac/params.hpp"
#include "evac/scenario.hpp"

namespace evac {

enum class SweepVariable { agent_count, corridor_width, terrain_kind };

std::string_view sweep_variable_name(SweepVariable v);
std::optional<SweepVariable> parse_sweep_variable(std::string_view name);

struct SweepSpec {
  SweepVariable variable = SweepVariable::agent_count;
  std::vector<std::string> values;  // numbers or terrain kind names
  int repetitions = 10;
  std::uint64_t base_seed = 0;
  std::string base_scenario;        // scenario JSON text
};

/// Sweep file:
///   {"sweep": {"variable": ..., "values": [...], "repetitions": n,
///              "base_seed": s},
///    "scenario": {...scenario object...}}
SweepSpec parse_sweep(const std::string& text);
SweepSpec load_sweep(const std::filesystem::path& path);

/// The base scenario with value `index` applied. Template scenes take the
/// value as a template parameter; explicit scenes rescale their spawn counts
/// (agent_count) or get a single terrain zone over the bounds (terrain_kind).
ScenarioSpec sweep_scenario(const SweepSpec& sweep, std::size_t index);

struct SweepCell {
  std::size_t value_index = 0;
  std::string value;
  int repetition = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::string error;  // empty when the run succeeded
};

struct SweepResult {
  SweepVariable variable = SweepVariable::agent_count;
  std::vector<SweepCell> cells;  // value-major, then repetition
  /// Spearman correlation between the swept value (its position in the list
  /// for terrain kinds) and the per-run counts, over all successful cells.
  double rho_trampled = 0.0;
  double rho_fallen = 0.0;
};

/// Cells run in parallel; each run is single-threaded. Per-cell failures are
/// recorded in the cell rather than thrown.
SweepResult run_sweep(const SweepSpec& sweep, const SimConfig& config,
                      const CalibrationTable& calib, int threads = 0);

std::string format_sweep_table(const SweepResult& result);

/// One run per seed, in parallel; results in seed order.
std::vector<RunMetrics> run_repetitions(const ScenarioSpec& spec, const SimConfig& config,
                                        const CalibrationTable& calib,
                                        const std::vector<std::uint64_t>& seeds, int threads = 0);

struct SpeedSummary {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Five-number summary of a sample; all zero when empty.
SpeedSummary summarize(std::vector<double> samples);

/// Pools the walking-speed samples of several runs per class.
std::array<SpeedSummary, 6> speed_distribution(const std::vector<RunMetrics>& runs);

/// class, n, min, q1, median, q3, max; classes without samples get "-".
std::string format_speed_table(const std::array<SpeedSummary, 6>& summary);

/// One row of run metrics per labelled run.
std::string format_metrics_table(const std::vector<std::pair<std::string, RunMetrics>>& runs);

}  // namespace evac
