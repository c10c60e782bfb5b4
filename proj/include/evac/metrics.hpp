// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "evac/trace.hpp"

namespace evac {

struct RunMetrics {
  int agents = 0;
  int escaped = 0;
  double success_rate = 0.0;
  int fallen_count = 0;    // walking -> fallen transitions
  int trampled_count = 0;
  double mean_evacuation_time = 0.0;  // s, over escaped agents
  std::array<std::vector<double>, 6> speed_samples;  // by ClassId, m/s
  std::vector<double> bottleneck_density;             // agents per m^2, 1 Hz
  std::int64_t final_tick = 0;
  bool truncated = false;

  bool operator==(const RunMetrics&) const = default;
};

/// Streaming reduction of a trace. Speeds are sampled once per simulated
/// second (ticks that are positive multiples of round(1/dt)) for agents that
/// are walking in that frame.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(const TraceMeta& meta);

  void add(const TraceFrame& frame);
  RunMetrics finish(bool complete) const;

 private:
  TraceMeta meta_;
  std::int64_t sample_every_ = 60;
  double bottleneck_area_ = 0.0;
  RunMetrics m_;
  std::vector<AgentStatus> last_;
  std::vector<double> escape_time_;
  bool seen_frame_ = false;
};

RunMetrics compute_metrics(const TraceMeta& meta, const std::vector<TraceFrame>& frames,
                           bool complete = true);
/// Reads a trace directory; a missing footer sets `truncated`.
RunMetrics compute_metrics(const std::filesystem::path& trace_dir);

}  // namespace evac
