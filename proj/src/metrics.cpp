// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/metrics.hpp"

#include <cmath>

namespace evac {

MetricsAccumulator::MetricsAccumulator(const TraceMeta& meta) : meta_(meta) {
  sample_every_ = std::max<std::int64_t>(1, std::llround(1.0 / meta.dt));
  if (meta.bottleneck.size() >= 3) bottleneck_area_ = std::abs(polygon_area(meta.bottleneck));
  m_.agents = static_cast<int>(meta.agent_classes.size());
  last_.assign(meta.agent_classes.size(), AgentStatus::walking);
  escape_time_.assign(meta.agent_classes.size(), -1.0);
}

void MetricsAccumulator::add(const TraceFrame& frame) {
  seen_frame_ = true;
  m_.final_tick = frame.tick;
  for (const StatusChange& s : frame.transitions) {
    if (s.to == AgentStatus::fallen && s.from == AgentStatus::walking) ++m_.fallen_count;
    if (s.to == AgentStatus::trampled) ++m_.trampled_count;
    if (s.to == AgentStatus::escaped && s.id >= 0 &&
        static_cast<std::size_t>(s.id) < escape_time_.size())
      escape_time_[s.id] = static_cast<double>(frame.tick) * meta_.dt;
  }
  for (const AgentState& a : frame.agents)
    if (a.id >= 0 && static_cast<std::size_t>(a.id) < last_.size()) last_[a.id] = a.status;

  if (frame.tick % sample_every_ != 0) return;
  if (frame.tick > 0) {
    for (const AgentState& a : frame.agents) {
      if (a.status != AgentStatus::walking) continue;
      if (a.id < 0 || static_cast<std::size_t>(a.id) >= meta_.agent_classes.size()) continue;
      m_.speed_samples[static_cast<int>(meta_.agent_classes[a.id])].push_back(norm(a.vel));
    }
  }
  if (bottleneck_area_ > 0.0) {
    int inside = 0;
    for (const AgentState& a : frame.agents)
      if (a.status != AgentStatus::escaped && point_in_polygon(a.pos, meta_.bottleneck)) ++inside;
    m_.bottleneck_density.push_back(inside / bottleneck_area_);
  }
}

RunMetrics MetricsAccumulator::finish(bool complete) const {
  RunMetrics out = m_;
  out.truncated = !complete;
  int escaped = 0;
  for (AgentStatus s : last_)
    if (s == AgentStatus::escaped) ++escaped;
  if (!seen_frame_) escaped = 0;
  out.escaped = escaped;
  out.success_rate = out.agents > 0 ? static_cast<double>(escaped) / out.agents : 0.0;
  double sum = 0.0;
  int n = 0;
  for (double t : escape_time_) {
    if (t >= 0.0) {
      sum += t;
      ++n;
    }
  }
  out.mean_evacuation_time = n > 0 ? sum / n : 0.0;
  return out;
}

RunMetrics compute_metrics(const TraceMeta& meta, const std::vector<TraceFrame>& frames,
                           bool complete) {
  MetricsAccumulator acc(meta);
  for (const TraceFrame& f : frames) acc.add(f);
  return acc.finish(complete);
}

RunMetrics compute_metrics(const std::filesystem::path& trace_dir) {
  TraceReader reader(trace_dir);
  MetricsAccumulator acc(reader.meta());
  TraceFrame f;
  while (reader.next(f)) acc.add(f);
  return acc.finish(reader.complete());
}

}  // namespace evac
