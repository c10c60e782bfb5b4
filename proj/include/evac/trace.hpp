// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "evac/forces.hpp"
#include "evac/motor.hpp"

namespace evac {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kTraceVersion = 1;

struct TraceMeta {
  std::string scenario;
  double dt = 1.0 / 60.0;
  int decision_every = 3;
  std::uint64_t seed = 0;
  std::int64_t max_ticks = 0;
  std::vector<ClassId> agent_classes;  // by agent id
  Polygon bottleneck;
  bool has_forces = false;
  bool has_paths = false;

  bool operator==(const TraceMeta&) const = default;
};

struct AgentState {
  int id = -1;
  Vec2 pos;
  Vec2 vel;
  AgentStatus status = AgentStatus::walking;
  double gait = 0.0;
  bool operator==(const AgentState&) const = default;
};

struct ContactSummary {
  int count = 0;
  double total_impulse = 0.0;
  double max_impulse = 0.0;
  bool operator==(const ContactSummary&) const = default;
};

struct ForceComponents {
  int id = -1;
  Vec2 drive;
  Vec2 repulsive;
  Vec2 evasive;
  bool operator==(const ForceComponents&) const = default;
};

struct PathRecord {
  int id = -1;
  std::vector<Vec2> points;
  bool operator==(const PathRecord&) const = default;
};

struct TraceFrame {
  std::int64_t tick = 0;
  std::vector<AgentState> agents;  // ascending id, every agent once
  ContactSummary contacts;
  std::vector<StatusChange> transitions;
  std::vector<PartForceRecord> forces;         // nonzero records only
  std::vector<ForceComponents> components;     // decision ticks only
  std::vector<PathRecord> paths;               // agents that replanned

  bool operator==(const TraceFrame&) const = default;
};

std::string encode_meta(const TraceMeta& meta);
TraceMeta decode_meta(const std::string& text);
std::string encode_frame(const TraceFrame& frame);
/// Returns nullopt for the end-of-trace footer line.
std::optional<TraceFrame> decode_frame(const std::string& line);
std::string encode_footer(std::int64_t frames);

/// Receives frames in tick order.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void write(TraceFrame frame) = 0;
  /// Marks the trace complete.
  virtual void finish() = 0;
};

/// Keeps every frame in memory.
class MemoryTrace : public TraceSink {
 public:
  void write(TraceFrame frame) override { frames.push_back(std::move(frame)); }
  void finish() override { complete = true; }

  std::vector<TraceFrame> frames;
  bool complete = false;
};

/// Writes `<dir>/meta.json` and `<dir>/trace.jsonl` (or `.jsonl.gz`) from a
/// dedicated thread. A full queue blocks the producer.
class TraceWriter : public TraceSink {
 public:
  TraceWriter(const std::filesystem::path& dir, const TraceMeta& meta, bool gzip,
              std::size_t queue_capacity = 64);
  ~TraceWriter() override;
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void write(TraceFrame frame) override;
  void finish() override;

 private:
  void loop();

  struct Output;
  std::unique_ptr<Output> out_;
  std::size_t capacity_;
  std::deque<TraceFrame> queue_;
  std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  bool closing_ = false;
  bool finished_ = false;
  std::int64_t written_ = 0;
  std::string error_;
  std::thread thread_;
};

/// Streams a trace directory. Plain and gzip files are both accepted.
class TraceReader {
 public:
  explicit TraceReader(const std::filesystem::path& dir);
  ~TraceReader();
  TraceReader(const TraceReader&) = delete;
  TraceReader& operator=(const TraceReader&) = delete;

  const TraceMeta& meta() const { return meta_; }
  /// False at end of data; `complete()` tells whether a footer was seen.
  bool next(TraceFrame& frame);
  bool complete() const { return complete_; }

 private:
  bool read_line(std::string& line);

  TraceMeta meta_;
  void* gz_ = nullptr;
  bool complete_ = false;
  bool partial_ = false;
  std::int64_t line_no_ = 0;
};

std::filesystem::path trace_file(const std::filesystem::path& dir);

}  // namespace evac
