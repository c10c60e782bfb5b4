// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/engine.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace evac {

int resolve_threads(int hint) {
  if (const char* env = std::getenv("EVACSIM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  if (hint > 0) return hint;
  return tbb::this_task_arena::max_concurrency();
}

WorldSnapshot::WorldSnapshot(std::vector<AgentView> agents, double cell_size)
    : agents_(std::move(agents)) {
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (agents_[i].status == AgentStatus::escaped) continue;
    indexed_.push_back(static_cast<int>(i));
    pts.push_back(agents_[i].pos);
  }
  hash_ = SpatialHash(pts, cell_size);
}

std::vector<int> WorldSnapshot::query_neighbors(Vec2 pos, double range, int exclude_id) const {
  std::vector<std::pair<double, int>> found;
  hash_.visit(pos, range, [&](int k) {
    const AgentView& a = agents_[indexed_[k]];
    if (a.id == exclude_id) return;
    const double d = norm(a.pos - pos);
    if (d <= range) found.emplace_back(d, a.id);
  });
  std::sort(found.begin(), found.end());
  std::vector<int> ids;
  ids.reserve(found.size());
  for (const auto& [d, id] : found) ids.push_back(id);
  return ids;
}

std::vector<int> query_neighbors(const WorldSnapshot& snap, Vec2 pos, double range,
                                 int exclude_id) {
  return snap.query_neighbors(pos, range, exclude_id);
}

struct Simulation::Impl {
  explicit Impl(int threads) : arena(threads) {}
  tbb::task_arena arena;
};

namespace {

NeighborStatus neighbor_status(const AgentView& a, double stop_time) {
  if (is_down(a.status)) return NeighborStatus::fallen;
  if (a.status == AgentStatus::trapped || a.slow_time >= stop_time) return NeighborStatus::stopped;
  return NeighborStatus::walking;
}

}  // namespace

Simulation::Simulation(const ScenarioSpec& spec, const SimConfig& config,
                       const CalibrationTable& calib)
    : spec_(spec), config_(config) {
  if (!(config_.dt > 0.0)) throw ConfigError("dt must be positive");
  if (config_.decision_every < 1) throw ConfigError("decision_every must be >= 1");
  if (config_.max_ticks < 0) throw ConfigError("max_ticks must be >= 0");
  if (config_.seed) spec_.seed = *config_.seed;
  validate(spec_);

  for (const SpawnGroup& g : spec_.spawns) {
    if (g.count == 0) continue;
    for (const auto& [cls, w] : g.class_mix) {
      if (w <= 0.0) continue;
      const auto v = calib[cls];
      if (!v) throw ConfigError("no calibration for class " + std::string(class_name(cls)));
      if (!(*v > 0.0))
        throw ConfigError("calibrated speed for " + std::string(class_name(cls)) +
                          " must be positive");
      spec_.classes[cls].v_setting = *v;
    }
  }

  world_ = MotorWorld::from(spec_, config_.dt);
  base_grid_ = rasterize(spec_);
  overlay_ = base_grid_;
  impl_ = std::make_unique<Impl>(resolve_threads(config_.threads));

  const auto spawned = spawn_agents(spec_);
  agents_.reserve(spawned.size());
  for (std::size_t i = 0; i < spawned.size(); ++i) {
    agents_.push_back(make_agent(static_cast<int>(i), spec_.classes[spawned[i].cls], spec_,
                                 spawned[i].pos, spec_.seed, config_.dt));
  }
  desired_.assign(agents_.size(), Vec2{});
  next_replan_.assign(agents_.size(), 0);
  last_replan_.assign(agents_.size(), -1000000);
  forces_.resize(agents_.size());
}

Simulation::~Simulation() = default;

bool Simulation::done() const {
  if (tick_ >= config_.max_ticks) return true;
  return std::all_of(agents_.begin(), agents_.end(),
                     [](const Agent& a) { return is_terminal(a.status); });
}

TraceMeta Simulation::meta() const {
  TraceMeta m;
  m.scenario = spec_.name;
  m.dt = config_.dt;
  m.decision_every = config_.decision_every;
  m.seed = spec_.seed;
  m.max_ticks = config_.max_ticks;
  for (const Agent& a : agents_) m.agent_classes.push_back(a.cls);
  m.bottleneck = spec_.bottleneck;
  m.has_forces = config_.trace.dump_forces;
  m.has_paths = config_.trace.paths;
  return m;
}

TraceFrame Simulation::initial_frame() const {
  TraceFrame f;
  f.tick = tick_;
  for (const Agent& a : agents_) f.agents.push_back({a.id, a.pos, a.vel, a.status, a.gait.value});
  return f;
}

WorldSnapshot Simulation::snapshot() const {
  std::vector<AgentView> views;
  views.reserve(agents_.size());
  for (const Agent& a : agents_) views.push_back({a.id, a.pos, a.vel, a.status, a.slow_time});
  return WorldSnapshot(std::move(views), std::max(2.0, spec_.sfm.sense_range));
}

void Simulation::rebuild_overlay() {
  std::vector<int> down;
  for (const Agent& a : agents_)
    if (is_down(a.status)) down.push_back(a.id);
  if (down == overlay_down_) return;
  overlay_down_ = down;
  overlay_ = base_grid_;
  const double reach = spec_.motor.body_radius + 0.5 * overlay_.cell_size;
  for (int id : down) {
    const Vec2 p = agents_[id].pos;
    const int c = overlay_.cell_at(p);
    if (c < 0) continue;
    const int span = static_cast<int>(std::ceil(reach / overlay_.cell_size));
    const int cx = overlay_.cell_x(c), cy = overlay_.cell_y(c);
    for (int y = cy - span; y <= cy + span; ++y)
      for (int x = cx - span; x <= cx + span; ++x) {
        if (!overlay_.in_grid(x, y)) continue;
        const int idx = overlay_.index(x, y);
        if (norm(overlay_.center(idx) - p) <= reach) overlay_.cost[idx] *= config_.fallen_cell_cost;
      }
  }
}

void Simulation::decision_phase(TraceFrame& frame) {
  rebuild_overlay();
  const WorldSnapshot snap = snapshot();
  const std::size_t n = agents_.size();
  const double r = spec_.motor.body_radius;
  const double dt_dec = config_.dt * config_.decision_every;
  const auto replan_ticks =
      std::max<std::int64_t>(1, std::llround(config_.replan_interval / config_.dt));
  const auto gap_ticks = std::llround(config_.replan_min_gap / config_.dt);

  std::vector<Vec2> down_pos;
  for (const Agent& a : agents_)
    if (is_down(a.status)) down_pos.push_back(a.pos);

  std::vector<Decision> decisions(n);
  std::vector<signed char> reachable(n, -1);  // -1 not planned, 0 no, 1 yes
  const NavGrid& grid = overlay_;

  auto decide_one = [&](std::size_t i) {
    Agent& a = agents_[i];
    if (a.status != AgentStatus::walking && a.status != AgentStatus::trapped) return;

    bool replan = tick_ >= next_replan_[i] || a.path.points.empty();
    if (!replan && a.status == AgentStatus::walking && down_pos.size() >= 2 &&
        tick_ - last_replan_[i] >= gap_ticks && a.path.cursor < a.path.points.size()) {
      const Segment seg{a.pos, a.path.points[a.path.cursor]};
      int blocking = 0;
      for (Vec2 p : down_pos)
        if (distance_to_segment(p, seg) < 2.0 * r) ++blocking;
      replan = blocking >= 2;
    }
    if (replan) {
      next_replan_[i] = tick_ + replan_ticks;
      last_replan_[i] = tick_;
      Vec2 start = a.pos;
      if (grid.blocked_at(start)) {
        const int c = nearest_free_cell(grid, start);
        if (c >= 0) start = grid.center(c);
      }
      auto path = plan(grid, start);
      if (path) {
        path->points.front() = a.pos;
        a.path = std::move(*path);
        reachable[i] = 1;
      } else {
        a.path = {};
        reachable[i] = 0;
      }
    }
    if (a.status == AgentStatus::trapped && reachable[i] != 1) return;
    if (reachable[i] == 0) return;

    DecisionInput in;
    in.self_id = a.id;
    in.self_pos = a.pos;
    in.self_vel = a.vel;
    in.v_setting = a.v_setting;
    in.grid = &base_grid_;
    if (!a.path.points.empty()) {
      const Vec2 target = next_waypoint(a.path, a.pos, config_.arrive_radius);
      const Vec2 d = target - a.pos;
      if (norm(d) > 1e-9) in.desired_dir = d / norm(d);
    }
    for (int j : snap.query_neighbors(a.pos, a.sfm.sense_range, a.id)) {
      const AgentView& o = snap.agents()[j];
      in.neighbors.push_back(
          {o.id, o.pos - a.pos, o.vel, neighbor_status(o, spec_.motor.stop_time)});
    }
    decisions[i] = decide(in, a.sfm, dt_dec, a.v_max, r);
  };

  impl_->arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                      [&](const tbb::blocked_range<std::size_t>& range) {
                        for (std::size_t i = range.begin(); i != range.end(); ++i) decide_one(i);
                      });
  });

  for (std::size_t i = 0; i < n; ++i) {
    Agent& a = agents_[i];
    if (reachable[i] == 0 && a.status == AgentStatus::walking) {
      frame.transitions.push_back({a.id, a.status, AgentStatus::trapped});
      a.status = AgentStatus::trapped;
    } else if (reachable[i] == 1 && a.status == AgentStatus::trapped) {
      frame.transitions.push_back({a.id, a.status, AgentStatus::walking});
      a.status = AgentStatus::walking;
    }
    desired_[i] = a.status == AgentStatus::walking ? decisions[i].desired_velocity : Vec2{};
    if (config_.trace.dump_forces && a.status == AgentStatus::walking)
      frame.components.push_back(
          {a.id, decisions[i].drive, decisions[i].repulsive, decisions[i].evasive});
    if (config_.trace.paths && reachable[i] == 1) frame.paths.push_back({a.id, a.path.points});
  }
}

TraceFrame Simulation::step() {
  TraceFrame frame;
  if (tick_ % config_.decision_every == 0) decision_phase(frame);
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (agents_[i].status != AgentStatus::walking) desired_[i] = {};

  contacts_ = step_motor(agents_, desired_, world_);
  for (Agent& a : agents_) {
    if (auto change = update_status(a, contacts_, world_)) frame.transitions.push_back(*change);
  }
  ++tick_;
  accumulate(forces_, contacts_, config_.dt, tick_);

  frame.tick = tick_;
  frame.agents.reserve(agents_.size());
  for (const Agent& a : agents_)
    frame.agents.push_back({a.id, a.pos, a.vel, a.status, a.gait.value});
  frame.contacts.count = static_cast<int>(contacts_.size());
  for (const ContactEvent& e : contacts_) {
    frame.contacts.total_impulse += e.impulse;
    frame.contacts.max_impulse = std::max(frame.contacts.max_impulse, e.impulse);
  }
  if (config_.trace.dump_forces)
    for (const PartForceRecord& r : forces_)
      if (!r.zero()) frame.forces.push_back(r);
  return frame;
}

RunResult run(const ScenarioSpec& spec, const SimConfig& config, const CalibrationTable& calib,
              TraceSink* sink) {
  Simulation sim(spec, config, calib);
  const TraceMeta meta = sim.meta();
  std::unique_ptr<TraceWriter> writer;
  if (!config.trace.dir.empty())
    writer = std::make_unique<TraceWriter>(config.trace.dir, meta, config.trace.gzip);

  MetricsAccumulator acc(meta);
  auto emit = [&](TraceFrame f) {
    acc.add(f);
    if (sink && writer) {
      sink->write(f);
      writer->write(std::move(f));
    } else if (sink) {
      sink->write(std::move(f));
    } else if (writer) {
      writer->write(std::move(f));
    }
  };

  if (!sim.agents().empty()) {
    emit(sim.initial_frame());
    while (!sim.done()) emit(sim.step());
  }
  if (writer) writer->finish();
  if (sink) sink->finish();
  return {acc.finish(true), sim.tick()};
}

}  // namespace evac
