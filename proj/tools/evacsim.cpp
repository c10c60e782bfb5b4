// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: run, calibrate, analyze, sweep, gait, render.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evac/analysis.hpp"
#include "evac/calibration.hpp"
#include "evac/engine.hpp"
#include "evac/forces.hpp"
#include "evac/gait.hpp"
#include "evac/metrics.hpp"
#include "evac/scenario.hpp"
#include "evac/trace.hpp"

namespace fs = std::filesystem;
using namespace evac;

namespace {

constexpr int kExitConfig = 2;

// Bad inputs, as opposed to failures while running.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

CalibrationTable calibration_for(const ScenarioSpec& spec, const std::string& file) {
  if (!file.empty()) return load_calibration(file);
  std::cerr << "no --calibration given, calibrating in process\n";
  StraightRunOptions opts;
  opts.sfm = spec.sfm;
  opts.motor = spec.motor;
  return to_table(calibrate_all(spec.classes, 0.005, 60, opts));
}

// ---- run ----

struct RunArgs {
  std::string scenario;
  std::string calibration;
  std::int64_t ticks = 1000;
  std::optional<std::uint64_t> seed;
  std::string trace;
  bool gzip = false;
  bool dump_forces = false;
  bool paths = false;
  int threads = 0;
};

int cmd_run(const RunArgs& a) {
  const ScenarioSpec spec = load_scenario(a.scenario);
  const CalibrationTable calib = calibration_for(spec, a.calibration);
  SimConfig cfg;
  cfg.max_ticks = a.ticks;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.trace.dir = a.trace;
  cfg.trace.gzip = a.gzip;
  cfg.trace.dump_forces = a.dump_forces;
  cfg.trace.paths = a.paths;
  const auto t0 = std::chrono::steady_clock::now();
  const RunResult r = run(spec, cfg, calib);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << format_metrics_table({{spec.name, r.metrics}});
  const double sim_time = static_cast<double>(r.ticks) * cfg.dt;
  std::cerr << std::fixed << std::setprecision(2) << "simulated " << sim_time << " s in " << wall
            << " s wall";
  if (wall > 0.0) std::cerr << " (real-time factor " << sim_time / wall << ")";
  std::cerr << "\n";
  return 0;
}

// ---- calibrate ----

struct CalibrateArgs {
  std::string scenario;
  std::string out = "calibration.json";
  double tolerance = 0.005;
  int max_iter = 60;
  int threads = 0;
};

int cmd_calibrate(const CalibrateArgs& a) {
  ClassTable table = default_class_table();
  StraightRunOptions opts;
  if (!a.scenario.empty()) {
    const ScenarioSpec spec = load_scenario(a.scenario);
    table = spec.classes;
    opts.sfm = spec.sfm;
    opts.motor = spec.motor;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto reports = calibrate_all(table, a.tolerance, a.max_iter, opts, a.threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_calibration(a.out, reports, a.tolerance);
  std::cout << "class\tv_real\tv_setting\tv_sim\tresidual\titerations\n";
  std::cout << std::setprecision(6);
  for (const CalibrationReport& r : reports)
    std::cout << class_name(r.cls) << '\t' << r.v_real << '\t' << r.v_setting << '\t' << r.v_sim
              << '\t' << r.residual << '\t' << r.iterations << '\n';
  std::cerr << "wrote " << a.out << " in " << std::fixed << std::setprecision(2) << wall << " s\n";
  return 0;
}

// ---- analyze ----

struct AnalyzeArgs {
  std::vector<std::string> traces;
  std::string out;
  bool paths = false;
};

std::string format_paths(const fs::path& dir) {
  TraceReader reader(dir);
  std::ostringstream out;
  out << std::setprecision(6);
  out << "tick\tagent\tvertex\tx\ty\n";
  TraceFrame f;
  while (reader.next(f))
    for (const PathRecord& p : f.paths)
      for (std::size_t i = 0; i < p.points.size(); ++i)
        out << f.tick << '\t' << p.id << '\t' << i << '\t' << p.points[i].x << '\t'
            << p.points[i].y << '\n';
  return out.str();
}

int cmd_analyze(const AnalyzeArgs& a) {
  std::vector<std::pair<std::string, RunMetrics>> rows;
  std::vector<RunMetrics> runs;
  for (const std::string& t : a.traces) {
    RunMetrics m = compute_metrics(t);
    if (m.truncated) std::cerr << t << ": trace is truncated, metrics are partial\n";
    rows.emplace_back(t, m);
    runs.push_back(std::move(m));
  }
  const std::string metrics = format_metrics_table(rows);
  const std::string speeds = format_speed_table(speed_distribution(runs));
  std::cout << metrics << "\n" << speeds;
  if (!a.out.empty()) {
    write_text(fs::path(a.out) / "metrics.tsv", metrics);
    write_text(fs::path(a.out) / "speeds.tsv", speeds);
    if (a.paths) {
      for (std::size_t i = 0; i < a.traces.size(); ++i) {
        const std::string name = a.traces.size() == 1 ? "paths.tsv" : "paths_" + std::to_string(i) + ".tsv";
        write_text(fs::path(a.out) / name, format_paths(a.traces[i]));
      }
    }
  } else if (a.paths) {
    for (const std::string& t : a.traces) std::cout << "\n" << format_paths(t);
  }
  bool truncated = false;
  for (const auto& r : runs) truncated = truncated || r.truncated;
  return truncated ? 1 : 0;
}

// ---- sweep ----

struct SweepArgs {
  std::string spec;
  std::string calibration;
  std::int64_t ticks = 1500;
  std::string out;
  int threads = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const SweepSpec sweep = load_sweep(a.spec);
  const ScenarioSpec first = sweep_scenario(sweep, 0);
  const CalibrationTable calib = calibration_for(first, a.calibration);
  SimConfig cfg;
  cfg.max_ticks = a.ticks;
  const SweepResult result = run_sweep(sweep, cfg, calib, a.threads);
  const std::string table = format_sweep_table(result);
  if (a.out.empty()) std::cout << table;
  else write_text(a.out, table);
  std::cerr << "spearman(" << sweep_variable_name(sweep.variable)
            << ", trampled) = " << result.rho_trampled << "\n";
  return 0;
}

// ---- gait ----

struct GaitArgs {
  std::string motion;
  std::string neutral;
  double tolerance = 0.02;
  std::string out;
  std::string from_trace;
  int agent = -1;
};

std::string format_gait_column(const MotionSequence& seq, const GaitAnnotation& ann) {
  const auto wave = ankle_distance(seq);
  std::vector<std::string> events(ann.value.size());
  for (const Keyframe& k : ann.keyframes) events[k.frame] = std::string(gait_event_name(k.event));
  std::ostringstream out;
  out << std::setprecision(9);
  out << "frame\tankle_distance\tgait_value\tevent\n";
  for (std::size_t i = 0; i < ann.value.size(); ++i)
    out << i << '\t' << wave[i] << '\t' << ann.value[i] << '\t'
        << (events[i].empty() ? "-" : events[i]) << '\n';
  return out.str();
}

MotionSequence motion_from_trace(const fs::path& dir, int agent) {
  TraceReader reader(dir);
  const TraceMeta& meta = reader.meta();
  if (agent < 0 || static_cast<std::size_t>(agent) >= meta.agent_classes.size())
    throw UsageError("--agent " + std::to_string(agent) + " is not in the trace");
  std::vector<GaitSample> samples;
  double heading = 0.0;
  TraceFrame f;
  while (reader.next(f)) {
    for (const AgentState& s : f.agents) {
      if (s.id != agent) continue;
      if (s.status != AgentStatus::walking) break;
      if (norm(s.vel) > 1e-6) heading = std::atan2(s.vel.y, s.vel.x);
      samples.push_back({s.pos.x, s.pos.y, heading, s.gait});
      break;
    }
  }
  const ClassTable table = default_class_table();
  return synthesize_motion(samples, 1.0 / meta.dt, table[meta.agent_classes[agent]].gait_style_label);
}

int cmd_gait(const GaitArgs& a) {
  if (!a.from_trace.empty()) {
    const MotionSequence seq = motion_from_trace(a.from_trace, a.agent);
    const std::string text = format_motion(seq);
    if (a.out.empty()) std::cout << text;
    else write_text(a.out, text);
    return 0;
  }
  if (a.motion.empty()) throw UsageError("gait needs --motion or --from-trace");
  const MotionSequence seq = load_motion(a.motion);
  const GaitAnnotation ann = annotate(seq);
  std::ostringstream out;
  out << format_gait_column(seq, ann);
  if (!a.neutral.empty()) {
    const MotionSequence neutral = load_motion(a.neutral);
    const GaitAnnotation nann = annotate(neutral);
    const FramePairing p = match_frames(seq, ann, neutral, nann, a.tolerance);
    out << "\nstylized\tneutral\tgait_stylized\tgait_neutral\tangle_l1\n" << std::setprecision(9);
    for (const auto& [s, n] : p.pairs)
      out << s << '\t' << n << '\t' << ann.value[s] << '\t' << nann.value[n] << '\t'
          << joint_angle_distance(seq, s, neutral, n) << '\n';
    for (int s : p.unpaired) out << s << "\t-\t" << ann.value[s] << "\t-\t-\n";
    std::cerr << p.pairs.size() << " paired, " << p.unpaired.size() << " unpaired\n";
  }
  if (a.out.empty()) std::cout << out.str();
  else write_text(a.out, out.str());
  return 0;
}

// ---- render ----

struct RenderArgs {
  std::string trace;
  bool forces = false;
  std::int64_t from = 0;
  std::int64_t to = -1;
  double f_max = 0.0;
  int cell_px = 6;
  int per_row = 10;
};

int cmd_render(const RenderArgs& a) {
  if (!a.forces) throw UsageError("render needs --forces");
  TraceReader reader(a.trace);
  if (!reader.meta().has_forces)
    throw UsageError(a.trace + " has no force records; run with --dump-forces");
  std::vector<std::vector<PartForceRecord>> window;
  std::int64_t last_tick = a.from;
  TraceFrame f;
  while (reader.next(f)) {
    if (f.tick < a.from) continue;
    if (a.to >= 0 && f.tick > a.to) break;
    window.push_back(std::move(f.forces));
    last_tick = f.tick;
  }
  if (window.empty()) throw UsageError("no frames in the requested tick range");
  // A zero record for the last agent makes every agent get a glyph.
  const int n_agents = static_cast<int>(reader.meta().agent_classes.size());
  if (n_agents > 0) {
    PartForceRecord pad;
    pad.agent_id = n_agents - 1;
    window.front().push_back(pad);
  }
  HeatmapOptions opts;
  opts.f_max_override = a.f_max;
  opts.cell_px = a.cell_px;
  opts.glyphs_per_row = a.per_row;
  const Heatmap hm = render_heatmap(window, opts);
  const fs::path dir(a.trace);
  write_text(dir / "forces.tsv", format_force_table(hm));
  const fs::path img = dir / ("forces_" + std::to_string(last_tick) + ".ppm");
  write_ppm(img, hm.image);
  std::cerr << "wrote " << (dir / "forces.tsv").string() << " and " << img.string()
            << " (f_max " << hm.f_max << " N)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evacsim: crowd evacuation simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Simulate a scenario");
  run_cmd->add_option("--scenario", run_args.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--calibration", run_args.calibration, "Calibration file from `calibrate`");
  run_cmd->add_option("--ticks", run_args.ticks, "Motor ticks to simulate")->capture_default_str();
  run_cmd->add_option("--seed", run_args.seed, "Override the scenario seed");
  run_cmd->add_option("--trace", run_args.trace, "Trace output directory");
  run_cmd->add_flag("--gzip", run_args.gzip, "Compress the trace");
  run_cmd->add_flag("--dump-forces", run_args.dump_forces, "Record part forces and decision terms");
  run_cmd->add_flag("--paths", run_args.paths, "Record planned paths");
  run_cmd->add_option("--threads", run_args.threads, "Thread hint (EVACSIM_THREADS wins)");

  CalibrateArgs cal_args;
  auto* cal_cmd = app.add_subcommand("calibrate", "Fit v_setting per attribute class");
  cal_cmd->add_option("--scenario", cal_args.scenario, "Take class table and coefficients from here");
  cal_cmd->add_option("--out", cal_args.out, "Calibration file to write")->capture_default_str();
  cal_cmd->add_option("--tolerance", cal_args.tolerance, "m/s")->capture_default_str();
  cal_cmd->add_option("--max-iter", cal_args.max_iter)->capture_default_str();
  cal_cmd->add_option("--threads", cal_args.threads);

  AnalyzeArgs an_args;
  auto* an_cmd = app.add_subcommand("analyze", "Metrics and speed summaries of traces");
  an_cmd->add_option("traces", an_args.traces, "Trace directories")->required();
  an_cmd->add_option("--out", an_args.out, "Directory for metrics.tsv and speeds.tsv");
  an_cmd->add_flag("--paths", an_args.paths, "Also export planned paths as polylines");

  SweepArgs sw_args;
  auto* sw_cmd = app.add_subcommand("sweep", "Parameter sweep with rank-correlation trend");
  sw_cmd->add_option("--spec", sw_args.spec, "Sweep JSON file")->required();
  sw_cmd->add_option("--calibration", sw_args.calibration);
  sw_cmd->add_option("--ticks", sw_args.ticks)->capture_default_str();
  sw_cmd->add_option("--out", sw_args.out, "Table file (default stdout)");
  sw_cmd->add_option("--threads", sw_args.threads);

  GaitArgs gait_args;
  auto* gait_cmd = app.add_subcommand("gait", "Gait events, gait values and frame pairing");
  gait_cmd->add_option("--motion", gait_args.motion, "Stylized motion TSV");
  gait_cmd->add_option("--neutral", gait_args.neutral, "Neutral motion TSV to pair against");
  gait_cmd->add_option("--tolerance", gait_args.tolerance, "Gait-value match tolerance")
      ->capture_default_str();
  gait_cmd->add_option("--out", gait_args.out, "Output file (default stdout)");
  gait_cmd->add_option("--from-trace", gait_args.from_trace, "Synthesize motion from a trace");
  gait_cmd->add_option("--agent", gait_args.agent, "Agent id for --from-trace");

  RenderArgs ren_args;
  auto* ren_cmd = app.add_subcommand("render", "Part-force heatmap of a trace");
  ren_cmd->add_option("trace", ren_args.trace, "Trace directory")->required();
  ren_cmd->add_flag("--forces", ren_args.forces, "Render part forces");
  ren_cmd->add_option("--from", ren_args.from, "First tick of the window");
  ren_cmd->add_option("--to", ren_args.to, "Last tick of the window");
  ren_cmd->add_option("--f-max", ren_args.f_max, "Colormap maximum in N (default: p95)");
  ren_cmd->add_option("--cell-px", ren_args.cell_px)->capture_default_str();
  ren_cmd->add_option("--per-row", ren_args.per_row)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_args);
    if (*cal_cmd) return cmd_calibrate(cal_args);
    if (*an_cmd) return cmd_analyze(an_args);
    if (*sw_cmd) return cmd_sweep(sw_args);
    if (*gait_cmd) return cmd_gait(gait_args);
    if (*ren_cmd) return cmd_render(ren_args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
