// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/calibration.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "evac/engine.hpp"

namespace evac {

using nlohmann::json;

double measure_straight_speed(const AttributeClass& cls, double v_setting,
                              const StraightRunOptions& opts) {
  if (!(v_setting > 0.0)) throw CalibrationError("v_setting must be positive");
  if (!(opts.length > 2.0 * opts.skip)) throw CalibrationError("measured stretch is empty");

  ScenarioSpec spec = make_straight_scene({opts.length, cls.id});
  spec.sfm = opts.sfm;
  spec.motor = opts.motor;
  spec.classes[cls.id] = cls;
  spec.seed = opts.seed;
  CalibrationTable calib;
  calib.set(cls.id, v_setting);

  SimConfig cfg;
  cfg.dt = opts.dt;
  cfg.decision_every = opts.decision_every;
  cfg.max_ticks = static_cast<std::int64_t>(std::ceil(opts.max_time / opts.dt));
  cfg.threads = 1;
  Simulation sim(spec, cfg, calib);
  if (sim.agents().size() != 1) throw CalibrationError("straight scene must hold one agent");

  const double x0 = sim.agents()[0].pos.x;
  const double mark_a = x0 + opts.skip;
  const double mark_b = x0 + opts.length - opts.skip;
  double t_a = -1.0, t_b = -1.0;
  double prev_x = x0, max_x = x0;
  while (!sim.done()) {
    sim.step();
    const double x = sim.agents()[0].pos.x;
    const double t = static_cast<double>(sim.tick()) * opts.dt;
    max_x = std::max(max_x, x);
    auto crossing = [&](double mark) {
      return t - opts.dt + opts.dt * (mark - prev_x) / (x - prev_x);
    };
    if (t_a < 0.0 && prev_x < mark_a && x >= mark_a) t_a = crossing(mark_a);
    if (t_b < 0.0 && prev_x < mark_b && x >= mark_b) {
      t_b = crossing(mark_b);
      break;
    }
    prev_x = x;
  }
  if (t_a < 0.0 || t_b < 0.0) {
    std::ostringstream msg;
    msg << class_name(cls.id) << ": agent covered " << (max_x - x0) << " m of "
        << (mark_b - x0) << " m at v_setting " << v_setting;
    throw TraversalError(msg.str(), max_x - x0);
  }
  return (mark_b - mark_a) / (t_b - t_a);
}

CalibrationReport calibrate(const AttributeClass& cls, const SpeedProbe& probe, double tolerance,
                            int max_iter) {
  if (!(cls.v_real > 0.0)) throw CalibrationError("v_real must be positive");
  if (!(tolerance > 0.0)) throw CalibrationError("tolerance must be positive");
  const double target = cls.v_real;
  CalibrationReport rep;
  rep.cls = cls.id;
  rep.v_real = target;

  double lo = target, hi = 3.0 * target;
  double f_lo = 0.0, f_hi = 0.0;
  auto done = [&](double v, double f, int it) {
    rep.v_setting = v;
    rep.v_sim = f;
    rep.residual = f - target;
    rep.iterations = it;
    return std::abs(f - target) <= tolerance;
  };
  // Probes are deterministic; only a small numerical slack is tolerated.
  const double slack = 1e-9 * std::max(1.0, target);

  for (int it = 1; it <= max_iter; ++it) {
    double v;
    if (it == 1) v = lo;
    else if (it == 2) v = hi;
    else v = 0.5 * (lo + hi);
    const double f = probe(cls, v);
    if (!std::isfinite(f)) throw CalibrationError("probe returned a non-finite speed");
    if (done(v, f, it)) return rep;
    if (it == 1) {
      f_lo = f;
      continue;
    }
    if (it == 2) {
      f_hi = f;
      if (f_hi + slack < f_lo) {
        std::ostringstream msg;
        msg << class_name(cls.id) << ": non-monotone response, v_sim(" << lo << ") = " << f_lo
            << " > v_sim(" << hi << ") = " << f_hi;
        throw CalibrationError(msg.str());
      }
      continue;
    }
    if (f + slack < f_lo || f > f_hi + slack) {
      std::ostringstream msg;
      msg << class_name(cls.id) << ": non-monotone response at v_setting " << v;
      throw CalibrationError(msg.str());
    }
    if (f < target) {
      lo = v;
      f_lo = f;
    } else {
      hi = v;
      f_hi = f;
    }
  }
  std::ostringstream msg;
  msg << class_name(cls.id) << ": no convergence in " << max_iter << " iterations, residual "
      << rep.residual << " m/s at v_setting " << rep.v_setting;
  throw CalibrationError(msg.str());
}

CalibrationReport calibrate(const AttributeClass& cls, double tolerance, int max_iter,
                            const StraightRunOptions& opts) {
  return calibrate(
      cls, [&](const AttributeClass& c, double v) { return measure_straight_speed(c, v, opts); },
      tolerance, max_iter);
}

std::vector<CalibrationReport> calibrate_all(const ClassTable& table, double tolerance,
                                             int max_iter, const StraightRunOptions& opts,
                                             int threads) {
  std::vector<CalibrationReport> out(kAllClasses.size());
  std::vector<std::string> errors(kAllClasses.size());
  tbb::task_arena arena(resolve_threads(threads));
  arena.execute([&] {
    tbb::parallel_for(std::size_t{0}, kAllClasses.size(), [&](std::size_t i) {
      try {
        out[i] = calibrate(table[kAllClasses[i]], tolerance, max_iter, opts);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  });
  for (const std::string& e : errors)
    if (!e.empty()) throw CalibrationError(e);
  return out;
}

CalibrationTable to_table(const std::vector<CalibrationReport>& reports) {
  CalibrationTable t;
  for (const CalibrationReport& r : reports) t.set(r.cls, r.v_setting);
  return t;
}

std::string encode_calibration(const std::vector<CalibrationReport>& reports, double tolerance) {
  json classes = json::object();
  for (const CalibrationReport& r : reports) {
    classes[std::string(class_name(r.cls))] = {{"v_setting", r.v_setting},
                                               {"v_real", r.v_real},
                                               {"v_sim", r.v_sim},
                                               {"residual", r.residual},
                                               {"iterations", r.iterations}};
  }
  json j = {{"format", "evacsim-calibration"},
            {"version", 1},
            {"tolerance", tolerance},
            {"classes", classes}};
  return j.dump(2) + "\n";
}

CalibrationTable parse_calibration(const std::string& text) {
  CalibrationTable t;
  try {
    const json j = json::parse(text);
    const json& classes = j.at("classes");
    for (auto it = classes.begin(); it != classes.end(); ++it) {
      const auto id = parse_class_name(it.key());
      if (!id) throw CalibrationError("calibration: unknown class '" + it.key() + "'");
      const double v = it.value().at("v_setting").get<double>();
      if (!(v > 0.0)) throw CalibrationError("calibration: " + it.key() + ".v_setting must be > 0");
      t.set(*id, v);
    }
  } catch (const json::exception& e) {
    throw CalibrationError(std::string("calibration: ") + e.what());
  }
  return t;
}

CalibrationTable load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CalibrationError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_calibration(ss.str());
}

void save_calibration(const std::filesystem::path& path,
                      const std::vector<CalibrationReport>& reports, double tolerance) {
  std::ofstream out(path);
  if (!out) throw CalibrationError("cannot write " + path.string());
  out << encode_calibration(reports, tolerance);
}

}  // namespace evac
