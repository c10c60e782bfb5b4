// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/analysis.hpp"

#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "evac/stats.hpp"

namespace evac {

using nlohmann::json;

std::string_view sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::agent_count: return "agent_count";
    case SweepVariable::corridor_width: return "corridor_width";
    case SweepVariable::terrain_kind: return "terrain_kind";
  }
  return "agent_count";
}

std::optional<SweepVariable> parse_sweep_variable(std::string_view name) {
  for (SweepVariable v : {SweepVariable::agent_count, SweepVariable::corridor_width,
                          SweepVariable::terrain_kind})
    if (sweep_variable_name(v) == name) return v;
  return std::nullopt;
}

namespace {

double numeric_value(const SweepSpec& s, std::size_t i) {
  const std::string& v = s.values[i];
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError("sweep.values[" + std::to_string(i) + "]", "expected a number, got '" + v + "'");
}

// Position on the swept axis used for the rank correlation.
double axis_value(const SweepSpec& s, std::size_t i) {
  if (s.variable == SweepVariable::terrain_kind) return static_cast<double>(i);
  return numeric_value(s, i);
}

void rescale_spawns(ScenarioSpec& spec, int total) {
  if (spec.spawns.empty()) throw ValidationError("sweep.variable", "scenario has no spawn groups");
  const int old_total = std::max(1, spec.total_agents());
  std::vector<double> share;
  for (const SpawnGroup& g : spec.spawns) share.push_back(static_cast<double>(g.count) / old_total);
  std::vector<int> counts(spec.spawns.size(), 0);
  std::vector<std::pair<double, std::size_t>> rem;
  int assigned = 0;
  for (std::size_t i = 0; i < share.size(); ++i) {
    const double exact = share[i] * total;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    rem.emplace_back(exact - counts[i], i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[rem[k % rem.size()].second];
  for (std::size_t i = 0; i < counts.size(); ++i) spec.spawns[i].count = counts[i];
}

}  // namespace

SweepSpec parse_sweep(const std::string& text) {
  SweepSpec s;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep: ") + e.what());
  }
  if (!j.is_object() || !j.contains("sweep")) throw ValidationError("sweep", "missing");
  if (!j.contains("scenario")) throw ValidationError("scenario", "missing");
  const json& sw = j["sweep"];
  try {
    const std::string var = sw.at("variable").get<std::string>();
    const auto v = parse_sweep_variable(var);
    if (!v) throw ValidationError("sweep.variable", "unknown variable '" + var + "'");
    s.variable = *v;
    for (const json& val : sw.at("values")) {
      if (val.is_string()) s.values.push_back(val.get<std::string>());
      else if (val.is_number()) s.values.push_back(val.dump());
      else throw ValidationError("sweep.values", "expected numbers or strings");
    }
    if (sw.contains("repetitions")) s.repetitions = sw["repetitions"].get<int>();
    if (sw.contains("base_seed")) s.base_seed = sw["base_seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError("sweep", e.what());
  }
  if (s.values.empty()) throw ValidationError("sweep.values", "must not be empty");
  if (s.repetitions < 1) throw ValidationError("sweep.repetitions", "must be >= 1");
  s.base_scenario = j["scenario"].dump();
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (s.variable == SweepVariable::terrain_kind) {
      if (!parse_terrain_kind(s.values[i]))
        throw ValidationError("sweep.values[" + std::to_string(i) + "]",
                              "unknown terrain kind '" + s.values[i] + "'");
    } else {
      numeric_value(s, i);
    }
  }
  return s;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sweep(ss.str());
}

ScenarioSpec sweep_scenario(const SweepSpec& sweep, std::size_t index) {
  json base = json::parse(sweep.base_scenario);
  const bool templated = base.contains("template");
  const std::string kind = templated ? base["template"].value("kind", "") : "";
  const std::string& value = sweep.values.at(index);

  switch (sweep.variable) {
    case SweepVariable::agent_count: {
      const double n = numeric_value(sweep, index);
      if (n < 0 || n != std::floor(n)) throw ValidationError("sweep.values", "agent count must be a whole number");
      if (templated && kind != "straight") {
        base["template"]["agents"] = static_cast<int>(n);
        if (!base.contains("spawns")) return parse_scenario(base.dump());
      }
      ScenarioSpec spec = parse_scenario(base.dump());
      rescale_spawns(spec, static_cast<int>(n));
      validate(spec);
      return spec;
    }
    case SweepVariable::corridor_width: {
      const double w = numeric_value(sweep, index);
      if (kind == "corridor") base["template"]["corridor_width"] = w;
      else if (kind == "lane") base["template"]["width"] = w;
      else throw ValidationError("sweep.variable", "corridor_width needs a corridor or lane template");
      return parse_scenario(base.dump());
    }
    case SweepVariable::terrain_kind: {
      if (kind == "terrain_room") {
        base["template"]["terrain"] = value;
        return parse_scenario(base.dump());
      }
      ScenarioSpec spec = parse_scenario(base.dump());
      spec.terrain_zones.clear();
      const TerrainKind k = *parse_terrain_kind(value);
      if (k != TerrainKind::normal)
        spec.terrain_zones.push_back(TerrainZone::of_kind(k, rect_polygon(spec.bounds.min, spec.bounds.max)));
      validate(spec);
      return spec;
    }
  }
  throw ValidationError("sweep.variable", "unsupported");
}

SweepResult run_sweep(const SweepSpec& sweep, const SimConfig& config,
                      const CalibrationTable& calib, int threads) {
  SweepResult out;
  out.variable = sweep.variable;
  for (std::size_t v = 0; v < sweep.values.size(); ++v) {
    for (int r = 0; r < sweep.repetitions; ++r) {
      SweepCell c;
      c.value_index = v;
      c.value = sweep.values[v];
      c.repetition = r;
      c.seed = sweep.base_seed + static_cast<std::uint64_t>(r);
      out.cells.push_back(std::move(c));
    }
  }
  // Scenario construction errors are per value, not per repetition.
  std::vector<std::optional<ScenarioSpec>> specs(sweep.values.size());
  std::vector<std::string> spec_error(sweep.values.size());
  for (std::size_t v = 0; v < sweep.values.size(); ++v) {
    try {
      specs[v] = sweep_scenario(sweep, v);
    } catch (const std::exception& e) {
      spec_error[v] = e.what();
    }
  }

  tbb::task_arena arena(resolve_threads(threads));
  arena.execute([&] {
    tbb::parallel_for(std::size_t{0}, out.cells.size(), [&](std::size_t i) {
      SweepCell& c = out.cells[i];
      if (!specs[c.value_index]) {
        c.error = spec_error[c.value_index];
        return;
      }
      SimConfig cfg = config;
      cfg.seed = c.seed;
      cfg.threads = 1;
      cfg.trace = {};
      try {
        c.metrics = run(*specs[c.value_index], cfg, calib).metrics;
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    });
  });

  std::vector<double> x, trampled, fallen;
  for (const SweepCell& c : out.cells) {
    if (!c.error.empty()) continue;
    x.push_back(axis_value(sweep, c.value_index));
    trampled.push_back(c.metrics.trampled_count);
    fallen.push_back(c.metrics.fallen_count);
  }
  out.rho_trampled = spearman(x, trampled);
  out.rho_fallen = spearman(x, fallen);
  return out;
}

std::string format_sweep_table(const SweepResult& result) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << sweep_variable_name(result.variable)
      << "\trepetition\tseed\tagents\tescaped\tsuccess_rate\tfallen\ttrampled\tmean_evac_s\tticks\terror\n";
  for (const SweepCell& c : result.cells) {
    const RunMetrics& m = c.metrics;
    out << c.value << '\t' << c.repetition << '\t' << c.seed << '\t';
    if (c.error.empty()) {
      out << m.agents << '\t' << m.escaped << '\t' << m.success_rate << '\t' << m.fallen_count
          << '\t' << m.trampled_count << '\t' << m.mean_evacuation_time << '\t' << m.final_tick
          << "\t-\n";
    } else {
      out << "-\t-\t-\t-\t-\t-\t-\t" << c.error << '\n';
    }
  }
  out << "# spearman_trampled\t" << result.rho_trampled << "\n";
  out << "# spearman_fallen\t" << result.rho_fallen << "\n";
  return out.str();
}

std::vector<RunMetrics> run_repetitions(const ScenarioSpec& spec, const SimConfig& config,
                                        const CalibrationTable& calib,
                                        const std::vector<std::uint64_t>& seeds, int threads) {
  std::vector<RunMetrics> out(seeds.size());
  std::vector<std::string> errors(seeds.size());
  tbb::task_arena arena(resolve_threads(threads));
  arena.execute([&] {
    tbb::parallel_for(std::size_t{0}, seeds.size(), [&](std::size_t i) {
      SimConfig cfg = config;
      cfg.seed = seeds[i];
      cfg.threads = 1;
      cfg.trace = {};
      try {
        out[i] = run(spec, cfg, calib).metrics;
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw ConfigError("seed " + std::to_string(seeds[i]) + ": " + errors[i]);
  return out;
}

SpeedSummary summarize(std::vector<double> samples) {
  SpeedSummary s;
  s.n = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.min = samples.front();
  s.q1 = quantile_sorted(samples, 0.25);
  s.median = quantile_sorted(samples, 0.5);
  s.q3 = quantile_sorted(samples, 0.75);
  s.max = samples.back();
  return s;
}

std::array<SpeedSummary, 6> speed_distribution(const std::vector<RunMetrics>& runs) {
  std::array<SpeedSummary, 6> out;
  for (std::size_t c = 0; c < out.size(); ++c) {
    std::vector<double> pooled;
    for (const RunMetrics& r : runs)
      pooled.insert(pooled.end(), r.speed_samples[c].begin(), r.speed_samples[c].end());
    out[c] = summarize(std::move(pooled));
  }
  return out;
}

std::string format_speed_table(const std::array<SpeedSummary, 6>& summary) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "class\tn\tmin\tq1\tmedian\tq3\tmax\n";
  for (ClassId id : kAllClasses) {
    const SpeedSummary& s = summary[static_cast<int>(id)];
    out << class_name(id) << '\t' << s.n;
    if (s.n == 0) {
      out << "\t-\t-\t-\t-\t-\n";
      continue;
    }
    out << '\t' << s.min << '\t' << s.q1 << '\t' << s.median << '\t' << s.q3 << '\t' << s.max
        << '\n';
  }
  return out.str();
}

std::string format_metrics_table(const std::vector<std::pair<std::string, RunMetrics>>& runs) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "run\tagents\tescaped\tsuccess_rate\tfallen\ttrampled\tmean_evac_s\tpeak_density\tticks\t"
         "truncated\n";
  for (const auto& [label, m] : runs) {
    double peak = 0.0;
    for (double d : m.bottleneck_density) peak = std::max(peak, d);
    out << label << '\t' << m.agents << '\t' << m.escaped << '\t' << m.success_rate << '\t'
        << m.fallen_count << '\t' << m.trampled_count << '\t' << m.mean_evacuation_time << '\t'
        << peak << '\t' << m.final_tick << '\t' << (m.truncated ? "yes" : "no") << '\n';
  }
  return out.str();
}

}  // namespace evac
