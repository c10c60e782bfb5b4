// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace evac {

using nlohmann::json;

std::string_view terrain_kind_name(TerrainKind kind) {
  switch (kind) {
    case TerrainKind::normal: return "normal";
    case TerrainKind::uneven: return "uneven";
    case TerrainKind::obstacle_field: return "obstacle_field";
    case TerrainKind::slippery: return "slippery";
  }
  return "normal";
}

std::optional<TerrainKind> parse_terrain_kind(std::string_view name) {
  for (TerrainKind k : {TerrainKind::normal, TerrainKind::uneven, TerrainKind::obstacle_field,
                        TerrainKind::slippery})
    if (terrain_kind_name(k) == name) return k;
  return std::nullopt;
}

TerrainZone TerrainZone::of_kind(TerrainKind kind, Polygon region) {
  TerrainZone z;
  z.region = std::move(region);
  z.kind = kind;
  switch (kind) {
    case TerrainKind::normal: break;
    case TerrainKind::uneven:
      z.trip_rate = 0.02;
      z.speed_scale = 0.85;
      break;
    case TerrainKind::obstacle_field:
      z.trip_rate = 0.03;
      z.speed_scale = 0.75;
      break;
    case TerrainKind::slippery:
      z.friction_scale = 0.3;
      z.trip_rate = 0.01;
      z.speed_scale = 0.9;
      break;
  }
  return z;
}

int ScenarioSpec::total_agents() const {
  int n = 0;
  for (const auto& s : spawns) n += s.count;
  return n;
}

TerrainEffect terrain_at(const ScenarioSpec& spec, Vec2 p) {
  TerrainEffect e;
  for (const auto& z : spec.terrain_zones) {
    if (!point_in_polygon(p, z.region)) continue;
    e.friction_scale = std::min(e.friction_scale, z.friction_scale);
    e.trip_rate = std::max(e.trip_rate, z.trip_rate);
    e.speed_scale = std::min(e.speed_scale, z.speed_scale);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

std::string idx(const char* base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

bool within(const Rect& r, Vec2 p) {
  constexpr double eps = 1e-9;
  return p.x >= r.min.x - eps && p.x <= r.max.x + eps && p.y >= r.min.y - eps &&
         p.y <= r.max.y + eps;
}

void check_polygon(const Polygon& poly, const Rect& bounds, const std::string& field) {
  if (poly.size() < 3) throw ValidationError(field, "polygon needs at least 3 vertices");
  if (polygon_area(poly) <= 0.0) throw ValidationError(field, "polygon has zero area");
  for (Vec2 v : poly)
    if (!within(bounds, v)) throw ValidationError(field, "polygon vertex outside bounds");
}

void check_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be > 0");
}

void validate_classes(const ClassTable& t) {
  for (ClassId id : kAllClasses) {
    const auto& c = t[id];
    const std::string f = "classes." + std::string(class_name(id));
    if (!(c.v_real > 0.0)) throw ValidationError(f + ".v_real", "must be > 0");
    if (c.v_real > c.v_max) throw ValidationError(f + ".v_max", "must be >= v_real");
    if (!(c.v_setting > 0.0)) throw ValidationError(f + ".v_setting", "must be > 0");
    check_positive(c.mass, f + ".mass");
    check_positive(c.fall_robustness, f + ".fall_robustness");
    if (c.gait_loss < 0.0 || c.gait_loss >= 1.0)
      throw ValidationError(f + ".gait_loss", "must be in [0, 1)");
  }
  const double y = t[ClassId::young].v_real, m = t[ClassId::middle_aged].v_real,
               o = t[ClassId::old].v_real, p = t[ClassId::patient].v_real,
               d = t[ClassId::disabled].v_real;
  if (!(y > m && m > o)) throw ValidationError("classes", "need v_real young > middle_aged > old");
  if (p > o || d > o) throw ValidationError("classes", "need patient, disabled v_real <= old");
  if (p == d) throw ValidationError("classes", "personalized v_real values must be distinct");
}

}  // namespace

void validate(const ScenarioSpec& s) {
  if (!(s.bounds.width() > 0.0 && s.bounds.height() > 0.0))
    throw ValidationError("bounds", "area must be > 0");
  const double min_side = std::min(s.bounds.width(), s.bounds.height());
  if (!(s.cell_size > 0.0) || s.cell_size > min_side / 4.0)
    throw ValidationError("cell_size", "must be in (0, min(width, height) / 4]");

  for (std::size_t i = 0; i < s.walls.size(); ++i)
    if (!within(s.bounds, s.walls[i].a) || !within(s.bounds, s.walls[i].b))
      throw ValidationError(idx("walls", i), "wall endpoint outside bounds");

  if (s.exits.empty()) throw ValidationError("exits", "at least one exit");
  for (std::size_t i = 0; i < s.exits.size(); ++i) {
    const auto& e = s.exits[i];
    const std::string f = idx("exits", i);
    if (!within(s.bounds, e.segment.a) || !within(s.bounds, e.segment.b))
      throw ValidationError(f, "exit outside bounds");
    if (!(e.width >= 0.5)) throw ValidationError(f + ".width", "must be >= 0.5 m");
    for (std::size_t w = 0; w < s.walls.size(); ++w)
      if (segments_intersect(e.segment, s.walls[w]))
        throw ValidationError(f, "exit intersects " + idx("walls", w));
  }

  for (std::size_t i = 0; i < s.terrain_zones.size(); ++i) {
    const auto& z = s.terrain_zones[i];
    const std::string f = idx("terrain", i);
    check_polygon(z.region, s.bounds, f + ".region");
    check_positive(z.friction_scale, f + ".friction_scale");
    if (!(z.trip_rate >= 0.0 && z.trip_rate <= 1.0))
      throw ValidationError(f + ".trip_rate", "must be in [0, 1]");
    if (!(z.speed_scale > 0.0 && z.speed_scale <= 1.0))
      throw ValidationError(f + ".speed_scale", "must be in (0, 1]");
    switch (z.kind) {
      case TerrainKind::normal:
        if (z.friction_scale != 1.0 || z.trip_rate != 0.0 || z.speed_scale != 1.0)
          throw ValidationError(f, "normal terrain must have unit friction/speed and no trips");
        break;
      case TerrainKind::slippery:
        if (!(z.friction_scale < 1.0))
          throw ValidationError(f + ".friction_scale", "slippery terrain needs friction_scale < 1");
        break;
      case TerrainKind::uneven:
      case TerrainKind::obstacle_field:
        if (!(z.trip_rate > 0.0))
          throw ValidationError(f + ".trip_rate", "uneven terrain needs trip_rate > 0");
        break;
    }
  }

  for (std::size_t i = 0; i < s.spawns.size(); ++i) {
    const auto& g = s.spawns[i];
    const std::string f = idx("spawns", i);
    check_polygon(g.region, s.bounds, f + ".region");
    if (g.count <= 0) throw ValidationError(f + ".count", "must be a positive integer");
    if (g.class_mix.empty()) throw ValidationError(f + ".class_mix", "must not be empty");
    double sum = 0.0;
    for (const auto& [cls, frac] : g.class_mix) {
      if (!(frac >= 0.0)) throw ValidationError(f + ".class_mix", "fractions must be >= 0");
      sum += frac;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError(f + ".class_mix", "fractions must sum to 1");
  }

  if (!s.bottleneck.empty()) check_polygon(s.bottleneck, s.bounds, "bottleneck");

  const auto& c = s.sfm;
  check_positive(c.tau_relax, "sfm.tau_relax");
  check_positive(c.a_rep, "sfm.a_rep");
  check_positive(c.b_decay, "sfm.b_decay");
  check_positive(c.r_interact, "sfm.r_interact");
  if (!(c.k_evade >= 0.0)) throw ValidationError("sfm.k_evade", "must be >= 0");
  check_positive(c.sense_range, "sfm.sense_range");
  if (c.sector_half_angle != std::numbers::pi / 8.0)
    throw ValidationError("sfm.sector_half_angle", "fixed at pi/8");

  const auto& m = s.motor;
  check_positive(m.body_radius, "motor.body_radius");
  check_positive(m.stiffness, "motor.stiffness");
  if (!(m.damping >= 0.0)) throw ValidationError("motor.damping", "must be >= 0");
  check_positive(m.tau_motor, "motor.tau_motor");
  check_positive(m.fall_impulse, "motor.fall_impulse");
  check_positive(m.fall_window, "motor.fall_window");
  check_positive(m.step_impulse, "motor.step_impulse");
  if (m.trample_contacts < 1) throw ValidationError("motor.trample_contacts", "must be >= 1");
  check_positive(m.recover_time, "motor.recover_time");
  check_positive(m.stride_length, "motor.stride_length");
  if (m.projection_iterations < 1)
    throw ValidationError("motor.projection_iterations", "must be >= 1");
  if (!(m.contact_slop >= 0.0 && m.contact_slop < 0.02))
    throw ValidationError("motor.contact_slop", "must be in [0, 0.02)");

  validate_classes(s.classes);

  // Placement feasibility is part of the spawn invariant.
  (void)spawn_agents(s);
}

// ---------------------------------------------------------------------------
// Spawning

std::vector<std::pair<ClassId, int>> split_class_counts(
    int count, const std::vector<std::pair<ClassId, double>>& mix) {
  std::vector<std::pair<ClassId, int>> out;
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const double exact = count * mix[i].second;
    // Nudge down to absorb representation error in fractions like 0.1.
    const int base = static_cast<int>(std::floor(exact + 1e-9));
    out.emplace_back(mix[i].first, base);
    assigned += base;
    remainders.emplace_back(exact - base, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < count && k < remainders.size(); ++k, ++assigned)
    out[remainders[k].second].second += 1;
  return out;
}

std::vector<SpawnedAgent> spawn_agents(const ScenarioSpec& s) {
  const double r = s.motor.body_radius;
  const double spacing2 = 4.0 * r * r;
  std::vector<SpawnedAgent> placed;
  placed.reserve(static_cast<std::size_t>(std::max(0, s.total_agents())));

  const Segment edges[4] = {{s.bounds.min, {s.bounds.max.x, s.bounds.min.y}},
                            {{s.bounds.max.x, s.bounds.min.y}, s.bounds.max},
                            {s.bounds.max, {s.bounds.min.x, s.bounds.max.y}},
                            {{s.bounds.min.x, s.bounds.max.y}, s.bounds.min}};

  for (std::size_t gi = 0; gi < s.spawns.size(); ++gi) {
    const auto& g = s.spawns[gi];
    std::seed_seq seq{static_cast<std::uint32_t>(s.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(s.seed >> 32),
                      static_cast<std::uint32_t>(gi), 0x5eedu};
    std::mt19937_64 rng(seq);
    const Rect box = polygon_bounds(g.region);
    std::uniform_real_distribution<double> ux(box.min.x, box.max.x);
    std::uniform_real_distribution<double> uy(box.min.y, box.max.y);

    const std::size_t first = placed.size();
    const long max_attempts = 4000L * g.count + 1000L;
    long attempts = 0;
    while (static_cast<int>(placed.size() - first) < g.count) {
      if (++attempts > max_attempts)
        throw ValidationError(idx("spawns", gi) + ".count",
                              "cannot place " + std::to_string(g.count) +
                                  " agents without overlap");
      const Vec2 p{ux(rng), uy(rng)};
      if (!point_in_polygon(p, g.region)) continue;
      bool ok = true;
      for (const auto& e : edges)
        if (distance_to_segment(p, e) < r) { ok = false; break; }
      if (!ok) continue;
      for (const auto& w : s.walls)
        if (distance_to_segment(p, w) < r + 1e-3) { ok = false; break; }
      if (!ok) continue;
      for (const auto& q : placed)
        if (norm_sq(q.pos - p) < spacing2) { ok = false; break; }
      if (!ok) continue;
      placed.push_back({p, ClassId::non_personalized});
    }

    std::vector<ClassId> labels;
    for (const auto& [cls, n] : split_class_counts(g.count, g.class_mix))
      labels.insert(labels.end(), static_cast<std::size_t>(n), cls);
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t k = 0; k < labels.size(); ++k) placed[first + k].cls = labels[k];
  }
  return placed;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

struct Reader {
  const json& j;
  std::string path;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError((path.empty() ? std::string("<root>") : path) + ": " + what);
  }
  Reader at(const std::string& key) const {
    if (!j.is_object()) fail("expected an object");
    auto it = j.find(key);
    if (it == j.end()) {
      Reader sub{j, path.empty() ? key : path + "." + key};
      sub.fail("missing field");
    }
    return {*it, path.empty() ? key : path + "." + key};
  }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key); }
  Reader operator[](std::size_t i) const { return {j.at(i), path + "[" + std::to_string(i) + "]"}; }
  std::size_t size() const {
    if (!j.is_array()) fail("expected a list");
    return j.size();
  }
  double num() const {
    if (!j.is_number()) fail("expected a number");
    return j.get<double>();
  }
  std::int64_t integer() const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<std::int64_t>();
  }
  std::uint64_t uinteger() const {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
      fail("expected an unsigned integer");
    return j.get<std::uint64_t>();
  }
  std::string str() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  bool boolean() const {
    if (!j.is_boolean()) fail("expected true/false");
    return j.get<bool>();
  }
  Vec2 point() const {
    if (!j.is_array() || j.size() != 2) fail("expected [x, y]");
    return {(*this)[0].num(), (*this)[1].num()};
  }
  Segment segment() const {
    if (!j.is_array() || j.size() != 2) fail("expected [[x, y], [x, y]]");
    return {(*this)[0].point(), (*this)[1].point()};
  }
  Polygon polygon() const {
    Polygon p;
    for (std::size_t i = 0; i < size(); ++i) p.push_back((*this)[i].point());
    return p;
  }
  template <typename F>
  void each_key(F&& f) const {
    if (!j.is_object()) fail("expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
      f(it.key(), Reader{*it, path.empty() ? it.key() : path + "." + it.key()});
  }
};

json to_json(Vec2 p) { return json::array({p.x, p.y}); }
json to_json(const Segment& s) { return json::array({to_json(s.a), to_json(s.b)}); }
json to_json(const Polygon& poly) {
  json a = json::array();
  for (Vec2 v : poly) a.push_back(to_json(v));
  return a;
}

std::vector<std::pair<ClassId, double>> read_mix(const Reader& r) {
  std::vector<std::pair<ClassId, double>> mix;
  r.each_key([&](const std::string& key, const Reader& v) {
    auto id = parse_class_name(key);
    if (!id) v.fail("unknown attribute class '" + key + "'");
    mix.emplace_back(*id, v.num());
  });
  std::sort(mix.begin(), mix.end());
  return mix;
}

json mix_json(const std::vector<std::pair<ClassId, double>>& mix) {
  json o = json::object();
  for (const auto& [cls, f] : mix) o[std::string(class_name(cls))] = f;
  return o;
}

void read_sfm_overrides(const Reader& r, SfmOverrides& o) {
  if (r.has("tau_relax")) o.tau_relax = r.at("tau_relax").num();
  if (r.has("a_rep")) o.a_rep = r.at("a_rep").num();
  if (r.has("b_decay")) o.b_decay = r.at("b_decay").num();
  if (r.has("r_interact")) o.r_interact = r.at("r_interact").num();
  if (r.has("k_evade")) o.k_evade = r.at("k_evade").num();
  if (r.has("sense_range")) o.sense_range = r.at("sense_range").num();
}

void read_sfm(const Reader& r, SfmCoefficients& c) {
  SfmOverrides o;
  read_sfm_overrides(r, o);
  c = o.apply(c);
  if (r.has("sector_half_angle")) c.sector_half_angle = r.at("sector_half_angle").num();
}

json sfm_json(const SfmCoefficients& c) {
  return {{"tau_relax", c.tau_relax},     {"a_rep", c.a_rep},
          {"b_decay", c.b_decay},         {"r_interact", c.r_interact},
          {"k_evade", c.k_evade},         {"sector_half_angle", c.sector_half_angle},
          {"sense_range", c.sense_range}};
}

json overrides_json(const SfmOverrides& o) {
  json j = json::object();
  if (o.tau_relax) j["tau_relax"] = *o.tau_relax;
  if (o.a_rep) j["a_rep"] = *o.a_rep;
  if (o.b_decay) j["b_decay"] = *o.b_decay;
  if (o.r_interact) j["r_interact"] = *o.r_interact;
  if (o.k_evade) j["k_evade"] = *o.k_evade;
  if (o.sense_range) j["sense_range"] = *o.sense_range;
  return j;
}

#define EVAC_MOTOR_FIELDS(X)                                                        \
  X(body_radius) X(stiffness) X(damping) X(tau_motor) X(contact_slop) X(fall_impulse) \
  X(fall_window) X(step_impulse) X(recover_time) X(stop_speed) X(stop_time)         \
  X(stride_length) X(gait_min_speed)

void read_motor(const Reader& r, MotorConstants& m) {
#define X(name) \
  if (r.has(#name)) m.name = r.at(#name).num();
  EVAC_MOTOR_FIELDS(X)
#undef X
  if (r.has("trample_contacts")) m.trample_contacts = static_cast<int>(r.at("trample_contacts").integer());
  if (r.has("projection_iterations"))
    m.projection_iterations = static_cast<int>(r.at("projection_iterations").integer());
}

json motor_json(const MotorConstants& m) {
  json j = json::object();
#define X(name) j[#name] = m.name;
  EVAC_MOTOR_FIELDS(X)
#undef X
  j["trample_contacts"] = m.trample_contacts;
  j["projection_iterations"] = m.projection_iterations;
  return j;
}

void read_classes(const Reader& r, ClassTable& t) {
  r.each_key([&](const std::string& key, const Reader& v) {
    auto id = parse_class_name(key);
    if (!id) v.fail("unknown attribute class '" + key + "'");
    auto& c = t[*id];
    if (v.has("v_real")) {
      c.v_real = v.at("v_real").num();
      if (!v.has("v_setting")) c.v_setting = c.v_real;
    }
    if (v.has("v_setting")) c.v_setting = v.at("v_setting").num();
    if (v.has("v_max")) c.v_max = v.at("v_max").num();
    if (v.has("mass")) c.mass = v.at("mass").num();
    if (v.has("fall_robustness")) c.fall_robustness = v.at("fall_robustness").num();
    if (v.has("gait_loss")) c.gait_loss = v.at("gait_loss").num();
    if (v.has("gait_style")) c.gait_style_label = v.at("gait_style").str();
    if (v.has("sfm")) read_sfm_overrides(v.at("sfm"), c.sfm_overrides);
  });
}

json classes_json(const ClassTable& t) {
  json o = json::object();
  for (ClassId id : kAllClasses) {
    const auto& c = t[id];
    json j = {{"v_real", c.v_real},   {"v_setting", c.v_setting},
              {"v_max", c.v_max},     {"mass", c.mass},
              {"fall_robustness", c.fall_robustness},
              {"gait_loss", c.gait_loss}, {"gait_style", c.gait_style_label}};
    if (!c.sfm_overrides.empty()) j["sfm"] = overrides_json(c.sfm_overrides);
    o[std::string(class_name(id))] = j;
  }
  return o;
}

ScenarioSpec expand_template(const Reader& t) {
  const std::string kind = t.at("kind").str();
  if (kind == "room") {
    RoomParams p;
    if (t.has("width")) p.width = t.at("width").num();
    if (t.has("height")) p.height = t.at("height").num();
    if (t.has("exit_width")) p.exit_width = t.at("exit_width").num();
    if (t.has("agents")) p.agents = static_cast<int>(t.at("agents").integer());
    if (t.has("pillars")) p.pillars = t.at("pillars").boolean();
    if (t.has("class_mix")) p.class_mix = read_mix(t.at("class_mix"));
    return make_room_scene(p);
  }
  if (kind == "corridor") {
    CorridorParams p;
    if (t.has("corridor_width")) p.corridor_width = t.at("corridor_width").num();
    if (t.has("corridor_length")) p.corridor_length = t.at("corridor_length").num();
    if (t.has("room_width")) p.room_width = t.at("room_width").num();
    if (t.has("room_height")) p.room_height = t.at("room_height").num();
    if (t.has("agents")) p.agents = static_cast<int>(t.at("agents").integer());
    if (t.has("class_mix")) p.class_mix = read_mix(t.at("class_mix"));
    return make_corridor_scene(p);
  }
  if (kind == "straight") {
    StraightParams p;
    if (t.has("length")) p.length = t.at("length").num();
    if (t.has("class")) {
      auto id = parse_class_name(t.at("class").str());
      if (!id) t.at("class").fail("unknown attribute class");
      p.cls = *id;
    }
    return make_straight_scene(p);
  }
  if (kind == "lane") {
    LaneParams p;
    if (t.has("length")) p.length = t.at("length").num();
    if (t.has("width")) p.width = t.at("width").num();
    if (t.has("spawn_length")) p.spawn_length = t.at("spawn_length").num();
    if (t.has("agents")) p.agents = static_cast<int>(t.at("agents").integer());
    if (t.has("class_mix")) p.class_mix = read_mix(t.at("class_mix"));
    return make_lane_scene(p);
  }
  if (kind == "terrain_room") {
    TerrainRoomParams p;
    if (t.has("terrain")) {
      auto k = parse_terrain_kind(t.at("terrain").str());
      if (!k) t.at("terrain").fail("unknown terrain kind");
      p.kind = *k;
    }
    if (t.has("agents")) p.agents = static_cast<int>(t.at("agents").integer());
    return make_terrain_scene(p);
  }
  t.at("kind").fail("unknown template '" + kind + "'");
}

ScenarioSpec from_json(const json& root) {
  const Reader r{root, ""};
  if (!root.is_object()) r.fail("expected an object");
  ScenarioSpec s;
  if (r.has("template")) s = expand_template(r.at("template"));

  if (r.has("name")) s.name = r.at("name").str();
  if (r.has("seed")) s.seed = r.at("seed").uinteger();
  if (r.has("cell_size")) s.cell_size = r.at("cell_size").num();
  if (r.has("bounds")) {
    const Segment b = r.at("bounds").segment();
    s.bounds = {b.a, b.b};
  } else if (!r.has("template")) {
    r.at("bounds");  // reports the missing field
  }
  if (r.has("walls")) {
    s.walls.clear();
    const Reader w = r.at("walls");
    for (std::size_t i = 0; i < w.size(); ++i) s.walls.push_back(w[i].segment());
  }
  if (r.has("exits")) {
    s.exits.clear();
    const Reader e = r.at("exits");
    for (std::size_t i = 0; i < e.size(); ++i) {
      ExitRegion x;
      x.segment = e[i].at("segment").segment();
      if (e[i].has("width")) x.width = e[i].at("width").num();
      s.exits.push_back(x);
    }
  }
  if (r.has("terrain")) {
    s.terrain_zones.clear();
    const Reader tz = r.at("terrain");
    for (std::size_t i = 0; i < tz.size(); ++i) {
      const Reader z = tz[i];
      const std::string kname = z.at("kind").str();
      auto kind = parse_terrain_kind(kname);
      if (!kind) z.at("kind").fail("unknown terrain kind '" + kname + "'");
      TerrainZone zone = TerrainZone::of_kind(*kind, z.at("region").polygon());
      if (z.has("friction_scale")) zone.friction_scale = z.at("friction_scale").num();
      if (z.has("trip_rate")) zone.trip_rate = z.at("trip_rate").num();
      if (z.has("speed_scale")) zone.speed_scale = z.at("speed_scale").num();
      s.terrain_zones.push_back(std::move(zone));
    }
  }
  if (r.has("spawns")) {
    s.spawns.clear();
    const Reader sp = r.at("spawns");
    for (std::size_t i = 0; i < sp.size(); ++i) {
      SpawnGroup g;
      g.region = sp[i].at("region").polygon();
      g.count = static_cast<int>(sp[i].at("count").integer());
      g.class_mix = read_mix(sp[i].at("class_mix"));
      s.spawns.push_back(std::move(g));
    }
  }
  if (r.has("bottleneck")) s.bottleneck = r.at("bottleneck").polygon();
  if (r.has("sfm")) read_sfm(r.at("sfm"), s.sfm);
  if (r.has("motor")) read_motor(r.at("motor"), s.motor);
  if (r.has("classes")) read_classes(r.at("classes"), s.classes);
  return s;
}

}  // namespace

ScenarioSpec parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed scenario text: ") + e.what());
  }
  ScenarioSpec s = from_json(root);
  validate(s);
  return s;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["cell_size"] = s.cell_size;
  j["bounds"] = json::array({to_json(s.bounds.min), to_json(s.bounds.max)});
  j["walls"] = json::array();
  for (const auto& w : s.walls) j["walls"].push_back(to_json(w));
  j["exits"] = json::array();
  for (const auto& e : s.exits) j["exits"].push_back({{"segment", to_json(e.segment)}, {"width", e.width}});
  j["terrain"] = json::array();
  for (const auto& z : s.terrain_zones)
    j["terrain"].push_back({{"kind", terrain_kind_name(z.kind)},
                            {"region", to_json(z.region)},
                            {"friction_scale", z.friction_scale},
                            {"trip_rate", z.trip_rate},
                            {"speed_scale", z.speed_scale}});
  j["spawns"] = json::array();
  for (const auto& g : s.spawns)
    j["spawns"].push_back(
        {{"region", to_json(g.region)}, {"count", g.count}, {"class_mix", mix_json(g.class_mix)}});
  if (!s.bottleneck.empty()) j["bottleneck"] = to_json(s.bottleneck);
  j["sfm"] = sfm_json(s.sfm);
  j["motor"] = motor_json(s.motor);
  j["classes"] = classes_json(s.classes);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Built-in scenes

namespace {

void add_box(std::vector<Segment>& walls, Vec2 lo, Vec2 hi) {
  const Vec2 a = lo, b{hi.x, lo.y}, c = hi, d{lo.x, hi.y};
  walls.push_back({a, b});
  walls.push_back({b, c});
  walls.push_back({c, d});
  walls.push_back({d, a});
}

}  // namespace

ScenarioSpec make_room_scene(const RoomParams& p) {
  ScenarioSpec s;
  s.name = "room";
  s.bounds = {{0.0, 0.0}, {p.width, p.height}};
  const double cy = 0.5 * p.height;
  s.exits.push_back({{{p.width - 0.25, cy - 0.5 * p.exit_width},
                      {p.width - 0.25, cy + 0.5 * p.exit_width}},
                     0.5});
  if (p.pillars) {
    add_box(s.walls, {0.6 * p.width, 0.3 * p.height - 0.3}, {0.6 * p.width + 0.6, 0.3 * p.height + 0.3});
    add_box(s.walls, {0.6 * p.width, 0.7 * p.height - 0.3}, {0.6 * p.width + 0.6, 0.7 * p.height + 0.3});
  }
  if (p.agents > 0)
    s.spawns.push_back(
        {rect_polygon({0.5, 0.5}, {0.45 * p.width, p.height - 0.5}), p.agents, p.class_mix});
  s.bottleneck = rect_polygon({p.width - 3.0, cy - 2.5}, {p.width, cy + 2.5});
  return s;
}

ScenarioSpec make_corridor_scene(const CorridorParams& p) {
  ScenarioSpec s;
  s.name = "corridor";
  const double rw = p.room_width, rh = p.room_height, len = p.corridor_length;
  const double cy = 0.5 * rh, hw = 0.5 * p.corridor_width;
  s.bounds = {{0.0, 0.0}, {rw + len, rh}};
  s.walls.push_back({{rw, 0.0}, {rw, cy - hw}});
  s.walls.push_back({{rw, cy + hw}, {rw, rh}});
  s.walls.push_back({{rw, cy - hw}, {rw + len, cy - hw}});
  s.walls.push_back({{rw, cy + hw}, {rw + len, cy + hw}});
  s.exits.push_back({{{rw + len - 0.25, cy - hw + 0.05}, {rw + len - 0.25, cy + hw - 0.05}}, 0.5});
  if (p.agents > 0)
    s.spawns.push_back({rect_polygon({0.5, 0.5}, {rw - 0.5, rh - 0.5}), p.agents, p.class_mix});
  s.bottleneck = rect_polygon({rw - 2.0, cy - hw - 1.0}, {rw + 1.0, cy + hw + 1.0});
  return s;
}

ScenarioSpec make_straight_scene(const StraightParams& p) {
  ScenarioSpec s;
  s.name = "straight";
  s.bounds = {{0.0, 0.0}, {p.length + 2.0, 3.0}};
  s.exits.push_back({{{p.length + 1.0, 0.5}, {p.length + 1.0, 2.5}}, 0.5});
  s.spawns.push_back({rect_polygon({0.999, 1.499}, {1.001, 1.501}), 1, {{p.cls, 1.0}}});
  return s;
}

ScenarioSpec make_lane_scene(const LaneParams& p) {
  ScenarioSpec s;
  s.name = "lane";
  s.bounds = {{0.0, 0.0}, {p.length, p.width}};
  s.exits.push_back({{{p.length - 0.25, 0.05}, {p.length - 0.25, p.width - 0.05}}, 0.5});
  if (p.agents > 0)
    s.spawns.push_back(
        {rect_polygon({0.3, 0.3}, {p.spawn_length, p.width - 0.3}), p.agents, p.class_mix});
  s.bottleneck = rect_polygon({0.5 * p.length - 2.0, 0.0}, {0.5 * p.length + 2.0, p.width});
  return s;
}

ScenarioSpec make_terrain_scene(const TerrainRoomParams& p) {
  RoomParams rp;
  rp.width = 16.0;
  rp.height = 10.0;
  rp.agents = p.agents;
  rp.pillars = false;
  ScenarioSpec s = make_room_scene(rp);
  s.name = std::string("terrain_") + std::string(terrain_kind_name(p.kind));
  if (p.kind != TerrainKind::normal)
    s.terrain_zones.push_back(
        TerrainZone::of_kind(p.kind, rect_polygon({0.0, 0.0}, {rp.width, rp.height})));
  return s;
}

}  // namespace evac
