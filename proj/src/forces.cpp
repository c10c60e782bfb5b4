// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/forces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "evac/stats.hpp"

namespace evac {

const std::array<std::string_view, kPartCount>& part_names() {
  static const std::array<std::string_view, kPartCount> names = {
      "head",          "neck",           "chest_left",   "chest",       "chest_right",
      "abdomen",       "shoulder_left",  "shoulder_right", "upper_arm_left", "upper_arm_right",
      "forearm_left",  "forearm_right",  "upper_back",   "mid_back",    "lower_back",
      "pelvis",        "thigh_left",     "thigh_right",  "knee_left",   "knee_right",
      "shin_left",     "shin_right",     "foot_left",    "foot_right"};
  return names;
}

PartGroup part_group(int bin) {
  switch (bin) {
    case 0:
    case 1: return PartGroup::head;
    case 2: case 3: case 4: case 5: case 6: case 7:
    case 12: case 13: case 14: case 15: return PartGroup::torso;
    default: return PartGroup::limb;
  }
}

namespace {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

double contact_bearing(Vec2 pos, double heading, Vec2 point) {
  const Vec2 d = point - pos;
  return wrap_angle(std::atan2(d.y, d.x) - heading);
}

int bin_contact(double bearing, ContactKind kind) {
  if (!std::isfinite(bearing)) bearing = 0.0;
  const double deg = wrap_angle(bearing) * 180.0 / std::numbers::pi;
  const double a = std::abs(deg);
  const bool left = deg >= 0.0;
  auto sided = [left](int l, int r) { return left ? l : r; };
  switch (kind) {
    case ContactKind::agent_standing:
      if (a <= 15.0) return 3;
      if (a <= 45.0) return sided(2, 4);
      if (a <= 80.0) return sided(6, 7);
      if (a <= 110.0) return sided(8, 9);
      if (a <= 150.0) return sided(10, 11);
      return 12;
    case ContactKind::wall:
      if (a <= 60.0) return sided(10, 11);
      if (a <= 120.0) return sided(6, 7);
      return sided(8, 9);
    case ContactKind::while_fallen:
      if (a < 22.5) return 12;
      if (a < 45.0) return 13;
      if (a < 67.5) return 14;
      if (a < 90.0) return 15;
      if (a < 112.5) return sided(16, 17);
      if (a < 135.0) return sided(18, 19);
      if (a < 157.5) return sided(20, 21);
      return sided(22, 23);
  }
  return 3;
}

double PartForceRecord::total() const {
  double s = 0.0;
  for (double f : force) s += f;
  return s;
}

bool PartForceRecord::zero() const {
  return std::all_of(force.begin(), force.end(), [](double f) { return f == 0.0; });
}

void accumulate(std::vector<PartForceRecord>& records, const std::vector<ContactEvent>& events,
                double dt, std::int64_t tick) {
  std::size_t needed = records.size();
  for (const ContactEvent& e : events)
    needed = std::max<std::size_t>(needed, static_cast<std::size_t>(std::max(e.agent_a, e.agent_b) + 1));
  records.resize(needed);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].agent_id = static_cast<int>(i);
    records[i].tick = tick;
    records[i].force.fill(0.0);
  }
  for (const ContactEvent& e : events) {
    const double f = std::abs(e.impulse) / dt;
    if (e.agent_a >= 0) records[e.agent_a].force[e.part_bin_a] += f;
    if (e.agent_b >= 0) records[e.agent_b].force[e.part_bin_b] += f;
  }
}

Rgb ColorMap::operator()(double force) const {
  const double t = f_max > 0.0 ? std::clamp(force / f_max, 0.0, 1.0) : 0.0;
  auto mix = [t](std::uint8_t lo, std::uint8_t hi) {
    return static_cast<std::uint8_t>(std::lround(lo + (static_cast<double>(hi) - lo) * t));
  };
  return {mix(light.r, dark.r), mix(light.g, dark.g), mix(light.b, dark.b)};
}

Rgb Image::at(int x, int y) const {
  const std::size_t o = 3 * (static_cast<std::size_t>(y) * width + x);
  return {rgb[o], rgb[o + 1], rgb[o + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t o = 3 * (static_cast<std::size_t>(y) * width + x);
  rgb[o] = c.r;
  rgb[o + 1] = c.g;
  rgb[o + 2] = c.b;
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.rgb.data()), img.rgb.size());
  return out;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::string data = encode_ppm(img);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::array<std::array<int, 2>, kPartCount> glyph_layout() {
  // {column, row}
  std::array<std::array<int, 2>, kPartCount> at{};
  const int front[4][3] = {{8, 0, 9}, {6, 1, 7}, {2, 3, 4}, {10, 5, 11}};
  const int back[4][3] = {{16, 12, 17}, {18, 13, 19}, {20, 14, 21}, {22, 15, 23}};
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 3; ++col) {
      at[front[row][col]] = {col, row};
      at[back[row][col]] = {col + 3, row};
    }
  }
  return at;
}

double default_f_max(const std::vector<std::vector<PartForceRecord>>& window) {
  std::vector<double> nonzero;
  for (const auto& tick : window)
    for (const auto& rec : tick)
      for (double f : rec.force)
        if (f > 0.0) nonzero.push_back(f);
  if (nonzero.empty()) return 0.0;
  std::sort(nonzero.begin(), nonzero.end());
  return quantile_sorted(nonzero, 0.95);
}

Heatmap render_heatmap(const std::vector<std::vector<PartForceRecord>>& window,
                       const HeatmapOptions& opts) {
  Heatmap hm;
  int max_id = -1;
  for (const auto& tick : window)
    for (const auto& rec : tick) max_id = std::max(max_id, rec.agent_id);

  const std::size_t n_agents = static_cast<std::size_t>(max_id + 1);
  hm.table.resize(n_agents);
  for (std::size_t i = 0; i < n_agents; ++i) hm.table[i].agent_id = static_cast<int>(i);
  const double ticks = window.empty() ? 1.0 : static_cast<double>(window.size());
  for (const auto& tick : window) {
    for (const auto& rec : tick) {
      if (rec.agent_id < 0) continue;
      auto& row = hm.table[rec.agent_id];
      for (int p = 0; p < kPartCount; ++p) {
        row.peak[p] = std::max(row.peak[p], rec.force[p]);
        row.mean[p] += rec.force[p] / ticks;
      }
    }
  }

  hm.f_max = opts.f_max_override > 0.0 ? opts.f_max_override : default_f_max(window);
  ColorMap cmap;
  cmap.f_max = hm.f_max;

  const int px = std::max(1, opts.cell_px);
  const int per_row = std::max(1, opts.glyphs_per_row);
  const int glyph_w = 6 * px + 1, glyph_h = 4 * px, pad = 2;
  const int n = static_cast<int>(n_agents);
  const int cols = std::max(1, std::min(n, per_row));
  const int rows = std::max(1, (n + per_row - 1) / per_row);
  Image& img = hm.image;
  img.width = pad + cols * (glyph_w + pad);
  img.height = pad + rows * (glyph_h + pad);
  img.rgb.assign(static_cast<std::size_t>(img.width) * img.height * 3, 255);

  const auto layout = glyph_layout();
  for (int a = 0; a < n; ++a) {
    const int gx = pad + (a % per_row) * (glyph_w + pad);
    const int gy = pad + (a / per_row) * (glyph_h + pad);
    for (int p = 0; p < kPartCount; ++p) {
      const Rgb c = cmap(hm.table[a].peak[p]);
      const int col = layout[p][0], row = layout[p][1];
      const int x0 = gx + col * px + (col >= 3 ? 1 : 0);
      const int y0 = gy + row * px;
      for (int y = 0; y < px; ++y)
        for (int x = 0; x < px; ++x) img.set(x0 + x, y0 + y, c);
    }
  }
  return hm;
}

std::string format_force_table(const Heatmap& hm) {
  std::ostringstream out;
  out << "# part_layout " << kPartLayoutVersion << "\tf_max_N " << hm.f_max << "\n";
  out << "agent\tpart\tpart_name\tpeak_N\tmean_N\n";
  const auto& names = part_names();
  char buf[64];
  for (const auto& row : hm.table) {
    for (int p = 0; p < kPartCount; ++p) {
      out << row.agent_id << '\t' << p << '\t' << names[p] << '\t';
      std::snprintf(buf, sizeof buf, "%.6f\t%.6f\n", row.peak[p], row.mean[p]);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace evac
