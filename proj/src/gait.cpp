// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/gait.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace evac {

double distance(Vec3 a, Vec3 b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

int MotionSequence::joint_index(std::string_view name) const {
  for (std::size_t i = 0; i < joint_names.size(); ++i)
    if (joint_names[i] == name) return static_cast<int>(i);
  return -1;
}

int MotionSequence::angle_index(std::string_view name) const {
  for (std::size_t i = 0; i < angle_names.size(); ++i)
    if (angle_names[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, '\t')) out.push_back(cell);
  return out;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw GaitError("motion line " + std::to_string(line) + ": bad number '" + s + "'");
  }
}

}  // namespace

MotionSequence parse_motion(const std::string& text) {
  MotionSequence seq;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  // column -> (kind, index, axis); kind 0 joint, 1 angle, 2 root_yaw, 3 frame
  struct Column {
    int kind;
    int index;
    int axis;
  };
  std::vector<Column> columns;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string key;
      h >> key;
      if (key == "frame_rate") {
        std::string v;
        h >> v;
        seq.frame_rate = to_double(v, line_no);
      } else if (key == "style") {
        std::string rest;
        std::getline(h >> std::ws, rest);
        seq.style = rest;
      }
      continue;
    }
    const auto cells = split_tabs(line);
    if (!have_header) {
      have_header = true;
      for (const std::string& c : cells) {
        if (c == "frame") {
          columns.push_back({3, 0, 0});
        } else if (c == "root_yaw") {
          columns.push_back({2, 0, 0});
        } else if (c.rfind("angle:", 0) == 0) {
          seq.angle_names.push_back(c.substr(6));
          columns.push_back({1, static_cast<int>(seq.angle_names.size()) - 1, 0});
        } else if (c.size() > 2 && c[c.size() - 2] == '.' &&
                   (c.back() == 'x' || c.back() == 'y' || c.back() == 'z')) {
          const std::string joint = c.substr(0, c.size() - 2);
          int idx = seq.joint_index(joint);
          if (idx < 0) {
            seq.joint_names.push_back(joint);
            idx = static_cast<int>(seq.joint_names.size()) - 1;
          }
          columns.push_back({0, idx, c.back() - 'x'});
        } else {
          throw GaitError("motion header: unknown column '" + c + "'");
        }
      }
      continue;
    }
    if (cells.size() != columns.size())
      throw GaitError("motion line " + std::to_string(line_no) + ": expected " +
                      std::to_string(columns.size()) + " columns");
    MotionFrame f;
    f.joints.assign(seq.joint_names.size(), Vec3{});
    f.angles.assign(seq.angle_names.size(), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double v = to_double(cells[c], line_no);
      const Column& col = columns[c];
      if (col.kind == 0) {
        Vec3& j = f.joints[col.index];
        (col.axis == 0 ? j.x : col.axis == 1 ? j.y : j.z) = v;
      } else if (col.kind == 1) {
        f.angles[col.index] = v;
      } else if (col.kind == 2) {
        f.root_yaw = v;
      }
    }
    seq.frames.push_back(std::move(f));
  }
  if (!(seq.frame_rate > 0.0)) throw GaitError("motion: frame_rate must be positive");
  return seq;
}

MotionSequence load_motion(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw GaitError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_motion(ss.str());
}

std::string format_motion(const MotionSequence& seq) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# frame_rate " << seq.frame_rate << "\n";
  if (!seq.style.empty()) out << "# style " << seq.style << "\n";
  out << "frame\troot_yaw";
  for (const auto& j : seq.joint_names) out << '\t' << j << ".x\t" << j << ".y\t" << j << ".z";
  for (const auto& a : seq.angle_names) out << "\tangle:" << a;
  out << "\n";
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const MotionFrame& f = seq.frames[i];
    out << i << '\t' << f.root_yaw;
    for (const Vec3& j : f.joints) out << '\t' << j.x << '\t' << j.y << '\t' << j.z;
    for (double a : f.angles) out << '\t' << a;
    out << "\n";
  }
  return out.str();
}

std::string_view gait_event_name(GaitEvent e) {
  switch (e) {
    case GaitEvent::initial_contact: return "initial_contact";
    case GaitEvent::mid_stance: return "mid_stance";
    case GaitEvent::opposite_initial_contact: return "opposite_initial_contact";
    case GaitEvent::feet_adjacent: return "feet_adjacent";
  }
  return "initial_contact";
}

double gait_event_value(GaitEvent e) {
  switch (e) {
    case GaitEvent::initial_contact: return 0.0;
    case GaitEvent::mid_stance: return 0.3;
    case GaitEvent::opposite_initial_contact: return 0.5;
    case GaitEvent::feet_adjacent: return 0.75;
  }
  return 0.0;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  const int n = static_cast<int>(x.size());
  const int half = std::max(0, window / 2);
  std::vector<double> out(x.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    double s = 0.0;
    for (int k = lo; k <= hi; ++k) s += x[k];
    out[i] = s / (hi - lo + 1);
  }
  return out;
}

std::vector<double> ankle_distance(const MotionSequence& seq, std::string_view left,
                                   std::string_view right) {
  const int l = seq.joint_index(left), r = seq.joint_index(right);
  if (l < 0) throw GaitError("motion has no joint '" + std::string(left) + "'");
  if (r < 0) throw GaitError("motion has no joint '" + std::string(right) + "'");
  if (seq.frames.size() < 2) throw GaitError("motion too short for gait analysis");
  std::vector<double> d;
  d.reserve(seq.frames.size());
  for (const MotionFrame& f : seq.frames) d.push_back(distance(f.joints[l], f.joints[r]));
  return moving_average(d, 5);
}

std::vector<Extremum> find_extrema(const std::vector<double>& wave, double min_prominence_frac) {
  std::vector<Extremum> out;
  if (wave.size() < 3) return out;
  const auto [mn_it, mx_it] = std::minmax_element(wave.begin(), wave.end());
  const double range = *mx_it - *mn_it;
  if (!(range > 0.0)) return out;
  const double delta = min_prominence_frac * range;

  // Hysteresis walk: an extremum is confirmed once the signal has moved
  // `delta` away from it in the other direction.
  double mx = wave[0], mn = wave[0];
  int mx_start = 0, mx_end = 0, mn_start = 0, mn_end = 0;
  int looking = 0;  // 0 undecided, +1 for a peak, -1 for a trough
  for (int i = 1; i < static_cast<int>(wave.size()); ++i) {
    const double v = wave[i];
    if (v > mx) {
      mx = v;
      mx_start = mx_end = i;
    } else if (v == mx && mx_end == i - 1) {
      mx_end = i;
    }
    if (v < mn) {
      mn = v;
      mn_start = mn_end = i;
    } else if (v == mn && mn_end == i - 1) {
      mn_end = i;
    }
    if (looking >= 0 && v <= mx - delta) {
      out.push_back({(mx_start + mx_end) / 2, true});
      looking = -1;
      mn = v;
      mn_start = mn_end = i;
    } else if (looking <= 0 && v >= mn + delta) {
      out.push_back({(mn_start + mn_end) / 2, false});
      looking = +1;
      mx = v;
      mx_start = mx_end = i;
    }
  }
  return out;
}

std::vector<Keyframe> detect_events(const std::vector<double>& wave, double frame_rate) {
  if (!(frame_rate > 0.0)) throw GaitError("frame_rate must be positive");
  const auto ext = find_extrema(wave);
  auto first_peak = std::find_if(ext.begin(), ext.end(), [](const Extremum& e) { return e.peak; });
  std::vector<Keyframe> out;
  static constexpr GaitEvent order[4] = {GaitEvent::initial_contact, GaitEvent::mid_stance,
                                         GaitEvent::opposite_initial_contact,
                                         GaitEvent::feet_adjacent};
  int k = 0;
  for (auto it = first_peak; it != ext.end(); ++it, ++k) out.push_back({it->frame, order[k % 4]});
  if (out.size() < 4)
    throw GaitError("need at least 4 alternating extrema, found " + std::to_string(out.size()));
  return out;
}

GaitAnnotation assign_gait_values(const std::vector<Keyframe>& keyframes, int n_frames) {
  if (keyframes.size() < 4) throw GaitError("need at least 4 keyframes");
  for (std::size_t i = 1; i < keyframes.size(); ++i) {
    if (keyframes[i].frame <= keyframes[i - 1].frame)
      throw GaitError("keyframes out of order at " + std::to_string(i));
    const int prev = static_cast<int>(keyframes[i - 1].event);
    if (static_cast<int>(keyframes[i].event) != (prev + 1) % 4)
      throw GaitError("keyframe events out of order at " + std::to_string(i));
  }
  if (keyframes.front().frame < 0 || keyframes.back().frame >= n_frames)
    throw GaitError("keyframe outside the sequence");

  const double top = std::nextafter(1.0, 0.0);
  auto clamp01 = [top](double v) { return std::clamp(v, 0.0, top); };
  auto end_value = [](const Keyframe& to) {
    return to.event == GaitEvent::initial_contact ? 1.0 : gait_event_value(to.event);
  };

  GaitAnnotation ann;
  ann.keyframes = keyframes;
  ann.value.assign(static_cast<std::size_t>(n_frames), 0.0);
  for (std::size_t k = 0; k + 1 < keyframes.size(); ++k) {
    const Keyframe& a = keyframes[k];
    const Keyframe& b = keyframes[k + 1];
    const double v0 = gait_event_value(a.event), v1 = end_value(b);
    for (int f = a.frame; f < b.frame; ++f) {
      const double t = static_cast<double>(f - a.frame) / (b.frame - a.frame);
      ann.value[f] = clamp01(v0 + (v1 - v0) * t);
    }
  }
  {
    const Keyframe& a = keyframes[0];
    const Keyframe& b = keyframes[1];
    const double v0 = gait_event_value(a.event);
    const double slope = (end_value(b) - v0) / (b.frame - a.frame);
    for (int f = 0; f < a.frame; ++f) ann.value[f] = clamp01(v0 - slope * (a.frame - f));
  }
  {
    const Keyframe& a = keyframes[keyframes.size() - 2];
    const Keyframe& b = keyframes.back();
    const double v1 = gait_event_value(b.event);
    const double slope = (end_value(b) - gait_event_value(a.event)) / (b.frame - a.frame);
    for (int f = b.frame + 1; f < n_frames; ++f) ann.value[f] = clamp01(v1 + slope * (f - b.frame));
  }
  for (const Keyframe& k : keyframes) ann.value[k.frame] = gait_event_value(k.event);
  return ann;
}

GaitAnnotation annotate(const MotionSequence& seq) {
  const auto wave = ankle_distance(seq);
  return assign_gait_values(detect_events(wave, seq.frame_rate), static_cast<int>(wave.size()));
}

double cyclic_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

double joint_angle_distance(const MotionSequence& a, int fa, const MotionSequence& b, int fb) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.angle_names.size(); ++i) {
    const int j = b.angle_index(a.angle_names[i]);
    if (j < 0) continue;
    s += std::abs(a.frames[fa].angles[i] - b.frames[fb].angles[j]);
  }
  return s;
}

FramePairing match_frames(const MotionSequence& stylized, const GaitAnnotation& stylized_gait,
                          const MotionSequence& neutral, const GaitAnnotation& neutral_gait,
                          double tolerance) {
  FramePairing out;
  const int ns = static_cast<int>(stylized_gait.value.size());
  const int nn = static_cast<int>(neutral_gait.value.size());
  for (int i = 0; i < ns; ++i) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    int best_gap = 0;
    for (int j = 0; j < nn; ++j) {
      if (cyclic_distance(stylized_gait.value[i], neutral_gait.value[j]) > tolerance) continue;
      const double d = joint_angle_distance(stylized, i, neutral, j);
      const int gap = std::abs(i - j);
      if (best < 0 || d < best_d || (d == best_d && gap < best_gap)) {
        best = j;
        best_d = d;
        best_gap = gap;
      }
    }
    if (best < 0) out.unpaired.push_back(i);
    else out.pairs.emplace_back(i, best);
  }
  return out;
}

MotionFrame rotate_frame(const MotionFrame& frame, double angle, int root) {
  MotionFrame out = frame;
  if (frame.joints.empty()) {
    out.root_yaw = frame.root_yaw + angle;
    return out;
  }
  const Vec3 pivot = frame.joints[static_cast<std::size_t>(root)];
  const double c = std::cos(angle), s = std::sin(angle);
  for (Vec3& j : out.joints) {
    // Right-handed rotation about +y.
    const double dx = j.x - pivot.x, dz = j.z - pivot.z;
    j.x = pivot.x + c * dx + s * dz;
    j.z = pivot.z - s * dx + c * dz;
  }
  out.root_yaw = frame.root_yaw + angle;
  return out;
}

std::pair<MotionFrame, MotionFrame> augment_pair(const MotionFrame& a, const MotionFrame& b,
                                                 double angle, int root) {
  return {rotate_frame(a, angle, root), rotate_frame(b, angle, root)};
}

MotionSequence synthesize_motion(const std::vector<GaitSample>& samples, double frame_rate,
                                 const std::string& style, double stride_length) {
  MotionSequence seq;
  seq.frame_rate = frame_rate;
  seq.style = style;
  seq.joint_names = {"root", "left_ankle", "right_ankle"};
  seq.angle_names = {"left_hip", "right_hip", "left_knee", "right_knee"};
  const double half_step = 0.25 * stride_length;
  const double hip_width = 0.1;
  const double two_pi = 2.0 * std::numbers::pi;
  for (const GaitSample& s : samples) {
    const double swing = std::cos(two_pi * s.phase);
    // Planar (x, y) maps to (x, z) with y up.
    const double fx = std::cos(s.heading), fz = std::sin(s.heading);
    const double lx = -fz, lz = fx;
    MotionFrame f;
    f.root_yaw = s.heading;
    f.joints.push_back({s.x, 0.9, s.y});
    f.joints.push_back({s.x + fx * half_step * swing + lx * hip_width, 0.1,
                        s.y + fz * half_step * swing + lz * hip_width});
    f.joints.push_back({s.x - fx * half_step * swing - lx * hip_width, 0.1,
                        s.y - fz * half_step * swing - lz * hip_width});
    const double hip = 0.35 * swing;
    const double knee_l = 0.6 * std::max(0.0, std::sin(two_pi * s.phase));
    const double knee_r = 0.6 * std::max(0.0, -std::sin(two_pi * s.phase));
    f.angles = {hip, -hip, knee_l, knee_r};
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

}  // namespace evac
