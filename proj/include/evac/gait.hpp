// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evac {

class GaitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;  // vertical
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
};

double distance(Vec3 a, Vec3 b);

struct MotionFrame {
  std::vector<Vec3> joints;    // same order as MotionSequence::joint_names
  std::vector<double> angles;  // radians, same order as angle_names
  double root_yaw = 0.0;       // radians about the vertical axis
  bool operator==(const MotionFrame&) const = default;
};

struct MotionSequence {
  double frame_rate = 30.0;
  std::string style;
  std::vector<std::string> joint_names;
  std::vector<std::string> angle_names;
  std::vector<MotionFrame> frames;

  /// -1 when absent.
  int joint_index(std::string_view name) const;
  int angle_index(std::string_view name) const;
  bool operator==(const MotionSequence&) const = default;
};

/// Tab-separated motion file:
///   # frame_rate <hz>
///   # style <label>
///   frame  root_yaw  <joint>.x  <joint>.y  <joint>.z ...  angle:<name> ...
/// One row per frame; y is up.
MotionSequence parse_motion(const std::string& text);
MotionSequence load_motion(const std::filesystem::path& path);
std::string format_motion(const MotionSequence& seq);

enum class GaitEvent { initial_contact, mid_stance, opposite_initial_contact, feet_adjacent };

std::string_view gait_event_name(GaitEvent e);
/// 0, 0.3, 0.5, 0.75
double gait_event_value(GaitEvent e);

struct Keyframe {
  int frame = 0;
  GaitEvent event = GaitEvent::initial_contact;
  bool operator==(const Keyframe&) const = default;
};

struct GaitAnnotation {
  std::vector<double> value;  // per frame, [0, 1)
  std::vector<Keyframe> keyframes;
};

/// Per-frame ankle separation smoothed by a centred 5-frame moving average
/// (shorter at the ends).
std::vector<double> ankle_distance(const MotionSequence& seq,
                                   std::string_view left = "left_ankle",
                                   std::string_view right = "right_ankle");

/// Centred moving average; the window shrinks at the ends.
std::vector<double> moving_average(const std::vector<double>& x, int window);

/// Alternating extrema whose prominence is at least 10% of the waveform
/// range. Plateaus resolve to their middle frame.
struct Extremum {
  int frame = 0;
  bool peak = false;
  bool operator==(const Extremum&) const = default;
};
std::vector<Extremum> find_extrema(const std::vector<double>& wave, double min_prominence_frac = 0.1);

/// Peaks and troughs from the first peak on, labelled initial contact, mid
/// stance, opposite initial contact, feet adjacent, repeating.
std::vector<Keyframe> detect_events(const std::vector<double>& wave, double frame_rate);

/// Keyframes take their event values; frames between are interpolated, the
/// segment ending at an initial contact running to 1.0. Frames outside the
/// keyframe span follow the nearest segment's slope, clamped to [0, 1).
GaitAnnotation assign_gait_values(const std::vector<Keyframe>& keyframes, int n_frames);

/// Detection plus assignment on the smoothed ankle waveform.
GaitAnnotation annotate(const MotionSequence& seq);

/// min(|a - b|, 1 - |a - b|)
double cyclic_distance(double a, double b);

struct FramePairing {
  std::vector<std::pair<int, int>> pairs;  // (stylized, neutral)
  std::vector<int> unpaired;               // stylized frames without a candidate
};

/// For each stylized frame, the neutral frame within `tolerance` gait value
/// that minimises the summed absolute difference over shared angle columns.
/// Ties go to the nearest frame index, then the lower one.
FramePairing match_frames(const MotionSequence& stylized, const GaitAnnotation& stylized_gait,
                          const MotionSequence& neutral, const GaitAnnotation& neutral_gait,
                          double tolerance = 0.02);

/// Summed absolute angle difference over columns present in both.
double joint_angle_distance(const MotionSequence& a, int fa, const MotionSequence& b, int fb);

/// Rotates a frame about the vertical axis through its root joint (index
/// `root`) and adds `angle` to the root yaw.
MotionFrame rotate_frame(const MotionFrame& frame, double angle, int root = 0);

/// Applies the same root rotation to both frames of a pair.
std::pair<MotionFrame, MotionFrame> augment_pair(const MotionFrame& a, const MotionFrame& b,
                                                 double angle, int root = 0);

/// Samples of one agent's planar motion and gait phase.
struct GaitSample {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians
  double phase = 0.0;    // [0, 1)
};

/// Builds a walking sequence whose ankle separation peaks at phases 0 and 0.5
/// and bottoms out at 0.25 and 0.75, matching the simulator's gait events.
MotionSequence synthesize_motion(const std::vector<GaitSample>& samples, double frame_rate,
                                 const std::string& style, double stride_length = 1.4);

}  // namespace evac
