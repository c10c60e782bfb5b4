// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evac {

/// Social-force coefficients. Forces are mass-normalized (m/s^2).
struct SfmCoefficients {
  double tau_relax = 0.5;     // s
  double a_rep = 3.0;         // m/s^2 at contact distance
  double b_decay = 0.3;       // m
  double r_interact = 2.0;    // m
  double k_evade = 2.0;       // m/s^2
  double sector_half_angle = std::numbers::pi / 8.0;
  double sense_range = 4.0;   // m

  bool operator==(const SfmCoefficients&) const = default;
};

/// Partial per-class override of SfmCoefficients.
struct SfmOverrides {
  std::optional<double> tau_relax;
  std::optional<double> a_rep;
  std::optional<double> b_decay;
  std::optional<double> r_interact;
  std::optional<double> k_evade;
  std::optional<double> sense_range;

  SfmCoefficients apply(SfmCoefficients base) const {
    if (tau_relax) base.tau_relax = *tau_relax;
    if (a_rep) base.a_rep = *a_rep;
    if (b_decay) base.b_decay = *b_decay;
    if (r_interact) base.r_interact = *r_interact;
    if (k_evade) base.k_evade = *k_evade;
    if (sense_range) base.sense_range = *sense_range;
    return base;
  }
  bool empty() const {
    return !tau_relax && !a_rep && !b_decay && !r_interact && !k_evade && !sense_range;
  }
  bool operator==(const SfmOverrides&) const = default;
};

/// Reduced-order body, contact and fall model constants.
struct MotorConstants {
  double body_radius = 0.25;       // m
  double stiffness = 2000.0;       // N/m
  double damping = 50.0;           // N*s/m
  double tau_motor = 0.3;          // s, velocity relaxation on normal ground
  double contact_slop = 0.01;      // m, overlap left after projection
  int projection_iterations = 24;
  double fall_impulse = 150.0;     // N*s over fall_window
  double fall_window = 0.5;        // s
  double step_impulse = 8.0;       // N*s, heavy contact on a fallen agent
  int trample_contacts = 3;
  double recover_time = 3.0;       // s
  double stop_speed = 0.1;         // m/s
  double stop_time = 0.5;          // s
  double stride_length = 1.4;      // m per gait cycle
  double gait_min_speed = 0.05;    // m/s

  bool operator==(const MotorConstants&) const = default;
};

enum class ClassId : int {
  young = 0,
  middle_aged,
  old,
  patient,
  disabled,
  non_personalized,
};

inline constexpr std::array<ClassId, 6> kAllClasses = {
    ClassId::young,   ClassId::middle_aged, ClassId::old,
    ClassId::patient, ClassId::disabled,    ClassId::non_personalized};

std::string_view class_name(ClassId id);
std::optional<ClassId> parse_class_name(std::string_view name);

struct AttributeClass {
  ClassId id = ClassId::non_personalized;
  double v_real = 1.25;          // m/s
  double v_setting = 1.25;       // m/s, engine input after calibration
  double v_max = 2.4;            // m/s
  double mass = 70.0;            // kg
  double fall_robustness = 1.0;  // scales the fall impulse threshold
  double gait_loss = 0.04;       // peak fractional speed dip over a step
  std::string gait_style_label = "neutral";
  SfmOverrides sfm_overrides;

  std::string_view name() const { return class_name(id); }
  bool operator==(const AttributeClass&) const = default;
};

/// The six classes indexed by ClassId.
struct ClassTable {
  std::array<AttributeClass, 6> classes;

  AttributeClass& operator[](ClassId id) { return classes[static_cast<int>(id)]; }
  const AttributeClass& operator[](ClassId id) const {
    return classes[static_cast<int>(id)];
  }
  bool operator==(const ClassTable&) const = default;
};

/// Placeholder literature speeds; configuration, not ground truth.
ClassTable default_class_table();

/// Calibrated engine input speed per class; unset classes cannot be simulated.
struct CalibrationTable {
  std::array<std::optional<double>, 6> v_setting;

  std::optional<double> operator[](ClassId id) const { return v_setting[static_cast<int>(id)]; }
  void set(ClassId id, double v) { v_setting[static_cast<int>(id)] = v; }
  /// Takes every class's current v_setting.
  static CalibrationTable from(const ClassTable& table);
  bool operator==(const CalibrationTable&) const = default;
};

}  // namespace evac
