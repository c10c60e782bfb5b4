// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "evac/params.hpp"

namespace evac {

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The probe agent never reached the end of the measured stretch.
class TraversalError : public CalibrationError {
 public:
  TraversalError(const std::string& what, double distance)
      : CalibrationError(what), distance_(distance) {}
  double distance_covered() const { return distance_; }

 private:
  double distance_;
};

struct CalibrationReport {
  ClassId cls = ClassId::non_personalized;
  double v_real = 0.0;
  double v_setting = 0.0;
  double v_sim = 0.0;
  double residual = 0.0;  // v_sim - v_real
  int iterations = 0;
};

struct StraightRunOptions {
  double length = 30.0;      // m of corridor
  double skip = 5.0;         // m excluded at each end of the measurement
  double dt = 1.0 / 60.0;
  int decision_every = 3;
  double max_time = 600.0;   // s
  std::uint64_t seed = 0;
  SfmCoefficients sfm;
  MotorConstants motor;
};

/// Simulated speed of a lone agent on an unobstructed straight corridor:
/// distance over time between the crossings of start + skip and
/// start + length - skip, crossings interpolated between ticks.
double measure_straight_speed(const AttributeClass& cls, double v_setting,
                              const StraightRunOptions& opts = {});

/// Maps v_setting to the measured speed.
using SpeedProbe = std::function<double(const AttributeClass&, double)>;

/// Bisection on v_setting over [v_real, 3 v_real]. The first two iterations
/// probe the bracket ends; a probe outside the range spanned by its bracket
/// is reported as a non-monotone response.
CalibrationReport calibrate(const AttributeClass& cls, const SpeedProbe& probe,
                            double tolerance = 0.005, int max_iter = 60);

CalibrationReport calibrate(const AttributeClass& cls, double tolerance = 0.005,
                            int max_iter = 60, const StraightRunOptions& opts = {});

/// Every class of the table, in parallel, in ClassId order.
std::vector<CalibrationReport> calibrate_all(const ClassTable& table, double tolerance = 0.005,
                                             int max_iter = 60,
                                             const StraightRunOptions& opts = {},
                                             int threads = 0);

CalibrationTable to_table(const std::vector<CalibrationReport>& reports);

std::string encode_calibration(const std::vector<CalibrationReport>& reports, double tolerance);
/// Only `v_setting` is required per class; other fields are informational.
CalibrationTable parse_calibration(const std::string& text);
CalibrationTable load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path,
                      const std::vector<CalibrationReport>& reports, double tolerance);

}  // namespace evac
