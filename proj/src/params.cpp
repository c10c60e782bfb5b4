// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "evac/params.hpp"

namespace evac {

std::string_view class_name(ClassId id) {
  switch (id) {
    case ClassId::young: return "young";
    case ClassId::middle_aged: return "middle_aged";
    case ClassId::old: return "old";
    case ClassId::patient: return "patient";
    case ClassId::disabled: return "disabled";
    case ClassId::non_personalized: return "non_personalized";
  }
  return "unknown";
}

std::optional<ClassId> parse_class_name(std::string_view name) {
  for (ClassId id : kAllClasses)
    if (class_name(id) == name) return id;
  return std::nullopt;
}

ClassTable default_class_table() {
  auto make = [](ClassId id, double v_real, double v_max, double mass, double robust,
                 double gait_loss, const char* style) {
    AttributeClass c;
    c.id = id;
    c.v_real = v_real;
    c.v_setting = v_real;
    c.v_max = v_max;
    c.mass = mass;
    c.fall_robustness = robust;
    c.gait_loss = gait_loss;
    c.gait_style_label = style;
    return c;
  };
  ClassTable t;
  t[ClassId::young] = make(ClassId::young, 1.5, 2.6, 70.0, 1.2, 0.03, "brisk");
  t[ClassId::middle_aged] = make(ClassId::middle_aged, 1.35, 2.4, 75.0, 1.0, 0.04, "steady");
  t[ClassId::old] = make(ClassId::old, 1.0, 1.9, 68.0, 0.8, 0.07, "shuffling");
  t[ClassId::patient] = make(ClassId::patient, 0.8, 1.6, 65.0, 0.7, 0.09, "guarded");
  t[ClassId::disabled] = make(ClassId::disabled, 0.6, 1.3, 70.0, 0.6, 0.12, "limping");
  t[ClassId::non_personalized] =
      make(ClassId::non_personalized, 1.25, 2.3, 70.0, 1.0, 0.04, "neutral");
  return t;
}

CalibrationTable CalibrationTable::from(const ClassTable& table) {
  CalibrationTable c;
  for (ClassId id : kAllClasses) c.set(id, table[id].v_setting);
  return c;
}

}  // namespace evac
