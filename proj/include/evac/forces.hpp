// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "evac/contact.hpp"

namespace evac {

inline constexpr int kPartCount = 24;
inline constexpr std::string_view kPartLayoutVersion = "parts-v1";

/// Part names in bin order. Bins [0, 12) are the front/arm set used while
/// standing, [12, 24) the back/leg set used for contacts on a fallen body.
const std::array<std::string_view, kPartCount>& part_names();

enum class PartGroup { torso, limb, head };
PartGroup part_group(int bin);

enum class ContactKind { agent_standing, wall, while_fallen };

/// Total, deterministic bearing-to-part map. `bearing` is the direction of the
/// contact (or attacker) relative to the receiving agent's heading, CCW
/// positive, any real value.
int bin_contact(double bearing, ContactKind kind);

/// Bearing of `point` seen from an agent at `pos` facing `heading`, in (-pi, pi].
double contact_bearing(Vec2 pos, double heading, Vec2 point);

struct PartForceRecord {
  int agent_id = -1;
  std::int64_t tick = 0;
  std::array<double, kPartCount> force{};  // N

  double total() const;
  bool zero() const;
  bool operator==(const PartForceRecord&) const = default;
};

/// Resets `records` (indexed by agent id, grown to fit the events) to this tick and adds |impulse|/dt
/// of every event to the bins it was attributed to.
void accumulate(std::vector<PartForceRecord>& records, const std::vector<ContactEvent>& events,
                double dt, std::int64_t tick);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Linear light-to-dark gradient; every channel is non-increasing in force.
struct ColorMap {
  Rgb light{255, 245, 235};
  Rgb dark{103, 0, 13};
  double f_max = 0.0;  // <= 0 maps everything to `light`

  Rgb operator()(double force) const;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
};

/// Binary PPM (P6).
std::string encode_ppm(const Image& img);
void write_ppm(const std::filesystem::path& path, const Image& img);

struct PartForceSummary {
  int agent_id = -1;
  std::array<double, kPartCount> peak{};
  std::array<double, kPartCount> mean{};
};

struct HeatmapOptions {
  double f_max_override = 0.0;  // > 0 replaces the percentile default
  int cell_px = 6;
  int glyphs_per_row = 10;
};

struct Heatmap {
  Image image;
  std::vector<PartForceSummary> table;  // ascending agent id
  double f_max = 0.0;
};

/// Glyph cell (column, row) of each part in the 6 x 4 body layout: front
/// panel on the left three columns, back panel on the right three.
std::array<std::array<int, 2>, kPartCount> glyph_layout();

/// 95th percentile of the nonzero per-tick part forces (0 when none).
double default_f_max(const std::vector<std::vector<PartForceRecord>>& window);

/// `window` holds one vector of per-agent records per tick. Glyphs are colored
/// by each part's peak force over the window.
Heatmap render_heatmap(const std::vector<std::vector<PartForceRecord>>& window,
                       const HeatmapOptions& opts = {});

/// Tab-separated peak/mean table with a layout-version header line.
std::string format_force_table(const Heatmap& hm);

}  // namespace evac
