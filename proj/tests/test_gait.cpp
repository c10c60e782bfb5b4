// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "evac/gait.hpp"

using namespace evac;

namespace {

constexpr double kPi = std::numbers::pi;

// Two ankles mirrored about the root along x.
MotionSequence ankles(const std::vector<double>& half_sep) {
  MotionSequence s;
  s.joint_names = {"root", "left_ankle", "right_ankle"};
  for (double h : half_sep) {
    MotionFrame f;
    f.joints = {{0.0, 0.9, 0.0}, {h, 0.1, 0.1}, {-h, 0.1, 0.1}};
    s.frames.push_back(f);
  }
  return s;
}

std::vector<double> abs_sine(int n, int half_period) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = std::abs(std::sin(kPi * i / half_period));
  return w;
}

// Frames with given gait values and angles depending only on that value.
MotionSequence angle_track(const std::vector<double>& values) {
  MotionSequence s;
  s.angle_names = {"left_hip", "right_knee"};
  for (double v : values) {
    MotionFrame f;
    f.angles = {std::sin(2 * kPi * v), std::cos(2 * kPi * v)};
    s.frames.push_back(f);
  }
  return s;
}

}  // namespace

TEST_CASE("event values") {
  CHECK(gait_event_value(GaitEvent::initial_contact) == 0.0);
  CHECK(gait_event_value(GaitEvent::mid_stance) == 0.3);
  CHECK(gait_event_value(GaitEvent::opposite_initial_contact) == 0.5);
  CHECK(gait_event_value(GaitEvent::feet_adjacent) == 0.75);
}

TEST_CASE("ankle distance") {
  SUBCASE("static ankles") {
    // Ankles 0.2 apart in z only.
    MotionSequence s;
    s.joint_names = {"left_ankle", "right_ankle"};
    for (int i = 0; i < 10; ++i) s.frames.push_back({{{0.0, 0.1, 0.1}, {0.0, 0.1, -0.1}}, {}, 0.0});
    for (double d : ankle_distance(s)) CHECK(d == doctest::Approx(0.2));
  }
  SUBCASE("sinusoidal swing has half the swing period") {
    std::vector<double> h(200);
    for (int i = 0; i < 200; ++i) h[i] = 0.3 * std::sin(2 * kPi * i / 40.0);
    const auto d = ankle_distance(ankles(h));
    const auto ex = find_extrema(d);
    std::vector<int> peaks;
    for (const auto& e : ex)
      if (e.peak) peaks.push_back(e.frame);
    REQUIRE(peaks.size() >= 4);
    for (std::size_t i = 1; i < peaks.size(); ++i) CHECK(peaks[i] - peaks[i - 1] == 20);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(ankle_distance(ankles({0.1})), GaitError);
    MotionSequence s = ankles({0.1, 0.2, 0.3});
    s.joint_names[2] = "right_heel";
    CHECK_THROWS_AS(ankle_distance(s), GaitError);
  }
}

TEST_CASE("moving average shrinks its window at the ends") {
  const std::vector<double> x = {1, 2, 3, 4, 10};
  const auto y = moving_average(x, 5);
  REQUIRE(y.size() == 5);
  CHECK(y[0] == doctest::Approx(2.0));        // (1+2+3)/3
  CHECK(y[1] == doctest::Approx(2.5));        // (1+2+3+4)/4
  CHECK(y[2] == doctest::Approx(4.0));        // 20/5
  CHECK(y[3] == doctest::Approx(19.0 / 4.0));
  CHECK(y[4] == doctest::Approx(17.0 / 3.0));
}

TEST_CASE("extrema of a rectified sine") {
  for (int p : {10, 16, 20, 30}) {
    CAPTURE(p);
    const auto w = abs_sine(8 * p + 1, p);
    const auto ex = find_extrema(w);
    for (std::size_t i = 1; i < ex.size(); ++i) CHECK(ex[i].peak != ex[i - 1].peak);
    int peaks = 0;
    for (const auto& e : ex) {
      if (e.peak) {
        ++peaks;
        CHECK((e.frame - p / 2) % p == 0);
      } else {
        CHECK(e.frame % p == 0);
      }
    }
    CHECK(peaks == 8);
  }
}

TEST_CASE("small ripples below the prominence floor are ignored") {
  const int p = 20;
  auto w = abs_sine(8 * p + 1, p);
  const auto clean = find_extrema(w);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += 0.02 * std::sin(2 * kPi * i / 3.0);
  const auto noisy = find_extrema(w);
  REQUIRE(noisy.size() == clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK(noisy[i].peak == clean[i].peak);
    CHECK(std::abs(noisy[i].frame - clean[i].frame) <= 1);
  }
}

TEST_CASE("plateaus resolve to their middle") {
  const std::vector<double> w = {0, 1, 2, 2, 2, 2, 2, 1, 0, 0, 0, 1, 2};
  const auto ex = find_extrema(w);
  bool found = false;
  for (const auto& e : ex)
    if (e.peak) {
      CHECK(e.frame == 4);
      found = true;
      break;
    }
  CHECK(found);
}

TEST_CASE("event detection") {
  SUBCASE("labels cycle from the first peak") {
    const auto w = abs_sine(81, 20);
    const auto kf = detect_events(w, 30.0);
    REQUIRE(kf.size() >= 4);
    CHECK(kf[0].frame == 10);
    const GaitEvent order[4] = {GaitEvent::initial_contact, GaitEvent::mid_stance,
                                GaitEvent::opposite_initial_contact, GaitEvent::feet_adjacent};
    for (std::size_t i = 0; i < kf.size(); ++i) CHECK(kf[i].event == order[i % 4]);
  }
  SUBCASE("a flat wave has no events") {
    CHECK_THROWS_AS(detect_events(std::vector<double>(100, 0.4), 30.0), GaitError);
  }
}

TEST_CASE("gait values between keyframes") {
  const std::vector<Keyframe> kf = {{0, GaitEvent::initial_contact},
                                    {10, GaitEvent::mid_stance},
                                    {20, GaitEvent::opposite_initial_contact},
                                    {30, GaitEvent::feet_adjacent}};
  SUBCASE("four keyframes") {
    const auto a = assign_gait_values(kf, 40);
    REQUIRE(a.value.size() == 40);
    CHECK(a.value[0] == 0.0);
    CHECK(a.value[10] == 0.3);
    CHECK(a.value[20] == 0.5);
    CHECK(a.value[30] == 0.75);
    CHECK(a.value[5] == doctest::Approx(0.15));
    CHECK(a.value[25] == doctest::Approx(0.625));
    CHECK(a.value[35] == doctest::Approx(0.875));  // slope of the last segment
  }
  SUBCASE("closing initial contact runs the segment to 1") {
    auto closed = kf;
    closed.push_back({40, GaitEvent::initial_contact});
    const auto a = assign_gait_values(closed, 41);
    CHECK(a.value[35] == doctest::Approx(0.875));
    CHECK(a.value[39] == doctest::Approx(0.975));
    CHECK(a.value[40] == 0.0);
  }
  SUBCASE("leading frames clamp at zero") {
    std::vector<Keyframe> late;
    for (const auto& k : kf) late.push_back({k.frame + 10, k.event});
    const auto a = assign_gait_values(late, 45);
    for (int i = 0; i <= 10; ++i) CHECK(a.value[i] == 0.0);
    for (double v : a.value) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
  }
  SUBCASE("bad keyframes") {
    auto swapped = kf;
    std::swap(swapped[1].frame, swapped[2].frame);
    CHECK_THROWS_AS(assign_gait_values(swapped, 40), GaitError);
    auto skipped = kf;
    skipped.erase(skipped.begin() + 1);
    CHECK_THROWS_AS(assign_gait_values(skipped, 40), GaitError);
  }
}

TEST_CASE("cyclic distance") {
  CHECK(cyclic_distance(0.1, 0.3) == doctest::Approx(0.2));
  CHECK(cyclic_distance(0.95, 0.05) == doctest::Approx(0.1));
  CHECK(cyclic_distance(0.0, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("frame matching") {
  const int n = 40;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = i / double(n);
  GaitAnnotation ga;
  ga.value = v;
  const MotionSequence s = angle_track(v);

  SUBCASE("identity") {
    const auto m = match_frames(s, ga, s, ga);
    REQUIRE(m.pairs.size() == n);
    CHECK(m.unpaired.empty());
    for (int i = 0; i < n; ++i) CHECK(m.pairs[i] == std::pair<int, int>{i, i});
  }
  SUBCASE("half-cycle shift") {
    std::vector<double> shifted(n);
    for (int j = 0; j < n; ++j) shifted[j] = v[(j + n / 2) % n];
    GaitAnnotation gb;
    gb.value = shifted;
    const auto m = match_frames(s, ga, angle_track(shifted), gb);
    REQUIRE(m.pairs.size() == n);
    for (int i = 0; i < n; ++i) CHECK(m.pairs[i].second == (i + n / 2) % n);
  }
  SUBCASE("disjoint grids at zero tolerance") {
    std::vector<double> off(n);
    for (int j = 0; j < n; ++j) off[j] = v[j] + 0.5 / n;
    GaitAnnotation gb;
    gb.value = off;
    const auto m = match_frames(s, ga, angle_track(off), gb, 0.0);
    CHECK(m.pairs.empty());
    CHECK(m.unpaired.size() == n);
  }
  SUBCASE("angle distance over shared columns") {
    MotionSequence b = s;
    b.angle_names = {"right_knee", "neck"};
    for (auto& f : b.frames) f.angles = {f.angles[1] + 0.5, 7.0};
    CHECK(joint_angle_distance(s, 3, b, 3) == doctest::Approx(0.5));
  }
}

TEST_CASE("yaw augmentation") {
  MotionFrame f;
  f.joints = {{1.0, 0.9, 2.0}, {1.3, 0.1, 2.1}, {0.8, 0.1, 1.7}, {1.1, 1.6, 2.05}};
  f.angles = {0.2, -0.4};
  f.root_yaw = 0.3;

  const MotionFrame same = rotate_frame(f, 0.0);
  for (std::size_t i = 0; i < f.joints.size(); ++i) {
    CHECK(same.joints[i].x == doctest::Approx(f.joints[i].x));
    CHECK(same.joints[i].z == doctest::Approx(f.joints[i].z));
  }
  const MotionFrame half = rotate_frame(f, kPi);
  for (std::size_t i = 0; i < f.joints.size(); ++i) {
    CHECK(half.joints[i].x - 1.0 == doctest::Approx(-(f.joints[i].x - 1.0)));
    CHECK(half.joints[i].y == f.joints[i].y);
    CHECK(half.joints[i].z - 2.0 == doctest::Approx(-(f.joints[i].z - 2.0)));
  }
  CHECK(half.root_yaw == doctest::Approx(0.3 + kPi));
  CHECK(half.angles == f.angles);

  for (int k = 0; k < 100; ++k) {
    const double a = -kPi + 2 * kPi * k / 100.0;
    const auto [ra, rb] = augment_pair(f, half, a);
    CHECK(distance(ra.joints[1], ra.joints[2]) ==
          doctest::Approx(distance(f.joints[1], f.joints[2])).epsilon(1e-12));
    for (std::size_t i = 0; i < f.joints.size(); ++i)
      for (std::size_t j = i + 1; j < f.joints.size(); ++j)
        CHECK(std::abs(distance(rb.joints[i], rb.joints[j]) -
                       distance(half.joints[i], half.joints[j])) < 1e-9);
    CHECK(ra.root_yaw - f.root_yaw == doctest::Approx(rb.root_yaw - half.root_yaw));
  }
}

TEST_CASE("motion files round-trip") {
  std::vector<GaitSample> samples;
  for (int i = 0; i < 50; ++i) samples.push_back({0.04 * i, 1.0 / 3.0, 0.1, std::fmod(i / 37.0, 1.0)});
  const MotionSequence s = synthesize_motion(samples, 30.0, "hurried");
  const MotionSequence back = parse_motion(format_motion(s));
  CHECK(back == s);
  CHECK(back.joint_index("right_ankle") == 2);
  CHECK(back.angle_index("nope") == -1);
  CHECK_THROWS_AS(parse_motion("frame\troot_yaw\n0\tx\n"), GaitError);
}

TEST_CASE("synthesized walking annotates back to its phase") {
  std::vector<GaitSample> samples;
  const int per_cycle = 60;
  for (int i = 0; i < 4 * per_cycle + 10; ++i) {
    const double phase = std::fmod(i / double(per_cycle), 1.0);
    samples.push_back({0.02 * i, 0.0, 0.0, phase});
  }
  const MotionSequence s = synthesize_motion(samples, 30.0, "neutral");
  const GaitAnnotation a = annotate(s);
  REQUIRE(a.keyframes.size() >= 8);
  for (const Keyframe& k : a.keyframes) {
    // Events sit at phases 0, 0.25, 0.5, 0.75.
    const double want = std::fmod(k.frame / double(per_cycle), 1.0);
    const int e = static_cast<int>(k.event);
    CHECK(cyclic_distance(want, 0.25 * e) <= 1.0 / per_cycle + 1e-9);
    CHECK(a.value[k.frame] == gait_event_value(k.event));
  }
}
