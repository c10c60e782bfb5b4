// Copyright 2026 The evacsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace evac {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
constexpr double norm_sq(Vec2 v) { return dot(v, v); }
constexpr Vec2 perp_left(Vec2 v) { return {-v.y, v.x}; }

// Zero vector stays zero.
inline Vec2 normalized(Vec2 v) {
  const double n = norm(v);
  return n > 0.0 ? v / n : Vec2{};
}

inline bool is_finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

struct Segment {
  Vec2 a;
  Vec2 b;
  bool operator==(const Segment&) const = default;
};

struct Rect {
  Vec2 min;
  Vec2 max;
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double area() const { return width() * height(); }
  bool contains(Vec2 p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
  }
  bool operator==(const Rect&) const = default;
};

using Polygon = std::vector<Vec2>;

inline Vec2 closest_point_on_segment(Vec2 p, const Segment& s) {
  const Vec2 ab = s.b - s.a;
  const double len2 = norm_sq(ab);
  if (len2 == 0.0) return s.a;
  const double t = std::clamp(dot(p - s.a, ab) / len2, 0.0, 1.0);
  return s.a + ab * t;
}

inline double distance_to_segment(Vec2 p, const Segment& s) {
  return norm(p - closest_point_on_segment(p, s));
}

inline bool segments_intersect(const Segment& s, const Segment& t) {
  auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_seg = [](Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(s.a, s.b, t.a);
  const int o2 = orient(s.a, s.b, t.b);
  const int o3 = orient(t.a, t.b, s.a);
  const int o4 = orient(t.a, t.b, s.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_seg(s.a, s.b, t.a)) return true;
  if (o2 == 0 && on_seg(s.a, s.b, t.b)) return true;
  if (o3 == 0 && on_seg(t.a, t.b, s.a)) return true;
  if (o4 == 0 && on_seg(t.a, t.b, s.b)) return true;
  return false;
}

inline double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({distance_to_segment(s.a, t), distance_to_segment(s.b, t),
                   distance_to_segment(t.a, s), distance_to_segment(t.b, s)});
}

// Distance from an axis-aligned box to a segment; zero when they touch.
inline double rect_segment_distance(const Rect& r, const Segment& s) {
  if (r.contains(s.a) || r.contains(s.b)) return 0.0;
  const Vec2 c0 = r.min, c1{r.max.x, r.min.y}, c2 = r.max, c3{r.min.x, r.max.y};
  const Segment edges[4] = {{c0, c1}, {c1, c2}, {c2, c3}, {c3, c0}};
  double d = segment_segment_distance(edges[0], s);
  for (int i = 1; i < 4; ++i) d = std::min(d, segment_segment_distance(edges[i], s));
  return d;
}

// Even-odd rule; points on the boundary may land either side.
inline bool point_in_polygon(Vec2 p, const Polygon& poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

inline double polygon_area(const Polygon& poly) {
  double s = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    s += cross(poly[j], poly[i]);
  return std::abs(s) * 0.5;
}

inline Rect polygon_bounds(const Polygon& poly) {
  Rect r{poly.front(), poly.front()};
  for (const Vec2& p : poly) {
    r.min.x = std::min(r.min.x, p.x);
    r.min.y = std::min(r.min.y, p.y);
    r.max.x = std::max(r.max.x, p.x);
    r.max.y = std::max(r.max.y, p.y);
  }
  return r;
}

inline Polygon rect_polygon(Vec2 lo, Vec2 hi) {
  return {lo, {hi.x, lo.y}, hi, {lo.x, hi.y}};
}

// Distance from p to the polygon boundary.
inline double distance_to_polygon_boundary(Vec2 p, const Polygon& poly) {
  double d = INFINITY;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    d = std::min(d, distance_to_segment(p, {poly[j], poly[i]}));
  return d;
}

inline bool rect_intersects_polygon(const Rect& r, const Polygon& poly) {
  for (const Vec2& v : poly)
    if (r.contains(v)) return true;
  const Vec2 corners[4] = {r.min, {r.max.x, r.min.y}, r.max, {r.min.x, r.max.y}};
  for (const Vec2& c : corners)
    if (point_in_polygon(c, poly)) return true;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    if (rect_segment_distance(r, {poly[j], poly[i]}) == 0.0) return true;
  return false;
}

}  // namespace evac
