#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace dipplan {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }
  bool operator==(const Vec2&) const = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 normalized(Vec2 a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec2{};
}
/// Counterclockwise rotation by `rad`.
inline Vec2 rotated(Vec2 a, double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}
/// Unsigned angle between two non-zero vectors, radians in [0, pi].
inline double angle_between(Vec2 a, Vec2 b) {
  return std::atan2(std::abs(cross(a, b)), dot(a, b));
}

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  bool operator==(const Vec3&) const = default;

  Vec2 xy() const { return {x, y}; }
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline double dist(Vec3 a, Vec3 b) { return norm(a - b); }
inline Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  return n > 0.0 ? a / n : Vec3{};
}
inline double angle_between(Vec3 a, Vec3 b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

struct Box2 {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  bool contains(Vec2 p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  Box2 expanded(double m) const { return {{lo.x - m, lo.y - m}, {hi.x + m, hi.y + m}}; }
};

using Ring = std::vector<Vec2>;

/// Twice the signed area; positive for counterclockwise rings.
double signed_area2(std::span<const Vec2> ring);

Box2 bounding_box(std::span<const Vec2> pts);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Closest parameter on [a,b] to p, clamped to [0,1].
double project_to_segment(Vec2 p, Vec2 a, Vec2 b);

/// Minimum distance between closed segments [a,b] and [c,d].
double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// True when closed segments share at least one point.
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Parameters t on [a,b] where it meets [c,d]. Collinear overlaps report both
/// overlap endpoints. Empty when disjoint.
std::vector<double> segment_hits(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

enum class Containment { Outside, Boundary, Inside };

Containment locate_point(Vec2 p, std::span<const Vec2> ring, double eps = 1e-9);

inline bool strictly_inside(Vec2 p, std::span<const Vec2> ring) {
  return locate_point(p, ring) == Containment::Inside;
}

/// Distance from p to the closed polygon region (0 when inside).
double point_polygon_distance(Vec2 p, std::span<const Vec2> ring);

/// Minimum distance from segment [a,b] to the closed polygon region.
double segment_polygon_distance(Vec2 a, Vec2 b, std::span<const Vec2> ring);

/// Does the open segment (a,b) pass through the open interior of the polygon?
bool segment_enters_interior(Vec2 a, Vec2 b, std::span<const Vec2> ring);

/// Index of the first pair of non-adjacent edges that intersect, if any.
std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(
    std::span<const Vec2> ring);

}  // namespace dipplan
