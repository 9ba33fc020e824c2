#pragma once

#include <algorithm>
#include <cmath>

#include "dipplan/geometry.hpp"

namespace dipplan {

/// Pinhole camera. Lengths on the sensor are in millimetres.
struct CameraModel {
  double focal_mm = 12.67;
  double sensor_w_mm = 17.73;
  double sensor_h_mm = 13.30;
  int image_w_px = 5280;
  int image_h_px = 3956;
  double d_max_m = 150.0;
  double gsd_cm = 4.0;

  double hfov() const { return 2.0 * std::atan(sensor_w_mm / (2.0 * focal_mm)); }
  double vfov() const { return 2.0 * std::atan(sensor_h_mm / (2.0 * focal_mm)); }
  double pixel_pitch_mm() const { return sensor_w_mm / image_w_px; }
  /// Distance at which one pixel spans `gsd_cm` on a fronto-parallel surface.
  double gsd_distance_m() const { return gsd_cm / 100.0 * focal_mm / pixel_pitch_mm(); }
  /// Maximum useful viewing distance: the configured bound, limited by the GSD target.
  double max_view_distance() const { return std::min(d_max_m, gsd_distance_m()); }
  /// Projected sensor extent (width, height) in metres at distance `d`.
  double footprint_w(double d) const { return sensor_w_mm * d / focal_mm; }
  double footprint_h(double d) const { return sensor_h_mm * d / focal_mm; }
  bool valid() const {
    return focal_mm > 0 && sensor_w_mm > 0 && sensor_h_mm > 0 && image_w_px > 0 &&
           image_h_px > 0 && d_max_m > 0 && gsd_cm > 0;
  }
};

/// A camera pose. Yaw is clockwise from +y (north), pitch is negative downward.
struct View3D {
  Vec3 position;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;

  Vec3 forward() const {
    const double y = deg2rad(yaw_deg), p = deg2rad(pitch_deg);
    if (pitch_deg <= -90.0) return {0.0, 0.0, -1.0};
    return {std::sin(y) * std::cos(p), std::cos(y) * std::cos(p), std::sin(p)};
  }
  Vec3 right() const {
    const double y = deg2rad(yaw_deg);
    return {std::cos(y), -std::sin(y), 0.0};
  }
  Vec3 up() const { return cross(right(), forward()); }
  bool is_nadir() const { return pitch_deg <= -90.0 + 1e-9; }
};

/// Yaw (degrees in [0,360)) of a horizontal direction.
inline double yaw_of(Vec2 dir) {
  double y = rad2deg(std::atan2(dir.x, dir.y));
  if (y < 0) y += 360.0;
  if (y >= 360.0) y -= 360.0;
  return y + 0.0;
}

inline Vec2 direction_of_yaw(double yaw_deg) {
  const double y = deg2rad(yaw_deg);
  return {std::sin(y), std::cos(y)};
}

/// Is `p` inside the view frustum (ignoring occlusion and range)?
inline bool in_frustum(const View3D& v, const CameraModel& cam, Vec3 p) {
  const Vec3 rel = p - v.position;
  const double depth = dot(rel, v.forward());
  if (depth <= 0.0) return false;
  const double tx = cam.sensor_w_mm / (2.0 * cam.focal_mm);
  const double ty = cam.sensor_h_mm / (2.0 * cam.focal_mm);
  return std::abs(dot(rel, v.right())) <= tx * depth + 1e-9 &&
         std::abs(dot(rel, v.up())) <= ty * depth + 1e-9;
}

}  // namespace dipplan
