#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dipplan/geometry.hpp"

namespace dipplan {

struct Facade {
  int id = 0;
  int building = 0;
  Vec2 a;
  Vec2 b;
  Vec2 normal;  ///< outward, unit length
  double length = 0.0;
  double height = 0.0;

  Vec2 at(double t) const { return a + (b - a) * t; }
  Vec2 midpoint() const { return at(0.5); }
  Vec2 tangent() const { return (b - a) / length; }
  /// Signed distance of `p` from the facade line, positive on the outward side.
  double offset(Vec2 p) const { return dot(p - a, normal); }
};

struct Building {
  std::string id;
  Ring ring;  ///< counterclockwise, no repeated closing vertex
  std::optional<double> height_override;
  int first_facade = 0;
};

struct Scene {
  std::vector<Building> buildings;
  std::vector<Facade> facades;
  double safe_altitude = 0.0;
  double min_flight_altitude = 0.0;
  Box2 bounds;
  std::vector<std::string> warnings;

  bool empty() const { return buildings.empty(); }
  /// Index of the building whose interior contains `p`, if any.
  std::optional<int> building_containing(Vec2 p) const;
  /// Facades sharing a ring vertex.
  bool adjacent(int facade_a, int facade_b) const;
};

/// Parses the scene JSON document. Building heights default to
/// `safe_altitude - d_min`. Throws InputError.
Scene parse_scene(const nlohmann::json& doc, double d_min = 10.0);
Scene parse_scene(std::string_view text, double d_min = 10.0);

/// Builds a scene from rings directly (used by tests and fixtures).
Scene make_scene(const std::vector<std::pair<std::string, Ring>>& rings, double safe_altitude,
                 double min_flight_altitude, double d_min = 10.0,
                 std::optional<Box2> bounds = std::nullopt);

nlohmann::json scene_to_json(const Scene& scene);

/// Building outlines dilated by `radius`. Membership uses the exact distance
/// to the building edges; `polygons` is a conservative polygonal outline
/// (every boundary point lies at least `radius` from all buildings).
class NoDippingZone {
 public:
  struct Polygon {
    Ring outer;
    std::vector<Ring> holes;
  };

  NoDippingZone() = default;
  NoDippingZone(const Scene& scene, double radius);

  double radius() const { return radius_; }
  const std::vector<Polygon>& polygons() const { return polygons_; }

  /// Distance from `p` to the nearest building region.
  double clearance(Vec2 p) const;
  /// Strictly inside the zone: clearance < radius.
  bool contains(Vec2 p) const;
  /// Strictly inside a dilated prism: horizontally in the zone of a building
  /// and below that building's top + radius.
  bool contains(Vec3 p) const;
  /// Does the straight 3D segment stay out of every dilated prism?
  bool segment_clear(Vec3 a, Vec3 b) const;
  /// Does the horizontal segment at altitude `z` stay out of every dilated prism?
  bool segment_clear_at(Vec2 a, Vec2 b, double z) const;
  double top(int building) const { return tops_[building]; }
  std::size_t building_count() const { return rings_.size(); }
  /// The zone restricted to buildings whose dilated prism reaches above `z`.
  NoDippingZone blocking_at(double z) const;

 private:
  void build_outline();

  std::vector<Ring> rings_;
  std::vector<Box2> boxes_;
  std::vector<double> tops_;
  std::vector<Polygon> polygons_;
  double radius_ = 0.0;
};

NoDippingZone compute_no_dipping_zone(const Scene& scene, double d_min);

/// Row-major regular grid over `box` with spacing `step`, inclusive of the
/// low corner; rows run south to north.
std::vector<Vec2> grid_points(const Box2& box, double step);

struct CandidateGrid {
  std::vector<Vec2> points;
  double step = 0.0;
  Box2 extent;
  std::vector<std::string> warnings;
};

/// Grid over the scene bounds expanded by `expand`, minus points strictly
/// inside the zone. Throws InputError for step <= 0.
CandidateGrid grid_sample_candidates(const Scene& scene, const NoDippingZone& zone, double step,
                                     double expand);

struct Prism {
  int building = 0;
  Ring ring;
  double height = 0.0;
  int first_facade = 0;
  Box2 box;
};

struct Mesh25D {
  std::vector<Prism> prisms;
  Box2 ground;
};

/// One prism per building; overrides win over `default_height`.
Mesh25D extrude_25d(const Scene& scene, double default_height);

enum class SurfaceKind { Facade, Roof, Ground };

struct SurfaceRef {
  SurfaceKind kind = SurfaceKind::Ground;
  int index = 0;  ///< facade id, building index, or 0 for the ground
  bool operator==(const SurfaceRef&) const = default;
  auto operator<=>(const SurfaceRef&) const = default;
};

std::string surface_name(SurfaceRef r);

struct SurfaceSample {
  Vec3 position;
  Vec3 normal;
  SurfaceRef owner;
};

struct SurfaceSamples {
  std::vector<SurfaceSample> points;
  double spacing = 0.0;
};

SurfaceSamples sample_surface(const Mesh25D& mesh, double spacing);

}  // namespace dipplan
