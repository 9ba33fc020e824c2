#include "dipplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>

#include "dipplan/error.hpp"

namespace dipplan {

namespace bg = boost::geometry;
using json = nlohmann::json;

namespace {

// Points per full circle used when approximating the rounded corners.
constexpr int kArcPoints = 16;
// Extra outward margin on the polygonal outline.
constexpr double kOutlineMargin = 1e-3;

double require_number(const json& doc, const std::string& key, const std::string& ptr) {
  if (!doc.contains(key)) throw InputError("missing field '" + key + "'", ptr + "/" + key);
  const json& v = doc.at(key);
  if (!v.is_number()) throw InputError("field '" + key + "' must be a number", ptr + "/" + key);
  return v.get<double>();
}

Ring clean_ring(Ring ring, const std::string& id, std::vector<std::string>& warnings) {
  Ring out;
  for (const Vec2& p : ring) {
    if (!out.empty() && dist(out.back(), p) < 1e-9) {
      warnings.push_back("ring " + id + ": collapsed duplicate consecutive vertex");
      continue;
    }
    out.push_back(p);
  }
  while (out.size() > 1 && dist(out.front(), out.back()) < 1e-9) out.pop_back();
  return out;
}

void build_facades(Scene& scene, double d_min) {
  scene.facades.clear();
  for (std::size_t b = 0; b < scene.buildings.size(); ++b) {
    Building& bld = scene.buildings[b];
    bld.first_facade = static_cast<int>(scene.facades.size());
    const double height = bld.height_override.value_or(scene.safe_altitude - d_min);
    const std::size_t n = bld.ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      Facade f;
      f.id = static_cast<int>(scene.facades.size());
      f.building = static_cast<int>(b);
      f.a = bld.ring[i];
      f.b = bld.ring[(i + 1) % n];
      f.length = dist(f.a, f.b);
      const Vec2 d = (f.b - f.a) / f.length;
      f.normal = {d.y, -d.x};
      f.height = height;
      scene.facades.push_back(f);
    }
  }
}

void validate_and_finish(Scene& scene, double d_min, const std::vector<std::string>& ptrs) {
  if (!(scene.safe_altitude > 0.0)) throw InputError("safe_altitude must be > 0", "/safe_altitude");
  if (!(scene.min_flight_altitude > 0.0) || !(scene.min_flight_altitude < scene.safe_altitude))
    throw InputError("min_flight_altitude must be in (0, safe_altitude)", "/min_flight_altitude");
  for (std::size_t b = 0; b < scene.buildings.size(); ++b) {
    Building& bld = scene.buildings[b];
    const std::string& ptr = ptrs[b];
    if (bld.ring.size() < 3)
      throw InputError("ring " + bld.id + " needs at least 3 distinct vertices", ptr);
    if (find_self_intersection(bld.ring))
      throw InputError("ring " + bld.id + " is self-intersecting", ptr);
    const double a2 = signed_area2(bld.ring);
    if (std::abs(a2) < 1e-9) throw InputError("ring " + bld.id + " has zero area", ptr);
    if (a2 < 0) std::reverse(bld.ring.begin(), bld.ring.end());
    if (bld.height_override) {
      const double h = *bld.height_override;
      if (!(h > 0.0) || h > scene.safe_altitude - d_min + 1e-9)
        throw InputError("height of " + bld.id + " must be in (0, safe_altitude - d_min]",
                         "/heights/" + bld.id);
    }
  }
  for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.buildings.size(); ++j) {
      const Ring& ri = scene.buildings[i].ring;
      const Ring& rj = scene.buildings[j].ring;
      bool overlap = strictly_inside(ri[0], rj) || strictly_inside(rj[0], ri);
      for (std::size_t a = 0; a < ri.size() && !overlap; ++a)
        for (std::size_t c = 0; c < rj.size() && !overlap; ++c)
          overlap = segments_intersect(ri[a], ri[(a + 1) % ri.size()], rj[c],
                                       rj[(c + 1) % rj.size()]);
      if (overlap)
        throw InputError("rings " + scene.buildings[i].id + " and " + scene.buildings[j].id +
                             " overlap",
                         ptrs[j]);
    }
  }
  build_facades(scene, d_min);
}

}  // namespace

std::optional<int> Scene::building_containing(Vec2 p) const {
  for (std::size_t b = 0; b < buildings.size(); ++b)
    if (strictly_inside(p, buildings[b].ring)) return static_cast<int>(b);
  return std::nullopt;
}

bool Scene::adjacent(int fa, int fb) const {
  const Facade& a = facades[fa];
  const Facade& b = facades[fb];
  if (a.building != b.building || fa == fb) return false;
  return a.a == b.b || a.b == b.a || a.a == b.a || a.b == b.b;
}

Scene parse_scene(const json& doc, double d_min) {
  if (!doc.is_object()) throw InputError("scene document must be a JSON object", "");
  if (!doc.contains("unit") || !doc["unit"].is_string() || doc["unit"].get<std::string>() != "m")
    throw InputError("scene unit must be \"m\"", "/unit");
  Scene scene;
  scene.safe_altitude = require_number(doc, "safe_altitude", "");
  scene.min_flight_altitude = require_number(doc, "min_flight_altitude", "");
  if (!(scene.safe_altitude > 0.0)) throw InputError("safe_altitude must be > 0", "/safe_altitude");
  if (!doc.contains("buildings") || !doc["buildings"].is_array())
    throw InputError("missing array 'buildings'", "/buildings");

  std::vector<std::string> ptrs;
  const json& blds = doc["buildings"];
  for (std::size_t i = 0; i < blds.size(); ++i) {
    const std::string ptr = "/buildings/" + std::to_string(i);
    const json& b = blds[i];
    if (!b.is_object()) throw InputError("building must be an object", ptr);
    if (!b.contains("id") || !b["id"].is_string())
      throw InputError("building id must be a string", ptr + "/id");
    Building bld;
    bld.id = b["id"].get<std::string>();
    if (!b.contains("ring") || !b["ring"].is_array())
      throw InputError("ring " + bld.id + " must be an array of [x,y]", ptr + "/ring");
    Ring ring;
    for (std::size_t k = 0; k < b["ring"].size(); ++k) {
      const json& v = b["ring"][k];
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw InputError("ring " + bld.id + " vertex must be [x,y]",
                         ptr + "/ring/" + std::to_string(k));
      ring.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    bld.ring = clean_ring(std::move(ring), bld.id, scene.warnings);
    scene.buildings.push_back(std::move(bld));
    ptrs.push_back(ptr + "/ring");
  }
  if (doc.contains("heights")) {
    const json& h = doc["heights"];
    if (!h.is_object()) throw InputError("heights must be an object", "/heights");
    for (auto it = h.begin(); it != h.end(); ++it) {
      auto found = std::find_if(scene.buildings.begin(), scene.buildings.end(),
                                [&](const Building& b) { return b.id == it.key(); });
      if (found == scene.buildings.end())
        throw InputError("height given for unknown building " + it.key(), "/heights/" + it.key());
      if (!it.value().is_number())
        throw InputError("height must be a number", "/heights/" + it.key());
      found->height_override = it.value().get<double>();
    }
  }
  validate_and_finish(scene, d_min, ptrs);

  if (doc.contains("bounds")) {
    const json& bb = doc["bounds"];
    if (!bb.is_array() || bb.size() != 2 || !bb[0].is_array() || !bb[1].is_array() ||
        bb[0].size() != 2 || bb[1].size() != 2)
      throw InputError("bounds must be [[xmin,ymin],[xmax,ymax]]", "/bounds");
    scene.bounds = {{bb[0][0].get<double>(), bb[0][1].get<double>()},
                    {bb[1][0].get<double>(), bb[1][1].get<double>()}};
    if (!(scene.bounds.width() > 0 && scene.bounds.height() > 0))
      throw InputError("bounds must have positive extent", "/bounds");
  } else if (scene.buildings.empty()) {
    throw InputError("a scene without buildings must declare bounds", "/bounds");
  } else {
    std::vector<Vec2> all;
    for (const Building& b : scene.buildings) all.insert(all.end(), b.ring.begin(), b.ring.end());
    scene.bounds = bounding_box(all).expanded(d_min);
  }
  return scene;
}

Scene parse_scene(std::string_view text, double d_min) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("scene is not valid JSON: ") + e.what(), "");
  }
  return parse_scene(doc, d_min);
}

Scene make_scene(const std::vector<std::pair<std::string, Ring>>& rings, double safe_altitude,
                 double min_flight_altitude, double d_min, std::optional<Box2> bounds) {
  json doc = {{"unit", "m"},
              {"safe_altitude", safe_altitude},
              {"min_flight_altitude", min_flight_altitude},
              {"buildings", json::array()}};
  for (const auto& [id, ring] : rings) {
    json r = json::array();
    for (const Vec2& p : ring) r.push_back({p.x, p.y});
    doc["buildings"].push_back({{"id", id}, {"ring", r}});
  }
  if (bounds)
    doc["bounds"] = {{bounds->lo.x, bounds->lo.y}, {bounds->hi.x, bounds->hi.y}};
  return parse_scene(doc, d_min);
}

json scene_to_json(const Scene& scene) {
  json doc = {{"unit", "m"},
              {"safe_altitude", scene.safe_altitude},
              {"min_flight_altitude", scene.min_flight_altitude},
              {"bounds",
               {{scene.bounds.lo.x, scene.bounds.lo.y}, {scene.bounds.hi.x, scene.bounds.hi.y}}},
              {"buildings", json::array()}};
  json heights = json::object();
  for (const Building& b : scene.buildings) {
    json r = json::array();
    for (const Vec2& p : b.ring) r.push_back({p.x, p.y});
    doc["buildings"].push_back({{"id", b.id}, {"ring", r}});
    if (b.height_override) heights[b.id] = *b.height_override;
  }
  if (!heights.empty()) doc["heights"] = heights;
  return doc;
}

// ---------------------------------------------------------------------------
// No-dipping zone

NoDippingZone::NoDippingZone(const Scene& scene, double radius) : radius_(radius) {
  for (const Building& b : scene.buildings) {
    rings_.push_back(b.ring);
    boxes_.push_back(bounding_box(b.ring));
    const int f = b.first_facade;
    const double h = scene.facades.empty() ? 0.0 : scene.facades[f].height;
    tops_.push_back(h + radius);
  }
  build_outline();
}

NoDippingZone NoDippingZone::blocking_at(double z) const {
  NoDippingZone out;
  out.radius_ = radius_;
  for (std::size_t b = 0; b < rings_.size(); ++b) {
    if (!(z < tops_[b] - 1e-9)) continue;
    out.rings_.push_back(rings_[b]);
    out.boxes_.push_back(boxes_[b]);
    out.tops_.push_back(tops_[b]);
  }
  out.build_outline();
  return out;
}

void NoDippingZone::build_outline() {
  const double radius = radius_;
  if (rings_.empty() || radius <= 0.0) return;

  using point_t = bg::model::d2::point_xy<double>;
  using polygon_t = bg::model::polygon<point_t>;
  using multi_t = bg::model::multi_polygon<polygon_t>;

  multi_t input;
  for (const Ring& ring : rings_) {
    polygon_t poly;
    // Boost's default polygon is clockwise and closed.
    for (auto it = ring.rbegin(); it != ring.rend(); ++it)
      poly.outer().push_back(point_t(it->x, it->y));
    poly.outer().push_back(poly.outer().front());
    bg::correct(poly);
    input.push_back(std::move(poly));
  }
  // Circumscribe the arc polygon so chords stay outside the true offset curve.
  const double grown = (radius + kOutlineMargin) / std::cos(kPi / kArcPoints);
  bg::strategy::buffer::distance_symmetric<double> distance(grown);
  bg::strategy::buffer::join_round join(kArcPoints);
  bg::strategy::buffer::end_round end(kArcPoints);
  bg::strategy::buffer::point_circle circle(kArcPoints);
  bg::strategy::buffer::side_straight side;
  multi_t out;
  bg::buffer(input, out, distance, side, join, end, circle);

  auto to_ring = [](const auto& bring) {
    Ring r;
    for (const auto& p : bring) r.push_back({p.x(), p.y()});
    if (r.size() > 1 && r.front() == r.back()) r.pop_back();
    if (signed_area2(r) < 0) std::reverse(r.begin(), r.end());
    return r;
  };
  for (const polygon_t& poly : out) {
    Polygon p;
    p.outer = to_ring(poly.outer());
    for (const auto& inner : poly.inners()) p.holes.push_back(to_ring(inner));
    polygons_.push_back(std::move(p));
  }
  std::sort(polygons_.begin(), polygons_.end(), [](const Polygon& a, const Polygon& b) {
    const Box2 ba = bounding_box(a.outer), bb = bounding_box(b.outer);
    return std::pair(ba.lo.y, ba.lo.x) < std::pair(bb.lo.y, bb.lo.x);
  });
}

double NoDippingZone::clearance(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Ring& r : rings_) best = std::min(best, point_polygon_distance(p, r));
  return best;
}

bool NoDippingZone::contains(Vec2 p) const {
  for (std::size_t b = 0; b < rings_.size(); ++b) {
    const Box2 box = boxes_[b].expanded(radius_);
    if (!box.contains(p)) continue;
    if (point_polygon_distance(p, rings_[b]) < radius_ - 1e-9) return true;
  }
  return false;
}

bool NoDippingZone::contains(Vec3 p) const {
  for (std::size_t b = 0; b < rings_.size(); ++b) {
    if (!(p.z < tops_[b] - 1e-9)) continue;
    if (!boxes_[b].expanded(radius_).contains(p.xy())) continue;
    if (point_polygon_distance(p.xy(), rings_[b]) < radius_ - 1e-9) return true;
  }
  return false;
}

bool NoDippingZone::segment_clear(Vec3 a, Vec3 b) const {
  for (std::size_t k = 0; k < rings_.size(); ++k) {
    // Parameter range where the segment is below the prism top.
    const double top = tops_[k] - 1e-9;
    double t0 = 0.0, t1 = 1.0;
    const double dz = b.z - a.z;
    if (std::abs(dz) < 1e-12) {
      if (!(a.z < top)) continue;
    } else {
      const double tc = (top - a.z) / dz;
      if (dz > 0)
        t1 = std::min(t1, tc);
      else
        t0 = std::max(t0, tc);
      if (!(t1 > t0)) continue;
    }
    const Vec2 pa = a.xy() + (b.xy() - a.xy()) * t0;
    const Vec2 pb = a.xy() + (b.xy() - a.xy()) * t1;
    const Box2 box = boxes_[k].expanded(radius_);
    const Box2 sbox = bounding_box(std::vector<Vec2>{pa, pb});
    if (sbox.hi.x < box.lo.x || sbox.lo.x > box.hi.x || sbox.hi.y < box.lo.y ||
        sbox.lo.y > box.hi.y)
      continue;
    if (segment_polygon_distance(pa, pb, rings_[k]) < radius_ - 1e-9) return false;
  }
  return true;
}

bool NoDippingZone::segment_clear_at(Vec2 a, Vec2 b, double z) const {
  return segment_clear({a.x, a.y, z}, {b.x, b.y, z});
}

NoDippingZone compute_no_dipping_zone(const Scene& scene, double d_min) {
  return NoDippingZone(scene, d_min);
}

// ---------------------------------------------------------------------------
// Grids, extrusion, surface samples

std::vector<Vec2> grid_points(const Box2& box, double step) {
  if (!(step > 0.0)) throw InputError("grid step must be > 0");
  std::vector<Vec2> pts;
  const int nx = static_cast<int>(std::floor(box.width() / step + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor(box.height() / step + 1e-9)) + 1;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) pts.push_back({box.lo.x + i * step, box.lo.y + j * step});
  return pts;
}

CandidateGrid grid_sample_candidates(const Scene& scene, const NoDippingZone& zone, double step,
                                     double expand) {
  if (!(step > 0.0)) throw InputError("candidate grid step must be > 0");
  CandidateGrid grid;
  grid.step = step;
  grid.extent = scene.bounds.expanded(expand);
  if (step > grid.extent.width() || step > grid.extent.height()) {
    grid.warnings.push_back("candidate step exceeds the expanded bounds; no candidates");
    return grid;
  }
  for (const Vec2& p : grid_points(grid.extent, step))
    if (!zone.contains(p)) grid.points.push_back(p);
  return grid;
}

Mesh25D extrude_25d(const Scene& scene, double default_height) {
  Mesh25D mesh;
  mesh.ground = scene.bounds;
  for (std::size_t b = 0; b < scene.buildings.size(); ++b) {
    const Building& bld = scene.buildings[b];
    Prism p;
    p.building = static_cast<int>(b);
    p.ring = bld.ring;
    p.height = bld.height_override.value_or(default_height);
    p.first_facade = bld.first_facade;
    p.box = bounding_box(p.ring);
    mesh.prisms.push_back(std::move(p));
  }
  return mesh;
}

std::string surface_name(SurfaceRef r) {
  switch (r.kind) {
    case SurfaceKind::Facade:
      return "facade:" + std::to_string(r.index);
    case SurfaceKind::Roof:
      return "roof:" + std::to_string(r.index);
    case SurfaceKind::Ground:
      break;
  }
  return "ground";
}

namespace {

int divisions(double length, double spacing) {
  return std::max(1, static_cast<int>(std::ceil(length / spacing - 1e-9)));
}

}  // namespace

SurfaceSamples sample_surface(const Mesh25D& mesh, double spacing) {
  if (!(spacing > 0.0)) throw InputError("surface spacing must be > 0");
  SurfaceSamples out;
  out.spacing = spacing;
  for (const Prism& prism : mesh.prisms) {
    const std::size_t n = prism.ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = prism.ring[i], b = prism.ring[(i + 1) % n];
      const double len = dist(a, b);
      const Vec2 d = (b - a) / len;
      const Vec3 normal{d.y, -d.x, 0.0};
      const int nu = divisions(len, spacing), nv = divisions(prism.height, spacing);
      const SurfaceRef owner{SurfaceKind::Facade, prism.first_facade + static_cast<int>(i)};
      for (int v = 0; v <= nv; ++v) {
        for (int u = 0; u <= nu; ++u) {
          const Vec2 p = a + (b - a) * (static_cast<double>(u) / nu);
          out.points.push_back({{p.x, p.y, prism.height * v / nv}, normal, owner});
        }
      }
    }
    const SurfaceRef roof{SurfaceKind::Roof, prism.building};
    const std::size_t before = out.points.size();
    for (const Vec2& p : grid_points(prism.box, spacing))
      if (locate_point(p, prism.ring) != Containment::Outside)
        out.points.push_back({{p.x, p.y, prism.height}, {0, 0, 1}, roof});
    if (out.points.size() == before) {
      Vec2 c;
      for (const Vec2& p : prism.ring) c = c + p;
      c = c / static_cast<double>(n);
      out.points.push_back({{c.x, c.y, prism.height}, {0, 0, 1}, roof});
    }
  }
  for (const Vec2& p : grid_points(mesh.ground, spacing)) {
    bool covered = false;
    for (const Prism& prism : mesh.prisms)
      if (prism.box.contains(p) && locate_point(p, prism.ring) != Containment::Outside) {
        covered = true;
        break;
      }
    if (!covered) out.points.push_back({{p.x, p.y, 0.0}, {0, 0, 1}, {SurfaceKind::Ground, 0}});
  }
  return out;
}

}  // namespace dipplan
