#include "dipplan/visibility.hpp"

#include <algorithm>
#include <cmath>

#include "dipplan/error.hpp"

namespace dipplan {

namespace {

/// Parameter on the facade line hit by the ray from `p` through `q`.
/// `h` is p's offset from the line, `s` is q's offset (0 <= s < h).
double project_through(Vec2 p, Vec2 q, double h, double s, const Facade& f) {
  const Vec2 hit = p + (q - p) * (h / (h - s));
  return dot(hit - f.a, f.tangent()) / f.length;
}

}  // namespace

IntervalSet visible_span(Vec2 p, const Scene& scene, const Facade& f, double d_max) {
  const double h = f.offset(p);
  if (!(h > 0.0) || h > d_max) return {};

  // Part of the facade line inside the d_max disk.
  const double foot = dot(p - f.a, f.tangent()) / f.length;
  const double half = std::sqrt(std::max(0.0, d_max * d_max - h * h)) / f.length;
  IntervalSet vis = IntervalSet::single(std::max(0.0, foot - half), std::min(1.0, foot + half));
  if (vis.empty()) return {};

  std::vector<Interval> shadows;
  const double top = h * (1.0 - 1e-12);
  for (const Facade& e : scene.facades) {
    if (e.id == f.id) continue;
    const double sc = f.offset(e.a), sd = f.offset(e.b);
    // Keep the occluder part strictly between the facade line and p's parallel.
    double u0 = 0.0, u1 = 1.0;
    const double ds = sd - sc;
    if (std::abs(ds) < 1e-15) {
      if (sc < 0.0 || sc > top) continue;
    } else {
      double ua = (0.0 - sc) / ds, ub = (top - sc) / ds;
      if (ua > ub) std::swap(ua, ub);
      u0 = std::max(u0, ua);
      u1 = std::min(u1, ub);
      if (u1 < u0) continue;
    }
    const Vec2 qa = e.a + (e.b - e.a) * u0;
    const Vec2 qb = e.a + (e.b - e.a) * u1;
    const double ta = project_through(p, qa, h, std::clamp(sc + u0 * ds, 0.0, top), f);
    const double tb = project_through(p, qb, h, std::clamp(sc + u1 * ds, 0.0, top), f);
    const double lo = std::max(0.0, std::min(ta, tb));
    const double hi = std::min(1.0, std::max(ta, tb));
    if (hi > lo) shadows.push_back({lo, hi});
  }
  vis = vis.subtract(IntervalSet(std::move(shadows)));
  return vis.without_short(kMinSpanFraction);
}

std::vector<VisibleSpan> visible_facades(Vec2 p, const Scene& scene, double d_max) {
  if (auto b = scene.building_containing(p))
    throw InputError("observer lies inside building " + scene.buildings[*b].id);
  std::vector<VisibleSpan> out;
  for (const Facade& f : scene.facades) {
    if (point_segment_distance(p, f.a, f.b) > d_max) continue;
    IntervalSet s = visible_span(p, scene, f, d_max);
    if (!s.empty()) out.push_back({f.id, std::move(s), p});
  }
  return out;
}

const std::vector<VisibilityIndex::Observation>& facade_observers(const VisibilityIndex& index,
                                                                  int facade) {
  return index.by_facade.at(facade);
}

bool los_3d(Vec3 p, Vec3 q, const Mesh25D& mesh) {
  for (const Prism& prism : mesh.prisms) {
    const double top = prism.height - 1e-9;
    double t0 = 0.0, t1 = 1.0;
    const double dz = q.z - p.z;
    if (std::abs(dz) < 1e-12) {
      if (!(p.z < top)) continue;
    } else {
      const double tc = (top - p.z) / dz;
      if (dz > 0)
        t1 = std::min(t1, tc);
      else
        t0 = std::max(t0, tc);
      if (!(t1 > t0)) continue;
    }
    const Vec2 a = p.xy() + (q.xy() - p.xy()) * t0;
    const Vec2 b = p.xy() + (q.xy() - p.xy()) * t1;
    if (std::max(a.x, b.x) < prism.box.lo.x || std::min(a.x, b.x) > prism.box.hi.x ||
        std::max(a.y, b.y) < prism.box.lo.y || std::min(a.y, b.y) > prism.box.hi.y)
      continue;
    if (dist(a, b) < 1e-12) {
      if (strictly_inside(a, prism.ring)) return false;
      continue;
    }
    if (segment_enters_interior(a, b, prism.ring)) return false;
  }
  return true;
}

}  // namespace dipplan
