#include "dipplan/geometry.hpp"

#include <algorithm>
#include <limits>

namespace dipplan {

namespace {

constexpr double kEps = 1e-12;

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({norm(b - a) * norm(c - a), 1e-300});
  if (std::abs(v) <= 1e-12 * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(Vec2 p, Vec2 a, Vec2 b) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

double signed_area2(std::span<const Vec2> ring) {
  double a = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) a += cross(ring[i], ring[(i + 1) % n]);
  return a;
}

Box2 bounding_box(std::span<const Vec2> pts) {
  Box2 b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
         {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (const Vec2& p : pts) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

double project_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return 0.0;
  return std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double t = project_to_segment(p, a, b);
  return dist(p, a + (b - a) * t);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c), o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a), o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  if (o4 == 0 && on_segment(b, c, d)) return true;
  return false;
}

double segment_segment_distance(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b), point_segment_distance(d, a, b)});
}

std::vector<double> segment_hits(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  std::vector<double> out;
  const Vec2 r = b - a, s = d - c;
  const double rr = norm(r), ss = norm(s);
  if (rr <= kEps) return out;
  const double denom = cross(r, s);
  if (std::abs(denom) > 1e-12 * rr * std::max(ss, kEps)) {
    const double t = cross(c - a, s) / denom;
    const double u = cross(c - a, r) / denom;
    constexpr double tol = 1e-10;
    if (t >= -tol && t <= 1 + tol && u >= -tol && u <= 1 + tol)
      out.push_back(std::clamp(t, 0.0, 1.0));
    return out;
  }
  // Parallel: only collinear overlaps matter.
  if (std::abs(cross(c - a, r)) > 1e-10 * rr * std::max(norm(c - a), 1.0)) return out;
  const double tc = dot(c - a, r) / (rr * rr);
  const double td = dot(d - a, r) / (rr * rr);
  const double lo = std::max(0.0, std::min(tc, td));
  const double hi = std::min(1.0, std::max(tc, td));
  if (lo <= hi) {
    out.push_back(lo);
    out.push_back(hi);
  }
  return out;
}

Containment locate_point(Vec2 p, std::span<const Vec2> ring, double eps) {
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = ring[j], b = ring[i];
    if (point_segment_distance(p, a, b) <= eps) return Containment::Boundary;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside ? Containment::Inside : Containment::Outside;
}

double point_polygon_distance(Vec2 p, std::span<const Vec2> ring) {
  if (locate_point(p, ring) != Containment::Outside) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, point_segment_distance(p, ring[i], ring[(i + 1) % n]));
  return best;
}

double segment_polygon_distance(Vec2 a, Vec2 b, std::span<const Vec2> ring) {
  if (locate_point(a, ring) != Containment::Outside) return 0.0;
  if (locate_point(b, ring) != Containment::Outside) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, segment_segment_distance(a, b, ring[i], ring[(i + 1) % n]));
    if (best == 0.0) break;
  }
  return best;
}

namespace {

// Exact split at every boundary contact; used when the segment touches the ring.
bool enters_interior_split(Vec2 a, Vec2 b, std::span<const Vec2> ring) {
  std::vector<double> ts{0.0, 1.0};
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto h = segment_hits(a, b, ring[i], ring[(i + 1) % n]);
    ts.insert(ts.end(), h.begin(), h.end());
  }
  std::sort(ts.begin(), ts.end());
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (ts[k + 1] - ts[k] <= 1e-12) continue;
    const double tm = 0.5 * (ts[k] + ts[k + 1]);
    if (locate_point(a + (b - a) * tm, ring) == Containment::Inside) return true;
  }
  return false;
}

}  // namespace

bool segment_enters_interior(Vec2 a, Vec2 b, std::span<const Vec2> ring) {
  const Vec2 r = b - a;
  const double rr = norm(r);
  if (rr <= kEps) return enters_interior_split(a, b, ring);
  constexpr double tol = 1e-9;
  const std::size_t n = ring.size();
  bool touched = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 c = ring[i], d = ring[(i + 1) % n];
    const double d1 = cross(r, c - a) / rr, d2 = cross(r, d - a) / rr;
    if ((d1 > tol && d2 > tol) || (d1 < -tol && d2 < -tol)) continue;
    const Vec2 s = d - c;
    const double ss = norm(s);
    if (ss <= kEps) {
      touched = true;
      continue;
    }
    const double e1 = cross(s, a - c) / ss, e2 = cross(s, b - c) / ss;
    if ((e1 > tol && e2 > tol) || (e1 < -tol && e2 < -tol)) continue;
    if (std::abs(d1) > tol && std::abs(d2) > tol && std::abs(e1) > tol && std::abs(e2) > tol)
      return true;  // proper crossing
    touched = true;
  }
  if (touched) return enters_interior_split(a, b, ring);
  return locate_point(a + r * 0.5, ring) == Containment::Inside;
}

std::optional<std::pair<std::size_t, std::size_t>> find_self_intersection(
    std::span<const Vec2> ring) {
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = ring[i], b = ring[(i + 1) % n];
    // Adjacent edge folding back onto this one.
    const Vec2 c = ring[(i + 2) % n];
    if (n >= 3 && orientation(a, b, c) == 0 && dot(b - a, c - b) < 0) return {{i, (i + 1) % n}};
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(a, b, ring[j], ring[(j + 1) % n])) return {{i, j}};
    }
  }
  return std::nullopt;
}

}  // namespace dipplan
