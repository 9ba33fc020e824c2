#include "dipplan/route.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "dipplan/error.hpp"

namespace dipplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kImprove = 1e-9;

std::mutex& layer_mutex() {
  static std::mutex m;
  return m;
}

void push_distinct(std::vector<Vec3>& line, Vec3 p) {
  if (line.empty() || !(line.back() == p)) line.push_back(p);
}

}  // namespace

double polyline_length(const std::vector<Vec3>& line) {
  double len = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) len += dist(line[i - 1], line[i]);
  return len;
}

SafeRouter::SafeRouter(const NoDippingZone& zone, double safe_altitude)
    : zone_(zone), safe_altitude_(safe_altitude) {}

std::vector<bool> SafeRouter::active_at(double z) const {
  std::vector<bool> a(zone_.building_count());
  for (std::size_t b = 0; b < a.size(); ++b) a[b] = z < zone_.top(static_cast<int>(b)) - 1e-9;
  return a;
}

void SafeRouter::prepare(const std::vector<double>& altitudes) {
  for (double z : altitudes) layer(z);
}

const SafeRouter::Layer& SafeRouter::layer(double z) const {
  const std::vector<bool> key = active_at(z);
  std::lock_guard<std::mutex> lock(layer_mutex());
  auto it = layers_.find(key);
  if (it != layers_.end()) return it->second;
  Layer L;
  L.zone = zone_.blocking_at(z);
  for (const auto& poly : L.zone.polygons()) {
    for (Vec2 p : poly.outer) L.nodes.push_back(p);
    for (const Ring& h : poly.holes)
      for (Vec2 p : h) L.nodes.push_back(p);
  }
  const std::size_t n = L.nodes.size();
  L.dist.assign(n * n, kInf);
  L.next.assign(n * n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    L.dist[i * n + i] = 0.0;
    L.next[i * n + i] = static_cast<int>(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!L.zone.segment_clear_at(L.nodes[i], L.nodes[j], z)) continue;
      const double d = dist(L.nodes[i], L.nodes[j]);
      L.dist[i * n + j] = L.dist[j * n + i] = d;
      L.next[i * n + j] = static_cast<int>(j);
      L.next[j * n + i] = static_cast<int>(i);
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      const double dik = L.dist[i * n + k];
      if (dik == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = dik + L.dist[k * n + j];
        if (d < L.dist[i * n + j]) {
          L.dist[i * n + j] = d;
          L.next[i * n + j] = L.next[i * n + k];
        }
      }
    }
  return layers_.emplace(key, std::move(L)).first->second;
}

std::vector<Vec3> SafeRouter::path(Vec3 a, Vec3 b) const {
  if (zone_.contains(a) || zone_.contains(b))
    throw PlanningError("route", "route endpoint lies inside the no-dipping zone");
  if (zone_.segment_clear(a, b)) {
    std::vector<Vec3> line{a};
    push_distinct(line, b);
    return line;
  }
  const double h = std::max({safe_altitude_, a.z, b.z});
  std::vector<Vec3> best;
  push_distinct(best, a);
  push_distinct(best, {a.x, a.y, h});
  push_distinct(best, {b.x, b.y, h});
  push_distinct(best, b);
  double best_len = polyline_length(best);

  const double z = std::max(a.z, b.z);
  const Vec2 pa = a.xy(), pb = b.xy();
  const double vertical = (z - a.z) + (z - b.z);
  const Layer& L = layer(z);
  std::vector<Vec2> corners;
  double len = kInf;
  if (L.zone.segment_clear_at(pa, pb, z)) {
    len = vertical + dist(pa, pb);
  } else {
    const std::size_t n = L.nodes.size();
    std::vector<std::pair<std::size_t, double>> va, vb;
    for (std::size_t i = 0; i < n; ++i) {
      if (L.zone.segment_clear_at(pa, L.nodes[i], z)) va.push_back({i, dist(pa, L.nodes[i])});
      if (L.zone.segment_clear_at(L.nodes[i], pb, z)) vb.push_back({i, dist(L.nodes[i], pb)});
    }
    std::size_t bi = 0, bj = 0;
    for (const auto& [i, di] : va)
      for (const auto& [j, dj] : vb) {
        const double d = vertical + di + L.dist[i * n + j] + dj;
        if (d < len) {
          len = d;
          bi = i;
          bj = j;
        }
      }
    if (len < kInf) {
      for (std::size_t k = bi;; k = static_cast<std::size_t>(L.next[k * n + bj])) {
        corners.push_back(L.nodes[k]);
        if (k == bj) break;
      }
    }
  }
  if (len < best_len) {
    best.clear();
    push_distinct(best, a);
    push_distinct(best, {pa.x, pa.y, z});
    for (Vec2 c : corners) push_distinct(best, {c.x, c.y, z});
    push_distinct(best, {pb.x, pb.y, z});
    push_distinct(best, b);
  }
  return best;
}

double SafeRouter::distance(Vec3 a, Vec3 b) const { return polyline_length(path(a, b)); }

// ---------------------------------------------------------------------------

std::vector<RouteUnit> make_route_units(const std::vector<HoverGroup>& groups) {
  std::vector<RouteUnit> units;
  std::map<int, std::size_t> by_source;
  for (const HoverGroup& g : groups) {
    if (g.kind == HoverGroup::Kind::Dipping && g.source >= 0) {
      auto [it, fresh] = by_source.emplace(g.source, units.size());
      if (fresh) units.emplace_back();
      units[it->second].groups.push_back(g);
    } else {
      units.emplace_back();
      units.back().groups.push_back(g);
    }
  }
  for (RouteUnit& u : units) {
    std::stable_sort(u.groups.begin(), u.groups.end(), [](const HoverGroup& x, const HoverGroup& y) {
      return x.position.z > y.position.z;
    });
    u.entry = u.groups.front().position;
    u.exit = u.groups.back().position;
    Vec3 sum;
    for (const HoverGroup& g : u.groups)
      for (const Capture& c : g.captures) {
        sum = sum + c.view.forward();
        u.targets.push_back(c.target);
      }
    u.direction = norm(sum) > 1e-9 ? normalized(sum) : Vec3{};
    std::sort(u.targets.begin(), u.targets.end());
    u.targets.erase(std::unique(u.targets.begin(), u.targets.end()), u.targets.end());
  }
  return units;
}

double plane_weight(const std::vector<SurfaceRef>& a, const std::vector<SurfaceRef>& b,
                    const Scene& scene, const RouteParams& params) {
  auto adjacent = [&](SurfaceRef x, SurfaceRef y) {
    if (x.kind != SurfaceKind::Facade) std::swap(x, y);
    if (x.kind != SurfaceKind::Facade) return false;
    switch (y.kind) {
      case SurfaceKind::Facade:
        return scene.adjacent(x.index, y.index);
      case SurfaceKind::Ground:
        return true;
      case SurfaceKind::Roof:
        return scene.facades[x.index].building == y.index;
    }
    return false;
  };
  double w = params.w_other;
  for (const SurfaceRef& x : a)
    for (const SurfaceRef& y : b) {
      if (x == y) w = std::min(w, params.w_same);
      else if (adjacent(x, y)) w = std::min(w, params.w_adjacent);
    }
  return w;
}

double edge_cost(double w_p, double l, double alpha, double min_leg) {
  const double len = std::max(l, min_leg);
  return w_p * len * std::exp(alpha / len);
}

RouteGraph build_route_graph(const std::vector<RouteUnit>& units, const SafeRouter& router,
                             const Scene& scene, const RouteParams& params, Exec exec) {
  RouteGraph g;
  g.n = units.size();
  g.length.assign(g.n * g.n, 0.0);
  g.cost.assign(g.n * g.n, 0.0);
  const long n = static_cast<long>(g.n);
  auto row = [&](long i) {
    for (long j = 0; j < n; ++j) {
      if (i == j) continue;
      const double l = router.distance(units[i].exit, units[j].entry);
      double w = params.w_other, alpha = 0.0;
      if (params.topology) {
        w = plane_weight(units[i].targets, units[j].targets, scene, params);
        const Vec3 di = units[i].direction, dj = units[j].direction;
        // Units without a dominant direction count as orthogonal to everything.
        alpha = (norm(di) == 0.0 || norm(dj) == 0.0) ? kPi / 2.0 : angle_between(di, dj);
      }
      g.length[i * n + j] = l;
      g.cost[i * n + j] = edge_cost(w, l, alpha, params.min_leg);
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long i = 0; i < n; ++i) row(i);
  } else {
    for (long i = 0; i < n; ++i) row(i);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Tours

double path_cost(const std::vector<double>& cost, std::size_t n, const std::vector<int>& order) {
  double c = 0.0;
  for (std::size_t t = 1; t < order.size(); ++t) c += cost[order[t - 1] * n + order[t]];
  return c;
}

Tour nearest_neighbor_tour(const std::vector<double>& cost, std::size_t n, int start) {
  Tour t;
  if (n == 0) return t;
  std::vector<char> used(n, 0);
  t.order.push_back(start);
  used[start] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const int cur = t.order.back();
    int pick = -1;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j]) continue;
      if (pick < 0 || cost[cur * n + j] < cost[cur * n + pick]) pick = static_cast<int>(j);
    }
    t.order.push_back(pick);
    used[pick] = 1;
  }
  t.cost = path_cost(cost, n, t.order);
  return t;
}

namespace {

bool two_opt(const std::vector<double>& cost, std::size_t n, std::vector<int>& o) {
  const std::size_t m = o.size();
  auto c = [&](int a, int b) { return cost[a * n + b]; };
  // fwd[k] / rev[k]: cost of o[0..k] traversed forwards / backwards.
  std::vector<double> fwd(m, 0.0), rev(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) {
    fwd[k] = fwd[k - 1] + c(o[k - 1], o[k]);
    rev[k] = rev[k - 1] + c(o[k], o[k - 1]);
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double before = c(o[i - 1], o[i]) + (fwd[j] - fwd[i]);
      double after = c(o[i - 1], o[j]) + (rev[j] - rev[i]);
      if (j + 1 < m) {
        before += c(o[j], o[j + 1]);
        after += c(o[i], o[j + 1]);
      }
      if (after < before - kImprove) {
        std::reverse(o.begin() + static_cast<std::ptrdiff_t>(i),
                     o.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        return true;
      }
    }
  }
  return false;
}

bool or_opt(const std::vector<double>& cost, std::size_t n, std::vector<int>& o) {
  const std::size_t m = o.size();
  auto c = [&](int a, int b) { return cost[a * n + b]; };
  for (std::size_t len = 1; len <= 3; ++len) {
    for (std::size_t i = 1; i + len <= m; ++i) {
      const std::size_t last = i + len - 1;
      double removed = c(o[i - 1], o[i]);
      if (last + 1 < m) removed += c(o[last], o[last + 1]) - c(o[i - 1], o[last + 1]);
      std::vector<int> rest;
      rest.reserve(m - len);
      for (std::size_t k = 0; k < m; ++k)
        if (k < i || k > last) rest.push_back(o[k]);
      for (std::size_t p = 0; p < rest.size(); ++p) {
        if (p == i - 1) continue;  // original position
        double added = c(rest[p], o[i]);
        if (p + 1 < rest.size()) added += c(o[last], rest[p + 1]) - c(rest[p], rest[p + 1]);
        if (added < removed - kImprove) {
          std::vector<int> next(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(p) + 1);
          next.insert(next.end(), o.begin() + static_cast<std::ptrdiff_t>(i),
                      o.begin() + static_cast<std::ptrdiff_t>(last) + 1);
          next.insert(next.end(), rest.begin() + static_cast<std::ptrdiff_t>(p) + 1, rest.end());
          o = std::move(next);
          return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

Tour improve_tour(const std::vector<double>& cost, std::size_t n, Tour tour) {
  for (;;) {
    if (two_opt(cost, n, tour.order)) continue;
    if (or_opt(cost, n, tour.order)) continue;
    break;
  }
  tour.cost = path_cost(cost, n, tour.order);
  return tour;
}

Tour exact_tour(const std::vector<double>& cost, std::size_t n, int start) {
  Tour t;
  if (n == 0) return t;
  if (n > 20) throw PlanningError("route", "exact tour limited to 20 nodes");
  const std::size_t full = std::size_t{1} << n;
  std::vector<double> dp(full * n, kInf);
  std::vector<int> parent(full * n, -1);
  dp[(std::size_t{1} << start) * n + start] = 0.0;
  for (std::size_t mask = 1; mask < full; ++mask) {
    if (!(mask & (std::size_t{1} << start))) continue;
    for (std::size_t j = 0; j < n; ++j) {
      const double base = dp[mask * n + j];
      if (base == kInf) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (mask & (std::size_t{1} << k)) continue;
        const std::size_t next = mask | (std::size_t{1} << k);
        const double d = base + cost[j * n + k];
        if (d < dp[next * n + k]) {
          dp[next * n + k] = d;
          parent[next * n + k] = static_cast<int>(j);
        }
      }
    }
  }
  std::size_t mask = full - 1, end = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (dp[mask * n + j] < dp[mask * n + end]) end = j;
  for (int j = static_cast<int>(end); j >= 0;) {
    t.order.push_back(j);
    const int p = parent[mask * n + j];
    mask &= ~(std::size_t{1} << j);
    j = p;
  }
  std::reverse(t.order.begin(), t.order.end());
  t.cost = path_cost(cost, n, t.order);
  return t;
}

Tour solve_tour(const std::vector<double>& cost, std::size_t n, int start, int exact_limit) {
  if (n == 0) return {};
  if (static_cast<int>(n) <= exact_limit) return exact_tour(cost, n, start);
  return improve_tour(cost, n, nearest_neighbor_tour(cost, n, start));
}

int nearest_unit(const std::vector<RouteUnit>& units, Vec3 launch) {
  int best = -1;
  for (std::size_t i = 0; i < units.size(); ++i)
    if (best < 0 || dist(units[i].entry, launch) < dist(units[best].entry, launch))
      best = static_cast<int>(i);
  return best;
}

int FlightPlan::images() const {
  int n = 0;
  for (const Waypoint& w : waypoints) n += static_cast<int>(w.captures.size());
  return n;
}

FlightPlan sequence_views(const Tour& tour, const std::vector<RouteUnit>& units,
                          const SafeRouter& router) {
  FlightPlan plan;
  for (int u : tour.order) {
    for (const HoverGroup& g : units[u].groups) {
      Waypoint w;
      w.position = g.position;
      w.kind = g.kind;
      w.source = g.source;
      for (const Capture& c : g.captures)
        w.captures.push_back({c.view.yaw_deg, c.view.pitch_deg, c.target});
      std::stable_sort(w.captures.begin(), w.captures.end(),
                       [](const CaptureRecord& a, const CaptureRecord& b) {
                         return std::pair(a.yaw_deg, -a.pitch_deg) < std::pair(b.yaw_deg, -b.pitch_deg);
                       });
      if (!plan.waypoints.empty()) {
        plan.legs.push_back(router.path(plan.waypoints.back().position, w.position));
        plan.trajectory_m += polyline_length(plan.legs.back());
      }
      plan.waypoints.push_back(std::move(w));
    }
  }
  return plan;
}

}  // namespace dipplan
