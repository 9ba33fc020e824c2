#include <doctest.h>

#include <map>
#include <numeric>
#include <random>
#include <set>

#include "dipplan/error.hpp"
#include "dipplan/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dipplan;
using support::rect;
using support::scene_of;

namespace {

HoverGroup group(HoverGroup::Kind kind, Vec3 p, int source, std::vector<std::pair<double, double>> yaw_pitch,
                 SurfaceRef target = {SurfaceKind::Facade, 0}) {
  HoverGroup g;
  g.kind = kind;
  g.position = p;
  g.source = source;
  for (auto [y, pt] : yaw_pitch) g.captures.push_back({View3D{p, y, pt}, target});
  return g;
}

std::vector<double> random_matrix(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(1.0, 100.0);
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) c[i * n + j] = u(rng);
  return c;
}

bool is_permutation_from(const Tour& t, std::size_t n, int start) {
  std::vector<int> sorted = t.order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  return sorted == ids && !t.order.empty() && t.order.front() == start;
}

// Mean gap in tour position between consecutive units capturing the same facade.
double same_facade_gap(const Tour& tour, const std::vector<RouteUnit>& units) {
  std::map<int, std::vector<int>> seen;
  for (int i = 0; i < static_cast<int>(tour.order.size()); ++i)
    for (const SurfaceRef& t : units[tour.order[i]].targets)
      if (t.kind == SurfaceKind::Facade) seen[t.index].push_back(i);
  double sum = 0.0;
  int count = 0;
  for (const auto& [f, idx] : seen)
    for (std::size_t k = 1; k < idx.size(); ++k) {
      sum += idx[k] - idx[k - 1];
      ++count;
    }
  return count ? sum / count : 0.0;
}

}  // namespace

TEST_CASE("edge cost examples") {
  CHECK(edge_cost(0.5, 10.0, 0.0, 0.1) == doctest::Approx(5.0));
  const double other = edge_cost(1.0, 10.0, kPi / 2.0, 0.1);
  CHECK(other == doctest::Approx(11.70).epsilon(1e-3));
  CHECK(edge_cost(0.75, 10.0, kPi / 2.0, 0.1) == doctest::Approx(0.75 * other));
  // Short legs are clamped.
  CHECK(edge_cost(1.0, 0.0, 0.0, 0.1) == doctest::Approx(0.1));
}

TEST_CASE("plane weights follow shared vertices") {
  const Scene s = scene_of({rect(0, 0, 20, 20), rect(50, 0, 20, 20)});
  const RouteParams p;
  const SurfaceRef f0{SurfaceKind::Facade, 0}, f1{SurfaceKind::Facade, 1}, f2{SurfaceKind::Facade, 2},
      f4{SurfaceKind::Facade, 4}, roof0{SurfaceKind::Roof, 0}, roof1{SurfaceKind::Roof, 1};
  CHECK(plane_weight({f0}, {f0}, s, p) == 0.5);
  CHECK(plane_weight({f0}, {f1}, s, p) == 0.75);
  CHECK(plane_weight({f0}, {f2}, s, p) == 1.0);
  CHECK(plane_weight({f0}, {f4}, s, p) == 1.0);
  CHECK(plane_weight({f0}, {roof0}, s, p) == 0.75);
  CHECK(plane_weight({roof1}, {f0}, s, p) == 1.0);
  CHECK(plane_weight({f0}, {{SurfaceKind::Ground, 0}}, s, p) == 0.75);
}

TEST_CASE("safe distance") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const NoDippingZone zone(s, 10.0);
  SafeRouter router(zone, s.safe_altitude);
  SUBCASE("clear line is Euclidean") {
    const Vec3 a{-20, -20, 30}, b{40, -15, 25};
    CHECK(router.distance(a, b) == doctest::Approx(norm(b - a)));
  }
  SUBCASE("symmetric") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-40, 60), z(10, 60);
    for (int k = 0; k < 50; ++k) {
      const Vec3 a{u(rng), u(rng), z(rng)}, b{u(rng), u(rng), z(rng)};
      if (zone.contains(a) || zone.contains(b)) continue;
      CHECK(router.distance(a, b) == doctest::Approx(router.distance(b, a)).epsilon(1e-9));
    }
  }
  SUBCASE("detour around a building matches a grid oracle") {
    const Vec3 a{-20, 10, 20}, b{40, 10, 20};
    const double l = router.distance(a, b);
    CHECK(l > norm(b - a));
    const double ref = oracle::grid_detour(a.xy(), b.xy(), s, 10.0, Box2{{-30, -30}, {50, 50}}, 0.25, 3);
    MESSAGE("router " << l << " grid " << ref);
    CHECK(std::abs(l - ref) <= 0.01 * ref);
    for (const Vec3& q : router.path(a, b)) CHECK_FALSE(oracle::unsafe(q, s, extrude_25d(s, 50.0), 10.0));
  }
  SUBCASE("endpoint inside the zone") {
    CHECK_THROWS_AS(router.path({10, -5, 20}, {-30, -30, 20}), PlanningError);
  }
}

TEST_CASE("small tours are optimal") {
  std::mt19937 rng(11);
  int instances = 0;
  for (std::size_t n = 2; n <= 9; ++n)
    for (int k = 0; k < 8; ++k) {
      const auto cost = random_matrix(rng, n);
      const int start = static_cast<int>(rng() % n);
      const Tour t = solve_tour(cost, n, start);
      CHECK(is_permutation_from(t, n, start));
      CHECK(t.cost == doctest::Approx(oracle::brute_force_path(cost, n, start)));
      CHECK(t.cost == doctest::Approx(path_cost(cost, n, t.order)));
      ++instances;
    }
  CHECK(instances >= 50);
}

TEST_CASE("heuristic tours never lose to nearest neighbour") {
  std::mt19937 rng(12);
  for (std::size_t n : {15u, 30u, 60u}) {
    const auto cost = random_matrix(rng, n);
    const Tour nn = nearest_neighbor_tour(cost, n, 0);
    const Tour t = solve_tour(cost, n, 0);
    CHECK(is_permutation_from(nn, n, 0));
    CHECK(is_permutation_from(t, n, 0));
    CHECK(t.cost <= nn.cost + 1e-9);
    CHECK(improve_tour(cost, n, t).cost == doctest::Approx(t.cost));
  }
}

TEST_CASE("collinear nodes are swept in order") {
  const std::size_t n = 20;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) cost[i * n + j] = edge_cost(1.0, 10.0 * std::abs(perm[i] - perm[j]), 0.0, 0.1);
  const int start = static_cast<int>(std::find(perm.begin(), perm.end(), 0) - perm.begin());
  const Tour t = solve_tour(cost, n, start);
  for (std::size_t k = 0; k < n; ++k) CHECK(perm[t.order[k]] == static_cast<int>(k));
}

TEST_CASE("sequencing hover groups") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const NoDippingZone zone(s, 10.0);
  SafeRouter router(zone, s.safe_altitude);
  using K = HoverGroup::Kind;
  const std::vector<HoverGroup> groups{
      group(K::Dipping, {10, -40, 30}, 0, {{0, 0}}),
      group(K::Planar, {60, 60, 60}, 0, {{0, -90}, {0, -45}, {90, -45}, {180, -45}, {270, -45}}),
      group(K::Dipping, {10, -40, 60}, 0, {{0, 0}}),
      group(K::Dipping, {10, -40, 45}, 0, {{30, 0}, {-30, 0}}),
      group(K::Dipping, {10, -40, 15}, 0, {{0, -20}}),
  };
  const auto units = make_route_units(groups);
  REQUIRE(units.size() == 2);
  CHECK(units[0].groups.size() == 4);
  const Tour tour{{0, 1}, 0.0};
  const FlightPlan plan = sequence_views(tour, units, router);
  CHECK(plan.hovers() == 5);
  CHECK(plan.images() == 10);
  CHECK(plan.legs.size() == 4);
  for (int i = 1; i < 4; ++i) CHECK(plan.waypoints[i].position.z < plan.waypoints[i - 1].position.z);
  const Waypoint& merged = plan.waypoints[1];
  REQUIRE(merged.captures.size() == 2);
  CHECK(merged.captures[0].yaw_deg < merged.captures[1].yaw_deg);
  const Waypoint& station = plan.waypoints[4];
  for (std::size_t k = 1; k < station.captures.size(); ++k)
    CHECK(station.captures[k - 1].yaw_deg <= station.captures[k].yaw_deg);
  double len = 0.0;
  for (const auto& leg : plan.legs) len += polyline_length(leg);
  CHECK(plan.trajectory_m == doctest::Approx(len));
}

TEST_CASE("start unit is the one nearest the launch point") {
  using K = HoverGroup::Kind;
  const auto units = make_route_units({group(K::Planar, {50, 50, 60}, 0, {{0, -90}}),
                                       group(K::Planar, {0, 0, 60}, 1, {{0, -90}}),
                                       group(K::Planar, {0, 0, 60}, 2, {{0, -90}})});
  CHECK(nearest_unit(units, {-5, -5, 60}) == 1);
}

TEST_CASE("topology costs keep same-facade captures closer together") {
  const PlannerConfig cfg = support::fixture_config();
  for (const std::string name : {"scene_1", "scene_2"}) {
    const Scene s = support::fixture_scene(name);
    const PlanResult r = plan(s, cfg);
    SafeRouter router(r.zone, s.safe_altitude);
    const int start = nearest_unit(r.units, launch_point(s, cfg));
    double gap[2];
    for (int topo = 0; topo < 2; ++topo) {
      RouteParams p;
      p.min_leg = cfg.route_min_leg;
      p.topology = topo == 1;
      const RouteGraph g = build_route_graph(r.units, router, s, p);
      const Tour t = solve_tour(g.cost, g.n, start);
      gap[topo] = same_facade_gap(t, r.units);
      if (p.topology) CHECK(t.cost <= nearest_neighbor_tour(g.cost, g.n, start).cost + 1e-9);
    }
    MESSAGE(name << ": distance-only gap " << gap[0] << ", topology gap " << gap[1]);
    CHECK(gap[1] < gap[0]);
  }
}
