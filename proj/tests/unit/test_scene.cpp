#include <doctest.h>

#include <map>
#include <queue>
#include <random>

#include "dipplan/error.hpp"
#include "dipplan/scene.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dipplan;
using support::rect;
using support::scene_of;

namespace {

bool near_vec(Vec2 a, Vec2 b) { return std::abs(a.x - b.x) < 1e-12 && std::abs(a.y - b.y) < 1e-12; }

}  // namespace

TEST_CASE("unit square gives four axis-aligned outward normals") {
  const Scene s = scene_of({{{0, 0}, {20, 0}, {20, 20}, {0, 20}}});
  REQUIRE(s.facades.size() == 4);
  CHECK(near_vec(s.facades[0].normal, {0, -1}));
  CHECK(near_vec(s.facades[1].normal, {1, 0}));
  CHECK(near_vec(s.facades[2].normal, {0, 1}));
  CHECK(near_vec(s.facades[3].normal, {-1, 0}));
}

TEST_CASE("clockwise ring is normalised without changing the facades") {
  const Scene ccw = scene_of({{{0, 0}, {20, 0}, {20, 20}, {0, 20}}});
  const Scene cw = scene_of({{{0, 0}, {0, 20}, {20, 20}, {20, 0}}});
  REQUIRE(cw.facades.size() == 4);
  CHECK(signed_area2(cw.buildings[0].ring) > 0);
  std::multimap<double, Vec2> a, b;
  for (const auto& f : ccw.facades) a.insert({f.midpoint().x * 100 + f.midpoint().y, f.normal});
  for (const auto& f : cw.facades) b.insert({f.midpoint().x * 100 + f.midpoint().y, f.normal});
  auto ia = a.begin();
  for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib) {
    CHECK(ia->first == doctest::Approx(ib->first));
    CHECK(near_vec(ia->second, ib->second));
  }
}

TEST_CASE("two disjoint squares give eight facades") {
  const Scene s = scene_of({rect(0, 0, 20, 20), rect(50, 0, 20, 20)});
  CHECK(s.buildings.size() == 2);
  CHECK(s.facades.size() == 8);
  CHECK(s.facades[4].building == 1);
}

TEST_CASE("scene parsing errors") {
  SUBCASE("self-intersecting ring names the ring") {
    const std::string doc = R"({"unit":"m","safe_altitude":60,"min_flight_altitude":10,
      "buildings":[{"id":"tower-7","ring":[[0,0],[10,10],[10,0],[0,10]]}]})";
    try {
      parse_scene(std::string_view(doc));
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("tower-7") != std::string::npos);
    }
  }
  SUBCASE("non-positive safe altitude") {
    const std::string doc = R"({"unit":"m","safe_altitude":0,"min_flight_altitude":10,
      "buildings":[{"id":"a","ring":[[0,0],[10,0],[10,10]]}]})";
    CHECK_THROWS_AS(parse_scene(std::string_view(doc)), InputError);
  }
  SUBCASE("wrong unit") {
    const std::string doc = R"({"unit":"ft","safe_altitude":60,"min_flight_altitude":10,
      "buildings":[{"id":"a","ring":[[0,0],[10,0],[10,10]]}]})";
    CHECK_THROWS_AS(parse_scene(std::string_view(doc)), InputError);
  }
  SUBCASE("duplicate consecutive vertices collapse with a warning") {
    const std::string doc = R"({"unit":"m","safe_altitude":60,"min_flight_altitude":10,
      "buildings":[{"id":"a","ring":[[0,0],[10,0],[10,0],[10,10],[0,10]]}]})";
    const Scene s = parse_scene(std::string_view(doc));
    CHECK(s.facades.size() == 4);
    CHECK(s.warnings.size() == 1);
  }
}

TEST_CASE("no-dipping zone membership") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const NoDippingZone zone = compute_no_dipping_zone(s, 10.0);
  CHECK(zone.contains(Vec2{10, -5}));
  CHECK_FALSE(zone.contains(Vec2{10, -10.5}));
}

TEST_CASE("two squares 15 m apart form one connected zone") {
  const Scene s = scene_of({rect(0, 0, 20, 20), rect(35, 0, 20, 20)});
  const NoDippingZone zone(s, 10.0);
  CHECK(zone.polygons().size() == 1);
  // Rasterised oracle: flood fill over cells closer than d_min to a building.
  const double cell = 0.5;
  const Box2 box{{-15, -15}, {70, 35}};
  const int nx = static_cast<int>(box.width() / cell) + 1, ny = static_cast<int>(box.height() / cell) + 1;
  std::vector<char> in(static_cast<std::size_t>(nx) * ny), seen(in.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      in[j * nx + i] = oracle::clearance({box.lo.x + i * cell, box.lo.y + j * cell}, s) < 10.0;
  std::queue<int> q;
  const int start = static_cast<int>(10 / cell) * nx + static_cast<int>(25 / cell);  // (10, 10)
  q.push(start);
  seen[start] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    const int i = u % nx, j = u / nx;
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (auto [dx, dy] : nb) {
      const int a = i + dx, b = j + dy;
      if (a < 0 || b < 0 || a >= nx || b >= ny || seen[b * nx + a] || !in[b * nx + a]) continue;
      seen[b * nx + a] = 1;
      q.push(b * nx + a);
    }
  }
  const int target = static_cast<int>(10 / cell) * nx + static_cast<int>(60 / cell);  // (45, 10)
  CHECK(seen[target]);
}

TEST_CASE("dilation matches exact distances on random probes") {
  for (const std::string& name : {std::string("scene_3"), std::string("scene_5")}) {
    const Scene s = support::fixture_scene(name);
    const NoDippingZone zone(s, 10.0);
    std::mt19937 rng(17);
    const Box2 box = s.bounds.expanded(15.0);
    std::uniform_real_distribution<double> ux(box.lo.x, box.hi.x), uy(box.lo.y, box.hi.y);
    int mismatches = 0;
    for (int k = 0; k < 10000; ++k) {
      const Vec2 p{ux(rng), uy(rng)};
      const double d = oracle::clearance(p, s);
      if (std::abs(d - 10.0) <= 1e-3) continue;
      if (zone.contains(p) != (d < 10.0)) ++mismatches;
    }
    CHECK_MESSAGE(mismatches == 0, name);
  }
}

TEST_CASE("zone outline stays at least d_min from the buildings") {
  const Scene s = support::fixture_scene("scene_3");
  const NoDippingZone zone(s, 10.0);
  for (const auto& poly : zone.polygons())
    for (const Vec2& v : poly.outer) CHECK(oracle::clearance(v, s) >= 10.0 - 1e-6);
}

TEST_CASE("candidate grid arithmetic and elimination") {
  const Scene empty = make_scene({}, 60, 10, 10, Box2{{0, 0}, {100, 100}});
  const NoDippingZone ez(empty, 10.0);
  CHECK(grid_sample_candidates(empty, ez, 10.0, 0.0).points.size() == 121);
  CHECK_THROWS_AS(grid_sample_candidates(empty, ez, 0.0, 0.0), InputError);
  const CandidateGrid big = grid_sample_candidates(empty, ez, 500.0, 0.0);
  CHECK(big.points.empty());
  CHECK_FALSE(big.warnings.empty());

  const Scene s = make_scene({{"c", rect(40, 40, 20, 20)}}, 60, 10, 10, Box2{{0, 0}, {100, 100}});
  const NoDippingZone zone(s, 10.0);
  const auto kept = grid_sample_candidates(s, zone, 5.0, 0.0).points;
  std::size_t expected = 0;
  for (const Vec2& p : grid_points(s.bounds, 5.0))
    if (oracle::clearance(p, s) >= 10.0) ++expected;
  CHECK(kept.size() == expected);
  for (const Vec2& p : kept) CHECK(oracle::clearance(p, s) >= 10.0 - 1e-9);
}

TEST_CASE("candidates on fixtures are outside the zone") {
  const Scene s = support::fixture_scene("scene_4");
  const NoDippingZone zone(s, 10.0);
  for (const Vec2& p : grid_sample_candidates(s, zone, 5.0, 150.0).points)
    CHECK(oracle::clearance(p, s) >= 10.0 - 1e-9);
}

TEST_CASE("extrusion heights") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const Mesh25D m = extrude_25d(s, 60.0 - 10.0);
  REQUIRE(m.prisms.size() == 1);
  CHECK(m.prisms[0].height == 50.0);
  CHECK(m.prisms[0].ring == s.buildings[0].ring);

  const std::string doc = R"({"unit":"m","safe_altitude":60,"min_flight_altitude":10,
    "buildings":[{"id":"a","ring":[[0,0],[10,0],[10,10],[0,10]]},{"id":"b","ring":[[30,0],[40,0],[40,10],[30,10]]}],
    "heights":{"b":22.5}})";
  const Scene o = parse_scene(std::string_view(doc));
  const Mesh25D mo = extrude_25d(o, 50.0);
  CHECK(mo.prisms[0].height == 50.0);
  CHECK(mo.prisms[1].height == 22.5);

  const Scene empty = make_scene({}, 60, 10, 10, Box2{{0, 0}, {30, 30}});
  const Mesh25D me = extrude_25d(empty, 50.0);
  CHECK(me.prisms.empty());
  CHECK(me.ground.width() == 30.0);
}

TEST_CASE("surface sampling counts") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const Mesh25D m = extrude_25d(s, 50.0);
  const SurfaceSamples ss = sample_surface(m, 5.0);
  std::map<SurfaceRef, int> count;
  for (const auto& p : ss.points) ++count[p.owner];
  CHECK(count[{SurfaceKind::Facade, 0}] == 55);
  CHECK(count[{SurfaceKind::Roof, 0}] == 25);
  for (const auto& p : ss.points) {
    CHECK(norm(p.normal) == doctest::Approx(1.0));
    if (p.owner.kind == SurfaceKind::Ground)
      CHECK_FALSE(oracle::inside(p.position.xy(), s.buildings[0].ring));
  }
}

TEST_CASE("every surface gets a sample and ground avoids footprints") {
  const Scene s = support::fixture_scene("scene_5");
  const Mesh25D m = extrude_25d(s, 50.0);
  const SurfaceSamples ss = sample_surface(m, 2.0);
  std::map<SurfaceRef, int> count;
  for (const auto& p : ss.points) ++count[p.owner];
  for (const auto& f : s.facades) CHECK(count[{SurfaceKind::Facade, f.id}] > 0);
  for (std::size_t b = 0; b < s.buildings.size(); ++b) CHECK(count[{SurfaceKind::Roof, static_cast<int>(b)}] > 0);
  CHECK(count[{SurfaceKind::Ground, 0}] > 0);
  for (const auto& p : ss.points) {
    if (p.owner.kind != SurfaceKind::Ground) continue;
    for (const auto& b : s.buildings) {
      const bool strictly_in =
          oracle::inside(p.position.xy(), b.ring) && oracle::region_dist_to_edges(p.position.xy(), b.ring) > 1e-9;
      CHECK_FALSE(strictly_in);
    }
  }
}

TEST_CASE("facade midpoints pushed along the normal leave the building") {
  for (const std::string& name : support::building_fixtures()) {
    const Scene s = support::fixture_scene(name);
    for (const auto& f : s.facades) {
      const Vec2 m = f.midpoint() + f.normal * 1e-3;
      CHECK_FALSE(oracle::inside(m, s.buildings[f.building].ring));
      const Vec2 back = f.midpoint() - f.normal * 1e-3;
      CHECK(oracle::inside(back, s.buildings[f.building].ring));
    }
  }
}
