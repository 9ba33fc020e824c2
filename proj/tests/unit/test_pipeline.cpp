#include <doctest.h>

#include <limits>
#include <map>
#include <set>

#include "dipplan/error.hpp"
#include "dipplan/io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dipplan;

namespace {

struct Planned {
  Scene scene;
  PlanResult result;
};

const Planned& planned(const std::string& name) {
  static std::map<std::string, Planned> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    Scene s = support::fixture_scene(name);
    PlanResult r = plan(s, support::fixture_config());
    it = cache.emplace(name, Planned{std::move(s), std::move(r)}).first;
  }
  return it->second;
}

double mean_nn_spacing(const std::vector<Vec2>& pts, const std::vector<Vec2>& all) {
  double sum = 0.0;
  for (const Vec2& p : pts) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& q : all)
      if (!(q == p)) best = std::min(best, dist(p, q));
    sum += best;
  }
  return sum / static_cast<double>(pts.size());
}

}  // namespace

TEST_CASE("empty scene gives a planar-only plan") {
  const Planned& p = planned("scene_empty");
  CHECK(p.scene.facades.empty());
  CHECK(p.result.dipping.points.empty());
  CHECK(p.result.lifted.hovers.empty());
  REQUIRE_FALSE(p.result.flight.waypoints.empty());
  for (const auto& w : p.result.flight.waypoints) CHECK(w.kind == HoverGroup::Kind::Planar);
  CHECK(p.result.summary.hover < p.result.summary.images);
}

TEST_CASE("single building: fewer hovers than images") {
  const Planned& p = planned("scene_1");
  CHECK(p.result.summary.hover < p.result.summary.images);
  CHECK_FALSE(p.result.dipping.points.empty());
}

TEST_CASE("summary agrees with the flight plan") {
  for (const std::string name : {"scene_empty", "scene_1"}) {
    const FlightPlan& f = planned(name).result.flight;
    const PlanSummary& s = planned(name).result.summary;
    int captures = 0;
    for (const auto& w : f.waypoints) captures += static_cast<int>(w.captures.size());
    double len = 0.0;
    for (const auto& leg : f.legs) len += polyline_length(leg);
    CHECK(s.images == captures);
    CHECK(s.hover == static_cast<int>(f.waypoints.size()));
    CHECK(s.trajectory_m == doctest::Approx(len));
    CHECK(f.legs.size() + 1 == f.waypoints.size());
  }
}

TEST_CASE("dipping views survive the later stages unchanged") {
  const Planned& p = planned("scene_1");
  std::multiset<std::tuple<double, double, double, double, double>> lifted, flown;
  for (const auto& g : p.result.lifted.hovers)
    for (const auto& c : g.captures)
      lifted.insert({g.position.x, g.position.y, g.position.z, c.view.yaw_deg, c.view.pitch_deg});
  for (const auto& w : p.result.flight.waypoints)
    if (w.kind == HoverGroup::Kind::Dipping)
      for (const auto& c : w.captures) flown.insert({w.position.x, w.position.y, w.position.z, c.yaw_deg, c.pitch_deg});
  CHECK(lifted == flown);
  // Every planar station appears once with its five views.
  int planar = 0;
  for (const auto& w : p.result.flight.waypoints)
    if (w.kind == HoverGroup::Kind::Planar) {
      ++planar;
      CHECK(w.captures.size() == 5);
    }
  CHECK(planar == static_cast<int>(p.result.planar.stations.size()));
}

TEST_CASE("planning is deterministic") {
  const Scene s = support::fixture_scene("scene_1");
  const PlanResult again = plan(s, support::fixture_config());
  CHECK(dump(flightplan_to_json(again.flight)) == dump(flightplan_to_json(planned("scene_1").result.flight)));
  CHECK(dump(quality_to_json(again.quality)) == dump(quality_to_json(planned("scene_1").result.quality)));
}

TEST_CASE("evaluating our own plan") {
  const Planned& p = planned("scene_1");
  const QualityReport q = evaluate(p.result.flight, p.scene, support::fixture_config());
  REQUIRE(q.facades.size() == p.scene.facades.size());
  for (const auto& f : q.facades) {
    if (!f.observable) continue;
    CHECK(f.quality.q_c >= 1.0 - 1e-6);
    CHECK(f.consistency == doctest::Approx(1.0));
  }
  CHECK(q.unsafe_waypoints.empty());
  CHECK(q.recon_below_tau == 0);
  CHECK(q.images == p.result.summary.images);
  CHECK(q.hovers == p.result.summary.hover);
}

TEST_CASE("oblique baseline has lower per-view facade detail") {
  const PlannerConfig cfg = support::fixture_config();
  const Planned& p = planned("scene_1");
  const FlightPlan op = op_baseline(p.scene, cfg);
  for (const auto& w : op.waypoints) CHECK(w.position.z == p.scene.safe_altitude);
  const QualityReport q = evaluate(op, p.scene, cfg);
  MESSAGE("ours " << p.result.quality.mean_view_q_d << " op " << q.mean_view_q_d);
  CHECK(p.result.quality.mean_view_q_d > q.mean_view_q_d);
}

TEST_CASE("a waypoint inside the zone is flagged") {
  const PlannerConfig cfg = support::fixture_config();
  const Planned& p = planned("scene_1");
  FlightPlan f = p.result.flight;
  const Facade& fa = p.scene.facades[0];
  const Vec2 near = fa.midpoint() + fa.normal * (cfg.d_min / 2.0);
  Waypoint bad;
  bad.position = {near.x, near.y, 20.0};
  f.waypoints.insert(f.waypoints.begin() + 1, bad);
  const QualityReport q = evaluate(f, p.scene, cfg);
  REQUIRE(q.unsafe_waypoints.size() == 1);
  CHECK(q.unsafe_waypoints[0] == 1);
  const QualityReport base = evaluate(p.result.flight, p.scene, cfg);
  for (std::size_t i = 0; i < q.facades.size(); ++i)
    CHECK(q.facades[i].quality.total == base.facades[i].quality.total);
}

TEST_CASE("planar stations cluster near buildings") {
  const double d_min = support::fixture_config().d_min;
  for (const std::string name : {"scene_1", "scene_3"}) {
    const Planned& p = planned(name);
    std::vector<Vec2> all, near, open;
    for (const auto& s : p.result.planar.stations) {
      const Vec2 q = s.position.xy();
      all.push_back(q);
      (oracle::clearance(q, p.scene) < 2.0 * d_min ? near : open).push_back(q);
    }
    REQUIRE_FALSE(near.empty());
    REQUIRE_FALSE(open.empty());
    const double sn = mean_nn_spacing(near, all), so = mean_nn_spacing(open, all);
    MESSAGE(name << ": near " << near.size() << " spacing " << sn << ", open " << open.size() << " spacing " << so);
    CHECK(sn < so);
  }
}

TEST_CASE("config round-trips and validates") {
  PlannerConfig c = support::fixture_config();
  c.tau_p = 1.5;
  c.launch = Vec3{1, 2, 60};
  const auto j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
  CHECK(config_to_json(config_from_json(nlohmann::json::object())) == config_to_json(PlannerConfig{}));
  PlannerConfig bad = c;
  bad.d_min = -1.0;
  try {
    bad.validate();
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(e.pointer() == "/d_min");
  }
  nlohmann::json wrong = j;
  wrong["k_d"] = "high";
  CHECK_THROWS_AS(config_from_json(wrong), InputError);
  CHECK(c.effective_step() == doctest::Approx(5.0));
}

TEST_CASE("invalid configuration stops planning") {
  PlannerConfig c = support::fixture_config();
  c.tilt_deg = 95.0;
  CHECK_THROWS_AS(plan(support::fixture_scene("scene_1"), c), InputError);
}
