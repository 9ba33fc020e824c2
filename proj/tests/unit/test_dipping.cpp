#include <doctest.h>

#include <chrono>

#include "dipplan/error.hpp"
#include "dipplan/kernels.hpp"
#include "dipplan/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace dipplan;
using support::rect;
using support::scene_of;

namespace {

CameraModel sensor8() {
  CameraModel c;
  c.sensor_h_mm = 8.0;
  c.focal_mm = 12.67;
  return c;
}

bool printed_dominance(const std::vector<double>& g_new, const std::vector<double>& g_old) {
  if (g_new.size() != g_old.size()) return false;
  bool strict = false;
  for (std::size_t i = 0; i < g_new.size(); ++i) {
    if (!(g_new[i] <= g_old[i])) return false;
    if (g_new[i] < g_old[i]) strict = true;
  }
  return strict;
}

struct Setup {
  Scene scene;
  PlannerConfig cfg;
  NoDippingZone zone;
  std::vector<Vec2> candidates;
  VisibilityIndex index;
  DippingContext ctx() const {
    return {scene, zone, cfg.camera, quality_params(cfg), dipping_params(cfg)};
  }
};

Setup make_setup(Scene s) {
  Setup st{std::move(s), support::fixture_config(), {}, {}, {}};
  st.zone = NoDippingZone(st.scene, st.cfg.d_min);
  const double d_max = quality_params(st.cfg).d_max;
  st.candidates = grid_sample_candidates(st.scene, st.zone, st.cfg.effective_step(), d_max).points;
  st.index = build_visibility_index(st.scene, st.candidates, d_max);
  return st;
}

}  // namespace

TEST_CASE("projected sensor height") {
  const CameraModel c = sensor8();
  CHECK(h_pic(c, 30.0) == doctest::Approx(8.0 * 30.0 / 12.67));
  CHECK(h_pic(c, 30.0) == doctest::Approx(18.94).epsilon(1e-3));
  CHECK(h_pic(c, 60.0) == doctest::Approx(2.0 * h_pic(c, 30.0)));
  CameraModel tele = c;
  tele.focal_mm = 1e9;
  CHECK(h_pic(tele, 30.0) < 1e-6);
  CHECK_THROWS_AS(h_pic(c, 0.0), InputError);
}

TEST_CASE("lifting a dipping sequence") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const Facade& f = s.facades[0];
  const CameraModel c = sensor8();
  const DippingSequence3D seq = lift_sequence({10, -30}, f, {0, 1}, 60.0, 10.0, 0.8, c);
  const double step = 0.8 * 8.0 * 30.0 / 12.67;
  REQUIRE(seq.views.size() == 4);
  const double expected[] = {60.0, 60.0 - step, 60.0 - 2 * step, 60.0 - 3 * step};
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(seq.views[k].position.z - expected[k]) < 1e-3);
    CHECK(seq.views[k].position.xy() == Vec2{10, -30});
    CHECK(seq.views[k].pitch_deg == 0.0);
    CHECK(seq.views[k].yaw_deg == doctest::Approx(0.0));
  }
  CHECK(std::abs(seq.views[1].position.z - 44.846) < 1e-3);
  CHECK(std::abs(seq.views[3].position.z - 14.538) < 1e-3);
  for (int k = 1; k < 4; ++k)
    CHECK(std::abs(seq.views[k - 1].position.z - seq.views[k].position.z - step) < 1e-3);
  // Extra view: lower image edge meets the facade at ground level.
  REQUIRE(seq.lowest_extra_view);
  const double z = seq.views.back().position.z;
  const double down = -deg2rad(seq.lowest_extra_view->pitch_deg) + c.vfov() / 2.0;
  CHECK(z - 30.0 * std::tan(down) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(seq.lowest_extra_view->position == seq.views.back().position);
}

TEST_CASE("adjacent dipping footprints overlap by 1 - k_d") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const CameraModel c = sensor8();
  const DippingSequence3D seq = lift_sequence({10, -30}, s.facades[0], {0, 1}, 60.0, 10.0, 0.8, c);
  const double dz = seq.views[0].position.z - seq.views[1].position.z;
  CHECK((seq.h_pic - dz) / seq.h_pic == doctest::Approx(0.2));
}

TEST_CASE("short descent keeps one view plus the extra tilt") {
  const Scene s = scene_of({rect(0, 0, 20, 20)}, 15.0, 10.0, 5.0);
  const DippingSequence3D seq = lift_sequence({10, -30}, s.facades[0], {0, 1}, 15.0, 10.0, 0.8, sensor8());
  CHECK(seq.views.size() == 1);
  CHECK(seq.lowest_extra_view.has_value());
  CHECK_THROWS_AS(lift_sequence({10, -30}, s.facades[0], {0, 1}, 9.0, 10.0, 0.8, sensor8()), InputError);
}

TEST_CASE("merge savings curve") {
  const double tau = 3.7;
  CHECK(merge_savings(0.0, tau) == 0.5);
  CHECK(std::abs(merge_savings(tau, tau) - 0.5 * std::exp(-4.5)) < 1e-9);
  CHECK(merge_savings(1.01 * tau, tau) == 0.0);
  CHECK(merge_savings(1.0, 0.0) == 0.0);
  double prev = 1.0;
  for (double d = 0.0; d <= tau; d += tau / 50) {
    CHECK(merge_savings(d, tau) <= prev);
    prev = merge_savings(d, tau);
  }
}

TEST_CASE("two three-view sequences sharing one position give five hovers") {
  // Two facades of a corner at distances 22 m and 28 m: both descents start
  // at H, no other cross pair comes within tau_d.
  const Scene s = scene_of({rect(0, 0, 40, 40)});
  CameraModel c;  // default 13.3 mm sensor height
  const Vec2 p{62, -28};
  const Facade& south = s.facades[0];
  const Facade& east = s.facades[1];
  const auto a = lift_sequence(p, south, {0, 1}, 60.0, 10.0, 0.8, c);
  const auto b = lift_sequence(p, east, {-1, 0}, 60.0, 10.0, 0.8, c);
  REQUIRE(a.views.size() == 3);
  REQUIRE(b.views.size() == 3);
  const HoverCost hc = hovering_cost({a, b}, 0.8);
  CHECK(hc.views == 6);
  CHECK(hc.groups.size() == 5);
  CHECK(hc.merged_pairs == 1);
  CHECK(hc.analytic == doctest::Approx(6.0 - 0.5));
  // The merged group sits at the pair midpoint with both directions.
  const HoverGroup& top = hc.groups.front();
  CHECK(top.position == Vec3{62, -28, 60});
  CHECK(top.captures.size() == 2);
}

TEST_CASE("hand-built sequences: coincident pair merges at the midpoint") {
  auto seq = [](std::vector<Vec3> pos, int facade) {
    DippingSequence3D s;
    s.facade = facade;
    s.h_pic = 10.0;
    for (Vec3 p : pos) s.views.push_back({p, facade == 0 ? 0.0 : 90.0, 0.0});
    return s;
  };
  SUBCASE("coincident") {
    const auto a = seq({{0, 0, 60}, {0, 0, 50}, {0, 0, 40}}, 0);
    const auto b = seq({{0, 0, 55}, {0, 0, 40}, {0, 0, 25}}, 1);
    const HoverCost hc = hovering_cost({a, b}, 0.8);
    CHECK(hc.views == 6);
    CHECK(hc.groups.size() == 5);
  }
  SUBCASE("nearby pair uses the midpoint") {
    const auto a = seq({{0, 0, 60}}, 0);
    const auto b = seq({{0, 0, 59}}, 1);
    const HoverCost hc = hovering_cost({a, b}, 0.8);
    REQUIRE(hc.groups.size() == 1);
    CHECK(hc.groups[0].position.z == doctest::Approx(59.5));
    CHECK(hc.analytic == doctest::Approx(2.0 - merge_savings(1.0, 2.0)));
  }
  SUBCASE("nothing within tau_d") {
    const auto a = seq({{0, 0, 60}, {0, 0, 50}}, 0);
    const auto b = seq({{0, 0, 57}, {0, 0, 46}}, 1);
    const HoverCost hc = hovering_cost({a, b}, 0.8);
    CHECK(hc.groups.size() == 4);
    CHECK(hc.analytic == doctest::Approx(4.0));
  }
}

TEST_CASE("merge bound holds on lifted fixture plans") {
  Setup st = make_setup(support::fixture_scene("scene_2"));
  const DippingContext ctx = st.ctx();
  const DippingPlan plan = initialize_dipping(ctx, st.candidates, st.index);
  const LiftedDipping lifted = lift_plan(plan, ctx);
  CHECK(lifted.analytic_cost >= static_cast<double>(lifted.hovers.size()) - 0.5 * lifted.merged_pairs - 1e-9);
  for (const auto& seq : lifted.sequences) {
    for (std::size_t k = 1; k < seq.views.size(); ++k)
      CHECK(std::abs(seq.views[k - 1].position.z - seq.views[k].position.z - 0.8 * seq.h_pic) < 1e-3);
    for (const auto& v : seq.views) {
      CHECK(v.position.z >= st.scene.min_flight_altitude - 1e-9);
      CHECK(v.position.z <= st.scene.safe_altitude + 1e-9);
      CHECK_FALSE(st.zone.contains(v.position.xy()));
    }
  }
}

TEST_CASE("dominance follows the printed definition") {
  CHECK(dominates({1, 2}, {1, 3}));
  CHECK_FALSE(dominates({1, 3}, {1, 3}));
  CHECK_FALSE(dominates({0, 4}, {1, 3}));
  CHECK_FALSE(dominates({1}, {1, 3}));
}

TEST_CASE("unobstructed facade keeps the inverse normal") {
  Setup st = make_setup(support::fixture_scene("scene_1"));
  const DippingContext ctx = st.ctx();
  for (const Facade& f : st.scene.facades) {
    std::vector<std::pair<Vec2, IntervalSet>> obs;
    for (const auto& o : facade_observers(st.index, f.id)) obs.push_back({st.candidates[o.candidate], o.span});
    const auto d = init_direction(f, obs, ctx);
    REQUIRE(d);
    CHECK(d->x == doctest::Approx(-f.normal.x));
    CHECK(d->y == doctest::Approx(-f.normal.y));
  }
}

TEST_CASE("one-sided occlusion turns the initial direction") {
  // A thin wall in front of the western half hides it from straight-on views.
  Setup st = make_setup(scene_of({rect(0, 0, 20, 20), rect(-50, -14, 60, 2)}));
  const DippingContext ctx = st.ctx();
  const Facade& f = st.scene.facades[0];
  std::vector<std::pair<Vec2, IntervalSet>> obs;
  for (const auto& o : facade_observers(st.index, f.id)) obs.push_back({st.candidates[o.candidate], o.span});
  const auto d = init_direction(f, obs, ctx);
  REQUIRE(d);
  // Exhaustive scan of the 25 candidate directions.
  double best_q = -1.0;
  Vec2 best{};
  int best_k = 0;
  for (int k = -12; k <= 12; ++k) {
    const Vec2 dir = rotated(-f.normal, deg2rad(5.0 * k));
    std::vector<FacadeView> views;
    for (const auto& [p, span] : obs) views.push_back(make_facade_view({p, dir}, f, span, ctx.quality.half_hfov));
    const double q = facade_quality(views, f, ctx.quality).total;
    const bool better = q > best_q + 1e-12 ||
                        (std::abs(q - best_q) <= 1e-12 &&
                         (std::abs(k) < std::abs(best_k) || (std::abs(k) == std::abs(best_k) && k < best_k)));
    if (better) {
      best_q = q;
      best = dir;
      best_k = k;
    }
  }
  CHECK(d->x == doctest::Approx(best.x));
  CHECK(d->y == doctest::Approx(best.y));
  CHECK(best_k != 0);
  // Views come from the open (eastern) side and look back west.
  CHECK(d->x < 0.0);
}

TEST_CASE("facade seen only from beyond d_max is unobservable") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  PlannerConfig cfg = support::fixture_config();
  const NoDippingZone zone(s, 10.0);
  const std::vector<Vec2> far{{10, -400}, {10, 420}, {-400, 10}, {420, 10}};
  const VisibilityIndex index = build_visibility_index(s, far, 150.0);
  const DippingContext ctx{s, zone, cfg.camera, quality_params(cfg), dipping_params(cfg)};
  const DippingPlan plan = initialize_dipping(ctx, far, index);
  for (const auto& f : s.facades) CHECK_FALSE(plan.observable(f.id));
  CHECK(plan.points.empty());
}

TEST_CASE("selection removes redundant observers but keeps lone ones") {
  const Scene s = scene_of({rect(0, 0, 20, 20)});
  const PlannerConfig cfg = support::fixture_config();
  const NoDippingZone zone(s, 10.0);
  const std::vector<Vec2> cands{{10, -40}, {10, -40}, {55, 10}};
  const VisibilityIndex index = build_visibility_index(s, cands, 150.0);
  const DippingContext ctx{s, zone, cfg.camera, quality_params(cfg), dipping_params(cfg)};
  std::vector<std::optional<Vec2>> dirs(s.facades.size());
  for (const auto& f : s.facades) dirs[f.id] = -f.normal;
  const auto kept = select_dipping_points(ctx, cands, index, dirs);
  REQUIRE(kept.size() == 2);
  CHECK((kept[0] == 0 || kept[0] == 1));
  CHECK(kept[1] == 2);
}

TEST_CASE("selection on the five-building scene") {
  Setup st = make_setup(support::fixture_scene("scene_5"));
  const DippingContext ctx = st.ctx();
  const DippingPlan plan = initialize_dipping(ctx, st.candidates, st.index);
  MESSAGE("survivors " << plan.points.size() << " of " << st.candidates.size());
  CHECK(plan.points.size() * 10 <= st.candidates.size());
  // Completeness is what every candidate together achieves.
  for (const Facade& f : st.scene.facades) {
    if (!plan.observable(f.id)) continue;
    std::vector<FacadeView> all;
    for (const auto& o : facade_observers(st.index, f.id))
      all.push_back(make_facade_view({st.candidates[o.candidate], *plan.directions[f.id]}, f, o.span,
                                     ctx.quality.half_hfov));
    const double full = facade_quality(all, f, ctx.quality).q_c;
    CHECK(plan_facade_quality(plan, f.id, ctx).q_c >= full - 1e-6);
  }
}

TEST_CASE("optimizer: dominance log, completeness, fixed point") {
  for (const std::string& name : {std::string("scene_1"), std::string("scene_2")}) {
    Setup st = make_setup(support::fixture_scene(name));
    const DippingContext ctx = st.ctx();
    DippingPlan plan = initialize_dipping(ctx, st.candidates, st.index);
    const DippingPlan initial = plan;
    const DippingOptimizeResult res = optimize_dipping(plan, ctx);
    CHECK(res.converged);
    CHECK(res.iterations <= 5);
    for (const MoveRecord& m : res.log) CHECK_MESSAGE(printed_dominance(m.after, m.before), m.kind);
    for (const Facade& f : st.scene.facades) {
      if (!plan.observable(f.id)) continue;
      CHECK(plan_facade_quality(plan, f.id, ctx).q_c >= plan_facade_quality(initial, f.id, ctx).q_c - 1e-6);
    }
    std::size_t views_before = 0, views_after = 0;
    for (const auto& p : initial.points) views_before += p.facades.size();
    for (const auto& p : plan.points) views_after += p.facades.size();
    CHECK(views_after <= views_before);
    for (const auto& p : plan.points) CHECK_FALSE(st.zone.contains(p.position));
    // Rerunning from the fixed point changes nothing.
    DippingPlan again = plan;
    const DippingOptimizeResult second = optimize_dipping(again, ctx);
    CHECK(second.log.empty());
    CHECK(second.iterations == 1);
    REQUIRE(again.points.size() == plan.points.size());
    for (std::size_t i = 0; i < plan.points.size(); ++i) {
      CHECK(again.points[i].position == plan.points[i].position);
      CHECK(again.points[i].facades == plan.points[i].facades);
    }
    for (std::size_t f = 0; f < plan.directions.size(); ++f) CHECK(again.directions[f] == plan.directions[f]);
  }
}
