// Serial reference kernels against their OpenMP versions on a fixture scene.

#include <benchmark/benchmark.h>

#include <string>

#include "dipplan/io.hpp"
#include "dipplan/pipeline.hpp"

using namespace dipplan;

namespace {

struct Fixture {
  Scene scene;
  PlannerConfig cfg;
  SceneModel model;
  NoDippingZone zone;
  std::vector<Vec2> candidates;
  std::vector<View3D> views;
  std::vector<std::vector<SampleObservation>> observations;
  std::vector<RouteUnit> units;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const std::string dir = DIPPLAN_FIXTURE_DIR;
    Fixture x{parse_scene(read_json(dir + "/scene_3.json"), 10.0), {}, {}, {}, {}, {}, {}, {}};
    x.cfg = config_from_json(read_json(dir + "/config.json"));
    x.cfg.camera = camera_from_json(read_json(dir + "/camera.json"));
    x.model = build_scene_model(x.scene, x.cfg);
    x.zone = NoDippingZone(x.scene, x.cfg.d_min);
    x.candidates =
        grid_sample_candidates(x.scene, x.zone, x.cfg.effective_step(), quality_params(x.cfg).d_max).points;
    const PlanarParams pp = planar_params(x.cfg);
    for (const auto& s : generate_planar(x.scene.bounds, x.scene.safe_altitude, x.cfg.camera, pp))
      for (const auto& v : station_views(s, pp.tilt_deg)) x.views.push_back(v);
    x.observations = build_observations(x.model.samples, x.views, x.model.mesh, x.cfg.camera, pp.recon.d_max,
                                        Exec::Serial);
    x.units = plan(x.scene, x.cfg).units;
    return x;
  }();
  return f;
}

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_VisibilityIndex(benchmark::State& st) {
  const Fixture& f = fixture();
  const double d_max = quality_params(f.cfg).d_max;
  for (auto _ : st) benchmark::DoNotOptimize(build_visibility_index(f.scene, f.candidates, d_max, exec_of(st)));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

void BM_Observations(benchmark::State& st) {
  const Fixture& f = fixture();
  const double d_max = planar_params(f.cfg).recon.d_max;
  for (auto _ : st)
    benchmark::DoNotOptimize(
        build_observations(f.model.samples, f.views, f.model.mesh, f.cfg.camera, d_max, exec_of(st)));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

void BM_ScoreObservations(benchmark::State& st) {
  const Fixture& f = fixture();
  const ReconParams p = planar_params(f.cfg).recon;
  for (auto _ : st) benchmark::DoNotOptimize(score_observations(f.observations, p, exec_of(st)));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

void BM_RouteGraph(benchmark::State& st) {
  const Fixture& f = fixture();
  SafeRouter router(f.zone, f.scene.safe_altitude);
  std::vector<double> altitudes;
  for (const auto& u : f.units)
    for (const auto& g : u.groups) altitudes.push_back(g.position.z);
  router.prepare(altitudes);
  for (auto _ : st)
    benchmark::DoNotOptimize(build_route_graph(f.units, router, f.scene, RouteParams{}, exec_of(st)));
  st.SetLabel(st.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_VisibilityIndex)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Observations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreObservations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RouteGraph)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
