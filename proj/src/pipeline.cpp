#include "dipplan/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "dipplan/error.hpp"
#include "dipplan/kernels.hpp"

namespace dipplan {

using nlohmann::json;

namespace {

constexpr int kHistogramBins = 21;
constexpr double kHistogramWidth = 0.1;

double number_at(const json& doc, const std::string& key, const std::string& pointer) {
  if (!doc.at(key).is_number()) throw InputError("expected a number", pointer + "/" + key);
  return doc.at(key).get<double>();
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn, PlanResult* timed = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Clock {
    PlanResult* res;
    const char* stage;
    std::chrono::steady_clock::time_point t0;
    ~Clock() {
      if (!res) return;
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (auto& [name, total] : res->stage_seconds)
        if (name == stage) {
          total += s;
          return;
        }
      res->stage_seconds.emplace_back(stage, s);
    }
  } clock{timed, stage, t0};
  try {
    return fn();
  } catch (const InputError&) {
    throw;
  } catch (const PlanningError&) {
    throw;
  } catch (const std::exception& e) {
    throw PlanningError(stage, e.what());
  }
}

}  // namespace

void PlannerConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw InputError(std::string(field) + " " + what, std::string("/") + field);
  };
  require(d_min > 0.0, "d_min", "must be > 0");
  require(k_d > 0.0 && k_d <= 1.0, "k_d", "must lie in (0, 1]");
  require(overlap_x >= 0.0 && overlap_x < 1.0 && overlap_y >= 0.0 && overlap_y < 1.0, "overlap",
          "ratios must lie in [0, 1)");
  require(weights.perspective >= 0 && weights.photometric >= 0 && weights.structural >= 0 &&
              weights.completeness >= 0,
          "lambda", "weights must be >= 0");
  require(tau_p >= 0.0, "tau_p", "must be >= 0");
  require(tau_s_deg > 0.0 && tau_s_deg <= 60.0, "tau_s_deg", "must lie in (0, 60]");
  require(tau_r >= 0.0, "tau_r", "must be >= 0");
  require(beta >= 0.0, "beta", "must be >= 0");
  require(tilt_deg > 0.0 && tilt_deg < 90.0, "tilt_deg", "must lie in (0, 90)");
  require(max_iters >= 1, "max_iters", "must be >= 1");
  require(candidate_step >= 0.0, "candidate_step", "must be >= 0");
  require(surface_spacing > 0.0, "surface_spacing", "must be > 0");
  require(parallax_sigma_deg > 0.0, "parallax_sigma_deg", "must be > 0");
  require(route_min_leg > 0.0, "route_min_leg", "must be > 0");
  require(camera.valid(), "camera", "has non-positive fields");
}

json camera_to_json(const CameraModel& c) {
  return {{"focal_mm", c.focal_mm},     {"sensor_w_mm", c.sensor_w_mm}, {"sensor_h_mm", c.sensor_h_mm},
          {"image_w_px", c.image_w_px}, {"image_h_px", c.image_h_px},   {"d_max_m", c.d_max_m},
          {"gsd_cm", c.gsd_cm}};
}

CameraModel camera_from_json(const json& doc, const std::string& pointer) {
  if (!doc.is_object()) throw InputError("camera must be an object", pointer.empty() ? "/" : pointer);
  CameraModel c;
  for (const auto& [key, value] : doc.items()) {
    if (key == "focal_mm") c.focal_mm = number_at(doc, key, pointer);
    else if (key == "sensor_w_mm") c.sensor_w_mm = number_at(doc, key, pointer);
    else if (key == "sensor_h_mm") c.sensor_h_mm = number_at(doc, key, pointer);
    else if (key == "image_w_px") c.image_w_px = static_cast<int>(number_at(doc, key, pointer));
    else if (key == "image_h_px") c.image_h_px = static_cast<int>(number_at(doc, key, pointer));
    else if (key == "d_max_m") c.d_max_m = number_at(doc, key, pointer);
    else if (key == "gsd_cm") c.gsd_cm = number_at(doc, key, pointer);
    else throw InputError("unknown camera field", pointer + "/" + key);
  }
  if (!c.valid()) throw InputError("camera fields must be positive", pointer.empty() ? "/" : pointer);
  return c;
}

json config_to_json(const PlannerConfig& c) {
  json doc = {{"d_min", c.d_min},
              {"k_d", c.k_d},
              {"overlap", {c.overlap_x, c.overlap_y}},
              {"lambda",
               {c.weights.perspective, c.weights.photometric, c.weights.structural,
                c.weights.completeness}},
              {"tau_p", c.tau_p},
              {"tau_s_deg", c.tau_s_deg},
              {"tau_r", c.tau_r},
              {"beta", c.beta},
              {"tilt_deg", c.tilt_deg},
              {"max_iters", c.max_iters},
              {"candidate_step", c.candidate_step},
              {"surface_spacing", c.surface_spacing},
              {"parallax_deg", c.parallax_deg},
              {"parallax_sigma_deg", c.parallax_sigma_deg},
              {"route_min_leg", c.route_min_leg},
              {"camera", camera_to_json(c.camera)},
              {"deterministic", c.deterministic}};
  doc["launch"] = c.launch ? json{c.launch->x, c.launch->y, c.launch->z} : json(nullptr);
  return doc;
}

PlannerConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("config must be a JSON object", "/");
  PlannerConfig c;
  auto pair_at = [&](const std::string& key, std::size_t n) {
    const json& v = doc.at(key);
    if (!v.is_array() || v.size() != n) throw InputError("expected an array of " + std::to_string(n) + " numbers", "/" + key);
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!v[i].is_number()) throw InputError("expected a number", "/" + key + "/" + std::to_string(i));
      out.push_back(v[i].get<double>());
    }
    return out;
  };
  for (const auto& [key, value] : doc.items()) {
    if (key == "d_min") c.d_min = number_at(doc, key, "");
    else if (key == "k_d") c.k_d = number_at(doc, key, "");
    else if (key == "overlap") {
      const auto v = pair_at(key, 2);
      c.overlap_x = v[0];
      c.overlap_y = v[1];
    } else if (key == "lambda") {
      const auto v = pair_at(key, 4);
      c.weights = {v[0], v[1], v[2], v[3]};
    } else if (key == "tau_p") c.tau_p = number_at(doc, key, "");
    else if (key == "tau_s_deg") c.tau_s_deg = number_at(doc, key, "");
    else if (key == "tau_r") c.tau_r = number_at(doc, key, "");
    else if (key == "beta") c.beta = number_at(doc, key, "");
    else if (key == "tilt_deg") c.tilt_deg = number_at(doc, key, "");
    else if (key == "max_iters") {
      if (!value.is_number_integer()) throw InputError("expected an integer", "/max_iters");
      c.max_iters = value.get<int>();
    } else if (key == "candidate_step") c.candidate_step = number_at(doc, key, "");
    else if (key == "surface_spacing") c.surface_spacing = number_at(doc, key, "");
    else if (key == "parallax_deg") c.parallax_deg = number_at(doc, key, "");
    else if (key == "parallax_sigma_deg") c.parallax_sigma_deg = number_at(doc, key, "");
    else if (key == "route_min_leg") c.route_min_leg = number_at(doc, key, "");
    else if (key == "camera") c.camera = camera_from_json(value, "/camera");
    else if (key == "deterministic") {
      if (!value.is_boolean()) throw InputError("expected a boolean", "/deterministic");
      c.deterministic = value.get<bool>();
    } else if (key == "launch") {
      if (value.is_null()) {
        c.launch.reset();
      } else {
        const auto v = pair_at(key, 3);
        c.launch = Vec3{v[0], v[1], v[2]};
      }
    } else {
      throw InputError("unknown config field", "/" + key);
    }
  }
  c.validate();
  return c;
}

QualityParams quality_params(const PlannerConfig& config) {
  QualityParams q;
  q.weights = config.weights;
  q.beta = config.beta;
  q.d_min = config.d_min;
  q.d_max = config.camera.max_view_distance();
  q.half_hfov = 0.5 * config.camera.hfov();
  return q;
}

DippingParams dipping_params(const PlannerConfig& config) {
  DippingParams p;
  p.k_d = config.k_d;
  p.tau_p = config.effective_tau_p();
  p.tau_s_deg = config.tau_s_deg;
  p.init_half_steps = static_cast<int>(std::floor(60.0 / config.tau_s_deg + 1e-9));
  p.max_iters = config.max_iters;
  return p;
}

PlanarParams planar_params(const PlannerConfig& config) {
  PlanarParams p;
  p.overlap_x = config.overlap_x;
  p.overlap_y = config.overlap_y;
  p.tilt_deg = config.tilt_deg;
  p.tau_r = config.tau_r;
  p.tau_p = config.effective_tau_p();
  p.max_iters = config.max_iters;
  p.beta = config.beta;
  p.recon.parallax_deg = config.parallax_deg;
  p.recon.parallax_sigma_deg = config.parallax_sigma_deg;
  p.recon.d_max = config.camera.max_view_distance();
  return p;
}

Vec3 launch_point(const Scene& scene, const PlannerConfig& config) {
  if (config.launch) return *config.launch;
  return {scene.bounds.lo.x, scene.bounds.lo.y, scene.safe_altitude};
}

SceneModel build_scene_model(const Scene& scene, const PlannerConfig& config) {
  SceneModel m;
  m.mesh = extrude_25d(scene, scene.safe_altitude - config.d_min);
  m.samples = sample_surface(m.mesh, config.surface_spacing);
  return m;
}

namespace {

void check_scene(const Scene& scene, const PlannerConfig& config) {
  if (scene.safe_altitude < scene.min_flight_altitude)
    throw InputError("safe altitude is below the minimum flight altitude", "/safe_altitude");
  for (std::size_t b = 0; b < scene.buildings.size(); ++b) {
    const Facade& f = scene.facades[scene.buildings[b].first_facade];
    if (f.height > scene.safe_altitude - config.d_min + 1e-9)
      throw InputError("building " + scene.buildings[b].id +
                           " is taller than the safe altitude minus d_min",
                       "/buildings/" + std::to_string(b));
  }
}

SurfaceRef plane_under(const Scene& scene, Vec2 p) {
  if (auto b = scene.building_containing(p)) return {SurfaceKind::Roof, *b};
  return {SurfaceKind::Ground, 0};
}

HoverGroup station_group(const Scene& scene, const PlanarStation& s, double tilt, int source) {
  HoverGroup g;
  g.kind = HoverGroup::Kind::Planar;
  g.position = s.position;
  g.source = source;
  const SurfaceRef target = plane_under(scene, s.position.xy());
  for (const View3D& v : station_views(s, tilt)) g.captures.push_back({v, target});
  return g;
}

}  // namespace

PlanResult plan(const Scene& scene, const PlannerConfig& config) {
  config.validate();
  check_scene(scene, config);
  const Exec exec = Exec::Parallel;
  PlanResult res;
  res.warnings = scene.warnings;
  const double d_max = config.camera.max_view_distance();

  res.zone = run_stage("scene", [&] { return NoDippingZone(scene, config.d_min); }, &res);
  const SceneModel model = run_stage("scene", [&] { return build_scene_model(scene, config); }, &res);

  // Dipping views.
  run_stage("dipping", [&] {
    if (scene.facades.empty()) return 0;
    CandidateGrid grid = grid_sample_candidates(scene, res.zone, config.effective_step(), d_max);
    res.candidates = grid.points;
    res.warnings.insert(res.warnings.end(), grid.warnings.begin(), grid.warnings.end());
    const VisibilityIndex index = build_visibility_index(scene, res.candidates, d_max, exec);
    const DippingContext ctx{scene, res.zone, config.camera, quality_params(config),
                             dipping_params(config)};
    res.dipping = initialize_dipping(ctx, res.candidates, index);
    res.dipping_initial = res.dipping;
    res.dipping_opt = optimize_dipping(res.dipping, ctx);
    res.lifted = lift_plan(res.dipping, ctx);
    return 0;
  }, &res);

  // Planar views, with the dipping views frozen.
  std::vector<View3D> fixed;
  for (const HoverGroup& g : res.lifted.hovers)
    for (const Capture& c : g.captures) fixed.push_back(c.view);
  const PlanarContext pctx{scene,          model.mesh, res.zone, model.samples, config.camera,
                           planar_params(config), fixed, exec};
  res.planar = run_stage("planar", [&] { return plan_planar(pctx); }, &res);

  // Route.
  run_stage("route", [&] {
    std::vector<HoverGroup> groups = res.lifted.hovers;
    for (std::size_t k = 0; k < res.planar.stations.size(); ++k)
      groups.push_back(
          station_group(scene, res.planar.stations[k], config.tilt_deg, static_cast<int>(k)));
    res.units = make_route_units(groups);
    if (res.units.empty()) return 0;
    SafeRouter router(res.zone, scene.safe_altitude);
    RouteParams rp;
    rp.min_leg = config.route_min_leg;
    const RouteGraph graph = build_route_graph(res.units, router, scene, rp, exec);
    const int start = nearest_unit(res.units, launch_point(scene, config));
    res.tour = solve_tour(graph.cost, graph.n, start, rp.exact_limit);
    res.nn_tour_cost = nearest_neighbor_tour(graph.cost, graph.n, start).cost;
    res.flight = sequence_views(res.tour, res.units, router);
    return 0;
  }, &res);

  res.quality = run_stage("evaluate", [&] { return evaluate(res.flight, scene, config); }, &res);
  res.summary = summarize(res.flight);
  return res;
}

PlanSummary summarize(const FlightPlan& flight) {
  return {flight.images(), flight.hovers(), flight.trajectory_m};
}

QualityReport evaluate(const FlightPlan& flight, const Scene& scene, const PlannerConfig& config) {
  config.validate();
  QualityReport rep;
  rep.images = flight.images();
  rep.hovers = flight.hovers();
  rep.trajectory_m = flight.trajectory_m;
  const NoDippingZone zone(scene, config.d_min);
  const SceneModel model = build_scene_model(scene, config);
  const QualityParams qp = quality_params(config);

  for (std::size_t i = 0; i < flight.waypoints.size(); ++i) {
    const Vec3 p = flight.waypoints[i].position;
    if (zone.contains(p) || p.z < scene.min_flight_altitude - 1e-6 ||
        p.z > scene.safe_altitude + 1e-6)
      rep.unsafe_waypoints.push_back(static_cast<int>(i));
  }

  std::vector<View3D> views, nadirs;
  std::vector<SurfaceRef> targets;
  bool targeted = false;
  for (const Waypoint& w : flight.waypoints)
    for (const CaptureRecord& c : w.captures) {
      views.push_back({w.position, c.yaw_deg, c.pitch_deg});
      targets.push_back(c.target);
      targeted = targeted || c.target.kind == SurfaceKind::Facade;
      if (views.back().is_nadir()) nadirs.push_back(views.back());
    }

  // Facades.
  std::vector<Vec2> candidates;
  if (!scene.facades.empty())
    candidates = grid_sample_candidates(scene, zone, config.effective_step(), qp.d_max).points;
  double qd_sum = 0.0;
  std::size_t qd_n = 0;
  for (const Facade& f : scene.facades) {
    FacadeReport fr;
    fr.facade = f.id;
    fr.observable = std::any_of(candidates.begin(), candidates.end(), [&](Vec2 c) {
      return !visible_span(c, scene, f, qp.d_max).empty();
    });
    std::vector<FacadeView> fvs;
    for (std::size_t i = 0; i < views.size(); ++i) {
      const View3D& v = views[i];
      if (targeted ? !(targets[i] == SurfaceRef{SurfaceKind::Facade, f.id}) : v.is_nadir()) continue;
      const Vec2 p = v.position.xy();
      if (scene.building_containing(p)) continue;
      FacadeView fv = make_facade_view({p, direction_of_yaw(v.yaw_deg)}, f,
                                       visible_span(p, scene, f, qp.d_max), qp.half_hfov);
      if (fv.coverage.empty()) continue;
      fv.distance = std::hypot(fv.distance, std::max(0.0, v.position.z - f.height));
      fvs.push_back(std::move(fv));
    }
    fr.quality = facade_quality(fvs, f, qp);
    fr.consistency = direction_consistency(fvs);
    for (const FacadeView& fv : fvs) fr.mean_view_q_d += view_photometric(fv, qp);
    qd_sum += fr.mean_view_q_d;
    qd_n += fvs.size();
    if (!fvs.empty()) fr.mean_view_q_d /= static_cast<double>(fvs.size());
    rep.facades.push_back(fr);
  }
  rep.mean_view_q_d = qd_n ? qd_sum / static_cast<double>(qd_n) : 0.0;

  // Ground and roofs.
  const std::vector<int> plane_of = horizontal_plane_of(model.samples);
  std::vector<std::vector<Vec3>> planes(1 + scene.buildings.size());
  for (std::size_t i = 0; i < plane_of.size(); ++i)
    if (plane_of[i] >= 0) planes[plane_of[i]].push_back(model.samples.points[i].position);
  for (std::size_t p = 0; p < planes.size(); ++p) {
    PlaneReport pr;
    pr.plane = p == 0 ? SurfaceRef{SurfaceKind::Ground, 0}
                      : SurfaceRef{SurfaceKind::Roof, static_cast<int>(p) - 1};
    pr.samples = planes[p].size();
    pr.quality = ground_quality(nadirs, planes[p], config.camera, config.beta);
    rep.planes.push_back(pr);
  }

  // Reconstructability.
  const PlanarParams pp = planar_params(config);
  const auto obs = build_observations(model.samples, views, model.mesh, config.camera,
                                      pp.recon.d_max, Exec::Parallel);
  rep.recon = score_observations(obs, pp.recon, Exec::Parallel);
  rep.histogram.assign(kHistogramBins, 0);
  rep.recon_min = rep.recon.empty() ? 0.0 : rep.recon.front().value;
  for (const ReconScore& r : rep.recon) {
    const int bin = std::min(kHistogramBins - 1, static_cast<int>(r.value / kHistogramWidth));
    ++rep.histogram[bin];
    rep.recon_min = std::min(rep.recon_min, r.value);
    if (r.value < config.tau_r) ++rep.recon_below_tau;
  }
  return rep;
}

FlightPlan op_baseline(const Scene& scene, const PlannerConfig& config) {
  const PlanarParams pp = planar_params(config);
  std::vector<PlanarStation> stations =
      generate_planar(scene.bounds, scene.safe_altitude, config.camera, pp);
  // Serpentine rows.
  const Vec2 step = planar_step(config.camera, scene.safe_altitude, pp.overlap_x, pp.overlap_y);
  const int nx = std::max(1, static_cast<int>(std::ceil(scene.bounds.width() / step.x - 1e-9)) + 1);
  for (std::size_t row = 0; row * nx < stations.size(); ++row)
    if (row % 2 == 1)
      std::reverse(stations.begin() + static_cast<std::ptrdiff_t>(row * nx),
                   stations.begin() + static_cast<std::ptrdiff_t>(std::min(stations.size(), (row + 1) * nx)));
  FlightPlan fp;
  for (std::size_t k = 0; k < stations.size(); ++k) {
    Waypoint w;
    w.position = stations[k].position;
    w.kind = HoverGroup::Kind::Planar;
    w.source = static_cast<int>(k);
    for (const View3D& v : station_views(stations[k], config.tilt_deg))
      w.captures.push_back({v.yaw_deg, v.pitch_deg, {SurfaceKind::Ground, 0}});
    if (!fp.waypoints.empty()) {
      fp.legs.push_back({fp.waypoints.back().position, w.position});
      fp.trajectory_m += dist(fp.waypoints.back().position, w.position);
    }
    fp.waypoints.push_back(std::move(w));
  }
  return fp;
}

}  // namespace dipplan
