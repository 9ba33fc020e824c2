#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dipplan/dipping.hpp"
#include "dipplan/planar.hpp"
#include "dipplan/route.hpp"

namespace dipplan {

struct PlannerConfig {
  double d_min = 10.0;
  double k_d = 0.8;
  double overlap_x = 0.8;
  double overlap_y = 0.8;
  Weights weights;
  double tau_p = 0.0;  ///< <= 0 means candidate_step / 4
  double tau_s_deg = 5.0;
  double tau_r = 0.2;
  double beta = 0.5;
  double tilt_deg = 45.0;
  int max_iters = 10;
  double candidate_step = 0.0;  ///< <= 0 means d_min / 2
  double surface_spacing = 2.0;
  double parallax_deg = 15.0;
  double parallax_sigma_deg = 5.0;
  double route_min_leg = 0.1;
  CameraModel camera;
  std::optional<Vec3> launch;  ///< default: south-west bounds corner at H
  bool deterministic = true;

  double effective_step() const { return candidate_step > 0.0 ? candidate_step : d_min / 2.0; }
  double effective_tau_p() const { return tau_p > 0.0 ? tau_p : effective_step() / 4.0; }
  /// Throws InputError naming the offending field.
  void validate() const;
};

nlohmann::json config_to_json(const PlannerConfig& c);
/// Missing keys keep their defaults. Throws InputError with a JSON pointer.
PlannerConfig config_from_json(const nlohmann::json& doc);
nlohmann::json camera_to_json(const CameraModel& c);
CameraModel camera_from_json(const nlohmann::json& doc, const std::string& pointer = "");

struct FacadeReport {
  int facade = 0;
  bool observable = false;
  QualityBreakdown quality;
  double mean_view_q_d = 0.0;
  double consistency = 0.0;
};

struct PlaneReport {
  SurfaceRef plane;
  PlaneQuality quality;
  std::size_t samples = 0;
};

struct QualityReport {
  std::vector<FacadeReport> facades;
  std::vector<PlaneReport> planes;
  std::vector<ReconScore> recon;
  std::vector<int> histogram;  ///< reconstructability bins of width 0.1, last bin open
  double recon_min = 0.0;
  int recon_below_tau = 0;
  double mean_view_q_d = 0.0;  ///< over all facade views
  int images = 0;
  int hovers = 0;
  double trajectory_m = 0.0;
  std::vector<int> unsafe_waypoints;
};

struct PlanSummary {
  int images = 0;
  int hover = 0;
  double trajectory_m = 0.0;
};

/// Everything a planning run produces, intermediate stages included.
struct PlanResult {
  FlightPlan flight;
  QualityReport quality;
  PlanSummary summary;
  NoDippingZone zone;
  std::vector<Vec2> candidates;
  DippingPlan dipping;
  DippingPlan dipping_initial;
  DippingOptimizeResult dipping_opt;
  LiftedDipping lifted;
  PlanarPlan planar;
  std::vector<RouteUnit> units;
  Tour tour;
  double nn_tour_cost = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> stage_seconds;  ///< wall time per stage
};

/// Shared scene preprocessing.
struct SceneModel {
  Mesh25D mesh;
  SurfaceSamples samples;
};
SceneModel build_scene_model(const Scene& scene, const PlannerConfig& config);

QualityParams quality_params(const PlannerConfig& config);
DippingParams dipping_params(const PlannerConfig& config);
PlanarParams planar_params(const PlannerConfig& config);
Vec3 launch_point(const Scene& scene, const PlannerConfig& config);

PlanResult plan(const Scene& scene, const PlannerConfig& config);

/// Re-scores a flight plan. Facades are scored on the captures targeting
/// them; a plan without facade targets is scored on all non-nadir captures.
QualityReport evaluate(const FlightPlan& flight, const Scene& scene, const PlannerConfig& config);

PlanSummary summarize(const FlightPlan& flight);

/// Regular oblique grid at H with five views per station and no dipping views.
FlightPlan op_baseline(const Scene& scene, const PlannerConfig& config);

}  // namespace dipplan
