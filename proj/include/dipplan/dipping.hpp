#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dipplan/camera.hpp"
#include "dipplan/quality.hpp"
#include "dipplan/scene.hpp"
#include "dipplan/visibility.hpp"

namespace dipplan {

struct DippingParams {
  double k_d = 0.8;
  double tau_p = 1.25;         ///< metres, point adjustment step
  double tau_s_deg = 5.0;      ///< direction adjustment and initialisation step
  int init_half_steps = 12;    ///< directions scanned: -n rotated by k*tau_s, |k| <= this
  int max_iters = 10;
  double improvement_eps = 1e-9;
};

/// Everything the dipping stage reads; all members are immutable inputs.
struct DippingContext {
  const Scene& scene;
  const NoDippingZone& zone;
  CameraModel camera;
  QualityParams quality;
  DippingParams params;
};

struct DippingView2D {
  Vec2 point;
  Vec2 direction;
  int facade = 0;
};

struct DippingPoint {
  Vec2 position;
  std::vector<int> facades;  ///< targeted facades, ascending ids
  int grid_index = -1;       ///< origin in the candidate grid
};

struct DippingPlan {
  std::vector<std::optional<Vec2>> directions;  ///< assigned direction per facade id
  std::vector<DippingPoint> points;
  std::size_t candidate_count = 0;

  bool observable(int facade) const { return directions[facade].has_value(); }
  std::vector<DippingView2D> views() const;
};

struct DippingSequence3D {
  Vec2 origin;
  int facade = 0;
  double distance = 0.0;  ///< to the facade plane
  double h_pic = 0.0;
  std::vector<View3D> views;
  std::optional<View3D> lowest_extra_view;
};

/// Projected sensor height on the facade plane at distance `d` (metres).
/// Throws InputError when d <= 0.
double h_pic(const CameraModel& cam, double d);

/// Vertical descent from `altitude` at p toward facade f, spaced k_d * h_pic.
DippingSequence3D lift_sequence(Vec2 p, const Facade& f, Vec2 direction, double altitude,
                                double min_altitude, double k_d, const CameraModel& cam);

/// Cost saving of merging two views `d` apart; zero beyond tau_d.
double merge_savings(double d, double tau_d);

struct Capture {
  View3D view;
  SurfaceRef target;
};

struct HoverGroup {
  enum class Kind { Dipping, Planar };
  Kind kind = Kind::Dipping;
  Vec3 position;
  std::vector<Capture> captures;
  int source = -1;  ///< dipping point or planar station index
};

struct HoverCost {
  double analytic = 0.0;  ///< position count minus Gaussian savings
  std::vector<HoverGroup> groups;
  int merged_pairs = 0;
  int views = 0;  ///< sequence views, excluding the extra tilted ones
};

/// Hover cost of the sequences lifted from one dipping point, with greedy
/// midpoint merging of close cross-sequence pairs.
HoverCost hovering_cost(const std::vector<DippingSequence3D>& sequences, double k_d,
                        int source = -1);

/// Best initial direction of `f` given its observers' visible spans, or
/// nullopt when there are no observers.
std::optional<Vec2> init_direction(const Facade& f, const std::vector<std::pair<Vec2, IntervalSet>>& observers,
                                   const DippingContext& ctx);

/// Assigns directions and runs the iterative point selection.
DippingPlan initialize_dipping(const DippingContext& ctx, const std::vector<Vec2>& candidates,
                               const VisibilityIndex& index);

/// Candidate indices kept by the removal loop, ascending. `directions` must be
/// set for every observable facade.
std::vector<int> select_dipping_points(const DippingContext& ctx,
                                       const std::vector<Vec2>& candidates,
                                       const VisibilityIndex& index,
                                       const std::vector<std::optional<Vec2>>& directions);

struct MoveRecord {
  std::string kind;  ///< "point", "direction" or "removal"
  int subject = 0;
  std::vector<double> before;
  std::vector<double> after;
};

struct DippingOptimizeResult {
  int iterations = 0;          ///< iterations executed, including the idle one
  int last_changed_iteration = 0;
  bool converged = false;
  std::vector<MoveRecord> log;
};

/// G ≺ G': every component no larger, at least one strictly smaller.
bool dominates(const std::vector<double>& g, const std::vector<double>& g_prime);

DippingOptimizeResult optimize_dipping(DippingPlan& plan, const DippingContext& ctx);

/// Facade views of the plan, one per (point, targeted facade).
std::vector<FacadeView> plan_facade_views(const DippingPlan& plan, int facade,
                                          const DippingContext& ctx);
QualityBreakdown plan_facade_quality(const DippingPlan& plan, int facade,
                                     const DippingContext& ctx);

/// Analytic hover cost of the whole plan.
double plan_hover_cost(const DippingPlan& plan, const DippingContext& ctx);

struct LiftedDipping {
  std::vector<DippingSequence3D> sequences;
  std::vector<HoverGroup> hovers;
  double analytic_cost = 0.0;
  int merged_pairs = 0;
};

LiftedDipping lift_plan(const DippingPlan& plan, const DippingContext& ctx);

}  // namespace dipplan
