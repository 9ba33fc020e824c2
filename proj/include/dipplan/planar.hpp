#pragma once

#include <array>
#include <vector>

#include "dipplan/camera.hpp"
#include "dipplan/dipping.hpp"
#include "dipplan/kernels.hpp"
#include "dipplan/scene.hpp"

namespace dipplan {

struct PlanarParams {
  double overlap_x = 0.8;
  double overlap_y = 0.8;
  double tilt_deg = 45.0;
  double tau_r = 0.2;
  double tau_p = 1.25;
  int max_iters = 10;
  double beta = 0.5;
  double improvement_eps = 1e-9;
  ReconParams recon;
};

/// A hover position at the safe altitude carrying five views.
struct PlanarStation {
  Vec3 position;
};

/// Nadir first, then the tilted views at yaws 0, 90, 180, 270.
std::array<View3D, 5> station_views(const PlanarStation& s, double tilt_deg);

struct PlanarContext {
  const Scene& scene;
  const Mesh25D& mesh;
  const NoDippingZone& zone;
  const SurfaceSamples& samples;
  CameraModel camera;
  PlanarParams params;
  std::vector<View3D> fixed_views;  ///< dipping views, frozen
  Exec exec = Exec::Parallel;
};

/// Grid spacing (x, y) giving the requested nadir overlap at altitude `h`.
Vec2 planar_step(const CameraModel& cam, double h, double overlap_x, double overlap_y);

/// Regular grid of stations at altitude `h` whose nadir footprints cover `bounds`.
std::vector<PlanarStation> generate_planar(const Box2& bounds, double h, const CameraModel& cam,
                                           const PlanarParams& params);

/// Adds stations until every ground and roof sample lies in some nadir
/// footprint. Returns the number added.
int densify_coverage(std::vector<PlanarStation>& stations, const PlanarContext& ctx);

/// Adds station pairs over samples whose reconstructability is below tau_r.
/// Returns the number added.
int repair_reconstructability(std::vector<PlanarStation>& stations, const PlanarContext& ctx);

/// Fixed views followed by five views per station.
std::vector<View3D> planar_view_list(const PlanarContext& ctx,
                                     const std::vector<PlanarStation>& stations);

std::vector<ReconScore> reconstructability(const PlanarContext& ctx,
                                           const std::vector<PlanarStation>& stations);

/// Redundancy of `station`: surplus reconstructability above tau_r at the
/// samples it sees, weighted by its share of the pair contributions.
double redundancy(int station, const PlanarContext& ctx,
                  const std::vector<PlanarStation>& stations);

/// Plane index per sample: 0 ground, 1 + building for roofs, -1 for facades.
std::vector<int> horizontal_plane_of(const SurfaceSamples& samples);

/// Sum of ground and roof qualities from the stations' nadir views.
double planar_plane_quality(const PlanarContext& ctx, const std::vector<PlanarStation>& stations);

struct PlanarOptimizeResult {
  int iterations = 0;
  int last_changed_iteration = 0;
  bool converged = false;
  int moved = 0;
  int removed = 0;
  std::vector<MoveRecord> log;  ///< accepted adjustments, Y before and after
};

PlanarOptimizeResult optimize_planar(std::vector<PlanarStation>& stations,
                                     const PlanarContext& ctx);

struct PlanarPlan {
  std::vector<PlanarStation> stations;
  Vec2 step;
  int grid_count = 0;
  int densified = 0;
  int repaired = 0;
  PlanarOptimizeResult optimization;
  std::vector<ReconScore> recon;
};

PlanarPlan plan_planar(const PlanarContext& ctx);

}  // namespace dipplan
