#pragma once

#include <span>
#include <vector>

#include "dipplan/camera.hpp"
#include "dipplan/scene.hpp"
#include "dipplan/visibility.hpp"

namespace dipplan {

/// Serial kernels are the reference; parallel ones must match them exactly.
enum class Exec { Serial, Parallel };

/// Precomputed camera axes for fast frustum tests.
struct ViewFrame {
  Vec3 position;
  Vec3 forward;
  Vec3 right;
  Vec3 up;
  double tan_x = 0.0;
  double tan_y = 0.0;

  ViewFrame(const View3D& v, const CameraModel& cam);
  bool contains(Vec3 p) const;
  /// Ground-plane bounds of the frustum cut at depth `d_max` and above `z_min`.
  /// Empty (lo > hi) when nothing lies above `z_min`.
  Box2 reach(double d_max, double z_min) const;
};

/// Uniform xy bucket grid over surface samples.
class SampleGrid {
 public:
  explicit SampleGrid(const SurfaceSamples& samples, double cell = 10.0);
  /// Indices of the samples in every cell overlapping `box`, cell by cell; a
  /// superset of the samples inside it.
  std::vector<int> query(const Box2& box) const;
  double min_z() const { return min_z_; }

 private:
  Box2 extent_;
  double cell_;
  int nx_ = 0, ny_ = 0;
  double min_z_ = 0.0;
  std::vector<std::vector<int>> cells_;
};

/// One view seeing one surface sample.
struct SampleObservation {
  int view = 0;
  Vec3 direction;  ///< unit, sample to camera
  double distance = 0.0;
  double cos_incidence = 0.0;
};

struct ReconParams {
  double parallax_deg = 15.0;
  double parallax_sigma_deg = 5.0;
  double d_max = 150.0;
};

struct ReconScore {
  double value = 0.0;
  int pairs = 0;
};

/// Frustum, range, front-facing and line-of-sight test.
bool observe(const ViewFrame& frame, const SurfaceSample& s, const Mesh25D& mesh, double d_max,
             SampleObservation& out);

/// Reconstructability weight of a view pair at one sample.
double pair_weight(const SampleObservation& a, const SampleObservation& b, const ReconParams& p);

/// Per-sample observation lists, views in index order.
std::vector<std::vector<SampleObservation>> build_observations(
    const SurfaceSamples& samples, std::span<const View3D> views, const Mesh25D& mesh,
    const CameraModel& cam, double d_max, Exec exec = Exec::Parallel);

/// Samples seen by a single view, ascending.
std::vector<std::pair<int, SampleObservation>> observe_view(const View3D& view, int view_id,
                                                            const SurfaceSamples& samples,
                                                            const Mesh25D& mesh,
                                                            const CameraModel& cam, double d_max);

std::vector<ReconScore> score_observations(
    const std::vector<std::vector<SampleObservation>>& observations, const ReconParams& params,
    Exec exec = Exec::Parallel);

/// Visibility of every facade from every candidate.
VisibilityIndex build_visibility_index(const Scene& scene, std::span<const Vec2> candidates,
                                       double d_max, Exec exec = Exec::Parallel);

}  // namespace dipplan
