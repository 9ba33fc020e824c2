#pragma once

#include <array>
#include <span>
#include <vector>

#include "dipplan/camera.hpp"
#include "dipplan/interval.hpp"
#include "dipplan/scene.hpp"

namespace dipplan {

/// A view on the map plane: position and horizontal sight direction.
struct View2D {
  Vec2 position;
  Vec2 direction;
};

/// Balancing weights of the per-view quality (perspective, photometric,
/// structural, completeness).
struct Weights {
  double perspective = 0.1;
  double photometric = 0.85;
  double structural = 0.3;
  double completeness = 0.1;
};

struct QualityParams {
  Weights weights;
  double beta = 0.5;       ///< structural decay per surplus view
  double d_min = 10.0;     ///< metres
  double d_max = 150.0;    ///< metres
  double half_hfov = 0.0;  ///< radians; <= 0 disables field-of-view clipping
};

/// A view's footprint on one facade.
struct FacadeView {
  Vec2 direction;
  IntervalSet coverage;  ///< facade parameter range, subset of [0,1]
  double distance = 0.0; ///< camera to facade plane, metres
};

struct QualityBreakdown {
  double q_s = 0.0;
  double q_d = 0.0;
  double q_u = 1.0;
  double q_c = 0.0;
  double total = 0.0;
  int n_views = 0;
};

/// Facade parameters inside the horizontal field-of-view wedge of `v`.
IntervalSet fov_interval(const View2D& v, const Facade& f, double half_fov);

/// Visible span of `f` from `v` clipped to the field of view.
FacadeView make_facade_view(const View2D& v, const Facade& f, const IntervalSet& visible,
                            double half_fov);

/// Smallest number of coverages whose union equals the union of all.
int min_cover_count(std::span<const IntervalSet> coverages);

/// Sum of the four set terms for the views of one facade (unweighted).
QualityBreakdown facade_quality(std::span<const FacadeView> views, const Facade& f,
                                const QualityParams& params);

/// Same, computing coverages from scene visibility.
QualityBreakdown facade_quality(std::span<const View2D> views, const Facade& f,
                                const Scene& scene, const QualityParams& params);

/// Mean pairwise-angle consistency factor of a view set, in [0,1].
double direction_consistency(std::span<const FacadeView> views);

/// Counts coverages containing a facade parameter.
class CoverageCounter {
 public:
  explicit CoverageCounter(std::span<const FacadeView> views);
  int at(double t) const;

 private:
  std::vector<double> starts_;
  std::vector<double> ends_;
};

/// Per-view terms.
double view_perspective(const FacadeView& v, const Facade& f);
double view_photometric(const FacadeView& v, const QualityParams& params);
double view_structural(const FacadeView& v, const CoverageCounter& counter, double beta);

/// Weighted per-view quality of `context[index]` on its facade.
double view_facade_quality(std::size_t index, std::span<const FacadeView> context,
                           const Facade& f, const QualityParams& params);
double view_facade_quality(const FacadeView& v, const CoverageCounter& counter, const Facade& f,
                           const QualityParams& params);

/// Sum of view-facade qualities of p over all facades it sees, each facade
/// looked at along its assigned direction. `contexts[f]` holds the current
/// views of facade f and `slot[f]` the index of p's view within it (-1 if p
/// does not view f).
double point_quality(std::span<const int> slot, std::span<const std::vector<FacadeView>> contexts,
                     const Scene& scene, const QualityParams& params);

struct PlaneQuality {
  double q_u = 1.0;
  double q_c = 0.0;
  double total = 0.0;
  int n_views = 0;
};

/// Texture quality of a horizontal plane from nadir views (structural plus
/// completeness over the plane's samples). Throws InputError for non-nadir views.
PlaneQuality ground_quality(std::span<const View3D> vertical_views,
                            std::span<const Vec3> plane_samples, const CameraModel& cam,
                            double beta);

/// Plane quality from per-view coverage bitsets over `universe` samples.
PlaneQuality plane_quality(const std::vector<std::vector<std::uint64_t>>& sets,
                           std::size_t universe, double beta);

/// Greedy set cover over bitsets; returns the number of sets picked.
int greedy_set_cover(const std::vector<std::vector<std::uint64_t>>& sets, std::size_t universe);

}  // namespace dipplan
