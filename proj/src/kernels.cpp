#include "dipplan/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace dipplan {

ViewFrame::ViewFrame(const View3D& v, const CameraModel& cam)
    : position(v.position),
      forward(v.forward()),
      right(v.right()),
      up(v.up()),
      tan_x(cam.sensor_w_mm / (2.0 * cam.focal_mm)),
      tan_y(cam.sensor_h_mm / (2.0 * cam.focal_mm)) {}

bool ViewFrame::contains(Vec3 p) const {
  const Vec3 rel = p - position;
  const double depth = dot(rel, forward);
  if (depth <= 0.0) return false;
  return std::abs(dot(rel, right)) <= tan_x * depth + 1e-9 &&
         std::abs(dot(rel, up)) <= tan_y * depth + 1e-9;
}

Box2 ViewFrame::reach(double d_max, double z_min) const {
  std::array<Vec3, 5> v;
  v[0] = position;
  int i = 1;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0}) v[i++] = position + (forward + right * (sx * tan_x) + up * (sy * tan_y)) * d_max;
  // Edges: apex to each corner, then the far rectangle.
  static constexpr std::array<std::pair<int, int>, 8> kEdges{
      {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {2, 4}, {4, 3}, {3, 1}}};
  Box2 box{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  auto add = [&](Vec3 p) {
    box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y)};
    box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y)};
  };
  for (const Vec3& p : v)
    if (p.z >= z_min) add(p);
  for (auto [a, b] : kEdges) {
    const double za = v[a].z - z_min, zb = v[b].z - z_min;
    if ((za < 0) != (zb < 0)) add(v[a] + (v[b] - v[a]) * (za / (za - zb)));
  }
  return box.expanded(1e-3);
}

SampleGrid::SampleGrid(const SurfaceSamples& samples, double cell) : cell_(cell) {
  std::vector<Vec2> xy;
  for (const SurfaceSample& s : samples.points) xy.push_back(s.position.xy());
  if (xy.empty()) return;
  extent_ = bounding_box(xy);
  nx_ = std::max(1, static_cast<int>(std::ceil(extent_.width() / cell_)) + 1);
  ny_ = std::max(1, static_cast<int>(std::ceil(extent_.height() / cell_)) + 1);
  cells_.resize(static_cast<std::size_t>(nx_) * ny_);
  min_z_ = samples.points[0].position.z;
  for (std::size_t i = 0; i < xy.size(); ++i) {
    const int cx = std::clamp(static_cast<int>((xy[i].x - extent_.lo.x) / cell_), 0, nx_ - 1);
    const int cy = std::clamp(static_cast<int>((xy[i].y - extent_.lo.y) / cell_), 0, ny_ - 1);
    cells_[static_cast<std::size_t>(cy) * nx_ + cx].push_back(static_cast<int>(i));
    min_z_ = std::min(min_z_, samples.points[i].position.z);
  }
}

std::vector<int> SampleGrid::query(const Box2& box) const {
  std::vector<int> out;
  if (cells_.empty() || box.lo.x > box.hi.x || box.lo.y > box.hi.y) return out;
  if (box.hi.x < extent_.lo.x || box.lo.x > extent_.hi.x || box.hi.y < extent_.lo.y ||
      box.lo.y > extent_.hi.y)
    return out;
  auto cx = [&](double x) { return std::clamp(static_cast<int>(std::floor((x - extent_.lo.x) / cell_)), 0, nx_ - 1); };
  auto cy = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - extent_.lo.y) / cell_)), 0, ny_ - 1); };
  const int x0 = cx(box.lo.x), x1 = cx(box.hi.x), y0 = cy(box.lo.y), y1 = cy(box.hi.y);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const auto& c = cells_[static_cast<std::size_t>(y) * nx_ + x];
      out.insert(out.end(), c.begin(), c.end());
    }
  return out;
}

bool observe(const ViewFrame& frame, const SurfaceSample& s, const Mesh25D& mesh, double d_max,
             SampleObservation& out) {
  const Vec3 rel = frame.position - s.position;
  const double d = norm(rel);
  if (d > d_max || d <= 0.0) return false;
  const Vec3 dir = rel / d;
  const double c = dot(dir, s.normal);
  if (c <= 0.0) return false;
  if (!frame.contains(s.position)) return false;
  if (!los_3d(s.position, frame.position, mesh)) return false;
  out.direction = dir;
  out.distance = d;
  out.cos_incidence = c;
  return true;
}

double pair_weight(const SampleObservation& a, const SampleObservation& b, const ReconParams& p) {
  const double alpha = rad2deg(std::acos(std::clamp(dot(a.direction, b.direction), -1.0, 1.0)));
  const double da = alpha - p.parallax_deg;
  const double w_alpha =
      std::exp(-da * da / (2.0 * p.parallax_sigma_deg * p.parallax_sigma_deg));
  const double w_d = std::clamp(1.0 - std::min(a.distance, b.distance) / p.d_max, 0.0, 1.0);
  const double w_theta = std::max(0.0, std::min(a.cos_incidence, b.cos_incidence));
  return w_alpha * w_d * w_theta;
}

std::vector<std::vector<SampleObservation>> build_observations(
    const SurfaceSamples& samples, std::span<const View3D> views, const Mesh25D& mesh,
    const CameraModel& cam, double d_max, Exec exec) {
  std::vector<ViewFrame> frames;
  frames.reserve(views.size());
  for (const View3D& v : views) frames.emplace_back(v, cam);
  const long n = static_cast<long>(samples.points.size());
  std::vector<std::vector<SampleObservation>> out(samples.points.size());
  auto one = [&](long i) {
    SampleObservation o;
    for (std::size_t v = 0; v < frames.size(); ++v) {
      if (observe(frames[v], samples.points[i], mesh, d_max, o)) {
        o.view = static_cast<int>(v);
        out[i].push_back(o);
      }
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  return out;
}

std::vector<std::pair<int, SampleObservation>> observe_view(const View3D& view, int view_id,
                                                            const SurfaceSamples& samples,
                                                            const Mesh25D& mesh,
                                                            const CameraModel& cam, double d_max) {
  const ViewFrame frame(view, cam);
  std::vector<std::pair<int, SampleObservation>> out;
  SampleObservation o;
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    if (observe(frame, samples.points[i], mesh, d_max, o)) {
      o.view = view_id;
      out.push_back({static_cast<int>(i), o});
    }
  }
  return out;
}

std::vector<ReconScore> score_observations(
    const std::vector<std::vector<SampleObservation>>& observations, const ReconParams& params,
    Exec exec) {
  const long n = static_cast<long>(observations.size());
  std::vector<ReconScore> out(observations.size());
  auto one = [&](long i) {
    const auto& obs = observations[i];
    ReconScore r;
    for (std::size_t a = 0; a < obs.size(); ++a)
      for (std::size_t b = a + 1; b < obs.size(); ++b) {
        r.value += pair_weight(obs[a], obs[b], params);
        ++r.pairs;
      }
    out[i] = r;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) one(i);
  } else {
    for (long i = 0; i < n; ++i) one(i);
  }
  return out;
}

VisibilityIndex build_visibility_index(const Scene& scene, std::span<const Vec2> candidates,
                                       double d_max, Exec exec) {
  VisibilityIndex index;
  const long n = static_cast<long>(candidates.size());
  index.by_candidate.resize(candidates.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i) index.by_candidate[i] = visible_facades(candidates[i], scene, d_max);
  } else {
    for (long i = 0; i < n; ++i) index.by_candidate[i] = visible_facades(candidates[i], scene, d_max);
  }
  index.by_facade.resize(scene.facades.size());
  for (long i = 0; i < n; ++i)
    for (const VisibleSpan& vs : index.by_candidate[i])
      index.by_facade[vs.facade].push_back({static_cast<int>(i), vs.span});
  return index;
}

}  // namespace dipplan
