#include "dipplan/quality.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>

#include "dipplan/error.hpp"
#include "dipplan/visibility.hpp"

namespace dipplan {

namespace {

constexpr double kCoverTol = 1e-9;

std::optional<double> boundary_hit(Vec2 p, Vec2 ray, const Facade& f) {
  const Vec2 t = f.tangent();
  const double denom = cross(ray, t);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double lambda = cross(f.a - p, t) / denom;
  if (!(lambda > 0.0)) return std::nullopt;
  const double tau = cross(f.a - p, ray) / denom;
  return tau / f.length;
}

bool inside_wedge(const View2D& v, const Facade& f, double t, double half_fov) {
  const Vec2 w = f.at(t) - v.position;
  const double n = norm(w);
  if (n <= 0.0) return false;
  return dot(v.direction, w) >= std::cos(half_fov) * n - 1e-12;
}

// Exact minimum cover when every coverage is a single interval.
int sweep_cover(std::span<const IntervalSet> coverages) {
  std::vector<Interval> iv;
  for (const IntervalSet& c : coverages) iv.push_back(c.pieces().front());
  std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  int count = 0;
  std::size_t i = 0;
  while (i < iv.size()) {
    double reach = iv[i].lo;
    for (;;) {
      double best = reach;
      while (i < iv.size() && iv[i].lo <= reach + kCoverTol) best = std::max(best, iv[i++].hi);
      if (best <= reach + kCoverTol) break;
      ++count;
      reach = best;
    }
  }
  return count;
}

int exact_cover(std::span<const IntervalSet> coverages, double target) {
  const std::size_t n = coverages.size();
  int best = static_cast<int>(n);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask);
    if (k >= best) continue;
    IntervalSet u;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) u = u.unite(coverages[i]);
    if (u.measure() >= target - kCoverTol) best = k;
  }
  return best;
}

int greedy_interval_set_cover(std::span<const IntervalSet> coverages, double target) {
  IntervalSet covered;
  std::vector<bool> used(coverages.size(), false);
  int count = 0;
  while (covered.measure() < target - kCoverTol) {
    double gain = 0.0;
    std::size_t pick = coverages.size();
    for (std::size_t i = 0; i < coverages.size(); ++i) {
      if (used[i]) continue;
      const double g = coverages[i].subtract(covered).measure();
      if (g > gain + 1e-15) {
        gain = g;
        pick = i;
      }
    }
    if (pick == coverages.size()) break;
    used[pick] = true;
    covered = covered.unite(coverages[pick]);
    ++count;
  }
  return count;
}

double longest_piece_mid(const IntervalSet& s) {
  const Interval* best = nullptr;
  for (const Interval& p : s.pieces())
    if (!best || p.length() > best->length()) best = &p;
  return best ? best->mid() : 0.5;
}

}  // namespace

IntervalSet fov_interval(const View2D& v, const Facade& f, double half_fov) {
  if (half_fov <= 0.0) return IntervalSet::single(0.0, 1.0);
  const auto h1 = boundary_hit(v.position, rotated(v.direction, half_fov), f);
  const auto h2 = boundary_hit(v.position, rotated(v.direction, -half_fov), f);
  double lo = 0.0, hi = 0.0;
  if (h1 && h2) {
    lo = std::min(*h1, *h2);
    hi = std::max(*h1, *h2);
  } else if (h1 || h2) {
    // The wedge meets the line in a ray starting at the single boundary hit.
    const double t = h1 ? *h1 : *h2;
    const double probe = 1.0 + std::abs(t);
    if (inside_wedge(v, f, t + probe, half_fov)) {
      lo = t;
      hi = t + 2.0 * probe;
    } else {
      lo = t - 2.0 * probe;
      hi = t;
    }
  } else {
    return {};
  }
  return IntervalSet::single(std::max(0.0, lo), std::min(1.0, hi));
}

FacadeView make_facade_view(const View2D& v, const Facade& f, const IntervalSet& visible,
                            double half_fov) {
  FacadeView fv;
  fv.direction = v.direction;
  fv.distance = std::abs(f.offset(v.position));
  fv.coverage = visible.intersect(fov_interval(v, f, half_fov)).without_short(kMinSpanFraction);
  return fv;
}

int min_cover_count(std::span<const IntervalSet> coverages) {
  std::vector<IntervalSet> nonempty;
  bool single = true;
  IntervalSet all;
  for (const IntervalSet& c : coverages) {
    if (c.empty()) continue;
    single = single && c.pieces().size() == 1;
    all = all.unite(c);
    nonempty.push_back(c);
  }
  if (nonempty.empty()) return 0;
  if (single) return sweep_cover(nonempty);
  if (nonempty.size() <= 12) return exact_cover(nonempty, all.measure());
  return greedy_interval_set_cover(nonempty, all.measure());
}

double direction_consistency(std::span<const FacadeView> views) {
  std::vector<Vec2> dirs;
  for (const FacadeView& v : views)
    if (!v.coverage.empty()) dirs.push_back(v.direction);
  if (dirs.size() < 2) return 1.0;
  const bool uniform = std::all_of(dirs.begin(), dirs.end(), [&](Vec2 d) {
    return std::abs(d.x - dirs[0].x) < 1e-12 && std::abs(d.y - dirs[0].y) < 1e-12;
  });
  if (uniform) return 1.0;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    for (std::size_t j = i + 1; j < dirs.size(); ++j, ++pairs)
      sum += rad2deg(angle_between(dirs[i], dirs[j]));
  return std::clamp(1.0 - (sum / static_cast<double>(pairs)) / 90.0, 0.0, 1.0);
}

double view_perspective(const FacadeView& v, const Facade& f) {
  return std::max(0.0, -dot(normalized(v.direction), f.normal));
}

double view_photometric(const FacadeView& v, const QualityParams& params) {
  return std::clamp((params.d_max - v.distance) / (params.d_max - params.d_min), 0.0, 1.0);
}

CoverageCounter::CoverageCounter(std::span<const FacadeView> views) {
  for (const FacadeView& v : views)
    for (const Interval& p : v.coverage.pieces()) {
      starts_.push_back(p.lo);
      ends_.push_back(p.hi);
    }
  std::sort(starts_.begin(), starts_.end());
  std::sort(ends_.begin(), ends_.end());
}

int CoverageCounter::at(double t) const {
  const auto started = std::upper_bound(starts_.begin(), starts_.end(), t) - starts_.begin();
  const auto ended = std::lower_bound(ends_.begin(), ends_.end(), t) - ends_.begin();
  return static_cast<int>(started - ended);
}

double view_structural(const FacadeView& v, const CoverageCounter& counter, double beta) {
  if (v.coverage.empty()) return 0.0;
  const int mult = std::max(1, counter.at(longest_piece_mid(v.coverage)));
  return std::exp(-beta * (mult - 1));
}

QualityBreakdown facade_quality(std::span<const FacadeView> views, const Facade& f,
                                const QualityParams& params) {
  QualityBreakdown q;
  std::vector<const FacadeView*> active;
  for (const FacadeView& v : views)
    if (!v.coverage.empty()) active.push_back(&v);
  q.n_views = static_cast<int>(active.size());
  if (active.empty()) {
    q.total = q.q_s + q.q_d + q.q_u + q.q_c;
    return q;
  }
  const double span = params.d_max - params.d_min;
  const double n = static_cast<double>(active.size());
  double frontal = 0.0, near = 0.0;
  double dlo = active[0]->distance, dhi = active[0]->distance;
  IntervalSet covered;
  std::vector<IntervalSet> covs;
  std::vector<FacadeView> copies;
  for (const FacadeView* v : active) {
    frontal += view_perspective(*v, f);
    near += view_photometric(*v, params);
    dlo = std::min(dlo, v->distance);
    dhi = std::max(dhi, v->distance);
    covered = covered.unite(v->coverage);
    covs.push_back(v->coverage);
    copies.push_back(*v);
  }
  q.q_s = direction_consistency(copies) * (frontal / n);
  q.q_d = (near / n) * std::clamp(1.0 - (dhi - dlo) / span, 0.0, 1.0);
  q.q_u = std::exp(-params.beta * std::max(0, q.n_views - min_cover_count(covs)));
  q.q_c = std::clamp(covered.measure(), 0.0, 1.0);
  q.total = q.q_s + q.q_d + q.q_u + q.q_c;
  return q;
}

QualityBreakdown facade_quality(std::span<const View2D> views, const Facade& f,
                                const Scene& scene, const QualityParams& params) {
  std::vector<FacadeView> fvs;
  for (const View2D& v : views) {
    if (scene.building_containing(v.position)) continue;
    fvs.push_back(make_facade_view(v, f, visible_span(v.position, scene, f, params.d_max),
                                   params.half_hfov));
  }
  return facade_quality(fvs, f, params);
}

double view_facade_quality(const FacadeView& v, const CoverageCounter& counter, const Facade& f,
                           const QualityParams& params) {
  if (v.coverage.empty()) return 0.0;
  const Weights& w = params.weights;
  return w.perspective * view_perspective(v, f) + w.photometric * view_photometric(v, params) +
         w.structural * view_structural(v, counter, params.beta) +
         w.completeness * std::clamp(v.coverage.measure(), 0.0, 1.0);
}

double view_facade_quality(std::size_t index, std::span<const FacadeView> context,
                           const Facade& f, const QualityParams& params) {
  return view_facade_quality(context[index], CoverageCounter(context), f, params);
}

double point_quality(std::span<const int> slot, std::span<const std::vector<FacadeView>> contexts,
                     const Scene& scene, const QualityParams& params) {
  double total = 0.0;
  for (std::size_t f = 0; f < slot.size(); ++f) {
    if (slot[f] < 0) continue;
    total += view_facade_quality(static_cast<std::size_t>(slot[f]), contexts[f],
                                 scene.facades[f], params);
  }
  return total;
}

int greedy_set_cover(const std::vector<std::vector<std::uint64_t>>& sets, std::size_t universe) {
  const std::size_t words = (universe + 63) / 64;
  std::vector<std::uint64_t> target(words, 0), covered(words, 0);
  for (const auto& s : sets)
    for (std::size_t w = 0; w < words; ++w) target[w] |= s[w];
  std::vector<bool> used(sets.size(), false);
  int count = 0;
  for (;;) {
    std::size_t best_gain = 0, pick = sets.size();
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (used[i]) continue;
      std::size_t gain = 0;
      for (std::size_t w = 0; w < words; ++w)
        gain += static_cast<std::size_t>(std::popcount(sets[i][w] & ~covered[w]));
      if (gain > best_gain) {
        best_gain = gain;
        pick = i;
      }
    }
    if (pick == sets.size()) break;
    used[pick] = true;
    for (std::size_t w = 0; w < words; ++w) covered[w] |= sets[pick][w];
    ++count;
  }
  return count;
}

PlaneQuality plane_quality(const std::vector<std::vector<std::uint64_t>>& sets,
                           std::size_t universe, double beta) {
  PlaneQuality q;
  const std::size_t words = (universe + 63) / 64;
  std::vector<std::vector<std::uint64_t>> used;
  std::vector<std::uint64_t> covered(words, 0);
  for (const auto& bits : sets) {
    bool any = false;
    for (std::size_t w = 0; w < words; ++w) {
      covered[w] |= bits[w];
      any = any || bits[w] != 0;
    }
    if (any) used.push_back(bits);
  }
  std::size_t n_covered = 0;
  for (std::uint64_t w : covered) n_covered += static_cast<std::size_t>(std::popcount(w));
  q.n_views = static_cast<int>(used.size());
  const int n_min = greedy_set_cover(used, universe);
  q.q_u = std::exp(-beta * std::max(0, q.n_views - n_min));
  q.q_c = universe == 0 ? 0.0 : static_cast<double>(n_covered) / static_cast<double>(universe);
  q.total = n_covered == 0 ? 0.0 : q.q_u + q.q_c;
  return q;
}

PlaneQuality ground_quality(std::span<const View3D> vertical_views,
                            std::span<const Vec3> plane_samples, const CameraModel& cam,
                            double beta) {
  for (const View3D& v : vertical_views)
    if (!v.is_nadir()) throw InputError("ground quality accepts nadir views only");
  const std::size_t words = (plane_samples.size() + 63) / 64;
  std::vector<std::vector<std::uint64_t>> sets;
  for (const View3D& v : vertical_views) {
    std::vector<std::uint64_t> bits(words, 0);
    for (std::size_t i = 0; i < plane_samples.size(); ++i)
      if (in_frustum(v, cam, plane_samples[i])) bits[i / 64] |= std::uint64_t{1} << (i % 64);
    sets.push_back(std::move(bits));
  }
  return plane_quality(sets, plane_samples.size(), beta);
}

}  // namespace dipplan
