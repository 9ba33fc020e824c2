#include "dipplan/planar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "dipplan/error.hpp"
#include "dipplan/quality.hpp"

namespace dipplan {

namespace {

// Safety margin on the reconstructability threshold for incremental updates.
constexpr double kRecMargin = 1e-9;

constexpr std::array<double, 4> kTiltYaws{0.0, 90.0, 180.0, 270.0};

std::vector<std::vector<int>> plane_members(const std::vector<int>& plane_of, int planes) {
  std::vector<std::vector<int>> out(planes);
  for (std::size_t i = 0; i < plane_of.size(); ++i)
    if (plane_of[i] >= 0) out[plane_of[i]].push_back(static_cast<int>(i));
  return out;
}

int plane_count(const Scene& scene) { return 1 + static_cast<int>(scene.buildings.size()); }

/// Horizontal samples inside the nadir footprint of a station at `pos`, ascending.
std::vector<int> nadir_samples(const PlanarContext& ctx, const SampleGrid& grid,
                               const std::vector<int>& plane_of, Vec3 pos) {
  const ViewFrame f(station_views({pos}, ctx.params.tilt_deg)[0], ctx.camera);
  std::vector<int> out;
  for (int i : grid.query(f.reach(pos.z - grid.min_z() + 1.0, grid.min_z())))
    if (plane_of[i] >= 0 && f.contains(ctx.samples.points[i].position)) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::array<View3D, 5> station_views(const PlanarStation& s, double tilt_deg) {
  std::array<View3D, 5> v;
  v[0] = {s.position, 0.0, -90.0};
  for (int i = 0; i < 4; ++i) v[i + 1] = {s.position, kTiltYaws[i], -tilt_deg};
  return v;
}

Vec2 planar_step(const CameraModel& cam, double h, double overlap_x, double overlap_y) {
  if (!(overlap_x >= 0.0 && overlap_x < 1.0 && overlap_y >= 0.0 && overlap_y < 1.0))
    throw InputError("overlap ratios must lie in [0, 1)");
  if (!(h > 0.0)) throw InputError("planar altitude must be positive");
  return {cam.footprint_w(h) * (1.0 - overlap_x), cam.footprint_h(h) * (1.0 - overlap_y)};
}

std::vector<PlanarStation> generate_planar(const Box2& bounds, double h, const CameraModel& cam,
                                           const PlanarParams& params) {
  const Vec2 step = planar_step(cam, h, params.overlap_x, params.overlap_y);
  auto count = [](double extent, double s) {
    return std::max(1, static_cast<int>(std::ceil(extent / s - 1e-9)) + 1);
  };
  const int nx = count(bounds.width(), step.x), ny = count(bounds.height(), step.y);
  const double x0 = bounds.lo.x + 0.5 * (bounds.width() - (nx - 1) * step.x);
  const double y0 = bounds.lo.y + 0.5 * (bounds.height() - (ny - 1) * step.y);
  std::vector<PlanarStation> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out.push_back({{x0 + i * step.x, y0 + j * step.y, h}});
  return out;
}

std::vector<int> horizontal_plane_of(const SurfaceSamples& samples) {
  std::vector<int> out(samples.points.size(), -1);
  for (std::size_t i = 0; i < samples.points.size(); ++i) {
    const SurfaceRef& o = samples.points[i].owner;
    if (o.kind == SurfaceKind::Ground) out[i] = 0;
    if (o.kind == SurfaceKind::Roof) out[i] = 1 + o.index;
  }
  return out;
}

int densify_coverage(std::vector<PlanarStation>& stations, const PlanarContext& ctx) {
  const double h = ctx.scene.safe_altitude;
  const auto& pts = ctx.samples.points;
  const std::vector<int> plane_of = horizontal_plane_of(ctx.samples);
  const SampleGrid grid(ctx.samples);
  std::vector<char> covered(pts.size(), 0);
  auto mark = [&](const PlanarStation& s) {
    for (int i : nadir_samples(ctx, grid, plane_of, s.position)) covered[i] = 1;
  };
  for (const PlanarStation& s : stations) mark(s);
  int added = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (plane_of[i] < 0 || covered[i]) continue;
    // Put the sample near the south-west corner of the new footprint.
    const double depth = h - pts[i].position.z;
    const double hw = 0.45 * ctx.camera.footprint_w(depth);
    const double hh = 0.45 * ctx.camera.footprint_h(depth);
    stations.push_back({{pts[i].position.x + hw, pts[i].position.y + hh, h}});
    mark(stations.back());
    if (!covered[i]) throw PlanningError("planar", "densification failed to cover a sample");
    ++added;
  }
  return added;
}

std::vector<View3D> planar_view_list(const PlanarContext& ctx,
                                     const std::vector<PlanarStation>& stations) {
  std::vector<View3D> views = ctx.fixed_views;
  for (const PlanarStation& s : stations)
    for (const View3D& v : station_views(s, ctx.params.tilt_deg)) views.push_back(v);
  return views;
}

std::vector<ReconScore> reconstructability(const PlanarContext& ctx,
                                           const std::vector<PlanarStation>& stations) {
  const std::vector<View3D> views = planar_view_list(ctx, stations);
  const auto obs = build_observations(ctx.samples, views, ctx.mesh, ctx.camera,
                                      ctx.params.recon.d_max, ctx.exec);
  return score_observations(obs, ctx.params.recon, ctx.exec);
}

double redundancy(int station, const PlanarContext& ctx,
                  const std::vector<PlanarStation>& stations) {
  const std::vector<View3D> views = planar_view_list(ctx, stations);
  const auto obs = build_observations(ctx.samples, views, ctx.mesh, ctx.camera,
                                      ctx.params.recon.d_max, ctx.exec);
  const int first = static_cast<int>(ctx.fixed_views.size()) + 5 * station;
  auto mine = [&](int v) { return v >= first && v < first + 5; };
  double r = 0.0;
  for (const auto& o : obs) {
    double q = 0.0, share = 0.0;
    bool seen = false;
    for (std::size_t a = 0; a < o.size(); ++a) {
      seen = seen || mine(o[a].view);
      for (std::size_t b = a + 1; b < o.size(); ++b) {
        const double w = pair_weight(o[a], o[b], ctx.params.recon);
        q += w;
        share += 0.5 * w * ((mine(o[a].view) ? 1 : 0) + (mine(o[b].view) ? 1 : 0));
      }
    }
    if (seen && q > 0.0) r += std::max(0.0, q - ctx.params.tau_r) * share / q;
  }
  return r;
}

double planar_plane_quality(const PlanarContext& ctx, const std::vector<PlanarStation>& stations) {
  const std::vector<int> plane_of = horizontal_plane_of(ctx.samples);
  const auto members = plane_members(plane_of, plane_count(ctx.scene));
  double total = 0.0;
  for (const auto& m : members) {
    if (m.empty()) continue;
    std::vector<Vec3> pts;
    for (int i : m) pts.push_back(ctx.samples.points[i].position);
    std::vector<View3D> nadirs;
    for (const PlanarStation& s : stations)
      nadirs.push_back(station_views(s, ctx.params.tilt_deg)[0]);
    total += ground_quality(nadirs, pts, ctx.camera, ctx.params.beta).total;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Reconstructability repair

namespace {

std::vector<std::pair<Vec3, Vec3>> repair_candidates(const SurfaceSample& s, double h,
                                                     const PlanarParams& p) {
  std::vector<std::pair<Vec3, Vec3>> out;
  const double depth = h - s.position.z;
  const double t = std::tan(deg2rad(p.recon.parallax_deg));
  if (std::abs(s.normal.z) > 0.5) {
    const Vec3 top{s.position.x, s.position.y, h};
    const double o = depth * t;
    for (Vec2 d : {Vec2{1, 0}, Vec2{0, 1}, Vec2{-1, 0}, Vec2{0, -1}})
      out.push_back({top, {top.x + d.x * o, top.y + d.y * o, h}});
    return out;
  }
  const Vec2 n = normalized(s.normal.xy());
  Vec2 look = direction_of_yaw(kTiltYaws[0]);
  for (double yaw : kTiltYaws) {
    const Vec2 c = direction_of_yaw(yaw);
    if (dot(c, -n) > dot(look, -n) + 1e-12) look = c;
  }
  const double hd = depth / std::tan(deg2rad(p.tilt_deg));
  const Vec2 base = s.position.xy() - look * hd;
  const double o = std::hypot(hd, depth) * t;
  const Vec2 side{look.y, -look.x};
  for (double sign : {1.0, -1.0}) {
    const Vec2 q = base + side * (sign * o);
    out.push_back({{base.x, base.y, h}, {q.x, q.y, h}});
  }
  return out;
}

}  // namespace

int repair_reconstructability(std::vector<PlanarStation>& stations, const PlanarContext& ctx) {
  const double h = ctx.scene.safe_altitude;
  const auto& pts = ctx.samples.points;
  const ReconParams& rp = ctx.params.recon;
  std::vector<View3D> views = planar_view_list(ctx, stations);
  auto obs = build_observations(ctx.samples, views, ctx.mesh, ctx.camera, rp.d_max, ctx.exec);
  std::vector<double> q(pts.size());
  {
    const auto scores = score_observations(obs, rp, ctx.exec);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = scores[i].value;
  }
  int added = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (q[i] >= ctx.params.tau_r) continue;
    double best_gain = 0.0;
    std::optional<std::pair<Vec3, Vec3>> best;
    for (const auto& cand : repair_candidates(pts[i], h, ctx.params)) {
      std::vector<SampleObservation> fresh;
      for (const Vec3& pos : {cand.first, cand.second})
        for (const View3D& v : station_views({pos}, ctx.params.tilt_deg)) {
          SampleObservation o;
          if (observe(ViewFrame(v, ctx.camera), pts[i], ctx.mesh, rp.d_max, o))
            fresh.push_back(o);
        }
      double gain = 0.0;
      for (std::size_t a = 0; a < fresh.size(); ++a) {
        for (const auto& u : obs[i]) gain += pair_weight(fresh[a], u, rp);
        for (std::size_t b = a + 1; b < fresh.size(); ++b) gain += pair_weight(fresh[a], fresh[b], rp);
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = cand;
      }
      if (q[i] + gain >= ctx.params.tau_r) break;
    }
    if (!best) continue;
    for (const Vec3& pos : {best->first, best->second}) {
      stations.push_back({pos});
      ++added;
      for (const View3D& v : station_views(stations.back(), ctx.params.tilt_deg)) {
        const int id = static_cast<int>(views.size());
        views.push_back(v);
        for (auto& [s, o] : observe_view(v, id, ctx.samples, ctx.mesh, ctx.camera, rp.d_max)) {
          for (const auto& u : obs[s]) q[s] += pair_weight(o, u, rp);
          obs[s].push_back(o);
        }
      }
    }
  }
  return added;
}

// ---------------------------------------------------------------------------
// Optimisation

namespace {

struct Share {
  int station = 0;
  double ch = 0.0;     ///< intra pairs plus half of the cross pairs
  double intra = 0.0;  ///< pairs between two of the station's own views
};

struct StationObs {
  std::vector<std::pair<int, std::vector<SampleObservation>>> samples;
  std::vector<int> nadir;  ///< horizontal samples inside the nadir footprint
};

class PlanarState {
 public:
  PlanarState(const PlanarContext& ctx, std::vector<PlanarStation>& stations)
      : ctx_(ctx),
        st_(stations),
        n_fixed_(static_cast<int>(ctx.fixed_views.size())),
        cap_(3.0 * ctx.params.tau_r),
        plane_of_(horizontal_plane_of(ctx.samples)),
        grid_(ctx.samples),
        planes_(plane_members(plane_of_, plane_count(ctx.scene))) {
    const std::size_t ns = ctx.samples.points.size();
    local_.assign(ns, -1);
    for (const auto& m : planes_)
      for (std::size_t j = 0; j < m.size(); ++j) local_[m[j]] = static_cast<int>(j);
    alive_.assign(st_.size(), 1);
    r_.assign(st_.size(), 0.0);
    seen_.resize(st_.size());
    nadir_.resize(st_.size());
    bits_.resize(st_.size());
    nadir_count_.assign(ns, 0);
    qr_.assign(ns, 0.0);
    shares_.resize(ns);

    const std::vector<View3D> views = planar_view_list(ctx, st_);
    obs_ = build_observations(ctx.samples, views, ctx.mesh, ctx.camera, ctx.params.recon.d_max,
                              ctx.exec);
    for (std::size_t s = 0; s < ns; ++s) {
      const auto& o = obs_[s];
      for (std::size_t a = 0; a < o.size(); ++a) {
        const int ka = station_of(o[a].view);
        if (ka >= 0) share(s, ka);
        for (std::size_t b = a + 1; b < o.size(); ++b) {
          const int kb = station_of(o[b].view);
          const double w = pair_weight(o[a], o[b], ctx.params.recon);
          qr_[s] += w;
          if (ka >= 0 && ka == kb) {
            share(s, ka).ch += w;
            share(s, ka).intra += w;
          } else {
            if (ka >= 0) share(s, ka).ch += 0.5 * w;
            if (kb >= 0) share(s, kb).ch += 0.5 * w;
          }
        }
      }
      for (const Share& sh : shares_[s]) seen_[sh.station].push_back(static_cast<int>(s));
      agg_ += std::min(qr_[s], cap_);
      for (const Share& sh : shares_[s]) r_[sh.station] += term(s, sh);
    }
    for (std::size_t k = 0; k < st_.size(); ++k) {
      const StationObs so = nadir_only(st_[k].position);
      set_nadir(static_cast<int>(k), so.nadir);
    }
    plane_total_.resize(planes_.size());
    for (std::size_t p = 0; p < planes_.size(); ++p) plane_total_[p] = plane_total(p, -1, nullptr);
  }

  std::vector<double> objective() const {
    return {-std::accumulate(plane_total_.begin(), plane_total_.end(), 0.0),
            -agg_ / static_cast<double>(std::max<std::size_t>(1, qr_.size())),
            static_cast<double>(alive_count())};
  }

  bool alive(int k) const { return alive_[k] != 0; }
  double r(int k) const { return r_[k]; }
  int alive_count() const { return static_cast<int>(std::count(alive_.begin(), alive_.end(), 1)); }

  bool removable(int k) const {
    for (int s : seen_[k]) {
      const Share& sh = *find_share(s, k);
      const double after = qr_[s] - (2.0 * sh.ch - sh.intra);
      if (qr_[s] >= ctx_.params.tau_r && after < ctx_.params.tau_r + kRecMargin) return false;
    }
    for (int s : nadir_[k])
      if (nadir_count_[s] <= 1) return false;
    return true;
  }

  void remove(int k) {
    detach(k);
    alive_[k] = 0;
  }

  /// Best dominating move of station k within its 8-neighbourhood, applied.
  bool adjust(int k, std::vector<MoveRecord>& log) {
    const std::vector<double> y = objective();
    const double step = ctx_.params.tau_p;
    const double h = st_[k].position.z;
    std::optional<std::vector<double>> best_y;
    Vec3 best_pos;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Vec3 p{st_[k].position.x + dx * step, st_[k].position.y + dy * step, h};
        if (ctx_.zone.contains(p)) continue;
        const auto yp = evaluate_move(k, p, y);
        if (!yp || !dominates_eps(*yp, y)) continue;
        if (!best_y || (*yp)[1] < (*best_y)[1] ||
            ((*yp)[1] == (*best_y)[1] && (*yp)[0] < (*best_y)[0])) {
          best_y = yp;
          best_pos = p;
        }
      }
    }
    if (!best_y) return false;
    detach(k);
    st_[k].position = best_pos;
    attach(k);
    log.push_back({"station", k, y, objective()});
    return true;
  }

 private:
  int station_of(int view) const { return view < n_fixed_ ? -1 : (view - n_fixed_) / 5; }

  Share& share(std::size_t s, int k) {
    for (Share& sh : shares_[s])
      if (sh.station == k) return sh;
    shares_[s].push_back({k, 0.0, 0.0});
    return shares_[s].back();
  }
  const Share* find_share(std::size_t s, int k) const {
    for (const Share& sh : shares_[s])
      if (sh.station == k) return &sh;
    return nullptr;
  }

  double term(std::size_t s, const Share& sh) const {
    if (!(qr_[s] > 0.0)) return 0.0;
    return std::max(0.0, qr_[s] - ctx_.params.tau_r) * sh.ch / qr_[s];
  }

  bool dominates_eps(const std::vector<double>& a, const std::vector<double>& b) const {
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] > b[i]) return false;
      if (a[i] < b[i] - ctx_.params.improvement_eps) strict = true;
    }
    return strict;
  }

  StationObs nadir_only(Vec3 pos) const {
    StationObs so;
    so.nadir = nadir_samples(ctx_, grid_, plane_of_, pos);
    return so;
  }

  /// Observations of station k placed at `pos`; nadir membership is filled separately.
  StationObs observe_station(int k, Vec3 pos) const {
    StationObs so;
    const auto views = station_views({pos}, ctx_.params.tilt_deg);
    const auto& pts = ctx_.samples.points;
    const double d_max = ctx_.params.recon.d_max;
    std::vector<std::pair<int, SampleObservation>> hits;
    SampleObservation o;
    for (int j = 0; j < 5; ++j) {
      const ViewFrame frame(views[j], ctx_.camera);
      for (int i : grid_.query(frame.reach(d_max, grid_.min_z()))) {
        if (observe(frame, pts[i], ctx_.mesh, d_max, o)) {
          o.view = n_fixed_ + 5 * k + j;
          hits.push_back({i, o});
        }
      }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
      return a.first < b.first || (a.first == b.first && a.second.view < b.second.view);
    });
    for (std::size_t a = 0; a < hits.size();) {
      std::size_t b = a;
      std::vector<SampleObservation> here;
      for (; b < hits.size() && hits[b].first == hits[a].first; ++b) here.push_back(hits[b].second);
      so.samples.push_back({hits[a].first, std::move(here)});
      a = b;
    }
    return so;
  }

  std::vector<std::vector<std::uint64_t>> nadir_bits(const std::vector<int>& nadir) const {
    std::vector<std::vector<std::uint64_t>> bits(planes_.size());
    for (int s : nadir) {
      auto& b = bits[plane_of_[s]];
      if (b.empty()) b.assign((planes_[plane_of_[s]].size() + 63) / 64, 0);
      b[local_[s] / 64] |= std::uint64_t{1} << (local_[s] % 64);
    }
    return bits;
  }

  void set_nadir(int k, const std::vector<int>& nadir) {
    nadir_[k] = nadir;
    bits_[k] = nadir_bits(nadir);
    for (int s : nadir) ++nadir_count_[s];
  }

  double plane_total(std::size_t p, int k, const std::vector<std::uint64_t>* replacement) const {
    if (planes_[p].empty()) return 0.0;
    std::vector<std::vector<std::uint64_t>> sets;
    for (std::size_t j = 0; j < st_.size(); ++j) {
      if (!alive_[j]) continue;
      const std::vector<std::uint64_t>& b =
          static_cast<int>(j) == k ? (replacement ? *replacement : empty_) : bits_[j][p];
      if (!b.empty()) sets.push_back(b);
    }
    return plane_quality(sets, planes_[p].size(), ctx_.params.beta).total;
  }

  /// Objective after moving station k to p, or nullopt when infeasible.
  /// Objective after moving station k to p, or nullopt when the move is
  /// infeasible or its plane term is already worse than `y`.
  std::optional<std::vector<double>> evaluate_move(int k, Vec3 p, const std::vector<double>& y) const {
    const std::vector<int> nadir = nadir_samples(ctx_, grid_, plane_of_, p);
    // Horizontal coverage.
    for (int s : nadir_[k])
      if (nadir_count_[s] <= 1 && !std::binary_search(nadir.begin(), nadir.end(), s))
        return std::nullopt;
    // Plane qualities.
    const auto new_bits = nadir_bits(nadir);
    double planes = 0.0;
    for (std::size_t q = 0; q < planes_.size(); ++q) {
      const bool touched = !bits_[k][q].empty() || !new_bits[q].empty();
      planes += touched ? plane_total(q, k, &new_bits[q]) : plane_total_[q];
    }
    if (-planes > y[0]) return std::nullopt;
    const StationObs so = observe_station(k, p);
    const double tau = ctx_.params.tau_r;
    // Reconstructability over old and new samples.
    double delta = 0.0;
    std::size_t a = 0, b = 0;
    const auto& old = seen_[k];
    while (a < old.size() || b < so.samples.size()) {
      int s;
      const std::vector<SampleObservation>* fresh = nullptr;
      if (b >= so.samples.size() || (a < old.size() && old[a] < so.samples[b].first)) {
        s = old[a++];
      } else if (a >= old.size() || so.samples[b].first < old[a]) {
        s = so.samples[b].first;
        fresh = &so.samples[b++].second;
      } else {
        s = old[a++];
        fresh = &so.samples[b++].second;
      }
      const Share* sh = find_share(s, k);
      const double base = qr_[s] - (sh ? 2.0 * sh->ch - sh->intra : 0.0);
      if (base >= cap_ + kRecMargin) continue;
      double gain = 0.0;
      if (fresh) {
        for (std::size_t i = 0; i < fresh->size(); ++i) {
          for (const SampleObservation& u : obs_[s])
            if (station_of(u.view) != k) gain += pair_weight((*fresh)[i], u, ctx_.params.recon);
          for (std::size_t j = i + 1; j < fresh->size(); ++j)
            gain += pair_weight((*fresh)[i], (*fresh)[j], ctx_.params.recon);
        }
      }
      const double after = std::max(0.0, base + gain);
      if (qr_[s] >= tau && after < tau + kRecMargin) return std::nullopt;
      delta += std::min(after, cap_) - std::min(qr_[s], cap_);
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, qr_.size()));
    return std::vector<double>{-planes, -(agg_ + delta) / n, y[2]};
  }

  /// Updates every sample touched by station k (entering or leaving).
  void update_sample(std::size_t s, int k, const std::vector<SampleObservation>* fresh) {
    for (const Share& sh : shares_[s]) r_[sh.station] -= term(s, sh);
    agg_ -= std::min(qr_[s], cap_);
    auto& o = obs_[s];
    const ReconParams& rp = ctx_.params.recon;
    if (!fresh) {
      const auto split = std::stable_partition(
          o.begin(), o.end(), [&](const SampleObservation& x) { return station_of(x.view) != k; });
      for (auto v = split; v != o.end(); ++v)
        for (auto u = o.begin(); u != split; ++u) {
          const double w = pair_weight(*u, *v, rp);
          qr_[s] -= w;
          const int ku = station_of(u->view);
          if (ku >= 0) share(s, ku).ch -= 0.5 * w;
        }
      if (const Share* sh = find_share(s, k)) qr_[s] -= sh->intra;
      o.erase(split, o.end());
      std::erase_if(shares_[s], [k](const Share& sh) { return sh.station == k; });
    } else {
      Share mine{k, 0.0, 0.0};
      for (std::size_t i = 0; i < fresh->size(); ++i) {
        for (const auto& u : o) {
          const double w = pair_weight((*fresh)[i], u, rp);
          qr_[s] += w;
          mine.ch += 0.5 * w;
          const int ku = station_of(u.view);
          if (ku >= 0) share(s, ku).ch += 0.5 * w;
        }
        for (std::size_t j = i + 1; j < fresh->size(); ++j) {
          const double w = pair_weight((*fresh)[i], (*fresh)[j], rp);
          qr_[s] += w;
          mine.ch += w;
          mine.intra += w;
        }
      }
      o.insert(o.end(), fresh->begin(), fresh->end());
      shares_[s].push_back(mine);
    }
    if (o.size() < 2) qr_[s] = 0.0;
    qr_[s] = std::max(0.0, qr_[s]);
    agg_ += std::min(qr_[s], cap_);
    for (const Share& sh : shares_[s]) r_[sh.station] += term(s, sh);
  }

  void detach(int k) {
    for (int s : seen_[k]) update_sample(s, k, nullptr);
    seen_[k].clear();
    r_[k] = 0.0;
    for (int s : nadir_[k]) --nadir_count_[s];
    const auto old_bits = bits_[k];
    nadir_[k].clear();
    bits_[k].assign(planes_.size(), {});
    alive_[k] = 0;
    for (std::size_t p = 0; p < planes_.size(); ++p)
      if (!old_bits[p].empty()) plane_total_[p] = plane_total(p, -1, nullptr);
  }

  void attach(int k) {
    alive_[k] = 1;
    const StationObs so = observe_station(k, st_[k].position);
    for (const auto& [s, fresh] : so.samples) {
      update_sample(s, k, &fresh);
      seen_[k].push_back(s);
    }
    set_nadir(k, nadir_samples(ctx_, grid_, plane_of_, st_[k].position));
    for (std::size_t p = 0; p < planes_.size(); ++p)
      if (!bits_[k][p].empty()) plane_total_[p] = plane_total(p, -1, nullptr);
  }

  const PlanarContext& ctx_;
  std::vector<PlanarStation>& st_;
  int n_fixed_;
  double cap_;
  std::vector<int> plane_of_;
  SampleGrid grid_;
  std::vector<std::vector<int>> planes_;
  std::vector<int> local_;
  std::vector<char> alive_;
  std::vector<double> r_;
  std::vector<std::vector<int>> seen_;
  std::vector<std::vector<int>> nadir_;
  std::vector<std::vector<std::vector<std::uint64_t>>> bits_;
  std::vector<int> nadir_count_;
  std::vector<std::vector<SampleObservation>> obs_;
  std::vector<double> qr_;
  std::vector<std::vector<Share>> shares_;
  std::vector<double> plane_total_;
  double agg_ = 0.0;
  const std::vector<std::uint64_t> empty_;
};

}  // namespace

PlanarOptimizeResult optimize_planar(std::vector<PlanarStation>& stations,
                                     const PlanarContext& ctx) {
  PlanarOptimizeResult res;
  PlanarState state(ctx, stations);
  const int n = static_cast<int>(stations.size());
  for (int it = 1; it <= ctx.params.max_iters; ++it) {
    res.iterations = it;
    bool changed = false;
    for (int k = 0; k < n; ++k) {
      if (!state.alive(k)) continue;
      if (state.adjust(k, res.log)) {
        ++res.moved;
        changed = true;
      }
    }
    for (;;) {
      std::vector<int> order;
      for (int k = 0; k < n; ++k)
        if (state.alive(k)) order.push_back(k);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return state.r(a) > state.r(b); });
      auto pick = std::find_if(order.begin(), order.end(),
                               [&](int k) { return state.removable(k); });
      if (pick == order.end()) break;
      state.remove(*pick);
      ++res.removed;
      changed = true;
    }
    if (!changed) {
      res.converged = true;
      break;
    }
    res.last_changed_iteration = it;
  }
  std::vector<PlanarStation> kept;
  for (int k = 0; k < n; ++k)
    if (state.alive(k)) kept.push_back(stations[k]);
  stations = std::move(kept);
  return res;
}

PlanarPlan plan_planar(const PlanarContext& ctx) {
  PlanarPlan plan;
  const double h = ctx.scene.safe_altitude;
  plan.step = planar_step(ctx.camera, h, ctx.params.overlap_x, ctx.params.overlap_y);
  plan.stations = generate_planar(ctx.scene.bounds, h, ctx.camera, ctx.params);
  plan.grid_count = static_cast<int>(plan.stations.size());
  plan.densified = densify_coverage(plan.stations, ctx);
  plan.repaired = repair_reconstructability(plan.stations, ctx);
  plan.optimization = optimize_planar(plan.stations, ctx);
  plan.recon = reconstructability(ctx, plan.stations);
  return plan;
}

}  // namespace dipplan
