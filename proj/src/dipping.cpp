#include "dipplan/dipping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>

#include "dipplan/error.hpp"

namespace dipplan {

namespace {

// Maximum completeness a single removal may give up during selection.
constexpr double kRemovalTol = 1e-9;
// Completeness loss tolerated by an optimizer move.
constexpr double kCoverageGuard = 1e-9;
// Largest deviation of an assigned direction from the inverse facade normal.
constexpr double kMaxDirectionDeg = 60.0;

double half_hfov(const DippingContext& ctx) { return ctx.quality.half_hfov; }

FacadeView compute_view(const DippingContext& ctx, Vec2 p, int facade, Vec2 dir) {
  const Facade& f = ctx.scene.facades[facade];
  const IntervalSet vis = visible_span(p, ctx.scene, f, ctx.quality.d_max);
  return make_facade_view({p, dir}, f, vis, half_hfov(ctx));
}

double point_cost(const DippingContext& ctx, Vec2 p, const std::vector<int>& facades,
                  const std::vector<std::optional<Vec2>>& directions) {
  if (facades.empty()) return 0.0;
  std::vector<DippingSequence3D> seqs;
  for (int f : facades)
    seqs.push_back(lift_sequence(p, ctx.scene.facades[f], *directions[f],
                                 ctx.scene.safe_altitude, ctx.scene.min_flight_altitude,
                                 ctx.params.k_d, ctx.camera));
  return hovering_cost(seqs, ctx.params.k_d).analytic;
}

/// Accepts g' over g when it dominates by a margin in at least one component.
bool dominates_by(const std::vector<double>& gp, const std::vector<double>& g, double eps) {
  bool strict = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gp[i] > g[i]) return false;
    if (gp[i] < g[i] - eps) strict = true;
  }
  return strict;
}

std::vector<int> rotation_order(int half_steps) {
  std::vector<int> ks{0};
  for (int k = 1; k <= half_steps; ++k) {
    ks.push_back(-k);
    ks.push_back(k);
  }
  return ks;
}

}  // namespace

std::vector<DippingView2D> DippingPlan::views() const {
  std::vector<DippingView2D> out;
  for (const DippingPoint& p : points)
    for (int f : p.facades) out.push_back({p.position, *directions[f], f});
  return out;
}

double h_pic(const CameraModel& cam, double d) {
  if (!(d > 0.0)) throw InputError("h_pic needs a positive distance to the facade plane");
  return cam.sensor_h_mm * d / cam.focal_mm;
}

DippingSequence3D lift_sequence(Vec2 p, const Facade& f, Vec2 direction, double altitude,
                                double min_altitude, double k_d, const CameraModel& cam) {
  if (altitude < min_altitude)
    throw InputError("dipping start altitude is below the minimum flight altitude");
  DippingSequence3D seq;
  seq.origin = p;
  seq.facade = f.id;
  seq.distance = std::abs(f.offset(p));
  seq.h_pic = h_pic(cam, seq.distance);
  const double step = k_d * seq.h_pic;
  if (!(step > 1e-6)) throw InputError("dipping step k_d * h_pic must be positive");
  const double yaw = yaw_of(direction);
  for (int k = 0;; ++k) {
    const double z = altitude - k * step;
    if (z < min_altitude - 1e-9) break;
    seq.views.push_back({{p.x, p.y, z}, yaw, 0.0});
  }
  // Tilt the last view down until the image's lower edge reaches the ground
  // on the facade plane.
  const double z_low = seq.views.back().position.z;
  const double cos_theta = std::max(0.05, -dot(normalized(direction), f.normal));
  const double along = seq.distance / cos_theta;
  const double pitch = std::max(0.0, std::atan(z_low / along) - 0.5 * cam.vfov());
  seq.lowest_extra_view = View3D{seq.views.back().position, yaw, -rad2deg(pitch)};
  return seq;
}

double merge_savings(double d, double tau_d) {
  if (!(tau_d > 0.0) || d > tau_d) return 0.0;
  const double sigma = tau_d / 3.0;
  return 0.5 * std::exp(-d * d / (2.0 * sigma * sigma));
}

HoverCost hovering_cost(const std::vector<DippingSequence3D>& sequences, double k_d, int source) {
  HoverCost out;
  struct Pair {
    double d;
    std::size_t s, i, t, j;
  };
  std::vector<Pair> candidates;
  for (const DippingSequence3D& s : sequences) out.views += static_cast<int>(s.views.size());
  out.analytic = out.views;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    for (std::size_t t = s + 1; t < sequences.size(); ++t) {
      const double tau_d = (1.0 - k_d) * std::min(sequences[s].h_pic, sequences[t].h_pic);
      for (std::size_t i = 0; i < sequences[s].views.size(); ++i) {
        for (std::size_t j = 0; j < sequences[t].views.size(); ++j) {
          const double d = dist(sequences[s].views[i].position, sequences[t].views[j].position);
          out.analytic -= merge_savings(d, tau_d);
          if (d < tau_d) candidates.push_back({d, s, i, t, j});
        }
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.d, a.s, a.i, a.t, a.j) < std::tie(b.d, b.s, b.i, b.t, b.j);
  });
  // partner[s][i] = (t, j) once merged
  std::vector<std::vector<std::pair<int, int>>> partner(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s)
    partner[s].assign(sequences[s].views.size(), {-1, -1});
  for (const Pair& c : candidates) {
    if (partner[c.s][c.i].first >= 0 || partner[c.t][c.j].first >= 0) continue;
    partner[c.s][c.i] = {static_cast<int>(c.t), static_cast<int>(c.j)};
    partner[c.t][c.j] = {static_cast<int>(c.s), static_cast<int>(c.i)};
    ++out.merged_pairs;
  }

  std::vector<std::vector<int>> group_of(sequences.size());
  for (std::size_t s = 0; s < sequences.size(); ++s)
    group_of[s].assign(sequences[s].views.size(), -1);
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const SurfaceRef target{SurfaceKind::Facade, sequences[s].facade};
    for (std::size_t i = 0; i < sequences[s].views.size(); ++i) {
      if (group_of[s][i] >= 0) continue;
      HoverGroup g;
      g.kind = HoverGroup::Kind::Dipping;
      g.source = source;
      const View3D& v = sequences[s].views[i];
      const auto [t, j] = partner[s][i];
      if (t >= 0) {
        const View3D& w = sequences[t].views[j];
        g.position = (v.position + w.position) * 0.5;
        g.captures.push_back({{g.position, v.yaw_deg, v.pitch_deg}, target});
        g.captures.push_back({{g.position, w.yaw_deg, w.pitch_deg},
                              {SurfaceKind::Facade, sequences[t].facade}});
        group_of[t][j] = static_cast<int>(out.groups.size());
      } else {
        g.position = v.position;
        g.captures.push_back({v, target});
      }
      group_of[s][i] = static_cast<int>(out.groups.size());
      out.groups.push_back(std::move(g));
    }
  }
  // The extra tilted view shares the hover of its sequence's lowest view.
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    if (!sequences[s].lowest_extra_view || sequences[s].views.empty()) continue;
    HoverGroup& g = out.groups[group_of[s].back()];
    View3D extra = *sequences[s].lowest_extra_view;
    extra.position = g.position;
    g.captures.push_back({extra, {SurfaceKind::Facade, sequences[s].facade}});
  }
  return out;
}

bool dominates(const std::vector<double>& g, const std::vector<double>& g_prime) {
  if (g.size() != g_prime.size()) return false;
  bool strict = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > g_prime[i]) return false;
    if (g[i] < g_prime[i]) strict = true;
  }
  return strict;
}

std::optional<Vec2> init_direction(const Facade& f,
                                   const std::vector<std::pair<Vec2, IntervalSet>>& observers,
                                   const DippingContext& ctx) {
  if (observers.empty()) return std::nullopt;
  std::optional<Vec2> best;
  double best_q = -1.0;
  std::vector<FacadeView> views(observers.size());
  for (int k : rotation_order(ctx.params.init_half_steps)) {
    const Vec2 dir = rotated(-f.normal, deg2rad(k * ctx.params.tau_s_deg));
    for (std::size_t i = 0; i < observers.size(); ++i)
      views[i] = make_facade_view({observers[i].first, dir}, f, observers[i].second,
                                  half_hfov(ctx));
    const double q = facade_quality(views, f, ctx.quality).total;
    if (q > best_q) {
      best_q = q;
      best = dir;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Point selection

namespace {

/// Incremental coverage bookkeeping for one facade during selection.
struct FacadeTrack {
  struct View {
    int candidate = 0;
    FacadeView fv;
    double mid = 0.0;
    int midcount = 0;
    double uniq = 0.0;
    double static_score = 0.0;
    std::vector<std::pair<int, int>> segs;  ///< elementary segment ranges [lo, hi)
  };
  std::vector<View> views;
  std::vector<double> xs;
  std::vector<int> mult;
  std::vector<int> owner_xor;
  std::vector<int> by_mid;
};

double longest_mid(const IntervalSet& s) {
  const Interval* best = nullptr;
  for (const Interval& p : s.pieces())
    if (!best || p.length() > best->length()) best = &p;
  return best->mid();
}

}  // namespace

std::vector<int> select_dipping_points(const DippingContext& ctx,
                                       const std::vector<Vec2>& candidates,
                                       const VisibilityIndex& index,
                                       const std::vector<std::optional<Vec2>>& directions) {
  const Scene& scene = ctx.scene;
  const QualityParams& qp = ctx.quality;
  const std::size_t n_cand = candidates.size();
  std::vector<FacadeTrack> tracks(scene.facades.size());
  std::vector<std::vector<std::pair<int, int>>> of_candidate(n_cand);  // (facade, view)

  for (const Facade& f : scene.facades) {
    if (!directions[f.id]) continue;
    FacadeTrack& tr = tracks[f.id];
    for (const auto& obs : facade_observers(index, f.id)) {
      FacadeView fv =
          make_facade_view({candidates[obs.candidate], *directions[f.id]}, f, obs.span,
                           half_hfov(ctx));
      if (fv.coverage.empty()) continue;
      FacadeTrack::View v;
      v.candidate = obs.candidate;
      v.fv = std::move(fv);
      v.mid = longest_mid(v.fv.coverage);
      v.static_score = qp.weights.perspective * view_perspective(v.fv, f) +
                       qp.weights.photometric * view_photometric(v.fv, qp) +
                       qp.weights.completeness * std::min(1.0, v.fv.coverage.measure());
      of_candidate[obs.candidate].push_back({f.id, static_cast<int>(tr.views.size())});
      tr.views.push_back(std::move(v));
    }
    for (const auto& v : tr.views)
      for (const Interval& p : v.fv.coverage.pieces()) {
        tr.xs.push_back(p.lo);
        tr.xs.push_back(p.hi);
      }
    std::sort(tr.xs.begin(), tr.xs.end());
    tr.xs.erase(std::unique(tr.xs.begin(), tr.xs.end()), tr.xs.end());
    const std::size_t nseg = tr.xs.empty() ? 0 : tr.xs.size() - 1;
    std::vector<int> dmult(nseg + 1, 0), dxor(nseg + 1, 0);
    for (std::size_t vi = 0; vi < tr.views.size(); ++vi) {
      auto& v = tr.views[vi];
      for (const Interval& p : v.fv.coverage.pieces()) {
        const int lo = static_cast<int>(std::lower_bound(tr.xs.begin(), tr.xs.end(), p.lo) - tr.xs.begin());
        const int hi = static_cast<int>(std::lower_bound(tr.xs.begin(), tr.xs.end(), p.hi) - tr.xs.begin());
        v.segs.push_back({lo, hi});
        dmult[lo] += 1;
        dmult[hi] -= 1;
        dxor[lo] ^= static_cast<int>(vi) + 1;
        dxor[hi] ^= static_cast<int>(vi) + 1;
      }
    }
    tr.mult.assign(nseg, 0);
    tr.owner_xor.assign(nseg, 0);
    int m = 0, x = 0;
    for (std::size_t e = 0; e < nseg; ++e) {
      m += dmult[e];
      x ^= dxor[e];
      tr.mult[e] = m;
      tr.owner_xor[e] = x;
      if (m == 1) tr.views[x - 1].uniq += tr.xs[e + 1] - tr.xs[e];
    }
    std::vector<FacadeView> fvs;
    for (const auto& v : tr.views) fvs.push_back(v.fv);
    const CoverageCounter counter(fvs);
    for (auto& v : tr.views) v.midcount = counter.at(v.mid);
    tr.by_mid.resize(tr.views.size());
    std::iota(tr.by_mid.begin(), tr.by_mid.end(), 0);
    std::stable_sort(tr.by_mid.begin(), tr.by_mid.end(),
                     [&](int a, int b) { return tr.views[a].mid < tr.views[b].mid; });
  }

  auto structural = [&](int midcount) {
    return qp.weights.structural * std::exp(-qp.beta * (std::max(1, midcount) - 1));
  };
  std::vector<double> score(n_cand, 0.0);
  std::vector<char> alive(n_cand, 0), removable(n_cand, 0);
  std::set<std::pair<double, int>> queue;
  for (std::size_t c = 0; c < n_cand; ++c) {
    if (of_candidate[c].empty()) continue;  // sees nothing: removed up front
    alive[c] = 1;
    bool rem = true;
    for (const auto& [f, vi] : of_candidate[c]) {
      const auto& v = tracks[f].views[vi];
      score[c] += v.static_score + structural(v.midcount);
      rem = rem && v.uniq <= kRemovalTol;
    }
    removable[c] = rem;
    if (rem) queue.insert({score[c], static_cast<int>(c)});
  }

  auto block = [&](int c) {
    if (!removable[c]) return;
    queue.erase({score[c], c});
    removable[c] = 0;
  };

  while (!queue.empty()) {
    const int c = queue.begin()->second;
    queue.erase(queue.begin());
    alive[c] = 0;
    removable[c] = 0;
    for (const auto& [f, vi] : of_candidate[c]) {
      FacadeTrack& tr = tracks[f];
      const auto& v = tr.views[vi];
      for (const auto& [lo, hi] : v.segs) {
        for (int e = lo; e < hi; ++e) {
          tr.mult[e] -= 1;
          tr.owner_xor[e] ^= vi + 1;
          if (tr.mult[e] == 1) {
            auto& owner = tr.views[tr.owner_xor[e] - 1];
            owner.uniq += tr.xs[e + 1] - tr.xs[e];
            if (owner.uniq > kRemovalTol) block(owner.candidate);
          }
        }
      }
      for (const Interval& p : v.fv.coverage.pieces()) {
        auto first = std::lower_bound(tr.by_mid.begin(), tr.by_mid.end(), p.lo,
                                      [&](int a, double x) { return tr.views[a].mid < x; });
        for (auto it = first; it != tr.by_mid.end() && tr.views[*it].mid <= p.hi; ++it) {
          if (*it == vi) continue;
          auto& w = tr.views[*it];
          if (!alive[w.candidate]) continue;
          const double before = structural(w.midcount);
          w.midcount -= 1;
          const double delta = structural(w.midcount) - before;
          if (removable[w.candidate]) queue.erase({score[w.candidate], w.candidate});
          score[w.candidate] += delta;
          if (removable[w.candidate]) queue.insert({score[w.candidate], w.candidate});
        }
      }
    }
  }

  std::vector<int> survivors;
  for (std::size_t c = 0; c < n_cand; ++c)
    if (alive[c]) survivors.push_back(static_cast<int>(c));
  return survivors;
}

DippingPlan initialize_dipping(const DippingContext& ctx, const std::vector<Vec2>& candidates,
                               const VisibilityIndex& index) {
  DippingPlan plan;
  plan.candidate_count = candidates.size();
  plan.directions.resize(ctx.scene.facades.size());
  for (const Facade& f : ctx.scene.facades) {
    std::vector<std::pair<Vec2, IntervalSet>> observers;
    for (const auto& obs : facade_observers(index, f.id))
      observers.push_back({candidates[obs.candidate], obs.span});
    plan.directions[f.id] = init_direction(f, observers, ctx);
  }
  const std::vector<int> survivors =
      select_dipping_points(ctx, candidates, index, plan.directions);
  for (int c : survivors) {
    DippingPoint p;
    p.position = candidates[c];
    p.grid_index = c;
    for (const VisibleSpan& vs : index.by_candidate[c]) {
      if (!plan.directions[vs.facade]) continue;
      const FacadeView fv = make_facade_view({p.position, *plan.directions[vs.facade]},
                                             ctx.scene.facades[vs.facade], vs.span,
                                             half_hfov(ctx));
      if (!fv.coverage.empty()) p.facades.push_back(vs.facade);
    }
    if (!p.facades.empty()) plan.points.push_back(std::move(p));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Optimisation

std::vector<FacadeView> plan_facade_views(const DippingPlan& plan, int facade,
                                          const DippingContext& ctx) {
  std::vector<FacadeView> out;
  for (const DippingPoint& p : plan.points)
    if (std::binary_search(p.facades.begin(), p.facades.end(), facade))
      out.push_back(compute_view(ctx, p.position, facade, *plan.directions[facade]));
  return out;
}

QualityBreakdown plan_facade_quality(const DippingPlan& plan, int facade,
                                     const DippingContext& ctx) {
  return facade_quality(plan_facade_views(plan, facade, ctx), ctx.scene.facades[facade],
                        ctx.quality);
}

double plan_hover_cost(const DippingPlan& plan, const DippingContext& ctx) {
  double c = 0.0;
  for (const DippingPoint& p : plan.points)
    c += point_cost(ctx, p.position, p.facades, plan.directions);
  return c;
}

namespace {

class Optimizer {
 public:
  Optimizer(DippingPlan& plan, const DippingContext& ctx) : plan_(plan), ctx_(ctx) {
    for (const DippingPoint& p : plan_.points) {
      std::vector<FacadeView> vs;
      for (int f : p.facades) vs.push_back(compute_view(ctx_, p.position, f, dir(f)));
      views_.push_back(std::move(vs));
      cost_.push_back(point_cost(ctx_, p.position, p.facades, plan_.directions));
    }
  }

  DippingOptimizeResult run() {
    DippingOptimizeResult res;
    for (int it = 1; it <= ctx_.params.max_iters; ++it) {
      res.iterations = it;
      bool changed = false;
      for (std::size_t i = 0; i < plan_.points.size(); ++i) changed |= adjust_point(i, res.log);
      for (const Facade& f : ctx_.scene.facades) changed |= adjust_direction(f.id, res.log);
      changed |= remove_views(res.log);
      if (!changed) {
        res.converged = true;
        break;
      }
      res.last_changed_iteration = it;
    }
    return res;
  }

 private:
  Vec2 dir(int f) const { return *plan_.directions[f]; }
  double total_cost() const { return std::accumulate(cost_.begin(), cost_.end(), 0.0); }

  /// Views of facade f; point `skip` contributes `replacement` instead (if any).
  std::vector<FacadeView> views_of(int f, std::size_t skip, const FacadeView* replacement) const {
    std::vector<FacadeView> out;
    for (std::size_t i = 0; i < plan_.points.size(); ++i) {
      const auto& fs = plan_.points[i].facades;
      auto it = std::find(fs.begin(), fs.end(), f);
      if (it == fs.end()) continue;
      if (i == skip) {
        if (replacement) out.push_back(*replacement);
        continue;
      }
      out.push_back(views_[i][it - fs.begin()]);
    }
    return out;
  }

  QualityBreakdown quality(int f, std::size_t skip = SIZE_MAX,
                           const FacadeView* replacement = nullptr) const {
    return facade_quality(views_of(f, skip, replacement), ctx_.scene.facades[f], ctx_.quality);
  }

  bool adjust_point(std::size_t i, std::vector<MoveRecord>& log) {
    DippingPoint& pt = plan_.points[i];
    const double step = ctx_.params.tau_p;
    std::vector<double> g{total_cost()};
    std::vector<double> qc;
    for (int f : pt.facades) {
      const QualityBreakdown q = quality(f);
      g.push_back(-q.total);
      qc.push_back(q.q_c);
    }
    struct Best {
      std::vector<double> g;
      Vec2 pos;
      std::vector<FacadeView> views;
      double cost;
      double gain;
    };
    std::optional<Best> best;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const Vec2 p{pt.position.x + dx * step, pt.position.y + dy * step};
        if (ctx_.zone.contains(p) || ctx_.scene.building_containing(p)) continue;
        std::vector<FacadeView> nv;
        for (int f : pt.facades) nv.push_back(compute_view(ctx_, p, f, dir(f)));
        const double c = point_cost(ctx_, p, pt.facades, plan_.directions);
        std::vector<double> gp{g[0] - cost_[i] + c};
        bool feasible = true;
        double gain = 0.0;
        for (std::size_t k = 0; k < pt.facades.size(); ++k) {
          const QualityBreakdown q = quality(pt.facades[k], i, &nv[k]);
          feasible = feasible && q.q_c >= qc[k] - kCoverageGuard;
          gp.push_back(-q.total);
          gain += g[k + 1] - gp.back();
        }
        if (!feasible || !dominates_by(gp, g, ctx_.params.improvement_eps)) continue;
        if (!best || gp[0] < best->g[0] || (gp[0] == best->g[0] && gain > best->gain))
          best = Best{gp, p, std::move(nv), c, gain};
      }
    }
    if (!best) return false;
    log.push_back({"point", static_cast<int>(i), g, best->g});
    pt.position = best->pos;
    views_[i] = std::move(best->views);
    cost_[i] = best->cost;
    return true;
  }

  bool adjust_direction(int f, std::vector<MoveRecord>& log) {
    if (!plan_.directions[f]) return false;
    std::vector<std::size_t> holders;
    for (std::size_t i = 0; i < plan_.points.size(); ++i)
      if (std::binary_search(plan_.points[i].facades.begin(), plan_.points[i].facades.end(), f))
        holders.push_back(i);
    if (holders.empty()) return false;
    const Facade& facade = ctx_.scene.facades[f];
    const QualityBreakdown q0 = quality(f);
    const std::vector<double> g{total_cost(), -q0.total};
    std::optional<std::pair<Vec2, std::vector<double>>> best;
    std::vector<FacadeView> best_views;
    for (int sign : {-1, 1}) {
      const Vec2 d = rotated(dir(f), sign * deg2rad(ctx_.params.tau_s_deg));
      if (rad2deg(angle_between(d, -facade.normal)) > kMaxDirectionDeg + 1e-9) continue;
      std::vector<FacadeView> vs;
      for (std::size_t i : holders) vs.push_back(compute_view(ctx_, plan_.points[i].position, f, d));
      const QualityBreakdown q = facade_quality(vs, facade, ctx_.quality);
      if (q.q_c < q0.q_c - kCoverageGuard) continue;
      const std::vector<double> gp{g[0], -q.total};
      if (!dominates_by(gp, g, ctx_.params.improvement_eps)) continue;
      if (!best || gp[1] < best->second[1]) {
        best = {d, gp};
        best_views = std::move(vs);
      }
    }
    if (!best) return false;
    log.push_back({"direction", f, g, best->second});
    plan_.directions[f] = best->first;
    for (std::size_t k = 0; k < holders.size(); ++k) {
      const auto& fs = plan_.points[holders[k]].facades;
      views_[holders[k]][std::find(fs.begin(), fs.end(), f) - fs.begin()] = best_views[k];
    }
    return true;
  }

  bool remove_views(std::vector<MoveRecord>& log) {
    bool changed = false;
    for (std::size_t i = 0; i < plan_.points.size(); ++i) {
      for (std::size_t k = 0; k < plan_.points[i].facades.size();) {
        DippingPoint& pt = plan_.points[i];
        const int f = pt.facades[k];
        const QualityBreakdown q0 = quality(f);
        const std::vector<double> g{total_cost(), -q0.total};
        std::vector<int> rest = pt.facades;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(k));
        const double c = point_cost(ctx_, pt.position, rest, plan_.directions);
        const QualityBreakdown q = quality(f, i, nullptr);
        const std::vector<double> gp{g[0] - cost_[i] + c, -q.total};
        if (q.q_c >= q0.q_c - kCoverageGuard && dominates_by(gp, g, ctx_.params.improvement_eps)) {
          log.push_back({"removal", f, g, gp});
          pt.facades = std::move(rest);
          views_[i].erase(views_[i].begin() + static_cast<std::ptrdiff_t>(k));
          cost_[i] = c;
          changed = true;
        } else {
          ++k;
        }
      }
    }
    for (std::size_t i = plan_.points.size(); i-- > 0;) {
      if (!plan_.points[i].facades.empty()) continue;
      plan_.points.erase(plan_.points.begin() + static_cast<std::ptrdiff_t>(i));
      views_.erase(views_.begin() + static_cast<std::ptrdiff_t>(i));
      cost_.erase(cost_.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return changed;
  }

  DippingPlan& plan_;
  const DippingContext& ctx_;
  std::vector<std::vector<FacadeView>> views_;
  std::vector<double> cost_;
};

}  // namespace

DippingOptimizeResult optimize_dipping(DippingPlan& plan, const DippingContext& ctx) {
  return Optimizer(plan, ctx).run();
}

LiftedDipping lift_plan(const DippingPlan& plan, const DippingContext& ctx) {
  LiftedDipping out;
  for (std::size_t i = 0; i < plan.points.size(); ++i) {
    const DippingPoint& p = plan.points[i];
    std::vector<DippingSequence3D> seqs;
    for (int f : p.facades)
      seqs.push_back(lift_sequence(p.position, ctx.scene.facades[f], *plan.directions[f],
                                   ctx.scene.safe_altitude, ctx.scene.min_flight_altitude,
                                   ctx.params.k_d, ctx.camera));
    HoverCost hc = hovering_cost(seqs, ctx.params.k_d, static_cast<int>(i));
    out.analytic_cost += hc.analytic;
    out.merged_pairs += hc.merged_pairs;
    out.sequences.insert(out.sequences.end(), seqs.begin(), seqs.end());
    for (HoverGroup& g : hc.groups) out.hovers.push_back(std::move(g));
  }
  return out;
}

}  // namespace dipplan
