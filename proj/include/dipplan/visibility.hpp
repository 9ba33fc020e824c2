#pragma once

#include <vector>

#include "dipplan/interval.hpp"
#include "dipplan/scene.hpp"

namespace dipplan {

/// Portion of a facade (parameterised a -> b on [0,1]) seen from `observer`.
struct VisibleSpan {
  int facade = 0;
  IntervalSet span;
  Vec2 observer;
};

/// Spans shorter than this fraction of the facade length are dropped.
inline constexpr double kMinSpanFraction = 0.01;

/// Unoccluded, front-facing parts of `f` within `d_max` of `p`.
IntervalSet visible_span(Vec2 p, const Scene& scene, const Facade& f, double d_max);

/// Every facade visible from `p`, in facade-id order. Throws InputError when
/// `p` lies inside a building.
std::vector<VisibleSpan> visible_facades(Vec2 p, const Scene& scene, double d_max);

/// Per-candidate visibility, plus the inverse per-facade observer lists.
struct VisibilityIndex {
  struct Observation {
    int candidate = 0;
    IntervalSet span;
  };
  std::vector<std::vector<VisibleSpan>> by_candidate;
  std::vector<std::vector<Observation>> by_facade;
};

/// Observers of `f` from the index, in candidate (grid) order.
const std::vector<VisibilityIndex::Observation>& facade_observers(const VisibilityIndex& index,
                                                                  int facade);

/// True iff the open segment pq meets no prism interior. Grazing counts as visible.
bool los_3d(Vec3 p, Vec3 q, const Mesh25D& mesh);

}  // namespace dipplan
