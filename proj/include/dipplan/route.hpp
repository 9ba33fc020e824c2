#pragma once

#include <map>
#include <vector>

#include "dipplan/dipping.hpp"
#include "dipplan/kernels.hpp"
#include "dipplan/scene.hpp"

namespace dipplan {

struct RouteParams {
  double w_same = 0.5;
  double w_adjacent = 0.75;
  double w_other = 1.0;
  double min_leg = 0.1;     ///< metres; shorter legs are clamped
  int exact_limit = 12;     ///< solve exactly up to this many nodes
  bool topology = true;     ///< false: plain distance costs (w_p = 1, alpha = 0)
};

/// Shortest flyable connections that stay out of every dilated prism.
class SafeRouter {
 public:
  SafeRouter(const NoDippingZone& zone, double safe_altitude);

  /// Builds the corner graphs needed for legs flown at these altitudes.
  /// Calls to distance() and path() are thread-safe afterwards.
  void prepare(const std::vector<double>& altitudes);

  double distance(Vec3 a, Vec3 b) const;
  /// Polyline from a to b, endpoints included. Throws PlanningError when an
  /// endpoint lies inside a dilated prism.
  std::vector<Vec3> path(Vec3 a, Vec3 b) const;

 private:
  struct Layer {
    NoDippingZone zone;
    std::vector<Vec2> nodes;
    std::vector<double> dist;  ///< all pairs, row-major
    std::vector<int> next;
  };

  const Layer& layer(double z) const;
  std::vector<bool> active_at(double z) const;

  const NoDippingZone& zone_;
  double safe_altitude_;
  mutable std::map<std::vector<bool>, Layer> layers_;
};

/// Hover groups flown as one unit: a dipping point's descent, or a planar station.
struct RouteUnit {
  std::vector<HoverGroup> groups;  ///< flight order
  Vec3 entry;
  Vec3 exit;
  Vec3 direction;  ///< normalised mean capture direction, zero if undefined
  std::vector<SurfaceRef> targets;
};

/// Chains the groups of each dipping point in descending altitude; every
/// planar group forms its own unit. Units keep first-appearance order.
std::vector<RouteUnit> make_route_units(const std::vector<HoverGroup>& groups);

/// Topology coefficient between two target sets.
double plane_weight(const std::vector<SurfaceRef>& a, const std::vector<SurfaceRef>& b,
                    const Scene& scene, const RouteParams& params);

/// w_p * l * exp(alpha / l) with l clamped to min_leg.
double edge_cost(double w_p, double l, double alpha, double min_leg);

struct RouteGraph {
  std::size_t n = 0;
  std::vector<double> length;  ///< safe distance, exit of i to entry of j
  std::vector<double> cost;
  double at(std::size_t i, std::size_t j) const { return cost[i * n + j]; }
};

RouteGraph build_route_graph(const std::vector<RouteUnit>& units, const SafeRouter& router,
                             const Scene& scene, const RouteParams& params,
                             Exec exec = Exec::Parallel);

struct Tour {
  std::vector<int> order;
  double cost = 0.0;
};

double path_cost(const std::vector<double>& cost, std::size_t n, const std::vector<int>& order);

Tour nearest_neighbor_tour(const std::vector<double>& cost, std::size_t n, int start);
/// 2-opt and Or-opt on the directed costs until no move improves; the first
/// node stays in place.
Tour improve_tour(const std::vector<double>& cost, std::size_t n, Tour tour);
/// Exact open-path optimum from `start` (Held-Karp).
Tour exact_tour(const std::vector<double>& cost, std::size_t n, int start);
/// Exact below `exact_limit` nodes, heuristic above.
Tour solve_tour(const std::vector<double>& cost, std::size_t n, int start, int exact_limit = 12);

/// Index of the unit whose entry lies nearest to `launch` (lowest index on ties).
int nearest_unit(const std::vector<RouteUnit>& units, Vec3 launch);

struct CaptureRecord {
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  SurfaceRef target;
};

struct Waypoint {
  Vec3 position;
  HoverGroup::Kind kind = HoverGroup::Kind::Planar;
  int source = -1;
  std::vector<CaptureRecord> captures;
};

struct FlightPlan {
  std::vector<Waypoint> waypoints;
  std::vector<std::vector<Vec3>> legs;  ///< legs[i] joins waypoint i to i + 1
  double trajectory_m = 0.0;

  int images() const;
  int hovers() const { return static_cast<int>(waypoints.size()); }
};

/// Lays out the units in tour order, captures sorted by yaw within a hover.
FlightPlan sequence_views(const Tour& tour, const std::vector<RouteUnit>& units,
                          const SafeRouter& router);

double polyline_length(const std::vector<Vec3>& line);

}  // namespace dipplan
