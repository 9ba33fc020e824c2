#pragma once

#include <vector>

namespace dipplan {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi > lo ? hi - lo : 0.0; }
  double mid() const { return 0.5 * (lo + hi); }
  bool operator==(const Interval&) const = default;
};

/// Sorted, disjoint union of closed intervals on the real line.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(std::vector<Interval> pieces);
  static IntervalSet single(double lo, double hi) { return IntervalSet({{lo, hi}}); }

  const std::vector<Interval>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double measure() const;
  bool contains(double x) const;

  IntervalSet unite(const IntervalSet& o) const;
  IntervalSet intersect(const IntervalSet& o) const;
  IntervalSet subtract(const IntervalSet& o) const;
  IntervalSet clipped(double lo, double hi) const { return intersect(single(lo, hi)); }
  /// Drops pieces no longer than `min_len`.
  IntervalSet without_short(double min_len) const;

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> pieces_;
};

}  // namespace dipplan
