#include "dipplan/interval.hpp"

#include <algorithm>

namespace dipplan {

IntervalSet::IntervalSet(std::vector<Interval> pieces) {
  std::erase_if(pieces, [](const Interval& i) { return !(i.hi > i.lo); });
  std::sort(pieces.begin(), pieces.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (const Interval& p : pieces) {
    if (!pieces_.empty() && p.lo <= pieces_.back().hi)
      pieces_.back().hi = std::max(pieces_.back().hi, p.hi);
    else
      pieces_.push_back(p);
  }
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const Interval& p : pieces_) m += p.length();
  return m;
}

bool IntervalSet::contains(double x) const {
  for (const Interval& p : pieces_)
    if (x >= p.lo && x <= p.hi) return true;
  return false;
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
  std::vector<Interval> all = pieces_;
  all.insert(all.end(), o.pieces_.begin(), o.pieces_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
  std::vector<Interval> out;
  std::size_t i = 0, j = 0;
  while (i < pieces_.size() && j < o.pieces_.size()) {
    const double lo = std::max(pieces_[i].lo, o.pieces_[j].lo);
    const double hi = std::min(pieces_[i].hi, o.pieces_[j].hi);
    if (hi > lo) out.push_back({lo, hi});
    if (pieces_[i].hi < o.pieces_[j].hi)
      ++i;
    else
      ++j;
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::subtract(const IntervalSet& o) const {
  std::vector<Interval> out;
  for (Interval p : pieces_) {
    double cur = p.lo;
    for (const Interval& q : o.pieces_) {
      if (q.hi <= cur) continue;
      if (q.lo >= p.hi) break;
      if (q.lo > cur) out.push_back({cur, q.lo});
      cur = std::max(cur, q.hi);
      if (cur >= p.hi) break;
    }
    if (cur < p.hi) out.push_back({cur, p.hi});
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::without_short(double min_len) const {
  std::vector<Interval> out;
  for (const Interval& p : pieces_)
    if (p.length() > min_len) out.push_back(p);
  IntervalSet s;
  s.pieces_ = std::move(out);
  return s;
}

}  // namespace dipplan
