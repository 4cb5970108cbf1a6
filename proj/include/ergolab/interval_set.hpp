#pragma once

#include <algorithm>
#include <compare>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

// Half-open [lo, hi), lo < hi, rational endpoints.
struct Interval {
  Rational lo;
  Rational hi;

  Rational length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

// Finite union of disjoint half-open intervals in canonical form: sorted,
// pairwise disjoint, no touching endpoints. Canonical form makes equality a
// plain representation comparison.
class IntervalSet {
 public:
  IntervalSet() = default;

  explicit IntervalSet(std::vector<Interval> pieces) {
    for (const auto& p : pieces)
      if (!(p.lo < p.hi)) throw std::invalid_argument("IntervalSet: interval with lo >= hi");
    std::sort(pieces.begin(), pieces.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (auto& p : pieces) {
      if (!iv_.empty() && p.lo <= iv_.back().hi) {
        if (p.hi > iv_.back().hi) iv_.back().hi = p.hi;
      } else {
        iv_.push_back(p);
      }
    }
  }

  static IntervalSet single(const Rational& lo, const Rational& hi) {
    return IntervalSet({Interval{lo, hi}});
  }

  bool empty() const { return iv_.empty(); }
  std::size_t piece_count() const { return iv_.size(); }
  const std::vector<Interval>& pieces() const { return iv_; }

  Rational measure() const {
    Rational total(0);
    for (const auto& p : iv_) total += p.hi - p.lo;
    return total;
  }

  bool contains(const Rational& x) const {
    auto it = std::upper_bound(iv_.begin(), iv_.end(), x,
                               [](const Rational& v, const Interval& p) { return v < p.lo; });
    if (it == iv_.begin()) return false;
    --it;
    return x >= it->lo && x < it->hi;
  }

  IntervalSet translated(const Rational& offset) const {
    IntervalSet out;
    out.iv_.reserve(iv_.size());
    for (const auto& p : iv_) out.iv_.push_back({p.lo + offset, p.hi + offset});
    return out;
  }

  friend IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) {
    std::vector<Interval> all = a.iv_;
    all.insert(all.end(), b.iv_.begin(), b.iv_.end());
    return IntervalSet(std::move(all));
  }

  friend IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out;
    std::size_t i = 0, j = 0;
    while (i < a.iv_.size() && j < b.iv_.size()) {
      const Rational lo = std::max(a.iv_[i].lo, b.iv_[j].lo);
      const Rational hi = std::min(a.iv_[i].hi, b.iv_[j].hi);
      if (lo < hi) out.iv_.push_back({lo, hi});
      if (a.iv_[i].hi < b.iv_[j].hi)
        ++i;
      else
        ++j;
    }
    return out;
  }

  friend IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out;
    std::size_t j = 0;
    for (const auto& p : a.iv_) {
      Rational lo = p.lo;
      while (j < b.iv_.size() && b.iv_[j].hi <= lo) ++j;
      std::size_t k = j;
      while (k < b.iv_.size() && b.iv_[k].lo < p.hi) {
        if (b.iv_[k].lo > lo) out.iv_.push_back({lo, b.iv_[k].lo});
        lo = std::max(lo, b.iv_[k].hi);
        if (lo >= p.hi) break;
        ++k;
      }
      if (lo < p.hi) out.iv_.push_back({lo, p.hi});
    }
    return out;
  }

  bool disjoint_from(const IntervalSet& other) const {
    std::size_t i = 0, j = 0;
    while (i < iv_.size() && j < other.iv_.size()) {
      if (std::max(iv_[i].lo, other.iv_[j].lo) < std::min(iv_[i].hi, other.iv_[j].hi)) return false;
      if (iv_[i].hi < other.iv_[j].hi)
        ++i;
      else
        ++j;
    }
    return true;
  }

  bool contains_set(const IntervalSet& other) const {
    return set_difference(other, *this).empty();
  }

  bool operator==(const IntervalSet&) const = default;

  // Numerator/denominator columns per endpoint.
  void write_csv(std::ostream& os) const {
    os << "lo_num,lo_den,hi_num,hi_den\n";
    for (const auto& p : iv_) {
      os << numerator(p.lo) << "," << denominator(p.lo) << "," << numerator(p.hi) << ","
         << denominator(p.hi) << "\n";
    }
  }

 private:
  std::vector<Interval> iv_;
};

}  // namespace ergolab
