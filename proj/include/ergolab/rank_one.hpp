#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/caps.hpp"
#include "ergolab/interval_set.hpp"
#include "ergolab/rational.hpp"

namespace ergolab::rankone {

// Asking for dynamics beyond the constructed stages. Distinct from CapExceeded:
// the caller may extend the construction and retry.
struct NotSettled : std::runtime_error {
  explicit NotSettled(const std::string& what) : std::runtime_error(what) {}
};

// One cutting step: the tower is cut into `cuts` equal columns and column i
// receives spacers[i] extra floors on top.
struct StageParams {
  long long cuts = 2;
  std::vector<long long> spacers;
};

struct RankOneParams {
  std::vector<StageParams> transitions;  // transitions[j-1] builds stage j+1 from stage j

  std::size_t stage_count() const { return transitions.size() + 1; }

  void validate() const {
    for (const auto& t : transitions) {
      if (t.cuts < 2) throw std::invalid_argument("RankOneParams: cuts must be >= 2");
      if (t.spacers.size() != static_cast<std::size_t>(t.cuts))
        throw std::invalid_argument("RankOneParams: spacer array length must equal cuts");
      for (long long s : t.spacers)
        if (s < 0) throw std::invalid_argument("RankOneParams: negative spacer count");
    }
  }
};

// The margin schedule s_j(i) = L(j) h_j + 1, the minimal integer choice
// strictly above L(j) h_j; heights are chased through the recurrence.
inline RankOneParams spacer_params_for(const std::function<long long(long long)>& L,
                                       const std::function<long long(long long)>& r,
                                       long long stages) {
  if (stages < 1) throw std::invalid_argument("spacer_params_for: need at least one stage");
  RankOneParams params;
  long long h = 1;
  for (long long j = 1; j < stages; ++j) {
    const long long rj = r(j);
    const long long Lj = L(j);
    if (rj < 2) throw std::invalid_argument("spacer_params_for: r(j) must be >= 2");
    if (Lj < 1) throw std::invalid_argument("spacer_params_for: L(j) must be >= 1");
    const Integer margin = Integer(Lj) * h + 1;
    const Integer next = Integer(rj) * h + Integer(rj) * margin;
    if (next > (Integer(1) << 62))
      throw CapExceeded("spacer_params_for: heights overflow at stage " + std::to_string(j + 1));
    StageParams t;
    t.cuts = rj;
    t.spacers.assign(static_cast<std::size_t>(rj), static_cast<long long>(margin));
    params.transitions.push_back(std::move(t));
    h = static_cast<long long>(next);
  }
  params.validate();
  return params;
}

// Sorted disjoint runs [lo, hi) of integer floor indices.
class FloorRuns {
 public:
  struct Run {
    long long lo = 0, hi = 0;
    bool operator==(const Run&) const = default;
  };

  FloorRuns() = default;
  explicit FloorRuns(std::vector<Run> runs) {
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) { return a.lo < b.lo; });
    for (const auto& r : runs) {
      if (r.lo >= r.hi) continue;
      if (!runs_.empty() && r.lo <= runs_.back().hi)
        runs_.back().hi = std::max(runs_.back().hi, r.hi);
      else
        runs_.push_back(r);
    }
  }

  static FloorRuns range(long long lo, long long hi) { return FloorRuns({Run{lo, hi}}); }

  const std::vector<Run>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }

  long long count() const {
    long long n = 0;
    for (const auto& r : runs_) n += r.hi - r.lo;
    return n;
  }

  long long max_index() const {
    if (runs_.empty()) throw std::logic_error("FloorRuns::max_index on empty set");
    return runs_.back().hi - 1;
  }

  FloorRuns translated(long long s) const {
    std::vector<Run> out;
    out.reserve(runs_.size());
    for (const auto& r : runs_) out.push_back({r.lo + s, r.hi + s});
    return FloorRuns(std::move(out));
  }

  FloorRuns clipped(long long lo, long long hi) const {
    std::vector<Run> out;
    for (const auto& r : runs_) {
      const long long a = std::max(r.lo, lo);
      const long long b = std::min(r.hi, hi);
      if (a < b) out.push_back({a, b});
    }
    return FloorRuns(std::move(out));
  }

  friend FloorRuns intersect(const FloorRuns& x, const FloorRuns& y) {
    std::vector<Run> out;
    std::size_t i = 0, j = 0;
    while (i < x.runs_.size() && j < y.runs_.size()) {
      const long long lo = std::max(x.runs_[i].lo, y.runs_[j].lo);
      const long long hi = std::min(x.runs_[i].hi, y.runs_[j].hi);
      if (lo < hi) out.push_back({lo, hi});
      (x.runs_[i].hi < y.runs_[j].hi ? i : j)++;
    }
    return FloorRuns(std::move(out));
  }

  bool intersects(const FloorRuns& other) const { return !intersect(*this, other).empty(); }
  bool operator==(const FloorRuns&) const = default;

 private:
  std::vector<Run> runs_;
};

struct DisjointnessReport {
  std::size_t j = 0;
  long long L = 0;
  long long step = 0;                                       // h_j
  std::size_t translates = 0;                               // L + 1
  bool fully_settled = false;
  bool disjoint = false;
  std::vector<std::pair<long long, long long>> overlaps;    // (p, q) with overlap
  Rational witness_measure;                                 // overlap measure of first such pair
  bool routes_agree = false;  // floor-index route vs interval-algebra route
};

// Exact state of a finished construction. Levels of every stage are single
// half-open intervals; T is the table "floor i of the last stage translates
// onto floor i+1", defined for i < h_M - 1. Earlier-stage dynamics embed in
// that table verbatim, so queries only ever consult the last stage.
class RankOneState {
 public:
  static RankOneState build(const RankOneParams& params, const Caps& caps = Caps::from_env()) {
    params.validate();
    RankOneState st;
    st.params_ = params;
    st.frontier_ = Rational(1);
    st.stages_.push_back(Stage{1, Rational(1), {Interval{Rational(0), Rational(1)}}, {}});
    for (const auto& t : params.transitions) st.advance(t, caps);
    st.index_levels();
    return st;
  }

  // Same construction continued for more stages. Previously settled dynamics
  // are preserved by construction; tests pin that down.
  RankOneState extended(const std::vector<StageParams>& more,
                        const Caps& caps = Caps::from_env()) const {
    RankOneParams longer = params_;
    longer.transitions.insert(longer.transitions.end(), more.begin(), more.end());
    return build(longer, caps);
  }

  const RankOneParams& params() const { return params_; }
  std::size_t stage_count() const { return stages_.size(); }

  std::vector<long long> heights() const {
    std::vector<long long> out;
    out.reserve(stages_.size());
    for (const auto& s : stages_) out.push_back(s.height);
    return out;
  }

  long long height(std::size_t j) const { return stage(j).height; }
  Rational level_width(std::size_t j) const { return stage(j).width; }
  Interval base(std::size_t j) const { return stage(j).levels.front(); }
  Interval level(std::size_t j, long long i) const {
    const auto& st = stage(j);
    if (i < 0 || i >= st.height) throw std::invalid_argument("level: floor index out of range");
    return st.levels[static_cast<std::size_t>(i)];
  }

  IntervalSet tower_set(std::size_t j) const {
    return IntervalSet(std::vector<Interval>(stage(j).levels));
  }

  // The whole constructed space [0, frontier): every allocated interval ends
  // up a level of the last tower.
  IntervalSet ambient() const { return IntervalSet::single(Rational(0), frontier_); }
  const Rational& frontier() const { return frontier_; }

  struct TableEntry {
    Interval domain;
    Rational offset;
  };

  std::vector<TableEntry> translation_table() const {
    const auto& last = stages_.back();
    std::vector<TableEntry> table;
    table.reserve(last.levels.size() - 1);
    for (std::size_t i = 0; i + 1 < last.levels.size(); ++i)
      table.push_back({last.levels[i], last.levels[i + 1].lo - last.levels[i].lo});
    return table;
  }

  long long floor_of_point(const Rational& x) const {
    if (x < 0 || x >= frontier_)
      throw std::invalid_argument("floor_of_point: point outside the constructed space");
    auto it = std::upper_bound(by_position_.begin(), by_position_.end(), x,
                               [](const Rational& v, const PositionedLevel& p) { return v < p.lo; });
    return (--it)->index;
  }

  Rational point_image(const Rational& x, long long n) const {
    const long long f = floor_of_point(x);
    const long long h = stages_.back().height;
    const long long g = f + n;
    if (g < 0 || g >= h)
      throw NotSettled("point_image: T^" + std::to_string(n) + " leaves the settled tower");
    const auto& lv = stages_.back().levels;
    return x + (lv[static_cast<std::size_t>(g)].lo - lv[static_cast<std::size_t>(f)].lo);
  }

  // Exact T^n S by floor translation. The floor index moves monotonically
  // along the orbit, so endpoint settledness covers every intermediate power.
  IntervalSet image_of_set(const IntervalSet& S, long long n) const {
    const auto& last = stages_.back();
    const long long h = last.height;
    std::vector<Interval> out;
    for (const auto& piece : S.pieces()) {
      if (piece.lo < 0 || piece.hi > frontier_)
        throw std::invalid_argument("image_of_set: set leaves the constructed space");
      Rational cur = piece.lo;
      while (cur < piece.hi) {
        const long long f = floor_of_point(cur);
        const auto& home = last.levels[static_cast<std::size_t>(f)];
        const Rational stop = piece.hi < home.hi ? piece.hi : home.hi;
        const long long g = f + n;
        if (g < 0 || g >= h)
          throw NotSettled("image_of_set: T^" + std::to_string(n) +
                           " not settled on floor " + std::to_string(f));
        const Rational offset = last.levels[static_cast<std::size_t>(g)].lo - home.lo;
        out.push_back({cur + offset, stop + offset});
        cur = stop;
      }
    }
    return IntervalSet(std::move(out));
  }

  // Floor indices (in the last stage) making up tower X_j: the run [0, h_j)
  // pushed through each cutting step, one copy per column.
  FloorRuns tower_floors(std::size_t j) const {
    require_stage(j);
    FloorRuns runs = FloorRuns::range(0, stage(j).height);
    for (std::size_t t = j; t < stages_.size(); ++t) {
      // cutting of stage t into stage t+1; column bases live on stage t
      const auto& bases = stages_[t - 1].column_bases;
      std::vector<FloorRuns::Run> next;
      next.reserve(bases.size() * runs.runs().size());
      for (long long b : bases)
        for (const auto& r : runs.runs()) next.push_back({r.lo + b, r.hi + b});
      runs = FloorRuns(std::move(next));
    }
    return runs;
  }

  IntervalSet floors_to_set(const FloorRuns& floors) const {
    const auto& lv = stages_.back().levels;
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(floors.count()));
    for (const auto& r : floors.runs()) {
      if (r.lo < 0 || r.hi > static_cast<long long>(lv.size()))
        throw std::invalid_argument("floors_to_set: floor index out of range");
      for (long long f = r.lo; f < r.hi; ++f) out.push_back(lv[static_cast<std::size_t>(f)]);
    }
    return IntervalSet(std::move(out));
  }

  // Pairwise disjointness of X_j, T^{h_j}X_j, ..., T^{L h_j}X_j. A definite
  // `false` needs only the settled parts to collide; a definite `true` needs
  // every translate fully settled. Anything else is NotSettled.
  DisjointnessReport verify_translate_disjointness(std::size_t j, long long L) const {
    require_stage(j);
    if (L < 0) throw std::invalid_argument("verify_translate_disjointness: negative L");
    DisjointnessReport rep;
    rep.j = j;
    rep.L = L;
    rep.step = stage(j).height;
    rep.translates = static_cast<std::size_t>(L) + 1;

    const long long h_last = stages_.back().height;
    const FloorRuns base = tower_floors(j);
    std::vector<FloorRuns> settled;
    bool all_settled = true;
    for (long long p = 0; p <= L; ++p) {
      const FloorRuns moved = base.translated(p * rep.step);
      const FloorRuns clip = moved.clipped(0, h_last);
      if (clip.count() != moved.count()) all_settled = false;
      settled.push_back(clip);
    }
    rep.fully_settled = all_settled;

    for (long long p = 0; p <= L; ++p)
      for (long long q = p + 1; q <= L; ++q)
        if (settled[static_cast<std::size_t>(p)].intersects(settled[static_cast<std::size_t>(q)]))
          rep.overlaps.emplace_back(p, q);

    if (rep.overlaps.empty() && !all_settled)
      throw NotSettled("verify_translate_disjointness: translates exceed the built stages");

    // Interval-algebra route on the settled parts gives the verdict; the
    // floor-index route above must agree piece for piece.
    std::vector<IntervalSet> sets;
    sets.reserve(settled.size());
    for (const auto& fl : settled) sets.push_back(floors_to_set(fl));
    bool interval_disjoint = true;
    for (std::size_t p = 0; p < sets.size() && interval_disjoint; ++p)
      for (std::size_t q = p + 1; q < sets.size(); ++q) {
        const IntervalSet common = set_intersection(sets[p], sets[q]);
        if (!common.empty()) {
          interval_disjoint = false;
          if (rep.witness_measure == 0) rep.witness_measure = common.measure();
          break;
        }
      }

    rep.disjoint = interval_disjoint;
    rep.routes_agree = interval_disjoint == rep.overlaps.empty();
    if (!rep.routes_agree)
      throw std::logic_error("verify_translate_disjointness: floor and interval routes disagree");
    return rep;
  }

 private:
  struct Stage {
    long long height = 0;
    Rational width;
    std::vector<Interval> levels;
    std::vector<long long> column_bases;  // filled when this stage gets cut
  };

  struct PositionedLevel {
    Rational lo;
    long long index = 0;
  };

  const Stage& stage(std::size_t j) const {
    require_stage(j);
    return stages_[j - 1];
  }

  void require_stage(std::size_t j) const {
    if (j < 1 || j > stages_.size())
      throw std::invalid_argument("stage index " + std::to_string(j) + " out of range 1.." +
                                  std::to_string(stages_.size()));
  }

  void advance(const StageParams& t, const Caps& caps) {
    Stage& parent = stages_.back();
    const long long r = t.cuts;
    Integer total_spacers(0);
    for (long long s : t.spacers) total_spacers += s;
    const Integer next_height = Integer(r) * parent.height + total_spacers;
    if (next_height > Integer(caps.interval_budget))
      throw CapExceeded("build: stage height " + next_height.str() + " exceeds the interval budget");
    const long long h_next = static_cast<long long>(next_height);

    Stage child;
    child.height = h_next;
    child.width = parent.width / r;
    child.levels.resize(static_cast<std::size_t>(h_next));
    parent.column_bases.reserve(static_cast<std::size_t>(r));

    long long floor = 0;
    for (long long c = 0; c < r; ++c) {
      parent.column_bases.push_back(floor);
      for (long long i = 0; i < parent.height; ++i) {
        const Rational lo = parent.levels[static_cast<std::size_t>(i)].lo + c * child.width;
        child.levels[static_cast<std::size_t>(floor + i)] = {lo, lo + child.width};
      }
      floor += parent.height;
      for (long long s = 0; s < t.spacers[static_cast<std::size_t>(c)]; ++s) {
        child.levels[static_cast<std::size_t>(floor++)] = {frontier_, frontier_ + child.width};
        frontier_ += child.width;
      }
    }
    stages_.push_back(std::move(child));
  }

  void index_levels() {
    const auto& lv = stages_.back().levels;
    by_position_.clear();
    by_position_.reserve(lv.size());
    for (std::size_t i = 0; i < lv.size(); ++i)
      by_position_.push_back({lv[i].lo, static_cast<long long>(i)});
    std::sort(by_position_.begin(), by_position_.end(),
              [](const PositionedLevel& a, const PositionedLevel& b) { return a.lo < b.lo; });
  }

  RankOneParams params_;
  std::vector<Stage> stages_;
  Rational frontier_;
  std::vector<PositionedLevel> by_position_;
};

}  // namespace ergolab::rankone
