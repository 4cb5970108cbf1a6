#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/caps.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/interval_set.hpp"
#include "ergolab/rank_one.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/rng.hpp"

namespace ergolab::poisson {

// P(N = k) for N ~ Poisson(measure), evaluated in one floating pass.
inline double poisson_weight(double measure, long long k) {
  if (!(measure > 0)) throw std::invalid_argument("poisson_weight: measure must be positive");
  if (k < 0) throw std::invalid_argument("poisson_weight: negative count");
  if (k == 0) return std::exp(-measure);
  return std::exp(static_cast<double>(k) * std::log(measure) - measure -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

struct CylinderFactor {
  IntervalSet set;
  long long count = 0;
};

// Intersection of count events over pairwise disjoint sets.
struct CylinderEvent {
  std::vector<CylinderFactor> factors;

  void validate() const {
    if (factors.empty()) throw std::invalid_argument("CylinderEvent: no factors");
    for (const auto& f : factors) {
      if (f.count < 0) throw std::invalid_argument("CylinderEvent: negative count");
      if (!(f.set.measure() > 0))
        throw std::invalid_argument("CylinderEvent: factor set must have positive measure");
    }
    for (std::size_t i = 0; i < factors.size(); ++i)
      for (std::size_t j = i + 1; j < factors.size(); ++j)
        if (!factors[i].set.disjoint_from(factors[j].set))
          throw std::invalid_argument("CylinderEvent: factor sets overlap");
  }
};

inline double cylinder_measure(const CylinderEvent& event) {
  event.validate();
  double out = 1.0;
  for (const auto& f : event.factors)
    out *= poisson_weight(to_double(f.set.measure()), f.count);
  return out;
}

// Finite point configuration restricted to a finite-measure window.
struct Configuration {
  IntervalSet window;
  std::vector<Rational> points;  // sorted, distinct

  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i > 0 && !(points[i - 1] < points[i]))
        throw std::invalid_argument("Configuration: points not sorted distinct");
      if (!window.contains(points[i]))
        throw std::invalid_argument("Configuration: point outside the window");
    }
  }
};

// Interval set with double shadows of its endpoints: membership of sampled
// points resolves in doubles except within the guard margin, where the exact
// rational boundary decides. The sampler keeps points off declared
// boundaries, so the fallback fires with probability ~0.
class QuickSet {
 public:
  static constexpr double kGuard = 2e-15;

  explicit QuickSet(const IntervalSet& s) : exact_(&s) {
    lo_.reserve(s.piece_count());
    hi_.reserve(s.piece_count());
    for (const auto& p : s.pieces()) {
      lo_.push_back(to_double(p.lo));
      hi_.push_back(to_double(p.hi));
    }
  }

  bool contains(double x, const Rational& exact_x) const {
    auto it = std::upper_bound(lo_.begin(), lo_.end(), x);
    if (it != lo_.begin()) {
      const std::size_t i = static_cast<std::size_t>(it - lo_.begin()) - 1;
      if (x - lo_[i] > kGuard && hi_[i] - x > kGuard) return true;
    }
    double nearest = 1.0;
    for (std::size_t i = 0; i < lo_.size(); ++i)
      nearest = std::min({nearest, std::fabs(x - lo_[i]), std::fabs(x - hi_[i])});
    if (nearest > kGuard) {
      if (it == lo_.begin()) return false;
      const std::size_t i = static_cast<std::size_t>(it - lo_.begin()) - 1;
      return x < hi_[i];
    }
    return exact_->contains(exact_x);
  }

  long long count(const std::vector<double>& xs, const std::vector<Rational>& exact_xs) const {
    long long n = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (contains(xs[i], exact_xs[i])) ++n;
    return n;
  }

 private:
  const IntervalSet* exact_;
  std::vector<double> lo_, hi_;
};

// Poisson(mu(window)) many i.i.d. uniform points. Points landing within 1e-15
// of a window or guard boundary are redrawn, so downstream double
// comparisons never straddle a boundary.
inline Configuration sample_configuration(const IntervalSet& window, Rng& rng,
                                          const std::vector<Rational>& guards = {}) {
  const Rational total = window.measure();
  if (!(total > 0))
    throw std::invalid_argument("sample_configuration: window must have positive measure");
  std::vector<double> cum;
  std::vector<double> lo;
  double acc = 0.0;
  for (const auto& p : window.pieces()) {
    lo.push_back(to_double(p.lo));
    acc += to_double(p.length());
    cum.push_back(acc);
  }
  std::vector<double> boundary;
  for (const auto& p : window.pieces()) {
    boundary.push_back(to_double(p.lo));
    boundary.push_back(to_double(p.hi));
  }
  for (const auto& g : guards) boundary.push_back(to_double(g));

  const long long n = rng.poisson(to_double(total));
  Configuration config;
  config.window = window;
  config.points.reserve(static_cast<std::size_t>(n));
  std::vector<Rational> points;
  for (long long i = 0; i < n; ++i) {
    for (;;) {
      const double u = rng.next_unit() * acc;
      const std::size_t piece =
          static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
      const std::size_t pc = std::min(piece, cum.size() - 1);
      const double offset = pc == 0 ? u : u - cum[pc - 1];
      const double x = lo[pc] + offset;
      bool near_boundary = false;
      for (double b : boundary)
        if (std::fabs(x - b) < 1e-15) near_boundary = true;
      if (near_boundary) continue;
      const Rational rx = rational_from_double(x);
      if (!window.contains(rx)) continue;          // float spill past a piece end
      if (std::find(points.begin(), points.end(), rx) != points.end()) continue;
      points.push_back(rx);
      break;
    }
  }
  std::sort(points.begin(), points.end());
  config.points = std::move(points);
  return config;
}

// Pointwise T^n on a configuration; the window moves along.
inline Configuration apply_suspension(const rankone::RankOneState& state,
                                      const Configuration& config, long long n) {
  Configuration out;
  out.window = state.image_of_set(config.window, n);
  out.points.reserve(config.points.size());
  for (const auto& x : config.points) out.points.push_back(state.point_image(x, n));
  std::sort(out.points.begin(), out.points.end());
  if (out.points.size() != config.points.size())
    throw std::logic_error("apply_suspension: cardinality changed");
  return out;
}

struct IndependenceReport {
  double joint = 0.0;            // cylinder measure of the intersection event
  double product = 0.0;          // product of the single-event measures
  double relative_gap = 0.0;
  bool exact_ok = false;         // gap within 1e-12 relative
  std::size_t samples = 0;
  double mc_joint = 0.0;         // empirical joint frequency
  double sigma = 0.0;            // sqrt(p(1-p)/N) at p = product
  bool mc_ok = false;            // |mc_joint - product| <= 4 sigma
  bool all_ok() const { return exact_ok && mc_ok; }
};

inline IndependenceReport verify_independence(const IntervalSet& A, const IntervalSet& B,
                                              long long k, long long m, std::size_t samples,
                                              std::uint64_t seed) {
  if (!A.disjoint_from(B))
    throw std::invalid_argument("verify_independence: sets overlap");
  if (samples == 0) throw std::invalid_argument("verify_independence: zero samples");

  IndependenceReport rep;
  CylinderEvent joint{{{A, k}, {B, m}}};
  rep.joint = cylinder_measure(joint);
  rep.product = cylinder_measure(CylinderEvent{{{A, k}}}) * cylinder_measure(CylinderEvent{{{B, m}}});
  const double scale = std::max({std::fabs(rep.joint), std::fabs(rep.product), 1e-300});
  rep.relative_gap = std::fabs(rep.joint - rep.product) / scale;
  rep.exact_ok = rep.relative_gap <= 1e-12;

  const IntervalSet window = set_union(A, B);
  std::vector<Rational> guards;
  for (const auto& s : {&A, &B})
    for (const auto& p : s->pieces()) {
      guards.push_back(p.lo);
      guards.push_back(p.hi);
    }
  QuickSet qa(A), qb(B);
  rep.samples = samples;
  std::size_t hits = 0;
  constexpr std::size_t kBatch = 1u << 16;
  const std::size_t batches = (samples + kBatch - 1) / kBatch;
  std::size_t done = 0;
  std::vector<double> xs;
  for (std::size_t b = 0; b < batches; ++b) {
    Rng rng(split_seed(seed, b));
    const std::size_t batch_n = std::min(kBatch, samples - done);
    for (std::size_t i = 0; i < batch_n; ++i) {
      const Configuration config = sample_configuration(window, rng, guards);
      xs.clear();
      for (const auto& p : config.points) xs.push_back(to_double(p));
      if (qa.count(xs, config.points) == k && qb.count(xs, config.points) == m) ++hits;
    }
    done += batch_n;
  }
  rep.mc_joint = static_cast<double>(hits) / static_cast<double>(samples);
  rep.sigma = std::sqrt(std::max(rep.product * (1.0 - rep.product), 1e-300) /
                        static_cast<double>(samples));
  rep.mc_ok = std::fabs(rep.mc_joint - rep.product) <= 4.0 * rep.sigma;
  return rep;
}

// Two-cell partition by the generating event C(A, k).
struct SuspensionPartition {
  IntervalSet A;
  long long k = 0;

  void validate() const {
    if (!(A.measure() > 0))
      throw std::invalid_argument("SuspensionPartition: mu(A) must be positive");
    if (k < 0) throw std::invalid_argument("SuspensionPartition: negative count");
  }

  double q() const { return poisson_weight(to_double(A.measure()), k); }
};

// Joint law of the partition along one scheme block. Cell index bit for the
// i-th element of P_j (most significant first) is 0 when the event holds at
// that iterate.
struct SuspensionJoinLaw {
  std::vector<double> masses;            // size 2^{|P_j|}
  std::vector<std::uint64_t> counts;     // raw MC tallies; empty on the exact path
  std::size_t samples = 0;               // 0 on the exact path
  bool exact = false;                    // true: product law after certified disjointness
  double q = 0.0;
  long long scheme_size = 0;
  bool disjoint = false;
};

inline SuspensionJoinLaw suspension_join_law(const rankone::RankOneState& state,
                                             const SuspensionPartition& part,
                                             const SchemeBlock& block, std::size_t mc_samples,
                                             std::uint64_t seed,
                                             const Caps& caps = Caps::from_env()) {
  part.validate();
  if (block.elements.empty())
    throw std::invalid_argument("suspension_join_law: empty scheme block");
  if (block.j < 1 || block.j > static_cast<long long>(state.stage_count()) ||
      block.step != state.height(static_cast<std::size_t>(block.j)))
    throw std::invalid_argument("suspension_join_law: scheme step does not match tower height");
  if (!state.ambient().contains_set(part.A))
    throw std::invalid_argument("suspension_join_law: A leaves the constructed space");

  const std::size_t width = block.elements.size();
  if (width >= 63) throw CapExceeded("suspension_join_law: scheme too wide");
  const std::size_t cells = std::size_t{1} << width;
  caps.require_law_cells(cells);

  SuspensionJoinLaw law;
  law.q = part.q();
  law.scheme_size = static_cast<long long>(width);

  // Pairwise disjointness of the iterate family reduces to positive powers:
  // T^{-p}A and T^{-q}A meet iff A meets T^{q-p}A.
  law.disjoint = true;
  for (std::size_t i = 0; i < width && law.disjoint; ++i)
    for (std::size_t jx = i + 1; jx < width; ++jx) {
      const long long d = block.elements[jx] - block.elements[i];
      if (!state.image_of_set(part.A, d).disjoint_from(part.A)) {
        law.disjoint = false;
        break;
      }
    }

  if (law.disjoint) {
    law.exact = true;
    law.masses.assign(cells, 1.0);
    for (std::size_t idx = 0; idx < cells; ++idx)
      for (std::size_t i = 0; i < width; ++i) {
        const bool complement = (idx >> (width - 1 - i)) & 1u;
        law.masses[idx] *= complement ? 1.0 - law.q : law.q;
      }
    return law;
  }

  // Overlapping iterates: estimate the joint law by sampling. Stationarity
  // lets the family shift to nonnegative powers T^{p - min P} A.
  if (mc_samples == 0)
    throw std::invalid_argument("suspension_join_law: overlapping iterates need mc samples");
  const long long base_power = block.elements.front();
  std::vector<IntervalSet> family;
  family.reserve(width);
  for (long long p : block.elements)
    family.push_back(state.image_of_set(part.A, p - base_power));
  IntervalSet window;
  for (const auto& g : family) window = set_union(window, g);
  std::vector<Rational> guards;
  for (const auto& g : family)
    for (const auto& piece : g.pieces()) {
      guards.push_back(piece.lo);
      guards.push_back(piece.hi);
    }
  std::vector<QuickSet> quick;
  quick.reserve(width);
  for (const auto& g : family) quick.emplace_back(g);

  std::vector<std::uint64_t> counts(cells, 0);
  constexpr std::size_t kBatch = 1u << 16;
  const std::size_t batches = (mc_samples + kBatch - 1) / kBatch;
  std::size_t done = 0;
  std::vector<double> xs;
  for (std::size_t b = 0; b < batches; ++b) {
    Rng rng(split_seed(seed, b));
    const std::size_t batch_n = std::min(kBatch, mc_samples - done);
    for (std::size_t s = 0; s < batch_n; ++s) {
      const Configuration config = sample_configuration(window, rng, guards);
      xs.clear();
      for (const auto& p : config.points) xs.push_back(to_double(p));
      std::size_t idx = 0;
      for (std::size_t i = 0; i < width; ++i) {
        const bool holds = quick[i].count(xs, config.points) == part.k;
        idx = (idx << 1) | (holds ? 0u : 1u);
      }
      ++counts[idx];
    }
    done += batch_n;
  }
  law.masses.resize(cells);
  for (std::size_t i = 0; i < cells; ++i)
    law.masses[i] = static_cast<double>(counts[i]) / static_cast<double>(mc_samples);
  law.counts = std::move(counts);
  law.samples = mc_samples;
  return law;
}

}  // namespace ergolab::poisson
