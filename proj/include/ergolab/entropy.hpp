#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/caps.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

enum class LogBase { natural, binary };

inline double log_in_base(double x, LogBase base) {
  return base == LogBase::binary ? std::log2(x) : std::log(x);
}

inline const char* log_base_name(LogBase base) {
  return base == LogBase::binary ? "bit" : "nat";
}

// Exact cell masses of a finite partition: nonnegative rationals summing to 1.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<Rational> masses) : masses_(std::move(masses)) {
    if (masses_.empty()) throw std::invalid_argument("ProbabilityVector: no cells");
    Rational total(0);
    for (const auto& m : masses_) {
      if (m < 0) throw std::invalid_argument("ProbabilityVector: negative mass");
      total += m;
    }
    if (total != 1) throw std::invalid_argument("ProbabilityVector: masses sum to " + rational_to_string(total) + ", not 1");
  }

  static ProbabilityVector uniform(std::size_t cells) {
    if (cells == 0) throw std::invalid_argument("ProbabilityVector::uniform: no cells");
    return ProbabilityVector(std::vector<Rational>(cells, Rational(1, cells)));
  }

  const std::vector<Rational>& masses() const { return masses_; }
  std::size_t size() const { return masses_.size(); }
  const Rational& operator[](std::size_t i) const { return masses_.at(i); }

  bool operator==(const ProbabilityVector&) const = default;

 private:
  std::vector<Rational> masses_;
};

// H = -sum m_i log m_i with 0 log 0 = 0. Masses are exact; the log evaluation
// is the single floating-point step.
inline double partition_entropy(const ProbabilityVector& p, LogBase base) {
  double h = 0.0, carry = 0.0;  // Kahan
  for (const auto& m : p.masses()) {
    if (m == 0) continue;
    const double md = to_double(m);
    const double term = -md * log_in_base(md, base);
    const double y = term - carry;
    const double t = h + y;
    carry = (t - h) - y;
    h = t;
  }
  return h < 0.0 ? 0.0 : h;
}

// Same functional over an already-floating law (suspension laws, MC laws).
inline double entropy_of_masses(std::span<const double> masses, LogBase base) {
  double total = 0.0;
  for (double m : masses) {
    if (m < -1e-12) throw std::invalid_argument("entropy_of_masses: negative mass");
    total += m;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("entropy_of_masses: masses do not sum to 1");
  double h = 0.0, carry = 0.0;
  for (double m : masses) {
    if (m <= 0.0) continue;
    const double term = -m * log_in_base(m, base);
    const double y = term - carry;
    const double t = h + y;
    carry = (t - h) - y;
    h = t;
  }
  return h < 0.0 ? 0.0 : h;
}

// Law of two independent draws, row-major cell order.
inline ProbabilityVector product_law(const ProbabilityVector& p, const ProbabilityVector& q) {
  std::vector<Rational> out;
  out.reserve(p.size() * q.size());
  for (const auto& a : p.masses())
    for (const auto& b : q.masses()) out.push_back(a * b);
  return ProbabilityVector(std::move(out));
}

inline ProbabilityVector tensor_power_law(const ProbabilityVector& p, std::size_t copies,
                                          const Caps& caps = Caps::from_env()) {
  if (copies == 0) throw std::invalid_argument("tensor_power_law: zero copies");
  double projected = std::pow(static_cast<double>(p.size()), static_cast<double>(copies));
  if (projected > static_cast<double>(caps.law_cells))
    throw CapExceeded("tensor_power_law: joint law exceeds the cell cap");
  ProbabilityVector out = p;
  for (std::size_t i = 1; i < copies; ++i) out = product_law(out, p);
  return out;
}

// One finite index set P_j of the scheme P = {P_j}, kept with its generator
// metadata (j, the step actually used, and L).
struct SchemeBlock {
  long long j = 0;
  long long step = 0;
  long long length = 0;                // |P_j| = L(j)
  std::vector<long long> elements;     // {step, 2 step, ..., L step}
};

struct SubsequenceScheme {
  std::vector<SchemeBlock> blocks;
};

enum class StepMode { plain, tower };

// P_j = {step, 2 step, ..., L(j) step}; step = j in plain mode, step = h_j in
// tower mode (heights come from a rank-one construction, 1-indexed by j).
inline SubsequenceScheme arithmetic_scheme(const std::vector<long long>& j_values,
                                           const std::function<long long(long long)>& length_of,
                                           StepMode mode,
                                           const std::vector<long long>& tower_heights = {}) {
  SubsequenceScheme scheme;
  for (long long j : j_values) {
    if (j < 1) throw std::invalid_argument("arithmetic_scheme: j must be >= 1");
    const long long length = length_of(j);
    if (length < 1) throw std::invalid_argument("arithmetic_scheme: L(j) must be >= 1");
    long long step = j;
    if (mode == StepMode::tower) {
      if (j > static_cast<long long>(tower_heights.size()))
        throw std::invalid_argument("arithmetic_scheme: no tower height for j=" + std::to_string(j));
      step = tower_heights[static_cast<std::size_t>(j - 1)];
      if (step < 1) throw std::invalid_argument("arithmetic_scheme: nonpositive tower height");
    }
    SchemeBlock block{j, step, length, {}};
    block.elements.reserve(static_cast<std::size_t>(length));
    for (long long k = 1; k <= length; ++k) block.elements.push_back(k * step);
    scheme.blocks.push_back(std::move(block));
  }
  return scheme;
}

// h_j = H(joint) / |P_j|.
inline double normalized_join_entropy(const ProbabilityVector& joint, std::size_t scheme_size,
                                      LogBase base) {
  if (scheme_size == 0) throw std::invalid_argument("normalized_join_entropy: zero scheme size");
  return partition_entropy(joint, base) / static_cast<double>(scheme_size);
}

inline double normalized_entropy_of_masses(std::span<const double> masses, std::size_t scheme_size,
                                           LogBase base) {
  if (scheme_size == 0) throw std::invalid_argument("normalized_join_entropy: zero scheme size");
  return entropy_of_masses(masses, base) / static_cast<double>(scheme_size);
}

// Finite-range stand-in for limsup_j: max over the tail. Reports must label
// it as a diagnostic, never as the true limsup.
inline double tail_sup_diagnostic(const std::vector<double>& values, std::size_t tail_start) {
  if (tail_start >= values.size()) throw std::invalid_argument("tail_sup_diagnostic: empty tail");
  return *std::max_element(values.begin() + static_cast<std::ptrdiff_t>(tail_start), values.end());
}

enum class BiasCorrection { none, miller_madow };

// Plug-in entropy of empirical frequencies; Miller-Madow adds (K-1)/(2N) in
// nats (converted to the requested base), K = occupied cells, N = total.
inline double plugin_entropy_from_counts(std::span<const std::uint64_t> counts, LogBase base,
                                         BiasCorrection correction) {
  std::uint64_t total = 0;
  std::size_t occupied = 0;
  for (auto c : counts) {
    total += c;
    if (c > 0) ++occupied;
  }
  if (total == 0) throw std::invalid_argument("plugin_entropy: all counts are zero");
  double h = 0.0;
  const double n = static_cast<double>(total);
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * log_in_base(p, base);
  }
  if (correction == BiasCorrection::miller_madow) {
    double bias = static_cast<double>(occupied - 1) / (2.0 * n);
    if (base == LogBase::binary) bias /= std::log(2.0);
    h += bias;
  }
  return h < 0.0 ? 0.0 : h;
}

inline double plugin_entropy_estimate(const std::map<std::string, std::uint64_t>& cell_counts,
                                      LogBase base, BiasCorrection correction) {
  std::vector<std::uint64_t> counts;
  counts.reserve(cell_counts.size());
  for (const auto& [label, c] : cell_counts) counts.push_back(c);
  return plugin_entropy_from_counts(counts, base, correction);
}

// Bootstrap standard error of the plug-in estimate. Small totals resample the
// multinomial directly; large totals use the Poisson bootstrap (independent
// Poisson(c_i) draws per cell), which costs O(cells) per replicate instead of
// O(total).
inline double bootstrap_entropy_se(std::span<const std::uint64_t> counts, std::size_t replicates,
                                   LogBase base, BiasCorrection correction, Rng& rng) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw std::invalid_argument("bootstrap_entropy_se: all counts are zero");
  if (replicates < 2) throw std::invalid_argument("bootstrap_entropy_se: need >= 2 replicates");

  const bool multinomial = total <= 100'000;
  std::vector<double> cum;
  if (multinomial) {
    cum.reserve(counts.size());
    double acc = 0.0;
    for (auto c : counts) {
      acc += static_cast<double>(c) / static_cast<double>(total);
      cum.push_back(acc);
    }
    cum.back() = 1.0;
  }

  std::vector<std::uint64_t> resampled(counts.size());
  std::vector<double> estimates;
  estimates.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    std::fill(resampled.begin(), resampled.end(), 0);
    if (multinomial) {
      for (std::uint64_t i = 0; i < total; ++i) {
        const double u = rng.next_unit();
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        ++resampled[static_cast<std::size_t>(it - cum.begin())];
      }
    } else {
      for (std::size_t i = 0; i < counts.size(); ++i)
        resampled[i] = counts[i] == 0 ? 0 : rng.poisson(static_cast<double>(counts[i]));
    }
    bool any = false;
    for (auto c : resampled) any = any || c > 0;
    estimates.push_back(any ? plugin_entropy_from_counts(resampled, base, correction) : 0.0);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(estimates.size());
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= static_cast<double>(estimates.size() - 1);
  return std::sqrt(var);
}

}  // namespace ergolab
