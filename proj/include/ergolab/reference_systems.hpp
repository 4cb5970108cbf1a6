#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "ergolab/entropy.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/rng.hpp"

namespace ergolab::refsys {

// i.i.d. letters with the given mass vector ("type" of the scheme).
struct BernoulliScheme {
  ProbabilityVector letters;

  explicit BernoulliScheme(ProbabilityVector masses) : letters(std::move(masses)) {}
  std::size_t alphabet_size() const { return letters.size(); }
};

// Coarsening of the alphabet: letter -> cell label. Cells must be labeled
// 0..cells-1 with every label hit at least once.
struct AlphabetPartition {
  std::vector<std::size_t> cell_of_letter;
  std::size_t cells = 0;

  AlphabetPartition(std::vector<std::size_t> mapping, std::size_t cell_count)
      : cell_of_letter(std::move(mapping)), cells(cell_count) {
    if (cells == 0) throw std::invalid_argument("AlphabetPartition: no cells");
    if (cell_of_letter.empty()) throw std::invalid_argument("AlphabetPartition: no letters");
    std::vector<bool> seen(cells, false);
    for (std::size_t c : cell_of_letter) {
      if (c >= cells) throw std::invalid_argument("AlphabetPartition: cell label out of range");
      seen[c] = true;
    }
    for (bool s : seen)
      if (!s) throw std::invalid_argument("AlphabetPartition: empty cell label");
  }

  static AlphabetPartition identity(std::size_t letters) {
    std::vector<std::size_t> map(letters);
    for (std::size_t i = 0; i < letters; ++i) map[i] = i;
    return AlphabetPartition(std::move(map), letters);
  }

  // Two cells: the given letters vs the rest.
  static AlphabetPartition letters_vs_rest(std::size_t alphabet, const std::set<std::size_t>& group) {
    if (group.empty()) throw std::invalid_argument("letters_vs_rest: empty group");
    std::vector<std::size_t> map(alphabet, 1);
    for (std::size_t g : group) {
      if (g >= alphabet) throw std::invalid_argument("letters_vs_rest: letter out of range");
      map[g] = 0;
    }
    if (group.size() == alphabet) throw std::invalid_argument("letters_vs_rest: group is the whole alphabet");
    return AlphabetPartition(std::move(map), 2);
  }
};

// Cell masses of the factor partition: sums of grouped letter masses.
inline ProbabilityVector factor_partition(const BernoulliScheme& scheme,
                                          const AlphabetPartition& grouping) {
  if (grouping.cell_of_letter.size() != scheme.alphabet_size())
    throw std::invalid_argument("factor_partition: grouping does not cover the alphabet");
  std::vector<Rational> masses(grouping.cells, Rational(0));
  for (std::size_t letter = 0; letter < scheme.alphabet_size(); ++letter)
    masses[grouping.cell_of_letter[letter]] += scheme.letters[letter];
  return ProbabilityVector(std::move(masses));
}

// Joint law of the factor cells read at the positions of P_j. Coordinates of
// the shift are independent, so the law is the |P_j|-fold product of the
// factor masses; cell labels are tuples of per-iterate cell indices in
// row-major order (first element of P_j = most significant digit).
inline ProbabilityVector bernoulli_join_law(const BernoulliScheme& scheme,
                                            const AlphabetPartition& xi,
                                            const std::vector<long long>& positions,
                                            const Caps& caps = Caps::from_env()) {
  if (positions.empty()) throw std::invalid_argument("bernoulli_join_law: empty index set");
  std::set<long long> distinct(positions.begin(), positions.end());
  if (distinct.size() != positions.size())
    throw std::invalid_argument("bernoulli_join_law: repeated elements in the index set");
  return tensor_power_law(factor_partition(scheme, xi), positions.size(), caps);
}

// i.i.d. letter window; deterministic under a fixed generator state.
inline std::vector<std::size_t> bernoulli_sample_window(const BernoulliScheme& scheme,
                                                        std::size_t window_length, Rng& rng) {
  if (window_length == 0) throw std::invalid_argument("bernoulli_sample_window: empty window");
  std::vector<double> cum;
  cum.reserve(scheme.alphabet_size());
  double acc = 0.0;
  for (const auto& m : scheme.letters.masses()) {
    acc += to_double(m);
    cum.push_back(acc);
  }
  cum.back() = 1.0;
  std::vector<std::size_t> out(window_length);
  for (auto& letter : out) {
    const double u = rng.next_unit();
    std::size_t i = 0;
    while (u >= cum[i]) ++i;
    letter = i;
  }
  return out;
}

// Circle rotation x -> x + angle (mod 1) with a finite arc partition given by
// cut points. Rational angle keeps all cut arithmetic exact; the decay bound
// log(cuts * |P_j|)/|P_j| holds for any angle.
struct RotationSystem {
  Rational angle;
  std::vector<Rational> cuts;

  RotationSystem(Rational a, std::vector<Rational> cut_points)
      : angle(std::move(a)), cuts(std::move(cut_points)) {
    if (angle < 0 || angle >= 1) throw std::invalid_argument("RotationSystem: angle outside [0,1)");
    if (cuts.empty()) throw std::invalid_argument("RotationSystem: no cut points");
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      if (cuts[i] < 0 || cuts[i] >= 1)
        throw std::invalid_argument("RotationSystem: cut point outside [0,1)");
      if (i > 0 && !(cuts[i - 1] < cuts[i]))
        throw std::invalid_argument("RotationSystem: cut points not strictly increasing");
    }
  }
};

namespace detail {
inline Rational mod1(Rational x) {
  const Integer num = numerator(x);
  const Integer den = denominator(x);
  Integer whole = num / den;
  if (num < 0 && whole * den != num) whole -= 1;  // floor
  return x - Rational(whole);
}
}  // namespace detail

// Cell measures of the join over p in P_j of the partition pulled back by
// p rotation steps: rotate every cut by -p*angle, merge the cut sets, measure
// consecutive arcs (with the wrap-around arc). Arcs are the cells, so the
// cell count is at most cuts * |P_j|.
inline ProbabilityVector rotation_join_law(const RotationSystem& rot,
                                           const std::vector<long long>& positions) {
  if (positions.empty()) throw std::invalid_argument("rotation_join_law: empty index set");
  std::set<Rational> merged;
  for (long long p : positions) {
    const Rational shift = detail::mod1(Rational(p) * rot.angle);
    for (const auto& c : rot.cuts) merged.insert(detail::mod1(c - shift));
  }
  std::vector<Rational> cuts(merged.begin(), merged.end());
  std::vector<Rational> masses;
  masses.reserve(cuts.size());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) masses.push_back(cuts[i + 1] - cuts[i]);
  masses.push_back(cuts.front() + 1 - cuts.back());
  return ProbabilityVector(std::move(masses));
}

// Smallest L <= L_cap with h_j(T^j, xi) = H(join over {j, 2j, .., Lj}) / L
// below the bound; nullopt if none found at desk scale.
inline std::optional<long long> search_decay_L(const RotationSystem& rot, long long j, double bound,
                                               long long L_cap, LogBase base) {
  if (j < 1 || L_cap < 1) throw std::invalid_argument("search_decay_L: j and L_cap must be >= 1");
  for (long long L = 1; L <= L_cap; ++L) {
    std::vector<long long> positions;
    positions.reserve(static_cast<std::size_t>(L));
    for (long long k = 1; k <= L; ++k) positions.push_back(k * j);
    const double h = normalized_join_entropy(rotation_join_law(rot, positions),
                                             static_cast<std::size_t>(L), base);
    if (h < bound) return L;
  }
  return std::nullopt;
}

}  // namespace ergolab::refsys
