#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/caps.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/rational.hpp"
#include "ergolab/rational_matrix.hpp"

namespace ergolab::markov {

// Kernel on [0,1]^2, piecewise constant on the four rectangles cut out by
// A = [0,a] and B = [0,1/2]. Needs 0 < a < 1/2 so A sits strictly inside B.
struct KernelSpec {
  Rational a;

  explicit KernelSpec(Rational a_) : a(std::move(a_)) {
    if (!(a > 0) || !(a < Rational(1, 2)))
      throw std::invalid_argument("KernelSpec: a must lie strictly between 0 and 1/2");
  }
};

enum class XiCell : std::uint8_t { A = 0, ComplementA = 1 };
enum class BetaCell : std::uint8_t { B = 0, ComplementB = 1 };

inline Rational xi_mass(const KernelSpec& spec, XiCell c) {
  return c == XiCell::A ? spec.a : Rational(1) - spec.a;
}

inline Rational beta_mass(const KernelSpec&, BetaCell) { return Rational(1, 2); }

// Four-region kernel value: x tested against A, y against B.
inline Rational kernel_value(const KernelSpec& spec, XiCell x_cell, BetaCell y_cell) {
  const Rational one(1);
  if (x_cell == XiCell::A)
    return y_cell == BetaCell::B ? Rational(0) : Rational(2);
  if (y_cell == BetaCell::B) return one / (one - spec.a);
  return (one - 2 * spec.a) / (one - spec.a);
}

// Action of J on indicator coefficients: input basis (1_A, 1_{X\A}), output
// basis (1_B, 1_{X\B}); entry[out][in] = mass(in) * kernel(in, out).
struct TransferMatrix {
  Rational entry[2][2];

  const Rational& at(std::size_t out, std::size_t in) const { return entry[out][in]; }

  std::vector<Rational> apply(const std::vector<Rational>& in) const {
    if (in.size() != 2) throw std::invalid_argument("TransferMatrix::apply: need 2 coefficients");
    return {entry[0][0] * in[0] + entry[0][1] * in[1],
            entry[1][0] * in[0] + entry[1][1] * in[1]};
  }

  Rational determinant() const { return entry[0][0] * entry[1][1] - entry[0][1] * entry[1][0]; }

  RationalMatrix as_matrix() const {
    RationalMatrix m(2, 2);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) m.at(r, c) = entry[r][c];
    return m;
  }
};

inline TransferMatrix transfer_matrix(const KernelSpec& spec) {
  TransferMatrix m;
  for (std::size_t in = 0; in < 2; ++in) {
    const auto x = static_cast<XiCell>(in);
    for (std::size_t out = 0; out < 2; ++out) {
      const auto y = static_cast<BetaCell>(out);
      m.entry[out][in] = xi_mass(spec, x) * kernel_value(spec, x, y);
    }
  }
  return m;
}

// Exact structural checks at one parameter value. "constants_fixed": the image
// of the constant 1 is the constant 1 (row sums). "adjoint_fixes_constants":
// output masses pull back to input masses through the matrix.
struct KernelChecks {
  bool nonnegative = false;
  bool row_markov = false;              // integral over y of K(x,.) is 1 per input cell
  bool column_markov = false;           // integral over x of K(.,y) is 1 per output cell
  bool constants_fixed = false;
  bool adjoint_fixes_constants = false;
  bool determinant_matches = false;     // det = -2a symbolically
  Rational determinant;

  bool all() const {
    return nonnegative && row_markov && column_markov && constants_fixed &&
           adjoint_fixes_constants && determinant_matches;
  }
};

inline KernelChecks kernel_checks(const KernelSpec& spec) {
  KernelChecks out;
  const TransferMatrix m = transfer_matrix(spec);

  out.nonnegative = true;
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c)
      if (m.entry[r][c] < 0) out.nonnegative = false;

  out.row_markov = true;
  for (std::size_t in = 0; in < 2; ++in) {
    Rational total(0);
    for (std::size_t o = 0; o < 2; ++o) {
      const auto y = static_cast<BetaCell>(o);
      total += beta_mass(spec, y) * kernel_value(spec, static_cast<XiCell>(in), y);
    }
    if (total != 1) out.row_markov = false;
  }

  out.column_markov = true;
  for (std::size_t o = 0; o < 2; ++o) {
    Rational total(0);
    for (std::size_t in = 0; in < 2; ++in) {
      const auto x = static_cast<XiCell>(in);
      total += xi_mass(spec, x) * kernel_value(spec, x, static_cast<BetaCell>(o));
    }
    if (total != 1) out.column_markov = false;
  }

  const auto ones = m.apply({Rational(1), Rational(1)});
  out.constants_fixed = ones[0] == 1 && ones[1] == 1;

  out.adjoint_fixes_constants = true;
  for (std::size_t in = 0; in < 2; ++in) {
    Rational total(0);
    for (std::size_t o = 0; o < 2; ++o)
      total += beta_mass(spec, static_cast<BetaCell>(o)) * m.entry[o][in];
    if (total != xi_mass(spec, static_cast<XiCell>(in))) out.adjoint_fixes_constants = false;
  }

  out.determinant = m.determinant();
  out.determinant_matches = out.determinant == -2 * spec.a;
  return out;
}

// Sweep a = i / (2(n+1)), i = 1..n: n distinct rationals strictly inside
// (0, 1/2). Returns the count of parameter values failing any exact check.
struct GridReport {
  std::size_t points = 0;
  std::size_t failures = 0;
  bool all_pass() const { return failures == 0; }
};

inline GridReport kernel_grid_check(std::size_t n) {
  if (n == 0) throw std::invalid_argument("kernel_grid_check: empty grid");
  GridReport rep;
  rep.points = n;
  const Integer den = 2 * (Integer(n) + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    const KernelSpec spec(Rational(Integer(i), den));
    if (!kernel_checks(spec).all()) ++rep.failures;
  }
  return rep;
}

enum class Side : std::uint8_t { Xi, Beta };

// Coefficient array of a function on a w-coordinate window, measurable with
// respect to the two-cell partition on each coordinate. Index digits read
// most-significant-first: digit for coordinate 1 is the top bit; digit 0
// selects the first cell (A resp. B), 1 the complement.
struct CylinderVector {
  Side side = Side::Xi;
  std::size_t window = 0;
  std::vector<Rational> values;

  CylinderVector(Side s, std::size_t w, std::vector<Rational> coeff)
      : side(s), window(w), values(std::move(coeff)) {
    if (window < 1) throw std::invalid_argument("CylinderVector: window length must be >= 1");
    if (window >= 63 || values.size() != (std::size_t{1} << window))
      throw std::invalid_argument("CylinderVector: coefficient array must have size 2^w");
  }

  static CylinderVector constant(Side s, std::size_t w, const Rational& value) {
    return CylinderVector(s, w, std::vector<Rational>(std::size_t{1} << w, value));
  }

  // Product of basis indicators: digits[i] picks the cell at coordinate i+1.
  static CylinderVector basis(Side s, std::size_t w, const std::vector<unsigned>& digits) {
    if (digits.size() != w) throw std::invalid_argument("CylinderVector::basis: digit count != w");
    std::size_t idx = 0;
    for (unsigned d : digits) {
      if (d > 1) throw std::invalid_argument("CylinderVector::basis: digit out of range");
      idx = (idx << 1) | d;
    }
    std::vector<Rational> coeff(std::size_t{1} << w, Rational(0));
    coeff[idx] = 1;
    return CylinderVector(s, w, std::move(coeff));
  }

  bool operator==(const CylinderVector& o) const {
    return side == o.side && window == o.window && values == o.values;
  }
};

// w-fold tensor power of the transfer matrix, applied one coordinate axis at
// a time: O(w 2^w) rational multiplies instead of the dense 4^w.
inline CylinderVector tensor_apply(const KernelSpec& spec, const CylinderVector& input,
                                   const Caps& caps = Caps::from_env()) {
  if (input.side != Side::Xi)
    throw std::invalid_argument("tensor_apply: input must be a xi-side vector");
  const std::size_t w = input.window;
  const std::size_t dim = std::size_t{1} << w;
  caps.require_tensor_dimension(dim);
  const TransferMatrix m = transfer_matrix(spec);

  std::vector<Rational> v = input.values;
  std::vector<Rational> next(dim);
  for (std::size_t axis = 0; axis < w; ++axis) {
    const std::size_t stride = std::size_t{1} << (w - 1 - axis);
    for (std::size_t idx = 0; idx < dim; ++idx) {
      const std::size_t lo = idx & ~stride;   // digit at this axis set to 0
      const std::size_t hi = lo | stride;     // and to 1
      const std::size_t d = (idx & stride) ? 1 : 0;
      next[idx] = m.entry[d][0] * v[lo] + m.entry[d][1] * v[hi];
    }
    v.swap(next);
  }
  return CylinderVector(Side::Beta, w, std::move(v));
}

// Precompose with the window shift: coordinate i of the result reads the
// input's coordinate i+1, and the vacated last coordinate becomes constant.
// Only defined for vectors not depending on coordinate 1.
inline bool constant_in_first_coordinate(const CylinderVector& f) {
  const std::size_t half = std::size_t{1} << (f.window - 1);
  for (std::size_t j = 0; j < half; ++j)
    if (f.values[j] != f.values[j + half]) return false;
  return true;
}

inline CylinderVector shift_window(const CylinderVector& f) {
  if (f.window < 2) throw std::invalid_argument("shift_window: window must be >= 2");
  if (!constant_in_first_coordinate(f))
    throw std::invalid_argument("shift_window: vector depends on the first coordinate");
  const std::size_t dim = f.values.size();
  std::vector<Rational> out(dim);
  for (std::size_t idx = 0; idx < dim; ++idx) out[idx] = f.values[idx >> 1];
  return CylinderVector(f.side, f.window, std::move(out));
}

// shift(J f) = J(shift f) over every basis cylinder supported on [2..w].
struct IntertwiningReport {
  std::size_t window = 0;
  std::size_t checks = 0;
  std::vector<std::size_t> failed_basis;   // inner-window basis indices
  bool all_pass() const { return failed_basis.empty(); }
};

inline IntertwiningReport verify_intertwining(const KernelSpec& spec, std::size_t w,
                                              const Caps& caps = Caps::from_env()) {
  if (w < 2) throw std::invalid_argument("verify_intertwining: window must be >= 2");
  caps.require_tensor_dimension(std::size_t{1} << w);
  IntertwiningReport rep;
  rep.window = w;
  rep.checks = std::size_t{1} << (w - 1);
  for (std::size_t inner = 0; inner < rep.checks; ++inner) {
    std::vector<unsigned> digits(w, 0);
    for (std::size_t i = 1; i < w; ++i)
      digits[i] = static_cast<unsigned>((inner >> (w - 1 - i)) & 1u);
    CylinderVector f = CylinderVector::basis(Side::Xi, w, digits);
    // coordinate 1 free: sum the two cells so f does not depend on it
    {
      const std::size_t half = std::size_t{1} << (w - 1);
      for (std::size_t j = 0; j < half; ++j) {
        const Rational s = f.values[j] + f.values[j + half];
        f.values[j] = s;
        f.values[j + half] = s;
      }
    }
    const CylinderVector lhs = shift_window(tensor_apply(spec, f, caps));
    const CylinderVector rhs = tensor_apply(spec, shift_window(f), caps);
    if (!(lhs == rhs)) rep.failed_basis.push_back(inner);
  }
  return rep;
}

inline RationalMatrix tensor_power_matrix(const KernelSpec& spec, std::size_t w,
                                          const Caps& caps = Caps::from_env()) {
  if (w < 1) throw std::invalid_argument("tensor_power_matrix: window must be >= 1");
  caps.require_tensor_dimension(std::size_t{1} << w);
  RationalMatrix acc = transfer_matrix(spec).as_matrix();
  for (std::size_t i = 1; i < w; ++i)
    acc = RationalMatrix::kronecker(acc, transfer_matrix(spec).as_matrix());
  return acc;
}

// Full rank of the finite tensor power certifies, at window level, both the
// trivial kernel and the dense image. det_magnitude_power is the closed form
// (2a)^w, the factor determinant magnitude raised to the window length.
struct RankReport {
  std::size_t window = 0;
  std::size_t dimension = 0;
  std::size_t rank = 0;
  Rational factor_determinant;
  Rational det_magnitude_power;
  bool full_rank() const { return rank == dimension; }
};

inline RankReport verify_injective_dense(const KernelSpec& spec, std::size_t w,
                                         const Caps& caps = Caps::from_env()) {
  RankReport rep;
  rep.window = w;
  rep.dimension = std::size_t{1} << w;
  const RationalMatrix big = tensor_power_matrix(spec, w, caps);
  rep.rank = big.rank_fraction_free();
  rep.factor_determinant = -2 * spec.a;
  rep.det_magnitude_power = pow_rational(2 * spec.a, static_cast<unsigned>(w));
  return rep;
}

// Truncation of the infinite chain J_a (x) J_{a^2} (x) J_{a^3} (x) ... : each
// block is verified independently (the product operator is block-diagonal on
// product cylinders). The two reported entropy totals expose the split the
// chain exists for: the xi side sums binary entropies H(a^k, 1-a^k), bounded
// as blocks grow, while the beta side contributes one full bit per
// coordinate, blocks * w in total.
struct ChainBlockResult {
  Rational a;
  bool intertwining_ok = false;
  bool full_rank = false;
  double xi_entropy_bits = 0.0;
};

struct ChainReport {
  std::size_t window = 0;
  std::vector<ChainBlockResult> blocks;
  double xi_entropy_sum_bits = 0.0;    // sum of per-coordinate H(a^k, 1-a^k)
  double xi_window_bits = 0.0;         // window * that sum
  double beta_window_bits = 0.0;       // blocks * window * 1
  bool all_pass() const {
    for (const auto& b : blocks)
      if (!b.intertwining_ok || !b.full_rank) return false;
    return !blocks.empty();
  }
};

inline std::vector<KernelSpec> geometric_chain(const Rational& a, std::size_t blocks) {
  if (blocks == 0) throw std::invalid_argument("geometric_chain: need at least one block");
  std::vector<KernelSpec> specs;
  specs.reserve(blocks);
  Rational p = a;
  for (std::size_t k = 0; k < blocks; ++k, p *= a) specs.emplace_back(p);
  return specs;
}

inline ChainReport chain_blocks(const std::vector<KernelSpec>& specs, std::size_t w,
                                const Caps& caps = Caps::from_env()) {
  if (specs.empty()) throw std::invalid_argument("chain_blocks: empty chain");
  if (w < 2) throw std::invalid_argument("chain_blocks: per-block window must be >= 2");
  ChainReport rep;
  rep.window = w;
  for (const auto& spec : specs) {
    ChainBlockResult r;
    r.a = spec.a;
    r.intertwining_ok = verify_intertwining(spec, w, caps).all_pass();
    r.full_rank = verify_injective_dense(spec, w, caps).full_rank();
    r.xi_entropy_bits = partition_entropy(
        ProbabilityVector({spec.a, Rational(1) - spec.a}), LogBase::binary);
    rep.xi_entropy_sum_bits += r.xi_entropy_bits;
    rep.blocks.push_back(std::move(r));
  }
  rep.xi_window_bits = static_cast<double>(w) * rep.xi_entropy_sum_bits;
  rep.beta_window_bits = static_cast<double>(specs.size() * w);
  return rep;
}

}  // namespace ergolab::markov
