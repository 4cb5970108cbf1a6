#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

// Dense matrix over exact rationals. Only what the verification ops need:
// rank and determinant by row echelon, Kronecker products, matrix-vector.
class RationalMatrix {
 public:
  RationalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols, Rational(0)) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("RationalMatrix: empty shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

  bool nonnegative() const {
    for (const auto& x : a_)
      if (x < 0) return false;
    return true;
  }

  std::vector<Rational> apply(const std::vector<Rational>& v) const {
    if (v.size() != cols_) throw std::invalid_argument("RationalMatrix::apply: size mismatch");
    std::vector<Rational> out(rows_, Rational(0));
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c)
        if (!a_[r * cols_ + c].is_zero() && !v[c].is_zero()) out[r] += a_[r * cols_ + c] * v[c];
    return out;
  }

  static RationalMatrix kronecker(const RationalMatrix& x, const RationalMatrix& y) {
    RationalMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j) {
        if (x.at(i, j).is_zero()) continue;
        for (std::size_t k = 0; k < y.rows(); ++k)
          for (std::size_t l = 0; l < y.cols(); ++l)
            out.at(i * y.rows() + k, j * y.cols() + l) = x.at(i, j) * y.at(k, l);
      }
    return out;
  }

  std::size_t rank() const {
    RationalMatrix m = *this;
    return m.echelon(nullptr);
  }

  // Same rank, computed by fraction-free (Bareiss) elimination after clearing
  // row denominators. Much faster on large matrices with small denominators.
  std::size_t rank_fraction_free() const {
    std::vector<Integer> m(rows_ * cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      Integer scale(1);
      for (std::size_t c = 0; c < cols_; ++c) scale = lcm(scale, denominator(a_[r * cols_ + c]));
      for (std::size_t c = 0; c < cols_; ++c) {
        const Rational& x = a_[r * cols_ + c];
        m[r * cols_ + c] = numerator(x) * (scale / denominator(x));
      }
    }
    Integer prev(1);
    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < cols_ && pivot_row < rows_; ++col) {
      std::size_t best = rows_;
      std::size_t best_size = 0;
      for (std::size_t r = pivot_row; r < rows_; ++r) {
        const Integer& x = m[r * cols_ + col];
        if (x.is_zero()) continue;
        const std::size_t sz = x.backend().size();
        if (best == rows_ || sz < best_size) {
          best = r;
          best_size = sz;
        }
      }
      if (best == rows_) continue;
      if (best != pivot_row)
        for (std::size_t c = col; c < cols_; ++c)
          std::swap(m[best * cols_ + c], m[pivot_row * cols_ + c]);
      const Integer pivot = m[pivot_row * cols_ + col];
      for (std::size_t r = pivot_row + 1; r < rows_; ++r) {
        const Integer lead = m[r * cols_ + col];
        m[r * cols_ + col] = 0;
        for (std::size_t c = col + 1; c < cols_; ++c) {
          Integer t = pivot * m[r * cols_ + c];
          if (!lead.is_zero() && !m[pivot_row * cols_ + c].is_zero())
            t -= lead * m[pivot_row * cols_ + c];
          m[r * cols_ + c] = t / prev;  // exact by the Bareiss identity
        }
      }
      prev = pivot;
      ++pivot_row;
    }
    return pivot_row;
  }

  // Square matrices only; exact.
  Rational determinant() const {
    if (rows_ != cols_) throw std::invalid_argument("determinant: matrix not square");
    RationalMatrix m = *this;
    Rational det(1);
    const std::size_t rank = m.echelon(&det);
    return rank < rows_ ? Rational(0) : det;
  }

 private:
  // In-place row echelon; returns rank, accumulates the determinant of the
  // pivot sequence when det is non-null. Pivot choice: the shortest nonzero
  // entry in the column, which keeps intermediate rationals from ballooning.
  std::size_t echelon(Rational* det) {
    std::size_t pivot_row = 0;
    for (std::size_t col = 0; col < cols_ && pivot_row < rows_; ++col) {
      std::size_t best = rows_;
      std::size_t best_size = 0;
      for (std::size_t r = pivot_row; r < rows_; ++r) {
        const Rational& x = a_[r * cols_ + col];
        if (x.is_zero()) continue;
        const std::size_t sz =
            numerator(x).backend().size() + denominator(x).backend().size();
        if (best == rows_ || sz < best_size) {
          best = r;
          best_size = sz;
        }
      }
      if (best == rows_) continue;  // column already clear
      if (best != pivot_row) {
        for (std::size_t c = 0; c < cols_; ++c)
          std::swap(a_[best * cols_ + c], a_[pivot_row * cols_ + c]);
        if (det) *det = -*det;
      }
      const Rational pivot = a_[pivot_row * cols_ + col];
      if (det) *det *= pivot;
      for (std::size_t r = pivot_row + 1; r < rows_; ++r) {
        const Rational& lead = a_[r * cols_ + col];
        if (lead.is_zero()) continue;
        const Rational factor = lead / pivot;
        a_[r * cols_ + col] = 0;
        for (std::size_t c = col + 1; c < cols_; ++c) {
          const Rational& top = a_[pivot_row * cols_ + c];
          if (!top.is_zero()) a_[r * cols_ + c] -= factor * top;
        }
      }
      ++pivot_row;
    }
    return pivot_row;
  }

  std::size_t rows_, cols_;
  std::vector<Rational> a_;
};

}  // namespace ergolab
