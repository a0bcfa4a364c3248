#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "sdpsens/mpla/scalar.hpp"

namespace sdpsens::mpla {

using MpVector = std::vector<MpScalar>;

/// Dense row-major matrix of MpScalar.
///
/// Symmetry is never assumed: is_symmetric() tests exact equality of
/// mirrored entries, and symmetrized() must be called explicitly.
class MpMatrix {
 public:
  MpMatrix() = default;
  MpMatrix(std::size_t rows, std::size_t cols);
  MpMatrix(std::size_t rows, std::size_t cols, MpVector entries);
  /// Row-major nested initializer, e.g. {{1, 2}, {2, 3}}.
  MpMatrix(std::initializer_list<std::initializer_list<MpScalar>> rows);

  static MpMatrix identity(std::size_t n);
  static MpMatrix zeros(std::size_t rows, std::size_t cols);
  static MpMatrix diagonal(std::span<const MpScalar> d);
  /// Column vector.
  static MpMatrix column(std::span<const MpScalar> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool empty() const { return entries_.empty(); }

  MpScalar& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  const MpScalar& operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }
  std::span<const MpScalar> entries() const { return entries_; }
  std::span<MpScalar> entries() { return entries_; }

  bool is_symmetric() const;
  bool is_finite() const;
  MpMatrix symmetrized() const;
  MpMatrix transposed() const;

  MpMatrix block(std::size_t row0, std::size_t col0, std::size_t rows, std::size_t cols) const;
  void set_block(std::size_t row0, std::size_t col0, const MpMatrix& b);
  MpVector column_vector(std::size_t j) const;
  MpVector row_vector(std::size_t i) const;

  MpMatrix& operator+=(const MpMatrix& rhs);
  MpMatrix& operator-=(const MpMatrix& rhs);
  MpMatrix& operator*=(const MpScalar& s);
  /// this += s * rhs
  MpMatrix& add_scaled(const MpScalar& s, const MpMatrix& rhs);

  MpScalar trace() const;
  MpScalar frobenius_norm() const;
  MpScalar max_abs() const;
  void set_precision(int bits);

  friend bool operator==(const MpMatrix& a, const MpMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  MpVector entries_;
};

MpMatrix operator+(const MpMatrix& a, const MpMatrix& b);
MpMatrix operator-(const MpMatrix& a, const MpMatrix& b);
MpMatrix operator*(const MpMatrix& a, const MpMatrix& b);
MpMatrix operator*(const MpScalar& s, const MpMatrix& a);
MpMatrix operator-(const MpMatrix& a);
MpVector operator*(const MpMatrix& a, std::span<const MpScalar> x);

/// a^T * b
MpMatrix transpose_times(const MpMatrix& a, const MpMatrix& b);
/// Frobenius inner product sum_ij a_ij b_ij. Throws ShapeMismatch.
MpScalar frobenius_dot(const MpMatrix& a, const MpMatrix& b);
/// Row-major vectorization (a11, a12, ..., ann).
MpVector vec(const MpMatrix& a);
MpMatrix unvec(std::span<const MpScalar> v, std::size_t rows, std::size_t cols);
/// Q^T A Q
MpMatrix congruence(const MpMatrix& q, const MpMatrix& a);

MpScalar dot(std::span<const MpScalar> a, std::span<const MpScalar> b);
MpScalar norm2(std::span<const MpScalar> a);
MpScalar norm_inf(std::span<const MpScalar> a);

/// max_ij |a_ij - b_ij|.
MpScalar max_abs_diff(const MpMatrix& a, const MpMatrix& b);

std::string to_string(const MpMatrix& m, int digits = 6);

}  // namespace sdpsens::mpla
