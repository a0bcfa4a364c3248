#include "sdpsens/mpla/matrix.hpp"

#include <sstream>

#include "sdpsens/error.hpp"

namespace sdpsens::mpla {

namespace {

void require_same_shape(const MpMatrix& a, const MpMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

}  // namespace

MpMatrix::MpMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {}

MpMatrix::MpMatrix(std::size_t rows, std::size_t cols, MpVector entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    throw ShapeMismatch("entry count " + std::to_string(entries_.size()) + " != " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
}

MpMatrix::MpMatrix(std::initializer_list<std::initializer_list<MpScalar>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeMismatch("ragged initializer list");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

MpMatrix MpMatrix::identity(std::size_t n) {
  MpMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1;
  return out;
}

MpMatrix MpMatrix::zeros(std::size_t rows, std::size_t cols) { return MpMatrix(rows, cols); }

MpMatrix MpMatrix::diagonal(std::span<const MpScalar> d) {
  MpMatrix out(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out(i, i) = d[i];
  return out;
}

MpMatrix MpMatrix::column(std::span<const MpScalar> v) {
  return MpMatrix(v.size(), 1, MpVector(v.begin(), v.end()));
}

bool MpMatrix::is_symmetric() const {
  if (!is_square()) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      if (!((*this)(i, j) == (*this)(j, i))) return false;
    }
  }
  return true;
}

bool MpMatrix::is_finite() const {
  for (const auto& e : entries_) {
    if (!e.is_finite()) return false;
  }
  return true;
}

MpMatrix MpMatrix::symmetrized() const {
  if (!is_square()) throw ShapeMismatch("symmetrized: matrix is not square");
  MpMatrix out(*this);
  const MpScalar half = MpScalar::pow2(-1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      MpScalar avg = ((*this)(i, j) + (*this)(j, i)) * half;
      out(i, j) = avg;
      out(j, i) = std::move(avg);
    }
  }
  return out;
}

MpMatrix MpMatrix::transposed() const {
  MpMatrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  }
  return out;
}

MpMatrix MpMatrix::block(std::size_t row0, std::size_t col0, std::size_t rows,
                         std::size_t cols) const {
  if (row0 + rows > rows_ || col0 + cols > cols_) throw ShapeMismatch("block out of range");
  MpMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = (*this)(row0 + i, col0 + j);
  }
  return out;
}

void MpMatrix::set_block(std::size_t row0, std::size_t col0, const MpMatrix& b) {
  if (row0 + b.rows() > rows_ || col0 + b.cols() > cols_) {
    throw ShapeMismatch("set_block out of range");
  }
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(row0 + i, col0 + j) = b(i, j);
  }
}

MpVector MpMatrix::column_vector(std::size_t j) const {
  MpVector out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out.push_back((*this)(i, j));
  return out;
}

MpVector MpMatrix::row_vector(std::size_t i) const {
  return MpVector(entries_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                  entries_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

MpMatrix& MpMatrix::operator+=(const MpMatrix& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += rhs.entries_[k];
  return *this;
}

MpMatrix& MpMatrix::operator-=(const MpMatrix& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= rhs.entries_[k];
  return *this;
}

MpMatrix& MpMatrix::operator*=(const MpScalar& s) {
  for (auto& e : entries_) e *= s;
  return *this;
}

MpMatrix& MpMatrix::add_scaled(const MpScalar& s, const MpMatrix& rhs) {
  require_same_shape(*this, rhs, "add_scaled");
  if (s.is_zero()) return *this;
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k].add_product(s, rhs.entries_[k]);
  return *this;
}

MpScalar MpMatrix::trace() const {
  MpScalar t;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

MpScalar MpMatrix::frobenius_norm() const {
  MpScalar s;
  for (const auto& e : entries_) s.add_product(e, e);
  return sqrt(s);
}

MpScalar MpMatrix::max_abs() const {
  MpScalar m;
  for (const auto& e : entries_) {
    MpScalar a = abs(e);
    if (a > m) m = std::move(a);
  }
  return m;
}

void MpMatrix::set_precision(int bits) {
  for (auto& e : entries_) e.set_precision(bits);
}

bool operator==(const MpMatrix& a, const MpMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
  for (std::size_t k = 0; k < a.entries_.size(); ++k) {
    if (!(a.entries_[k] == b.entries_[k])) return false;
  }
  return true;
}

MpMatrix operator+(const MpMatrix& a, const MpMatrix& b) {
  MpMatrix out(a);
  out += b;
  return out;
}

MpMatrix operator-(const MpMatrix& a, const MpMatrix& b) {
  MpMatrix out(a);
  out -= b;
  return out;
}

MpMatrix operator*(const MpMatrix& a, const MpMatrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeMismatch("operator*: " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
  MpMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const MpScalar& aik = a(i, k);
      if (aik.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j).add_product(aik, b(k, j));
    }
  }
  return out;
}

MpMatrix operator*(const MpScalar& s, const MpMatrix& a) {
  MpMatrix out(a);
  out *= s;
  return out;
}

MpMatrix operator-(const MpMatrix& a) {
  MpMatrix out(a);
  for (auto& e : out.entries()) e = -e;
  return out;
}

MpVector operator*(const MpMatrix& a, std::span<const MpScalar> x) {
  if (a.cols() != x.size()) throw ShapeMismatch("matrix-vector product");
  MpVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out[i].add_product(a(i, j), x[j]);
  }
  return out;
}

MpMatrix transpose_times(const MpMatrix& a, const MpMatrix& b) {
  if (a.rows() != b.rows()) throw ShapeMismatch("transpose_times");
  MpMatrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const MpScalar& aki = a(k, i);
      if (aki.is_zero()) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j).add_product(aki, b(k, j));
    }
  }
  return out;
}

MpScalar frobenius_dot(const MpMatrix& a, const MpMatrix& b) {
  require_same_shape(a, b, "frobenius_dot");
  MpScalar s;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) s.add_product(ea[k], eb[k]);
  return s;
}

MpVector vec(const MpMatrix& a) { return MpVector(a.entries().begin(), a.entries().end()); }

MpMatrix unvec(std::span<const MpScalar> v, std::size_t rows, std::size_t cols) {
  return MpMatrix(rows, cols, MpVector(v.begin(), v.end()));
}

MpMatrix congruence(const MpMatrix& q, const MpMatrix& a) { return transpose_times(q, a * q); }

MpScalar dot(std::span<const MpScalar> a, std::span<const MpScalar> b) {
  if (a.size() != b.size()) throw ShapeMismatch("dot: length mismatch");
  MpScalar s;
  for (std::size_t k = 0; k < a.size(); ++k) s.add_product(a[k], b[k]);
  return s;
}

MpScalar norm2(std::span<const MpScalar> a) { return sqrt(dot(a, a)); }

MpScalar norm_inf(std::span<const MpScalar> a) {
  MpScalar m;
  for (const auto& e : a) {
    MpScalar x = abs(e);
    if (x > m) m = std::move(x);
  }
  return m;
}

MpScalar max_abs_diff(const MpMatrix& a, const MpMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  MpScalar m;
  for (std::size_t k = 0; k < a.entries().size(); ++k) {
    MpScalar d = abs(a.entries()[k] - b.entries()[k]);
    if (d > m) m = std::move(d);
  }
  return m;
}

std::string to_string(const MpMatrix& m, int digits) {
  std::ostringstream os;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i == 0 ? "[" : " ");
    for (std::size_t j = 0; j < m.cols(); ++j) {
      os << (j == 0 ? "[" : ", ") << m(i, j).to_string(digits);
    }
    os << "]" << (i + 1 == m.rows() ? "]" : "\n");
  }
  return os.str();
}

}  // namespace sdpsens::mpla
