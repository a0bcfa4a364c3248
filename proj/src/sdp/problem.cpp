#include "sdpsens/sdp/problem.hpp"

#include "sdpsens/error.hpp"
#include "sdpsens/mpla/linalg.hpp"

namespace sdpsens::sdp {

namespace {

void require_same_blocks(const BlockMatrix& a, const BlockMatrix& b, const char* op) {
  if (a.dims() != b.dims()) throw ShapeMismatch(std::string(op) + ": block structure differs");
}

}  // namespace

BlockMatrix BlockMatrix::zeros(const std::vector<std::size_t>& dims) {
  std::vector<MpMatrix> blocks;
  blocks.reserve(dims.size());
  for (auto d : dims) blocks.emplace_back(d, d);
  return BlockMatrix(std::move(blocks));
}

BlockMatrix BlockMatrix::identity(const std::vector<std::size_t>& dims) {
  std::vector<MpMatrix> blocks;
  blocks.reserve(dims.size());
  for (auto d : dims) blocks.push_back(MpMatrix::identity(d));
  return BlockMatrix(std::move(blocks));
}

std::vector<std::size_t> BlockMatrix::dims() const {
  std::vector<std::size_t> d;
  d.reserve(blocks_.size());
  for (const auto& b : blocks_) d.push_back(b.rows());
  return d;
}

std::size_t BlockMatrix::total_dim() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.rows();
  return n;
}

bool BlockMatrix::is_symmetric() const {
  for (const auto& b : blocks_) {
    if (!b.is_symmetric()) return false;
  }
  return true;
}

bool BlockMatrix::is_zero() const {
  for (const auto& b : blocks_) {
    for (const auto& e : b.entries()) {
      if (!e.is_zero()) return false;
    }
  }
  return true;
}

BlockMatrix BlockMatrix::symmetrized() const {
  std::vector<MpMatrix> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.symmetrized());
  return BlockMatrix(std::move(out));
}

BlockMatrix BlockMatrix::transposed() const {
  std::vector<MpMatrix> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.transposed());
  return BlockMatrix(std::move(out));
}

MpScalar BlockMatrix::frobenius_norm() const {
  MpScalar s;
  for (const auto& b : blocks_) {
    for (const auto& e : b.entries()) s.add_product(e, e);
  }
  return sqrt(s);
}

MpScalar BlockMatrix::max_abs() const {
  MpScalar m;
  for (const auto& b : blocks_) m = max(m, b.max_abs());
  return m;
}

MpScalar BlockMatrix::trace() const {
  MpScalar t;
  for (const auto& b : blocks_) t += b.trace();
  return t;
}

MpMatrix BlockMatrix::to_dense() const {
  MpMatrix out(total_dim(), total_dim());
  std::size_t off = 0;
  for (const auto& b : blocks_) {
    out.set_block(off, off, b);
    off += b.rows();
  }
  return out;
}

BlockMatrix& BlockMatrix::operator+=(const BlockMatrix& rhs) {
  require_same_blocks(*this, rhs, "operator+=");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += rhs.blocks_[i];
  return *this;
}

BlockMatrix& BlockMatrix::operator-=(const BlockMatrix& rhs) {
  require_same_blocks(*this, rhs, "operator-=");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= rhs.blocks_[i];
  return *this;
}

BlockMatrix& BlockMatrix::operator*=(const MpScalar& s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

BlockMatrix& BlockMatrix::add_scaled(const MpScalar& s, const BlockMatrix& rhs) {
  require_same_blocks(*this, rhs, "add_scaled");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i].add_scaled(s, rhs.blocks_[i]);
  return *this;
}

BlockMatrix operator+(const BlockMatrix& a, const BlockMatrix& b) {
  BlockMatrix out(a);
  out += b;
  return out;
}

BlockMatrix operator-(const BlockMatrix& a, const BlockMatrix& b) {
  BlockMatrix out(a);
  out -= b;
  return out;
}

BlockMatrix operator-(const BlockMatrix& a) {
  BlockMatrix out(a);
  out *= MpScalar(-1);
  return out;
}

BlockMatrix operator*(const MpScalar& s, const BlockMatrix& a) {
  BlockMatrix out(a);
  out *= s;
  return out;
}

BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b) {
  require_same_blocks(a, b, "operator*");
  std::vector<MpMatrix> out;
  out.reserve(a.num_blocks());
  for (std::size_t i = 0; i < a.num_blocks(); ++i) out.push_back(a.block(i) * b.block(i));
  return BlockMatrix(std::move(out));
}

MpScalar dot(const MpMatrix& a, const MpMatrix& b) { return mpla::frobenius_dot(a, b); }

MpScalar dot(const BlockMatrix& a, const BlockMatrix& b) {
  require_same_blocks(a, b, "dot");
  MpScalar s;
  for (std::size_t i = 0; i < a.num_blocks(); ++i) s += mpla::frobenius_dot(a.block(i), b.block(i));
  return s;
}

MpVector vec(const MpMatrix& a) { return mpla::vec(a); }

MpVector vec(const BlockMatrix& a) {
  MpVector out;
  for (const auto& b : a.blocks()) out.insert(out.end(), b.entries().begin(), b.entries().end());
  return out;
}

MpMatrix he(const MpMatrix& m) {
  if (!m.is_square()) throw ShapeMismatch("he: matrix is not square");
  return m + m.transposed();
}

MpScalar min_eigenvalue(const BlockMatrix& a) {
  MpScalar best;
  bool first = true;
  for (const auto& b : a.blocks()) {
    if (b.rows() == 0) continue;
    MpScalar e = mpla::min_eigenvalue(b);
    if (first || e < best) best = std::move(e);
    first = false;
  }
  return best;
}

void SdpProblem::validate() const {
  if (b.size() != a.size()) {
    throw ShapeMismatch("b has " + std::to_string(b.size()) + " entries for " +
                        std::to_string(a.size()) + " constraints");
  }
  if (!diagonal_blocks.empty() && diagonal_blocks.size() != block_dims.size()) {
    throw ShapeMismatch("diagonal block flags do not match block count");
  }
  auto check = [&](const BlockMatrix& m, std::size_t k) {
    if (m.dims() != block_dims) {
      throw ShapeMismatch("A_" + std::to_string(k) + " does not have the declared blocks");
    }
    if (!m.is_symmetric()) throw NonSymmetric("A_" + std::to_string(k) + " is not symmetric");
  };
  check(a0, 0);
  for (std::size_t k = 0; k < a.size(); ++k) check(a[k], k + 1);
}

BlockMatrix SdpProblem::slack(const MpVector& y) const {
  if (y.size() != a.size()) throw ShapeMismatch("slack: y has wrong length");
  BlockMatrix z = a0;
  for (std::size_t k = 0; k < a.size(); ++k) z.add_scaled(-y[k], a[k]);
  return z;
}

MpVector SdpProblem::constraint_values(const BlockMatrix& x) const {
  MpVector out;
  out.reserve(a.size());
  for (const auto& ak : a) out.push_back(dot(ak, x));
  return out;
}

MpMatrix SdpProblem::constraint_matrix() const {
  std::size_t len = 0;
  for (auto d : block_dims) len += d * d;
  MpMatrix s(a.size(), len);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const MpVector v = vec(a[k]);
    for (std::size_t j = 0; j < len; ++j) s(k, j) = v[j];
  }
  return s;
}

SdpProblem make_problem(std::vector<std::size_t> dims, BlockMatrix a0, std::vector<BlockMatrix> a,
                        MpVector b) {
  SdpProblem p;
  p.diagonal_blocks.assign(dims.size(), false);
  p.block_dims = std::move(dims);
  p.a0 = std::move(a0);
  p.a = std::move(a);
  p.b = std::move(b);
  p.validate();
  return p;
}

MpScalar lagrangian(const SdpProblem& prob, const BlockMatrix& x, const MpVector& y) {
  if (y.size() != prob.m()) throw ShapeMismatch("lagrangian: y has wrong length");
  MpScalar l = dot(prob.a0, x);
  for (std::size_t k = 0; k < prob.m(); ++k) {
    if (y[k].is_zero()) continue;
    l.add_product(y[k], prob.b[k] - dot(prob.a[k], x));
  }
  return l;
}

Residuals residuals(const SdpProblem& prob, const SolutionPair& s) {
  Residuals r;
  r.primal = (prob.slack(s.y) - s.z).max_abs();
  const MpVector vals = prob.constraint_values(s.x);
  for (std::size_t k = 0; k < vals.size(); ++k) r.dual = max(r.dual, abs(vals[k] - prob.b[k]));
  return r;
}

void PerturbedFamily::validate() const {
  base.validate();
  for (const auto& [k, d] : deltas) {
    if (k > base.m()) throw ShapeMismatch("delta index " + std::to_string(k) + " out of range");
    if (d.dims() != base.block_dims) throw ShapeMismatch("delta block structure differs");
    if (!d.is_symmetric()) throw NonSymmetric("delta " + std::to_string(k) + " is not symmetric");
  }
  if (b_delta && b_delta->size() != base.m()) throw ShapeMismatch("b delta has wrong length");
}

bool PerturbedFamily::is_zero() const {
  for (const auto& [k, d] : deltas) {
    if (!d.is_zero()) return false;
  }
  if (b_delta) {
    for (const auto& v : *b_delta) {
      if (!v.is_zero()) return false;
    }
  }
  return true;
}

BlockMatrix PerturbedFamily::delta(std::size_t k) const {
  auto it = deltas.find(k);
  if (it == deltas.end()) return BlockMatrix::zeros(base.block_dims);
  return it->second;
}

SdpProblem apply(const PerturbedFamily& family, const MpScalar& t) {
  SdpProblem p = family.base;
  if (t.is_zero()) return p;
  for (const auto& [k, d] : family.deltas) {
    if (k == 0) {
      p.a0.add_scaled(t, d);
    } else {
      p.a.at(k - 1).add_scaled(t, d);
    }
  }
  if (family.b_delta) {
    for (std::size_t k = 0; k < p.b.size(); ++k) p.b[k].add_product(t, (*family.b_delta)[k]);
  }
  return p;
}

}  // namespace sdpsens::sdp
