#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdpsens/mpla/matrix.hpp"

namespace sdpsens::sdp {

using mpla::MpMatrix;
using mpla::MpScalar;
using mpla::MpVector;

/// Block-diagonal symmetric matrix, one dense MpMatrix per block.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  explicit BlockMatrix(std::vector<MpMatrix> blocks) : blocks_(std::move(blocks)) {}

  static BlockMatrix zeros(const std::vector<std::size_t>& dims);
  static BlockMatrix identity(const std::vector<std::size_t>& dims);

  std::size_t num_blocks() const { return blocks_.size(); }
  const MpMatrix& block(std::size_t i) const { return blocks_.at(i); }
  MpMatrix& block(std::size_t i) { return blocks_.at(i); }
  const std::vector<MpMatrix>& blocks() const { return blocks_; }
  std::vector<std::size_t> dims() const;
  std::size_t total_dim() const;

  bool is_symmetric() const;
  bool is_zero() const;
  BlockMatrix symmetrized() const;
  BlockMatrix transposed() const;
  MpScalar frobenius_norm() const;
  MpScalar max_abs() const;
  MpScalar trace() const;
  /// Dense block-diagonal matrix in ambient coordinates.
  MpMatrix to_dense() const;

  BlockMatrix& operator+=(const BlockMatrix& rhs);
  BlockMatrix& operator-=(const BlockMatrix& rhs);
  BlockMatrix& operator*=(const MpScalar& s);
  BlockMatrix& add_scaled(const MpScalar& s, const BlockMatrix& rhs);

  friend bool operator==(const BlockMatrix& a, const BlockMatrix& b) {
    return a.blocks_ == b.blocks_;
  }

 private:
  std::vector<MpMatrix> blocks_;
};

BlockMatrix operator+(const BlockMatrix& a, const BlockMatrix& b);
BlockMatrix operator-(const BlockMatrix& a, const BlockMatrix& b);
BlockMatrix operator-(const BlockMatrix& a);
BlockMatrix operator*(const MpScalar& s, const BlockMatrix& a);
/// Blockwise product.
BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b);

/// sum_ij A_ij B_ij. Throws ShapeMismatch.
MpScalar dot(const MpMatrix& a, const MpMatrix& b);
MpScalar dot(const BlockMatrix& a, const BlockMatrix& b);
/// Row-major vectorization.
MpVector vec(const MpMatrix& a);
/// Concatenated per-block row-major vectorization.
MpVector vec(const BlockMatrix& a);
/// M + M^T. Throws ShapeMismatch for non-square input.
MpMatrix he(const MpMatrix& m);
/// Smallest eigenvalue over all blocks.
MpScalar min_eigenvalue(const BlockMatrix& a);

/// The pair
///   (P)  sup b^T y  s.t.  A0 - sum_k y_k A_k = Z,  Z psd
///   (D)  inf A0 . X s.t.  A_k . X = b_k,           X psd
/// over a product of symmetric blocks.
struct SdpProblem {
  std::vector<std::size_t> block_dims;
  /// Blocks flagged diagonal (negative sizes in SDPA files). Stored densely.
  std::vector<bool> diagonal_blocks;
  BlockMatrix a0;
  std::vector<BlockMatrix> a;  // a[k-1] is A_k
  MpVector b;

  std::size_t m() const { return a.size(); }
  /// Throws ShapeMismatch / NonSymmetric when the invariants fail.
  void validate() const;

  /// A0 - sum_k y_k A_k
  BlockMatrix slack(const MpVector& y) const;
  /// (A_1 . X, ..., A_m . X)
  MpVector constraint_values(const BlockMatrix& x) const;
  /// m x (sum n_i^2) matrix whose k-th row is vec(A_k).
  MpMatrix constraint_matrix() const;

  friend bool operator==(const SdpProblem& p, const SdpProblem& q) {
    return p.block_dims == q.block_dims && p.a0 == q.a0 && p.a == q.a && p.b == q.b;
  }
};

SdpProblem make_problem(std::vector<std::size_t> dims, BlockMatrix a0, std::vector<BlockMatrix> a,
                        MpVector b);

/// L(X, y) = A0 . X + sum_k y_k (b_k - A_k . X)
MpScalar lagrangian(const SdpProblem& prob, const BlockMatrix& x, const MpVector& y);

struct SolutionPair {
  MpVector y;
  BlockMatrix z;
  BlockMatrix x;
  MpScalar primal_obj;  // b^T y
  MpScalar dual_obj;  // A0 . X
  MpScalar duality_gap;  // dual_obj - primal_obj
};

/// max-abs residuals of a pair: primal |A0 - sum y A - Z|, dual |A_k . X - b_k|.
struct Residuals {
  MpScalar primal;
  MpScalar dual;
};
Residuals residuals(const SdpProblem& prob, const SolutionPair& s);

/// A_k(t) = A_k + t D_k, b(t) = b + t db. Key 0 addresses A0.
struct PerturbedFamily {
  std::string name;
  SdpProblem base;
  std::map<std::size_t, BlockMatrix> deltas;
  std::optional<MpVector> b_delta;

  /// Throws ShapeMismatch if a delta does not match the base blocks.
  void validate() const;
  bool is_zero() const;
  /// D_k, or a zero block matrix when k is not perturbed.
  BlockMatrix delta(std::size_t k) const;
};

SdpProblem apply(const PerturbedFamily& family, const MpScalar& t);

}  // namespace sdpsens::sdp
