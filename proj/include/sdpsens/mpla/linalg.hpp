#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "sdpsens/error.hpp"
#include "sdpsens/mpla/matrix.hpp"

namespace sdpsens::mpla {

/// 2^(-bits/2), the default relative tolerance for rank decisions.
MpScalar default_rank_tol(int bits = 0);
/// 2^(-bits), unit roundoff at the given precision.
MpScalar machine_eps(int bits = 0);

struct SymEig {
  MpVector eigenvalues;  // descending
  MpMatrix eigenvectors;  // columns aligned with eigenvalues
};

/// Cyclic Jacobi. Ties keep the original diagonal order.
/// Throws NonSymmetric, NonFinite, NoConvergence (after max_sweeps).
SymEig sym_eig(const MpMatrix& a, int max_sweeps = 100);

MpScalar min_eigenvalue(const MpMatrix& a);

struct Svd {
  MpMatrix u;  // m x k, k = min(m, n); columns for zero singular values are zero
  MpVector sigma;  // descending
  MpMatrix v;  // n x n orthogonal when m >= n, else n x k
};

/// One-sided (Hestenes) Jacobi SVD.
Svd svd(const MpMatrix& a, int max_sweeps = 100);

/// Rank of span{vectors}: number of singular values > tol * sigma_max of the
/// matrix whose rows are vec(vectors[i]).
std::size_t numeric_rank(const std::vector<MpMatrix>& vectors, const MpScalar& tol);
std::size_t numeric_rank(const MpMatrix& a, const MpScalar& tol);

/// Moore-Penrose pseudoinverse; singular values <= tol * sigma_max are dropped.
MpMatrix pseudoinverse(const MpMatrix& s, const MpScalar& tol);

/// Orthonormal basis (columns) of the null space of a, decided with the same
/// relative threshold as numeric_rank.
MpMatrix null_space(const MpMatrix& a, const MpScalar& tol);

/// Lower-triangular L with L L^T = A. Throws NotPositiveDefinite.
MpMatrix cholesky(const MpMatrix& a);
std::variant<MpMatrix, NotPositiveDefinite> try_cholesky(const MpMatrix& a);

/// Solves L L^T x = b for a Cholesky factor L.
MpVector cholesky_solve(const MpMatrix& l, std::span<const MpScalar> b);
MpMatrix spd_inverse(const MpMatrix& a);

/// LU with partial pivoting; throws SolverFailure on an exactly singular pivot.
MpVector lu_solve(const MpMatrix& a, std::span<const MpScalar> b);

}  // namespace sdpsens::mpla
