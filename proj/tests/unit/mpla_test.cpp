#include <gtest/gtest.h>

#include <random>

#include "sdpsens/mpla/linalg.hpp"

namespace {

using namespace sdpsens;
using namespace sdpsens::mpla;

MpMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MpMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      a(i, j) = MpScalar(dist(rng));
      a(j, i) = a(i, j);
    }
  }
  return a;
}

MpMatrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MpMatrix a(m, n);
  for (auto& e : a.entries()) e = MpScalar(dist(rng));
  return a;
}

TEST(MpScalar, ArithmeticWidensToMaxPrecision) {
  MpScalar a(1.0, 64);
  MpScalar b(3.0, 256);
  EXPECT_EQ((a / b).precision_bits(), 256);
  a += b;
  EXPECT_EQ(a.precision_bits(), 256);
}

TEST(MpScalar, DecimalRoundTrip) {
  PrecisionGuard guard(1024);
  const MpScalar x = sqrt(MpScalar(2)) / 3;
  const MpScalar back = MpScalar::parse(x.to_string());
  EXPECT_TRUE(back == x);
  EXPECT_THROW(MpScalar::parse("1.5x"), Error);
}

TEST(SymEig, Identity) {
  const SymEig e = sym_eig(MpMatrix::identity(3));
  for (const auto& v : e.eigenvalues) EXPECT_TRUE(v == 1);
  EXPECT_TRUE(e.eigenvectors == MpMatrix::identity(3));
}

TEST(SymEig, DiagonalWithTiesKeepsIndexOrder) {
  MpMatrix u(6, 6);
  u(0, 0) = 2;
  const SymEig e = sym_eig(u);
  EXPECT_TRUE(e.eigenvalues[0] == 2);
  for (std::size_t i = 1; i < 6; ++i) EXPECT_TRUE(e.eigenvalues[i].is_zero());
  EXPECT_TRUE(e.eigenvectors(0, 0) == 1);
}

TEST(SymEig, SwapMatrix) {
  const SymEig e = sym_eig(MpMatrix{{0, 1}, {1, 0}});
  EXPECT_LT(abs(e.eigenvalues[0] - 1).to_double(), 1e-300);
  EXPECT_LT(abs(e.eigenvalues[1] + 1).to_double(), 1e-300);
}

TEST(SymEig, RejectsNonSymmetric) {
  EXPECT_THROW(sym_eig(MpMatrix{{0, 1}, {0, 0}}), NonSymmetric);
}

TEST(SymEig, ReconstructionAt256Bits) {
  PrecisionGuard guard(256);
  std::mt19937_64 rng(7);
  for (std::size_t n : {2u, 5u, 8u}) {
    const MpMatrix a = random_symmetric(n, rng);
    const SymEig e = sym_eig(a);
    const MpMatrix lambda = MpMatrix::diagonal(e.eigenvalues);
    const MpMatrix rec = e.eigenvectors * lambda * e.eigenvectors.transposed();
    EXPECT_LE((rec - a).frobenius_norm() / a.frobenius_norm(), MpScalar::pow2(-200));
    const MpMatrix qtq = transpose_times(e.eigenvectors, e.eigenvectors);
    EXPECT_LE((qtq - MpMatrix::identity(n)).frobenius_norm(), MpScalar::pow2(-200));
    for (std::size_t i = 0; i + 1 < n; ++i) EXPECT_GE(e.eigenvalues[i], e.eigenvalues[i + 1]);
  }
}

TEST(NumericRank, ZeroSpan) {
  EXPECT_EQ(numeric_rank(std::vector<MpMatrix>{MpMatrix(2, 2), MpMatrix(2, 2)},
                         default_rank_tol()),
            0u);
}

TEST(NumericRank, InvariantUnderScalingAndCombination) {
  std::mt19937_64 rng(11);
  std::vector<MpMatrix> v;
  for (int i = 0; i < 3; ++i) v.push_back(random_symmetric(4, rng));
  const auto tol = default_rank_tol();
  EXPECT_EQ(numeric_rank(v, tol), 3u);
  auto scaled = v;
  scaled[1] *= MpScalar::parse("1e-40");
  EXPECT_EQ(numeric_rank(scaled, tol), 3u);
  v.push_back(v[0] + MpScalar(3) * v[2]);
  EXPECT_EQ(numeric_rank(v, tol), 3u);
}

TEST(Pseudoinverse, IdentityAndDiagonal) {
  const auto tol = default_rank_tol();
  EXPECT_LT(max_abs_diff(pseudoinverse(MpMatrix::identity(3), tol), MpMatrix::identity(3))
                .to_double(),
            1e-300);
  const MpMatrix p = pseudoinverse(MpMatrix{{2, 0}, {0, 0}}, tol);
  EXPECT_LT(abs(p(0, 0) - MpScalar::pow2(-1)).to_double(), 1e-300);
  EXPECT_TRUE(p(1, 1).is_zero());
}

TEST(Pseudoinverse, PenroseIdentitiesRankDeficient) {
  std::mt19937_64 rng(3);
  const MpMatrix s = random_matrix(7, 3, rng) * random_matrix(3, 5, rng);
  const MpMatrix p = pseudoinverse(s, default_rank_tol());
  const MpScalar bound = MpScalar::pow2(-200) * s.frobenius_norm();
  EXPECT_LE((s * p * s - s).frobenius_norm(), bound);
  EXPECT_LE((p * s * p - p).frobenius_norm(), bound);
  const MpMatrix sp = s * p;
  const MpMatrix ps = p * s;
  EXPECT_LE((sp - sp.transposed()).frobenius_norm(), bound);
  EXPECT_LE((ps - ps.transposed()).frobenius_norm(), bound);
}

TEST(NullSpace, WideMatrix) {
  const MpMatrix a{{2, -1, 2}, {-1, 2, -1}};
  const MpMatrix n = null_space(a, default_rank_tol());
  ASSERT_EQ(n.cols(), 1u);
  EXPECT_LT((a * n).max_abs().to_double(), 1e-300);
}

TEST(Cholesky, Cases) {
  EXPECT_TRUE(cholesky(MpMatrix::identity(2)) == MpMatrix::identity(2));
  const MpMatrix l = cholesky(MpMatrix{{4, 2}, {2, 2}});
  EXPECT_TRUE(l == (MpMatrix{{2, 0}, {1, 1}}));
  try {
    cholesky(MpMatrix{{0, 1}, {1, 0}});
    FAIL() << "expected NotPositiveDefinite";
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot(), 0u);
    EXPECT_EQ(e.value(), 0.0);
  }
}

TEST(LuSolve, Small) {
  const MpVector x = lu_solve(MpMatrix{{0, 2}, {3, 1}}, MpVector{MpScalar(4), MpScalar(5)});
  EXPECT_TRUE(x[0] == 1);
  EXPECT_TRUE(x[1] == 2);
}

}  // namespace
