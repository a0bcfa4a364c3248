#include "sdpsens/mpla/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace sdpsens::mpla {

namespace {

int bits_or_default(int bits) { return bits > 0 ? bits : default_precision(); }

// Relative threshold under which Jacobi treats an off-diagonal as converged.
// A few guard bits above the unit roundoff keep the sweeps from chasing noise.
MpScalar jacobi_eps() { return MpScalar::pow2(-(default_precision() - 8)); }

void require_finite(const MpMatrix& a, const char* where) {
  if (!a.is_finite()) throw NonFinite(std::string(where) + ": non-finite entry");
}

// Rotation (c, s) annihilating the (p,q) entry of a symmetric 2x2
// [[app, apq], [apq, aqq]].
void sym_schur2(const MpScalar& app, const MpScalar& apq, const MpScalar& aqq, MpScalar& c,
                MpScalar& s) {
  MpScalar tau = (aqq - app) / (2 * apq);
  MpScalar t = 1 / (abs(tau) + sqrt(1 + tau * tau));
  if (tau.sign() < 0) t = -t;
  c = 1 / sqrt(1 + t * t);
  s = t * c;
}

std::vector<std::size_t> descending_order(const MpVector& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] > values[j]; });
  return idx;
}

// One-sided Jacobi on the columns of w (m >= n). v accumulates the rotations.
void hestenes(MpMatrix& w, MpMatrix& v, int max_sweeps) {
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  const MpScalar eps = jacobi_eps();
  // Columns at roundoff level relative to the whole matrix are left alone;
  // rotating pure noise against itself never settles.
  const MpScalar negligible = (eps * w.frobenius_norm()) * (eps * w.frobenius_norm());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        MpScalar alpha, beta, gamma;
        for (std::size_t k = 0; k < m; ++k) {
          alpha.add_product(w(k, i), w(k, i));
          beta.add_product(w(k, j), w(k, j));
          gamma.add_product(w(k, i), w(k, j));
        }
        if (gamma.is_zero() || alpha <= negligible || beta <= negligible) continue;
        if (abs(gamma) <= eps * sqrt(alpha * beta)) continue;
        rotated = true;
        MpScalar zeta = (beta - alpha) / (2 * gamma);
        MpScalar t = 1 / (abs(zeta) + sqrt(1 + zeta * zeta));
        if (zeta.sign() < 0) t = -t;
        MpScalar c = 1 / sqrt(1 + t * t);
        MpScalar s = c * t;
        for (std::size_t k = 0; k < m; ++k) {
          MpScalar wi = w(k, i);
          MpScalar wj = w(k, j);
          w(k, i) = c * wi - s * wj;
          w(k, j) = s * wi + c * wj;
        }
        for (std::size_t k = 0; k < v.rows(); ++k) {
          MpScalar vi = v(k, i);
          MpScalar vj = v(k, j);
          v(k, i) = c * vi - s * vj;
          v(k, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) return;
  }
  throw NoConvergence("one-sided Jacobi SVD did not converge in " +
                      std::to_string(max_sweeps) + " sweeps");
}

}  // namespace

MpScalar default_rank_tol(int bits) { return MpScalar::pow2(-(bits_or_default(bits) / 2)); }

MpScalar machine_eps(int bits) { return MpScalar::pow2(-bits_or_default(bits)); }

SymEig sym_eig(const MpMatrix& input, int max_sweeps) {
  if (!input.is_square()) throw ShapeMismatch("sym_eig: matrix is not square");
  if (!input.is_symmetric()) throw NonSymmetric("sym_eig: matrix is not symmetric");
  require_finite(input, "sym_eig");
  const std::size_t n = input.rows();
  MpMatrix a = input;
  MpMatrix q = MpMatrix::identity(n);
  const MpScalar norm = a.frobenius_norm();
  const MpScalar eps = jacobi_eps();

  bool converged = n <= 1 || norm.is_zero();
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    MpScalar off;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) off.add_product(a(p, r), a(p, r));
    }
    if (sqrt(2 * off) <= eps * norm) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t r = p + 1; r < n; ++r) {
        if (a(p, r).is_zero()) continue;
        MpScalar c, s;
        sym_schur2(a(p, p), a(p, r), a(r, r), c, s);
        for (std::size_t k = 0; k < n; ++k) {
          MpScalar akp = a(k, p);
          MpScalar akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          MpScalar apk = a(p, k);
          MpScalar ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        a(p, r) = 0;
        a(r, p) = 0;
        for (std::size_t k = 0; k < n; ++k) {
          MpScalar qkp = q(k, p);
          MpScalar qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }
  if (!converged) {
    throw NoConvergence("Jacobi eigensolver exceeded " + std::to_string(max_sweeps) +
                        " sweeps");
  }

  MpVector diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  const auto order = descending_order(diag);
  SymEig out{MpVector(n), MpMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = diag[order[j]];
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = q(i, order[j]);
  }
  return out;
}

MpScalar min_eigenvalue(const MpMatrix& a) {
  if (a.rows() == 0) return MpScalar();
  return sym_eig(a).eigenvalues.back();
}

Svd svd(const MpMatrix& a, int max_sweeps) {
  require_finite(a, "svd");
  if (a.rows() < a.cols()) {
    Svd t = svd(a.transposed(), max_sweeps);
    return Svd{std::move(t.v), std::move(t.sigma), std::move(t.u)};
  }
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  MpMatrix w = a;
  MpMatrix v = MpMatrix::identity(n);
  hestenes(w, v, max_sweeps);

  MpVector norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    MpScalar s;
    for (std::size_t k = 0; k < m; ++k) s.add_product(w(k, j), w(k, j));
    norms[j] = sqrt(s);
  }
  const auto order = descending_order(norms);
  Svd out{MpMatrix(m, n), MpVector(n), MpMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = norms[src];
    for (std::size_t k = 0; k < n; ++k) out.v(k, j) = v(k, src);
    if (!norms[src].is_zero()) {
      for (std::size_t k = 0; k < m; ++k) out.u(k, j) = w(k, src) / norms[src];
    }
  }
  return out;
}

std::size_t numeric_rank(const MpMatrix& a, const MpScalar& tol) {
  if (a.empty()) return 0;
  const Svd d = svd(a);
  if (d.sigma.empty() || d.sigma.front().is_zero()) return 0;
  const MpScalar cut = tol * d.sigma.front();
  return static_cast<std::size_t>(
      std::count_if(d.sigma.begin(), d.sigma.end(), [&](const MpScalar& s) { return s > cut; }));
}

std::size_t numeric_rank(const std::vector<MpMatrix>& vectors, const MpScalar& tol) {
  if (vectors.empty()) return 0;
  const std::size_t len = vectors.front().rows() * vectors.front().cols();
  MpMatrix stacked(vectors.size(), len);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].rows() != vectors.front().rows() ||
        vectors[i].cols() != vectors.front().cols()) {
      throw ShapeMismatch("numeric_rank: matrices differ in shape");
    }
    const auto e = vectors[i].entries();
    for (std::size_t k = 0; k < len; ++k) stacked(i, k) = e[k];
  }
  return numeric_rank(stacked, tol);
}

MpMatrix pseudoinverse(const MpMatrix& s, const MpScalar& tol) {
  const Svd d = svd(s);
  MpMatrix out(s.cols(), s.rows());
  if (d.sigma.empty() || d.sigma.front().is_zero()) return out;
  const MpScalar cut = tol * d.sigma.front();
  for (std::size_t j = 0; j < d.sigma.size(); ++j) {
    if (!(d.sigma[j] > cut)) break;
    const MpScalar inv = 1 / d.sigma[j];
    for (std::size_t r = 0; r < s.cols(); ++r) {
      const MpScalar vr = d.v(r, j) * inv;
      for (std::size_t c = 0; c < s.rows(); ++c) out(r, c).add_product(vr, d.u(c, j));
    }
  }
  return out;
}

MpMatrix null_space(const MpMatrix& a, const MpScalar& tol) {
  const std::size_t n = a.cols();
  MpMatrix work = a;
  if (a.rows() < n) {
    work = MpMatrix(n, n);
    work.set_block(0, 0, a);
  }
  const Svd d = svd(work);
  std::size_t rank = 0;
  if (!d.sigma.empty() && !d.sigma.front().is_zero()) {
    const MpScalar cut = tol * d.sigma.front();
    while (rank < d.sigma.size() && d.sigma[rank] > cut) ++rank;
  }
  return d.v.block(0, rank, n, n - rank);
}

std::variant<MpMatrix, NotPositiveDefinite> try_cholesky(const MpMatrix& a) {
  if (!a.is_square()) throw ShapeMismatch("cholesky: matrix is not square");
  const std::size_t n = a.rows();
  MpMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    MpScalar d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d.sub_product(l(j, k), l(j, k));
    if (!(d > 0)) return NotPositiveDefinite(j, d.to_double());
    l(j, j) = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      MpScalar x = a(i, j);
      for (std::size_t k = 0; k < j; ++k) x.sub_product(l(i, k), l(j, k));
      l(i, j) = x / l(j, j);
    }
  }
  return l;
}

MpMatrix cholesky(const MpMatrix& a) {
  auto r = try_cholesky(a);
  if (auto* err = std::get_if<NotPositiveDefinite>(&r)) throw *err;
  return std::get<MpMatrix>(std::move(r));
}

MpVector cholesky_solve(const MpMatrix& l, std::span<const MpScalar> b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw ShapeMismatch("cholesky_solve: rhs length");
  MpVector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i].sub_product(l(i, k), y[k]);
    y[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i].sub_product(l(k, i), y[k]);
    y[i] /= l(i, i);
  }
  return y;
}

MpMatrix spd_inverse(const MpMatrix& a) {
  const MpMatrix l = cholesky(a);
  const std::size_t n = a.rows();
  MpMatrix out(n, n);
  MpVector e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), MpScalar());
    e[j] = 1;
    const MpVector col = cholesky_solve(l, e);
    for (std::size_t i = 0; i < n; ++i) out(i, j) = col[i];
  }
  return out.symmetrized();
}

MpVector lu_solve(const MpMatrix& a, std::span<const MpScalar> b) {
  if (!a.is_square() || b.size() != a.rows()) throw ShapeMismatch("lu_solve");
  const std::size_t n = a.rows();
  MpMatrix m = a;
  MpVector x(b.begin(), b.end());
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (abs(m(r, col)) > abs(m(piv, col))) piv = r;
    }
    if (m(piv, col).is_zero()) throw SolverFailure("lu_solve: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(m(col, c), m(piv, c));
      std::swap(x[col], x[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const MpScalar f = m(r, col) / m(col, col);
      if (f.is_zero()) continue;
      for (std::size_t c = col; c < n; ++c) m(r, c).sub_product(f, m(col, c));
      x[r].sub_product(f, x[col]);
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) x[i].sub_product(m(i, k), x[k]);
    x[i] /= m(i, i);
  }
  return x;
}

}  // namespace sdpsens::mpla
