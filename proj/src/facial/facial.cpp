#include "sdpsens/facial/facial.hpp"

#include <algorithm>
#include <random>

#include "sdpsens/error.hpp"
#include "sdpsens/mpla/linalg.hpp"

namespace sdpsens::facial {

namespace {

MpMatrix residual_part(const Face& f, std::size_t blk, const MpMatrix& m) {
  if (f.r[blk] == 0) return MpMatrix(0, 0);
  return mpla::congruence(f.residual_basis(blk), m).symmetrized();
}

MpScalar inf_norm(const MpVector& v) {
  MpScalar s;
  for (const auto& x : v) s = max(s, abs(x));
  return s;
}

// Reconstruct V diag(max(lambda, 0)) V^T.
MpMatrix psd_part(const mpla::SymEig& e) {
  const std::size_t n = e.eigenvalues.size();
  MpMatrix out(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    if (!(e.eigenvalues[l] > 0)) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const MpScalar s = e.eigenvalues[l] * e.eigenvectors(i, l);
      for (std::size_t j = 0; j < n; ++j) out(i, j).add_product(s, e.eigenvectors(j, l));
    }
  }
  return out.symmetrized();
}

BlockMatrix combination(const SdpProblem& prob, const MpVector& y) {
  BlockMatrix s = BlockMatrix::zeros(prob.block_dims);
  for (std::size_t k = 0; k < prob.m(); ++k) s.add_scaled(-y[k], prob.a[k]);
  return s.symmetrized();  // -sum y_k A_k
}

MpMatrix random_orthogonal(std::size_t n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  MpMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      g(i, j) = MpScalar(dist(gen));
      g(j, i) = g(i, j);
    }
  }
  return mpla::sym_eig(g).eigenvectors;
}

std::vector<MpScalar> rank_probes() {
  return {MpScalar::parse("1e-16"), MpScalar::parse("1e-8"), MpScalar::parse("1e-4")};
}

// Computed faces carry rounding from the auxiliary solves, far above
// 2^(-precision/2), so ranks on them are cut at the certificate tolerance.
bool probe_rank(const FacialReductionResult& seq, const PerturbedFamily& fam) {
  const auto ok =
      rank_condition(fam, seq.minimal_face(), rank_probes(), DiscriminantOptions::defaults().tol_cert);
  return std::all_of(ok.begin(), ok.end(), [](bool b) { return b; });
}

// The perturbed constraint indices (1-based), and whether b moves.
std::vector<std::size_t> perturbed_indices(const PerturbedFamily& fam) {
  std::vector<std::size_t> out;
  for (const auto& [k, d] : fam.deltas) {
    if (k >= 1 && !d.is_zero()) out.push_back(k);
  }
  return out;
}

bool b_moves(const PerturbedFamily& fam) {
  if (!fam.b_delta) return false;
  return std::any_of(fam.b_delta->begin(), fam.b_delta->end(),
                     [](const MpScalar& v) { return !v.is_zero(); });
}

bool negligible(const MpScalar& v, const MpVector& y, const MpScalar& tol) {
  return abs(v) <= tol * max(MpScalar(1), inf_norm(y));
}

nlohmann::json matrix_json(const MpMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).to_string());
    rows.push_back(std::move(row));
  }
  return rows;
}

MpMatrix matrix_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j.at(0).size() : 0;
  MpMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j.at(i).size() != cols) throw ShapeMismatch("ragged matrix in JSON");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = MpScalar::parse(j.at(i).at(c).get<std::string>());
  }
  return m;
}

nlohmann::json block_json(const BlockMatrix& b) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& blk : b.blocks()) out.push_back(matrix_json(blk));
  return out;
}

BlockMatrix block_from_json(const nlohmann::json& j) {
  std::vector<MpMatrix> blocks;
  for (const auto& b : j) blocks.push_back(matrix_from_json(b));
  return BlockMatrix(std::move(blocks));
}

}  // namespace

Face Face::whole(const std::vector<std::size_t>& dims) {
  Face f;
  for (auto n : dims) {
    f.q.push_back(MpMatrix::identity(n));
    f.r.push_back(n);
  }
  return f;
}

std::vector<std::size_t> Face::dims() const {
  std::vector<std::size_t> d;
  for (const auto& m : q) d.push_back(m.rows());
  return d;
}

std::size_t Face::total_residual() const {
  std::size_t s = 0;
  for (auto v : r) s += v;
  return s;
}

bool Face::is_whole() const {
  for (std::size_t b = 0; b < q.size(); ++b) {
    if (r[b] != q[b].rows()) return false;
  }
  return true;
}

MpMatrix Face::residual_basis(std::size_t blk) const {
  const std::size_t n = q.at(blk).rows();
  return q[blk].block(0, n - r[blk], n, r[blk]);
}

std::vector<MpMatrix> face_part(const Face& f, const BlockMatrix& m) {
  if (m.dims() != f.dims()) throw ShapeMismatch("face_part: block structure differs");
  std::vector<MpMatrix> out;
  for (std::size_t b = 0; b < f.num_blocks(); ++b) out.push_back(residual_part(f, b, m.block(b)));
  return out;
}

MpScalar face_part_norm(const Face& f, const BlockMatrix& m) {
  MpScalar s;
  for (const auto& p : face_part(f, m)) {
    if (p.rows()) s = max(s, p.max_abs());
  }
  return s;
}

std::string to_string(FaceRelation r) {
  switch (r) {
    case FaceRelation::Equal: return "Equal";
    case FaceRelation::FSubsetG: return "FSubsetG";
    case FaceRelation::GSubsetF: return "GSubsetF";
    case FaceRelation::Incomparable: return "Incomparable";
  }
  return "?";
}

std::string to_string(DiscriminantOutcome o) {
  switch (o) {
    case DiscriminantOutcome::Certificate: return "Certificate";
    case DiscriminantOutcome::Farkas: return "Farkas";
    case DiscriminantOutcome::NoneFound: return "NoneFound";
  }
  return "?";
}

std::string to_string(ReductionStatus s) {
  return s == ReductionStatus::MinimalFaceFound ? "MinimalFaceFound" : "InfeasibleDetected";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::NotFactorable: return "NotFactorable";
  }
  return "?";
}

Face intersect_face(const Face& f, const BlockMatrix& u, const MpScalar& tol) {
  if (u.dims() != f.dims()) throw ShapeMismatch("intersect_face: block structure differs");
  Face out = f;
  for (std::size_t b = 0; b < f.num_blocks(); ++b) {
    const std::size_t r = f.r[b];
    if (r == 0) continue;
    const MpMatrix w = residual_part(f, b, u.block(b));
    const auto e = mpla::sym_eig(w);
    if (e.eigenvalues.back() < -tol) {
      throw NotPSD("intersect_face: U has eigenvalue " + e.eigenvalues.back().to_string(6) +
                   " on the face");
    }
    std::size_t zeros = 0;
    for (const auto& lam : e.eigenvalues) {
      if (lam <= tol) ++zeros;
    }
    if (zeros == r) continue;
    const std::size_t n = f.q[b].rows();
    const MpMatrix rotated = f.residual_basis(b) * e.eigenvectors;
    out.q[b].set_block(0, n - r, rotated);
    out.r[b] = zeros;
  }
  return out;
}

SdpProblem restrict_to_face(const SdpProblem& prob, const Face& f) {
  prob.validate();
  if (prob.block_dims != f.dims()) throw ShapeMismatch("restrict_to_face: block structure differs");
  std::vector<std::size_t> dims;
  std::vector<std::size_t> keep;
  for (std::size_t b = 0; b < f.num_blocks(); ++b) {
    if (f.r[b] > 0) {
      dims.push_back(f.r[b]);
      keep.push_back(b);
    }
  }
  auto reduce = [&](const BlockMatrix& m) {
    std::vector<MpMatrix> blocks;
    for (auto b : keep) blocks.push_back(residual_part(f, b, m.block(b)));
    return BlockMatrix(std::move(blocks));
  };
  std::vector<BlockMatrix> a;
  for (const auto& ak : prob.a) a.push_back(reduce(ak));
  return sdp::make_problem(dims, reduce(prob.a0), std::move(a), prob.b);
}

SdpProblem restrict_to_face(const SdpProblem& prob, const Face& f, const MpScalar& rank_tol) {
  SdpProblem red = restrict_to_face(prob, f);
  const std::size_t m = red.m();
  if (m == 0) return red;
  // Gram matrix of the constraints: its eigenvalues are the squared singular
  // values of the constraint matrix.
  MpMatrix gram(m, m);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = 0; l <= k; ++l) gram(k, l) = gram(l, k) = sdp::dot(red.a[k], red.a[l]);
  }
  const auto e = mpla::sym_eig(gram);
  MpScalar top;
  for (const auto& l : e.eigenvalues) top = max(top, l);
  const MpScalar cut = rank_tol * rank_tol * top;
  MpMatrix proj(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    if (e.eigenvalues[j] <= cut) continue;
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t l = 0; l < m; ++l) {
        proj(k, l).add_product(e.eigenvectors(k, j), e.eigenvectors(l, j));
      }
    }
  }
  std::vector<BlockMatrix> a;
  MpVector b(m);
  for (std::size_t k = 0; k < m; ++k) {
    BlockMatrix ak = BlockMatrix::zeros(red.block_dims);
    for (std::size_t l = 0; l < m; ++l) {
      ak.add_scaled(proj(k, l), red.a[l]);
      b[k].add_product(proj(k, l), red.b[l]);
    }
    a.push_back(ak.symmetrized());
  }
  return sdp::make_problem(red.block_dims, red.a0, std::move(a), std::move(b));
}

DiscriminantOptions DiscriminantOptions::defaults(int precision) {
  if (precision == 0) precision = mpla::default_precision();
  mpla::PrecisionGuard guard(precision);
  DiscriminantOptions o;
  o.solver.precision = precision;
  // Faces inherit the auxiliary solution's error, roughly the square root of
  // its tolerance on singular instances, so solve it tightly with SDPA's
  // stock step and centering parameters.
  o.solver.set_tolerance(MpScalar::pow2(-(precision / 2)));
  o.solver.gammaStar = MpScalar::parse("0.9");
  o.solver.betaStar = MpScalar::parse("0.1");
  o.solver.betaBar = MpScalar::parse("0.2");
  o.tol_cert = MpScalar::pow2(-(precision / 8));
  o.tol_zero = MpScalar::pow2(-(precision / 16));
  return o;
}

DiscriminantResult solve_discriminant(const SdpProblem& prob, const Face& f,
                                      const DiscriminantOptions& opt) {
  prob.validate();
  if (prob.block_dims != f.dims()) throw ShapeMismatch("solve_discriminant: block structure differs");
  mpla::PrecisionGuard guard(opt.solver.precision);
  DiscriminantResult res;
  const std::size_t m = prob.m();
  if (m == 0 || f.total_residual() == 0) {
    res.log = "nothing to reduce";
    return res;
  }

  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < f.num_blocks(); ++b) {
    if (f.r[b] > 0) active.push_back(b);
  }
  // mk[k][i]: residual part of A_k on active block i.
  std::vector<std::vector<MpMatrix>> mk(m);
  std::size_t width = 0;
  for (auto b : active) width += f.r[b] * f.r[b];
  MpMatrix s(m, width);
  MpMatrix s_ext(m, width + 1);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t col = 0;
    for (auto b : active) {
      mk[k].push_back(residual_part(f, b, prob.a[k].block(b)));
      for (const auto& v : mk[k].back().entries()) {
        s(k, col) = v;
        s_ext(k, col++) = v;
      }
    }
    s_ext(k, width) = prob.b[k];
  }

  // b outside the range of X -> (A_k . X)_k on span F rules out every X in F.
  {
    const MpMatrix sp = mpla::pseudoinverse(s, opt.tol_cert);
    const MpVector fit = s * (sp * prob.b);
    MpVector y(m);
    for (std::size_t k = 0; k < m; ++k) y[k] = prob.b[k] - fit[k];
    if (inf_norm(y) > opt.tol_cert * max(MpScalar(1), inf_norm(prob.b))) {
      res.outcome = DiscriminantOutcome::Farkas;
      res.certificate = ReducingCertificate{y, BlockMatrix::zeros(prob.block_dims),
                                            combination(prob, y)};
      res.log = "constraints inconsistent on the face";
      return res;
    }
  }

  // Directions of y that change neither W nor b^T y are dropped: left free,
  // the interior-point iterates drift along them and magnify the rounding
  // left in Q.
  const mpla::Svd sv = mpla::svd(s_ext);
  std::size_t rank = 0;
  if (!sv.sigma.empty() && !sv.sigma.front().is_zero()) {
    const MpScalar cut = opt.tol_cert * sv.sigma.front();
    while (rank < sv.sigma.size() && sv.sigma[rank] > cut) ++rank;
  }
  if (rank == 0) {
    res.log = "A_k vanish on the face";
    return res;
  }
  const MpMatrix basis = sv.u.block(0, 0, m, rank);
  const std::size_t mr = rank;
  std::vector<std::vector<MpMatrix>> mr_k(mr);
  MpVector br(mr);
  for (std::size_t j = 0; j < mr; ++j) {
    for (std::size_t i = 0; i < active.size(); ++i) {
      MpMatrix w(f.r[active[i]], f.r[active[i]]);
      for (std::size_t k = 0; k < m; ++k) w.add_scaled(basis(k, j), mk[k][i]);
      mr_k[j].push_back(w.symmetrized());
    }
    for (std::size_t k = 0; k < m; ++k) br[j].add_product(basis(k, j), prob.b[k]);
  }

  // W(y) = -sum y_j M_j; trace normalization c^T y = 1 with c_j = -tr M_j.
  MpVector c(mr);
  for (std::size_t j = 0; j < mr; ++j) {
    for (const auto& blk : mr_k[j]) c[j] -= blk.trace();
  }
  const MpScalar cc = mpla::dot(c, c);
  if (!(cc > opt.tol_cert * opt.tol_cert)) {
    res.log = "trace map vanishes on the face";
    return res;
  }
  MpVector y0(mr);
  for (std::size_t j = 0; j < mr; ++j) y0[j] = c[j] / cc;
  MpMatrix nb(mr, 0);
  if (mr > 1) {
    MpMatrix crow(1, mr);
    for (std::size_t j = 0; j < mr; ++j) crow(0, j) = c[j];
    nb = mpla::null_space(crow, mpla::default_rank_tol());
    if (opt.seed != 0 && nb.cols() > 1) nb = nb * random_orthogonal(nb.cols(), opt.seed);
  }
  const std::size_t nz = nb.cols();

  bool b_zero = true;
  for (const auto& v : prob.b) b_zero = b_zero && v.is_zero();

  // Auxiliary (P): sup -tau  s.t.  W(y0 + N z) + tau I >= 0, b^T y + tau >= 0.
  std::vector<std::size_t> dims;
  for (auto b : active) dims.push_back(f.r[b]);
  if (!b_zero) dims.push_back(1);
  auto lin_block = [&](const MpVector& coef, bool negate) {
    std::vector<MpMatrix> blocks;
    for (std::size_t i = 0; i < active.size(); ++i) {
      MpMatrix w(f.r[active[i]], f.r[active[i]]);
      for (std::size_t j = 0; j < mr; ++j) w.add_scaled(negate ? -coef[j] : coef[j], mr_k[j][i]);
      blocks.push_back(w.symmetrized());
    }
    if (!b_zero) {
      MpScalar bt;
      for (std::size_t j = 0; j < mr; ++j) bt.add_product(br[j], coef[j]);
      blocks.push_back(MpMatrix{{negate ? bt : -bt}});
    }
    return BlockMatrix(std::move(blocks));
  };
  const BlockMatrix a0 = lin_block(y0, true);
  std::vector<BlockMatrix> a;
  for (std::size_t j = 0; j < nz; ++j) a.push_back(lin_block(nb.column_vector(j), false));
  a.push_back(-BlockMatrix::identity(dims));
  MpVector bb(nz + 1);
  bb[nz] = -1;
  const SdpProblem aux = sdp::make_problem(dims, a0, std::move(a), std::move(bb));

  const ipm::SolveReport rep = ipm::solve(aux, opt.solver);
  if (rep.status == ipm::Status::NumericalBreakdown ||
      rep.status == ipm::Status::DualInfeasibleDetected) {
    throw SolverFailure("auxiliary SDP: " + ipm::to_string(rep.status) + " (" + rep.message + ")");
  }
  res.log = "auxiliary SDP " + ipm::to_string(rep.status) + " after " +
            std::to_string(rep.iterations) + " iterations";

  MpVector yr = y0;
  for (std::size_t j = 0; j < nz; ++j) {
    for (std::size_t i = 0; i < mr; ++i) yr[i].add_product(nb(i, j), rep.solution.y[j]);
  }
  const MpVector y = basis * yr;
  res.tau = rep.solution.y[nz];

  MpScalar neg;
  std::vector<mpla::SymEig> eigs;
  for (std::size_t i = 0; i < active.size(); ++i) {
    MpMatrix w(f.r[active[i]], f.r[active[i]]);
    for (std::size_t k = 0; k < m; ++k) w.add_scaled(-y[k], mk[k][i]);
    eigs.push_back(mpla::sym_eig(w.symmetrized()));
    neg = max(neg, -eigs.back().eigenvalues.back());
  }
  MpScalar bty;
  for (std::size_t k = 0; k < m; ++k) bty.add_product(prob.b[k], y[k]);

  const MpScalar yscale = max(MpScalar(1), inf_norm(y));
  if (neg > opt.tol_cert) {
    res.log += "; W has eigenvalue -" + neg.to_string(6) + ", no certificate";
    return res;
  }
  if (bty < -opt.tol_cert * yscale) {
    res.log += "; b^T y = " + bty.to_string(6) + " < 0, no certificate";
    return res;
  }
  BlockMatrix u = BlockMatrix::zeros(prob.block_dims);
  for (std::size_t i = 0; i < active.size(); ++i) {
    const std::size_t b = active[i];
    const MpMatrix p = f.residual_basis(b);
    u.block(b) = (p * psd_part(eigs[i]) * p.transposed()).symmetrized();
  }
  const BlockMatrix v = combination(prob, y) - u;
  res.certificate = ReducingCertificate{y, std::move(u), v};
  if (bty > opt.tol_cert * yscale) {
    res.outcome = DiscriminantOutcome::Farkas;
    res.log += "; b^T y = " + bty.to_string(6) + " > 0";
  } else {
    res.outcome = DiscriminantOutcome::Certificate;
  }
  return res;
}

bool verify_certificate(const SdpProblem& prob, const Face& f, const ReducingCertificate& cert,
                        const MpScalar& tol, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (cert.y.size() != prob.m()) return fail("y has the wrong length");
  if (cert.u.dims() != prob.block_dims || cert.v.dims() != prob.block_dims ||
      f.dims() != prob.block_dims) {
    return fail("block structure differs");
  }
  MpScalar amax;
  for (const auto& ak : prob.a) amax = max(amax, ak.max_abs());
  const MpScalar scale = max(MpScalar(1), inf_norm(cert.y) * max(amax, inf_norm(prob.b)));
  const MpScalar bound = tol * scale;

  MpScalar bty;
  for (std::size_t k = 0; k < prob.m(); ++k) bty.add_product(prob.b[k], cert.y[k]);
  if (abs(bty) > bound) return fail("b^T y = " + bty.to_string(6));

  const BlockMatrix lhs = combination(prob, cert.y);
  const MpScalar miss = (lhs - cert.u - cert.v).max_abs();
  if (miss > bound) return fail("-sum y_k A_k - U - V = " + miss.to_string(6));

  if (!cert.u.is_symmetric() || !cert.v.is_symmetric()) return fail("U or V not symmetric");
  for (const auto& blk : cert.u.blocks()) {
    if (blk.rows() == 0) continue;
    const MpScalar lo = mpla::min_eigenvalue(blk);
    if (lo < -bound) return fail("U has eigenvalue " + lo.to_string(6));
  }
  const MpScalar vface = face_part_norm(f, cert.v);
  if (vface > bound) return fail("V is not in F^perp: " + vface.to_string(6));
  const MpScalar wface = face_part_norm(f, cert.u + cert.v);
  if (!(wface > bound)) return fail("U + V lies in F^perp");
  return true;
}

FacialReductionResult facial_reduction(const SdpProblem& prob, const DiscriminantOptions& opt) {
  prob.validate();
  FacialReductionResult res;
  res.faces.push_back(Face::whole(prob.block_dims));
  for (;;) {
    const Face& f = res.faces.back();
    DiscriminantResult d;
    try {
      d = solve_discriminant(prob, f, opt);
    } catch (const SolverFailure& e) {
      throw SolverFailure(std::string(e.what()) + " at step " +
                          std::to_string(res.certificates.size() + 1));
    }
    if (d.outcome == DiscriminantOutcome::NoneFound) {
      res.status = ReductionStatus::MinimalFaceFound;
      res.message = d.log;
      break;
    }
    if (d.outcome == DiscriminantOutcome::Farkas) {
      res.status = ReductionStatus::InfeasibleDetected;
      res.message = d.log;
      break;
    }
    Face next = intersect_face(f, d.certificate->u, opt.tol_zero);
    if (next.total_residual() >= f.total_residual()) {
      throw SolverFailure("certificate at step " + std::to_string(res.certificates.size() + 1) +
                          " does not shrink the face");
    }
    res.certificates.push_back(std::move(*d.certificate));
    res.faces.push_back(std::move(next));
  }
  res.degree = res.certificates.size();
  return res;
}

std::size_t face_rank(const SdpProblem& prob, const Face& f, const MpScalar& tol) {
  std::vector<MpMatrix> rows;
  for (const auto& ak : prob.a) {
    MpVector v;
    for (const auto& p : face_part(f, ak)) v.insert(v.end(), p.entries().begin(), p.entries().end());
    const std::size_t len = v.size();
    rows.emplace_back(1, len, std::move(v));
  }
  if (rows.empty() || rows.front().cols() == 0) return 0;
  return mpla::numeric_rank(rows, tol);
}

std::vector<bool> rank_condition(const PerturbedFamily& fam, const Face& f_min,
                                 const std::vector<MpScalar>& t_grid, const MpScalar& tol) {
  const std::size_t base = face_rank(fam.base, f_min, tol);
  std::vector<bool> out;
  for (const auto& t : t_grid) out.push_back(face_rank(sdp::apply(fam, t), f_min, tol) == base);
  return out;
}

FaceRelation compare_faces(const Face& f, const Face& g, const MpScalar& tol) {
  if (f.dims() != g.dims()) throw ShapeMismatch("compare_faces: block structure differs");
  // Range of A's basis inside range of B's: A - B B^T A vanishes.
  auto inside = [&](const Face& x, const Face& y, std::size_t b) {
    if (x.r[b] == 0) return true;
    if (x.r[b] > y.r[b]) return false;
    const MpMatrix px = x.residual_basis(b);
    if (y.r[b] == 0) return false;
    const MpMatrix py = y.residual_basis(b);
    const MpMatrix miss = px - py * mpla::transpose_times(py, px);
    return miss.max_abs() <= tol;
  };
  bool f_in_g = true, g_in_f = true;
  for (std::size_t b = 0; b < f.num_blocks(); ++b) {
    f_in_g = f_in_g && inside(f, g, b);
    g_in_f = g_in_f && inside(g, f, b);
  }
  if (f_in_g && g_in_f) return FaceRelation::Equal;
  if (f_in_g) return FaceRelation::FSubsetG;
  if (g_in_f) return FaceRelation::GSubsetF;
  return FaceRelation::Incomparable;
}

InvarianceReport invariance_by_support(const FacialReductionResult& seq,
                                       const PerturbedFamily& fam, const MpScalar& tol) {
  InvarianceReport rep;
  rep.rank_ok = probe_rank(seq, fam);
  if (b_moves(fam)) {
    rep.reason = "b is perturbed";
    return rep;
  }
  for (auto k : perturbed_indices(fam)) {
    for (std::size_t i = 0; i < seq.certificates.size(); ++i) {
      const MpVector& y = seq.certificates[i].y;
      if (!negligible(y.at(k - 1), y, tol)) {
        rep.reason = "E_" + std::to_string(k) + " is perturbed but y^" + std::to_string(i + 1) +
                     "_" + std::to_string(k) + " = " + y[k - 1].to_string(6);
        return rep;
      }
    }
  }
  rep.structural = true;
  rep.verdict = Verdict::Holds;
  rep.reason = "perturbed indices avoid the certificate support";
  return rep;
}

InvarianceReport invariance_by_orthogonality(const FacialReductionResult& seq,
                                             const PerturbedFamily& fam, const MpScalar& tol) {
  InvarianceReport rep = invariance_by_support(seq, fam, tol);
  if (!rep.structural) return rep;
  rep.structural = false;
  rep.verdict = Verdict::Fails;
  for (auto k : perturbed_indices(fam)) {
    const BlockMatrix d = fam.delta(k);
    const MpScalar part = face_part_norm(seq.minimal_face(), d);
    if (part > tol * max(MpScalar(1), d.max_abs())) {
      rep.reason = "E_" + std::to_string(k) + " is not in F_min^perp";
      return rep;
    }
  }
  rep.structural = true;
  rep.rank_ok = true;  // implied
  rep.verdict = Verdict::Holds;
  rep.reason = "E_k vanish off K-hat and lie in F_min^perp on it";
  return rep;
}

InvarianceReport invariance_by_eigenspan(const FacialReductionResult& seq,
                                         const PerturbedFamily& fam, const MpScalar& tol) {
  InvarianceReport rep;
  rep.rank_ok = probe_rank(seq, fam);
  if (b_moves(fam)) {
    rep.reason = "b is perturbed";
    return rep;
  }
  const auto idx = perturbed_indices(fam);
  for (std::size_t i = 0; i < seq.certificates.size(); ++i) {
    const ReducingCertificate& cert = seq.certificates[i];
    const Face& prev = seq.faces[i];
    BlockMatrix s = BlockMatrix::zeros(fam.base.block_dims);
    for (auto k : idx) s.add_scaled(cert.y[k - 1], fam.delta(k));
    const MpScalar bound = tol * max(MpScalar(1), s.max_abs());
    for (std::size_t b = 0; b < prev.num_blocks(); ++b) {
      if (prev.r[b] == 0) continue;
      const MpMatrix target = residual_part(prev, b, s.block(b));
      // Positive eigenvectors of U^i in residual coordinates.
      const auto e = mpla::sym_eig(cert.u.block(b).symmetrized());
      const MpScalar cut = tol * max(MpScalar(1), cert.u.max_abs());
      std::vector<MpVector> ps;
      const MpMatrix basis = prev.residual_basis(b);
      for (std::size_t l = 0; l < e.eigenvalues.size(); ++l) {
        if (e.eigenvalues[l] > cut) ps.push_back(mpla::transpose_times(basis, e.eigenvectors.block(0, l, e.eigenvectors.rows(), 1)).column_vector(0));
      }
      // Least squares over span{p p^T}: Gram entries (p_l . p_j)^2.
      MpMatrix fit(target.rows(), target.cols());
      if (!ps.empty()) {
        const std::size_t np = ps.size();
        MpMatrix gram(np, np);
        MpVector rhs(np);
        for (std::size_t l = 0; l < np; ++l) {
          for (std::size_t j = 0; j < np; ++j) {
            const MpScalar d = mpla::dot(ps[l], ps[j]);
            gram(l, j) = d * d;
          }
          rhs[l] = mpla::dot(ps[l], target * ps[l]);
        }
        const MpVector alpha = mpla::pseudoinverse(gram, mpla::default_rank_tol()) * rhs;
        for (std::size_t l = 0; l < np; ++l) {
          const MpMatrix col = MpMatrix::column(ps[l]);
          fit.add_scaled(alpha[l], col * col.transposed());
        }
      }
      const MpScalar miss = mpla::max_abs_diff(target, fit);
      if (miss > bound) {
        rep.reason = "step " + std::to_string(i + 1) + ", block " + std::to_string(b + 1) +
                     ": sum y_k E_k leaves L_i + F^perp by " + miss.to_string(6);
        return rep;
      }
    }
  }
  rep.structural = true;
  if (rep.rank_ok) {
    rep.verdict = Verdict::Holds;
    rep.reason = "sum y^i_k E_k in L_i + F_{i-1}^perp for every i";
  } else {
    rep.reason = "inclusion holds but the rank condition fails";
  }
  return rep;
}

InvarianceReport invariance_by_proportionality(const FacialReductionResult& seq,
                                               const PerturbedFamily& fam,
                                               const MpScalar& tol) {
  InvarianceReport rep;
  rep.rank_ok = probe_rank(seq, fam);
  if (b_moves(fam)) {
    rep.reason = "b is perturbed";
    return rep;
  }
  const std::size_t m = fam.base.m();
  std::vector<MpMatrix> rows;
  std::size_t len = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    MpVector v = sdp::vec(fam.delta(k));
    len = v.size();
    rows.emplace_back(1, len, std::move(v));
  }
  const std::size_t rank = mpla::numeric_rank(rows, mpla::default_rank_tol());
  if (rank > 1) {
    rep.verdict = Verdict::NotFactorable;
    rep.reason = "E_k span a space of dimension " + std::to_string(rank);
    return rep;
  }
  MpVector w(m);
  if (rank == 1) {
    std::size_t lead = 0;
    MpScalar best;
    for (std::size_t k = 0; k < m; ++k) {
      const MpScalar nrm = rows[k].frobenius_norm();
      if (nrm > best) {
        best = nrm;
        lead = k;
      }
    }
    for (std::size_t k = 0; k < m; ++k) w[k] = mpla::frobenius_dot(rows[k], rows[lead]) / best;
  }
  for (std::size_t i = 0; i < seq.certificates.size(); ++i) {
    const MpVector& y = seq.certificates[i].y;
    const MpScalar d = mpla::dot(w, y);
    if (abs(d) > tol * max(MpScalar(1), mpla::norm2(w) * mpla::norm2(y))) {
      rep.reason = "w is not orthogonal to y^" + std::to_string(i + 1);
      return rep;
    }
  }
  rep.structural = true;
  if (rep.rank_ok) {
    rep.verdict = Verdict::Holds;
    rep.reason = "E_k = w_k E with w orthogonal to every y^i";
  } else {
    rep.reason = "factorable with w orthogonal to every y^i, but the rank condition fails";
  }
  return rep;
}

nlohmann::json to_json(const Face& f) {
  nlohmann::json blocks = nlohmann::json::array();
  for (std::size_t b = 0; b < f.num_blocks(); ++b) {
    blocks.push_back({{"n", f.q[b].rows()}, {"r", f.r[b]}, {"q", matrix_json(f.q[b])}});
  }
  return {{"blocks", blocks}};
}

Face face_from_json(const nlohmann::json& j) {
  Face f;
  for (const auto& blk : j.at("blocks")) {
    MpMatrix q = matrix_from_json(blk.at("q"));
    const auto n = blk.at("n").get<std::size_t>();
    const auto r = blk.at("r").get<std::size_t>();
    if (q.rows() != n || q.cols() != n || r > n) throw ShapeMismatch("malformed face block");
    f.q.push_back(std::move(q));
    f.r.push_back(r);
  }
  return f;
}

nlohmann::json to_json(const ReducingCertificate& c) {
  nlohmann::json y = nlohmann::json::array();
  for (const auto& v : c.y) y.push_back(v.to_string());
  return {{"y", y}, {"U", block_json(c.u)}, {"V", block_json(c.v)}};
}

ReducingCertificate certificate_from_json(const nlohmann::json& j) {
  ReducingCertificate c;
  for (const auto& v : j.at("y")) c.y.push_back(MpScalar::parse(v.get<std::string>()));
  c.u = block_from_json(j.at("U"));
  c.v = block_from_json(j.at("V"));
  return c;
}

nlohmann::json to_json(const FacialReductionResult& r) {
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : r.faces) faces.push_back(to_json(f));
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : r.certificates) certs.push_back(to_json(c));
  nlohmann::json dims = nlohmann::json::array();
  for (auto v : r.minimal_face().r) dims.push_back(v);
  return {{"status", to_string(r.status)}, {"degree", r.degree},  {"residual_dims", dims},
          {"faces", faces},                {"certificates", certs}, {"message", r.message}};
}

FacialReductionResult reduction_from_json(const nlohmann::json& j) {
  FacialReductionResult r;
  for (const auto& f : j.at("faces")) r.faces.push_back(face_from_json(f));
  for (const auto& c : j.at("certificates")) r.certificates.push_back(certificate_from_json(c));
  if (r.faces.empty() || r.faces.size() != r.certificates.size() + 1) {
    throw ShapeMismatch("reduction JSON needs one more face than certificates");
  }
  r.degree = r.certificates.size();
  r.status = j.value("status", std::string("MinimalFaceFound")) == "InfeasibleDetected"
                 ? ReductionStatus::InfeasibleDetected
                 : ReductionStatus::MinimalFaceFound;
  r.message = j.value("message", std::string());
  return r;
}

}  // namespace sdpsens::facial
