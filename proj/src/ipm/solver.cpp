#include "sdpsens/ipm/solver.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "sdpsens/error.hpp"
#include "sdpsens/mpla/linalg.hpp"

namespace sdpsens::ipm {

using mpla::MpMatrix;

namespace {

// Largest alpha with M + alpha * D still positive semidefinite, given the
// Cholesky factors of M per block. Returns false when unbounded.
bool max_step(const std::vector<MpMatrix>& chol, const BlockMatrix& d, MpScalar& alpha) {
  MpScalar worst;  // most negative eigenvalue of L^-1 D L^-T
  for (std::size_t b = 0; b < chol.size(); ++b) {
    const MpMatrix& l = chol[b];
    const std::size_t n = l.rows();
    if (n == 0) continue;
    // W = L^-1 D L^-T via two triangular solves.
    MpMatrix w = d.block(b);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) w(i, c).sub_product(l(i, k), w(k, c));
        w(i, c) /= l(i, i);
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) w(r, i).sub_product(l(i, k), w(r, k));
        w(r, i) /= l(i, i);
      }
    }
    // The step only needs a few digits, so the eigenvalue is taken in double
    // unless cancellation makes that estimate meaningless.
    Eigen::MatrixXd wd(n, n);
    double scale = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        wd(i, j) = ((w(i, j) + w(j, i)) / 2).to_double();
        scale = std::max(scale, std::abs(wd(i, j)));
      }
    }
    const double lo_d = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(wd, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
    MpScalar lo;
    if (std::isfinite(lo_d) && std::abs(lo_d) > 1e-10 * scale) {
      lo = MpScalar(lo_d);
    } else {
      lo = mpla::min_eigenvalue(w.symmetrized());
    }
    if (lo < worst) worst = lo;
  }
  if (!(worst < 0)) return false;
  alpha = -1 / worst;
  return true;
}

std::vector<MpMatrix> block_cholesky(const BlockMatrix& m, bool& ok) {
  std::vector<MpMatrix> out;
  ok = true;
  for (const auto& b : m.blocks()) {
    auto r = mpla::try_cholesky(b);
    if (std::holds_alternative<NotPositiveDefinite>(r)) {
      ok = false;
      return {};
    }
    out.push_back(std::get<MpMatrix>(std::move(r)));
  }
  return out;
}

BlockMatrix block_inverse(const std::vector<MpMatrix>& chol) {
  std::vector<MpMatrix> out;
  for (const auto& l : chol) {
    const std::size_t n = l.rows();
    MpMatrix inv(n, n);
    MpVector e(n);
    for (std::size_t j = 0; j < n; ++j) {
      for (auto& v : e) v = 0;
      e[j] = 1;
      const MpVector col = mpla::cholesky_solve(l, e);
      for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
    }
    out.push_back(inv.symmetrized());
  }
  return BlockMatrix(std::move(out));
}

// Constraint data after merging linearly dependent A_k. y = basis * y_work.
struct WorkingProblem {
  SdpProblem prob;
  MpMatrix basis;  // m x r with orthonormal columns, empty when untouched
  bool reduced = false;
};

WorkingProblem merge_dependent(const SdpProblem& prob, bool& consistent) {
  consistent = true;
  WorkingProblem w{prob, MpMatrix(), false};
  if (prob.m() == 0) return w;
  const MpMatrix s = prob.constraint_matrix();
  const mpla::Svd d = mpla::svd(s);
  const MpScalar tol = mpla::default_rank_tol();
  std::size_t rank = 0;
  if (!d.sigma.front().is_zero()) {
    const MpScalar cut = tol * d.sigma.front();
    while (rank < d.sigma.size() && d.sigma[rank] > cut) ++rank;
  }
  if (rank == prob.m()) return w;
  // d.u is m x min(m, N); the leading `rank` columns span the range of S.
  MpMatrix basis = d.u.block(0, 0, prob.m(), rank);
  MpVector b_work(rank);
  for (std::size_t j = 0; j < rank; ++j) {
    for (std::size_t k = 0; k < prob.m(); ++k) b_work[j].add_product(basis(k, j), prob.b[k]);
  }
  MpScalar miss;
  MpScalar bnorm;
  for (std::size_t k = 0; k < prob.m(); ++k) {
    MpScalar proj;
    for (std::size_t j = 0; j < rank; ++j) proj.add_product(basis(k, j), b_work[j]);
    miss = max(miss, abs(prob.b[k] - proj));
    bnorm = max(bnorm, abs(prob.b[k]));
  }
  if (miss > tol * max(MpScalar(1), bnorm)) consistent = false;
  std::vector<BlockMatrix> a_work;
  for (std::size_t j = 0; j < rank; ++j) {
    BlockMatrix aj = BlockMatrix::zeros(prob.block_dims);
    for (std::size_t k = 0; k < prob.m(); ++k) aj.add_scaled(basis(k, j), prob.a[k]);
    a_work.push_back(aj.symmetrized());
  }
  w.prob.a = std::move(a_work);
  w.prob.b = std::move(b_work);
  w.basis = std::move(basis);
  w.reduced = true;
  return w;
}

MpScalar relative_gap(const MpScalar& p, const MpScalar& d) {
  const MpScalar scale = max(MpScalar(1), (abs(p) + abs(d)) / 2);
  return abs(p - d) / scale;
}

}  // namespace

void SolverConfig::validate() const {
  if (maxIteration <= 0) throw Error("maxIteration must be positive");
  if (!(epsilonStar > 0) || !(epsilonDash > 0)) throw Error("tolerances must be positive");
  if (!(lambdaStar > 0)) throw Error("lambdaStar must be positive");
  if (!(gammaStar > 0 && gammaStar < 1)) throw Error("gammaStar must lie in (0, 1)");
  if (!(betaStar >= 0 && betaStar <= betaBar && betaBar < 1)) {
    throw Error("require 0 <= betaStar <= betaBar < 1");
  }
  if (!(lowerBound < upperBound)) throw Error("lowerBound must be below upperBound");
  if (precision < 64) throw Error("precision must be at least 64 bits");
}

void SolverConfig::set_tolerance(const MpScalar& delta) {
  epsilonStar = delta;
  epsilonDash = delta;
}

SolverConfig parse_params(std::istream& in) {
  SolverConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cut = line.find_first_of("#*");
    if (cut != std::string::npos) line.erase(cut);
    for (char& c : line) {
      if (c == '=' || c == ':' || c == '\t') c = ' ';
    }
    std::istringstream ls(line);
    std::string first, second;
    if (!(ls >> first)) continue;
    if (!(ls >> second)) throw ParseError(lineno, "expected a key and a value");
    // Accept both "key value" and SDPA's "value key" order.
    std::string key = first, value = second;
    const bool first_is_number =
        std::isdigit(static_cast<unsigned char>(first[0])) || first[0] == '-' || first[0] == '+' ||
        first[0] == '.';
    if (first_is_number) std::swap(key, value);
    try {
      if (key == "maxIteration") {
        cfg.maxIteration = std::stoi(value);
      } else if (key == "precision") {
        cfg.precision = std::stoi(value);
      } else {
        MpScalar v = MpScalar::parse(value);
        if (key == "epsilonStar") cfg.epsilonStar = v;
        else if (key == "epsilonDash") cfg.epsilonDash = v;
        else if (key == "lambdaStar") cfg.lambdaStar = v;
        else if (key == "omegaStar") cfg.omegaStar = v;
        else if (key == "lowerBound") cfg.lowerBound = v;
        else if (key == "upperBound") cfg.upperBound = v;
        else if (key == "betaStar") cfg.betaStar = v;
        else if (key == "betaBar") cfg.betaBar = v;
        else if (key == "gammaStar") cfg.gammaStar = v;
        else throw UnknownParam("unknown parameter '" + key + "'");
      }
    } catch (const UnknownParam&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(lineno, std::string("bad value for ") + key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

SolverConfig read_param_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_params(in);
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::PrimalInfeasibleDetected: return "PrimalInfeasibleDetected";
    case Status::DualInfeasibleDetected: return "DualInfeasibleDetected";
    case Status::Unbounded: return "Unbounded";
    case Status::IterationCap: return "IterationCap";
    case Status::NumericalBreakdown: return "NumericalBreakdown";
  }
  return "?";
}

SolveReport solve(const SdpProblem& input, const SolverConfig& user_cfg) {
  user_cfg.validate();
  mpla::PrecisionGuard guard(user_cfg.precision);
  // Mixed-precision arithmetic widens, so the parameters must not carry more
  // bits than the run.
  SolverConfig cfg = user_cfg;
  for (MpScalar* v : {&cfg.epsilonStar, &cfg.epsilonDash, &cfg.lambdaStar, &cfg.omegaStar, &cfg.lowerBound,
                      &cfg.upperBound, &cfg.betaStar, &cfg.betaBar, &cfg.gammaStar}) {
    v->set_precision(cfg.precision);
  }
  input.validate();
  SdpProblem prob = input;
  auto fix_precision = [&](BlockMatrix& m) {
    for (std::size_t i = 0; i < m.num_blocks(); ++i) m.block(i).set_precision(cfg.precision);
  };
  fix_precision(prob.a0);
  for (auto& ak : prob.a) fix_precision(ak);
  for (auto& v : prob.b) v.set_precision(cfg.precision);

  SolveReport report;
  const auto dims = prob.block_dims;
  const std::size_t n_total = prob.a0.total_dim();

  bool consistent = true;
  WorkingProblem work = merge_dependent(prob, consistent);
  const SdpProblem& p = work.prob;
  const std::size_t m = p.m();

  BlockMatrix x = cfg.lambdaStar * BlockMatrix::identity(dims);
  BlockMatrix z = x;
  MpVector y(m);

  auto finish = [&](Status status, std::string message) {
    report.status = status;
    report.message = std::move(message);
    MpVector y_orig(prob.m());
    if (work.reduced) {
      for (std::size_t k = 0; k < prob.m(); ++k) {
        for (std::size_t j = 0; j < m; ++j) y_orig[k].add_product(work.basis(k, j), y[j]);
      }
    } else {
      y_orig = y;
    }
    SolutionPair& s = report.solution;
    s.y = std::move(y_orig);
    s.x = x;
    s.z = z;
    s.primal_obj = MpScalar();
    for (std::size_t k = 0; k < prob.m(); ++k) s.primal_obj.add_product(prob.b[k], s.y[k]);
    s.dual_obj = sdp::dot(prob.a0, x);
    s.duality_gap = s.dual_obj - s.primal_obj;
    const auto r = sdp::residuals(prob, s);
    report.primal_residual = r.primal;
    report.dual_residual = r.dual;
    report.relative_gap = relative_gap(s.primal_obj, s.dual_obj);
    return report;
  };

  if (!consistent) {
    return finish(Status::DualInfeasibleDetected,
                  "equality constraints of (D) are inconsistent");
  }

  const MpScalar tiny_step = MpScalar::pow2(-(cfg.precision / 2));
  int stalled = 0;
  for (int iter = 0;; ++iter) {
    report.iterations = iter;
    const BlockMatrix rp = p.slack(y) - z;
    MpVector rd(m);
    MpScalar dres;
    for (std::size_t k = 0; k < m; ++k) {
      rd[k] = p.b[k] - sdp::dot(p.a[k], x);
      dres = max(dres, abs(rd[k]));
    }
    const MpScalar pres = rp.max_abs();
    MpScalar pobj;
    for (std::size_t k = 0; k < m; ++k) pobj.add_product(p.b[k], y[k]);
    const MpScalar dobj = sdp::dot(p.a0, x);
    const MpScalar xz = sdp::dot(x, z);
    const MpScalar mu = xz / MpScalar(static_cast<long>(n_total));
    report.final_mu = mu;
    const bool p_feasible = pres <= cfg.epsilonStar;
    const bool d_feasible = dres <= cfg.epsilonStar;
    const MpScalar rgap = relative_gap(pobj, dobj);

    if (p_feasible && d_feasible && rgap <= cfg.epsilonDash) {
      return finish(Status::Optimal, "converged");
    }
    if (p_feasible && pobj > cfg.upperBound) {
      return finish(Status::Unbounded, "objective of (P) exceeded upperBound");
    }
    if (d_feasible && dobj < cfg.lowerBound) {
      return finish(Status::PrimalInfeasibleDetected, "objective of (D) fell below lowerBound");
    }
    if (iter >= cfg.maxIteration) return finish(Status::IterationCap, "maxIteration reached");

    bool ok = true;
    const auto lx = block_cholesky(x, ok);
    if (!ok) return finish(Status::NumericalBreakdown, "X lost positive definiteness");
    const auto lz = block_cholesky(z, ok);
    if (!ok) return finish(Status::NumericalBreakdown, "Z lost positive definiteness");
    const BlockMatrix zinv = block_inverse(lz);

    // Schur complement B_kj = A_k . (X A_j Z^-1).
    std::vector<BlockMatrix> g(m);
    for (std::size_t j = 0; j < m; ++j) g[j] = x * p.a[j] * zinv;
    MpMatrix schur(m, m);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = k; j < m; ++j) {
        schur(k, j) = (sdp::dot(p.a[k], g[j]) + sdp::dot(p.a[j], g[k])) / 2;
        schur(j, k) = schur(k, j);
      }
    }
    auto chol_b = mpla::try_cholesky(schur);
    if (std::holds_alternative<NotPositiveDefinite>(chol_b)) {
      return finish(Status::NumericalBreakdown, "Schur complement is not positive definite");
    }
    const MpMatrix lb = std::get<MpMatrix>(std::move(chol_b));

    const BlockMatrix x_rp_zinv = x * rp * zinv;
    MpVector base_rhs(m);
    MpVector ak_zinv(m);
    for (std::size_t k = 0; k < m; ++k) {
      ak_zinv[k] = sdp::dot(p.a[k], zinv);
      base_rhs[k] = p.b[k] + sdp::dot(p.a[k], x_rp_zinv);
    }

    // Direction for centering sigma, optionally with the second-order term.
    auto direction = [&](const MpScalar& sigma, const BlockMatrix* corr, MpVector& dy,
                         BlockMatrix& dx, BlockMatrix& dz) {
      const MpScalar smu = sigma * mu;
      MpVector rhs = base_rhs;
      for (std::size_t k = 0; k < m; ++k) {
        rhs[k].sub_product(smu, ak_zinv[k]);
        if (corr) rhs[k] += sdp::dot(p.a[k], *corr);
      }
      dy = m ? mpla::cholesky_solve(lb, rhs) : MpVector();
      dz = rp;
      for (std::size_t j = 0; j < m; ++j) dz.add_scaled(-dy[j], p.a[j]);
      BlockMatrix t = smu * zinv;
      t -= x;
      t -= x * dz * zinv;
      if (corr) t -= *corr;
      dx = t.symmetrized();
    };

    const bool feasible = p_feasible && d_feasible;
    MpVector dy;
    BlockMatrix dx, dz;
    direction(feasible ? MpScalar(0) : cfg.betaBar, nullptr, dy, dx, dz);
    MpScalar ap(1), ad(1);
    {
      MpScalar a;
      if (max_step(lx, dx, a)) ap = min(MpScalar(1), a);
      if (max_step(lz, dz, a)) ad = min(MpScalar(1), a);
    }
    BlockMatrix xa = x;
    xa.add_scaled(ap, dx);
    BlockMatrix za = z;
    za.add_scaled(ad, dz);
    MpScalar ratio = sdp::dot(xa, za) / xz;
    MpScalar sigma = ratio * ratio;
    const MpScalar& floor = feasible ? cfg.betaStar : cfg.betaBar;
    if (sigma < floor) sigma = floor;
    if (sigma > 1) sigma = 1;
    const BlockMatrix corr = dx * dz * zinv;
    direction(sigma, &corr, dy, dx, dz);

    MpScalar step_p(1), step_d(1);
    {
      MpScalar a;
      if (max_step(lx, dx, a)) step_p = min(MpScalar(1), cfg.gammaStar * a);
      if (max_step(lz, dz, a)) step_d = min(MpScalar(1), cfg.gammaStar * a);
    }
    report.residual_history.push_back({mu.to_double(), pres.to_double(), dres.to_double(),
                                       pobj.to_double(), dobj.to_double(), step_p.to_double(),
                                       step_d.to_double()});
    if (step_p < tiny_step && step_d < tiny_step) {
      if (++stalled >= 5) return finish(Status::NumericalBreakdown, "step length collapsed");
    } else {
      stalled = 0;
    }
    x.add_scaled(step_p, dx);
    x = x.symmetrized();
    z.add_scaled(step_d, dz);
    z = z.symmetrized();
    for (std::size_t k = 0; k < m; ++k) y[k].add_product(step_d, dy[k]);
  }
}

BlockMatrix strictly_feasible_point(const SdpProblem& prob, const BlockMatrix& x0,
                                    const MpScalar& tol) {
  prob.validate();
  if (x0.dims() != prob.block_dims) throw ShapeMismatch("x0 has the wrong block structure");
  const MpMatrix s = prob.constraint_matrix();
  const MpMatrix sp = mpla::pseudoinverse(s, mpla::default_rank_tol());
  const MpVector v0 = sdp::vec(x0);
  const MpVector sv0 = s * v0;
  MpVector correction(prob.m());
  for (std::size_t k = 0; k < prob.m(); ++k) correction[k] = prob.b[k] - sv0[k];
  const MpVector delta = sp * correction;
  MpVector vt = v0;
  for (std::size_t i = 0; i < vt.size(); ++i) vt[i] += delta[i];

  const MpVector svt = s * vt;
  MpScalar miss;
  MpScalar bnorm(1);
  for (std::size_t k = 0; k < prob.m(); ++k) {
    miss = max(miss, abs(svt[k] - prob.b[k]));
    bnorm = max(bnorm, abs(prob.b[k]));
  }
  if (miss > tol * bnorm) {
    throw Infeasible("b is not in the range of the constraint map (residual " +
                         miss.to_string(6) + ")",
                     miss.to_double());
  }
  std::vector<MpMatrix> blocks;
  std::size_t off = 0;
  for (auto d : prob.block_dims) {
    blocks.push_back(mpla::unvec(std::span<const MpScalar>(vt).subspan(off, d * d), d, d));
    off += d * d;
  }
  return BlockMatrix(std::move(blocks)).symmetrized();
}

bool check_saddle_point(const SdpProblem& prob, const BlockMatrix& x_tilde,
                        const MpVector& y_tilde, const std::vector<SaddleProbe>& probes,
                        const MpScalar& tol) {
  const MpScalar center = sdp::lagrangian(prob, x_tilde, y_tilde);
  for (const auto& probe : probes) {
    if (sdp::lagrangian(prob, x_tilde, probe.y) > center + tol) return false;
    if (center > sdp::lagrangian(prob, probe.x, y_tilde) + tol) return false;
  }
  return true;
}

}  // namespace sdpsens::ipm
