#include "sdpsens/sensitivity/sensitivity.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>
#include <regex>
#include <thread>

#include "sdpsens/error.hpp"
#include "sdpsens/facial/fixtures.hpp"
#include "sdpsens/mpla/linalg.hpp"
#include "sdpsens/sdp/fixtures.hpp"

namespace sdpsens::sensitivity {

namespace {

const SweepRow* zero_row(const std::vector<SweepRow>& rows) {
  for (const auto& r : rows) {
    if (r.t.is_zero()) return &r;
  }
  return nullptr;
}

bool usable(const SweepRow& r) { return r.error.empty() && r.status == "Optimal"; }

std::string dims_string(const std::vector<std::size_t>& r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? ";" : "") + std::to_string(r[i]);
  return s;
}

}  // namespace

std::vector<MpScalar> symmetric_grid(const MpScalar& step, int kmax) {
  std::vector<MpScalar> g;
  for (int k = kmax; k >= 1; --k) g.push_back(-(MpScalar(k) * step));
  g.push_back(MpScalar(0));
  for (int k = 1; k <= kmax; ++k) g.push_back(MpScalar(k) * step);
  return g;
}

std::vector<MpScalar> parse_grid(const std::string& spec) {
  static const std::regex range(R"(^\s*(\+-|±)?k\*([^:]+):(\d+)\.\.(\d+)\s*$)");
  std::smatch m;
  if (std::regex_match(spec, m, range)) {
    const MpScalar step = MpScalar::parse(m[2].str());
    const int lo = std::stoi(m[3].str()), hi = std::stoi(m[4].str());
    if (lo < 0 || hi < lo) throw Error("grid: bad k range in '" + spec + "'");
    std::vector<MpScalar> g;
    const bool both = m[1].matched;
    for (int k = lo; k <= hi; ++k) {
      g.push_back(MpScalar(k) * step);
      if (both && k != 0) g.push_back(-(MpScalar(k) * step));
    }
    std::sort(g.begin(), g.end(), [](const MpScalar& a, const MpScalar& b) { return a < b; });
    return g;
  }
  std::vector<MpScalar> g;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const std::string item = spec.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item.find_first_not_of(" \t") == std::string::npos) throw Error("grid: empty entry in '" + spec + "'");
    g.push_back(MpScalar::parse(item.substr(item.find_first_not_of(" \t"))));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return g;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.family.validate();
  spec.solver.validate();
  mpla::PrecisionGuard guard(spec.solver.precision);
  std::vector<MpScalar> grid = spec.t_grid;
  if (std::none_of(grid.begin(), grid.end(), [](const MpScalar& t) { return t.is_zero(); })) {
    grid.push_back(MpScalar(0));
  }
  std::sort(grid.begin(), grid.end(), [](const MpScalar& a, const MpScalar& b) { return a < b; });

  facial::DiscriminantOptions fopt = spec.facial;
  fopt.seed = spec.seed;
  std::optional<facial::FacialReductionResult> base;
  std::string base_error;
  if (spec.run_facial) {
    try {
      base = facial::facial_reduction(spec.family.base, fopt);
    } catch (const Error& e) {
      base_error = std::string("base reduction: ") + e.what();
    }
  }

  std::vector<SweepRow> rows(grid.size());
  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.t = grid[i];
    try {
      const SdpProblem p = sdp::apply(spec.family, row.t);
      const ipm::SolveReport rep = ipm::solve(p, spec.solver);
      row.status = ipm::to_string(rep.status);
      row.iterations = rep.iterations;
      row.primal = rep.solution.primal_obj;
      row.dual = rep.solution.dual_obj;
      row.gap = rep.solution.duality_gap;
      row.feasibility = "unknown";
      if (!spec.run_facial) return;
      if (!base) {
        row.error = base_error;
        return;
      }
      const auto r = facial::facial_reduction(p, fopt);
      row.has_face = true;
      row.r_blocks = r.minimal_face().r;
      row.degree = r.degree;
      if (r.status == facial::ReductionStatus::InfeasibleDetected) {
        row.feasibility = "infeasible";
      } else {
        row.feasibility = r.degree == 0 ? "strict" : "nonstrict";
      }
      row.face_equals_base = facial::compare_faces(base->minimal_face(), r.minimal_face(),
                                                   fopt.tol_zero) == facial::FaceRelation::Equal;
      row.rank_ok = facial::rank_condition(spec.family, base->minimal_face(), {row.t},
                                           fopt.tol_cert)
                        .front();
    } catch (const Error& e) {
      row.error = e.what();
    }
  };

  unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, grid.size()));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    mpla::PrecisionGuard g(spec.solver.precision);
    for (std::size_t i = next++; i < grid.size(); i = next++) work(i);
  };
  if (workers <= 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& th : pool) th.join();
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "t,primal,dual,gap,degree,r_blocks,rank_ok,status\n";
  for (const auto& r : rows) {
    std::string status = r.error.empty() ? r.status : "error";
    out << r.t.to_string() << ',' << r.primal.to_string() << ',' << r.dual.to_string() << ','
        << r.gap.to_string() << ',' << (r.has_face ? std::to_string(r.degree) : "") << ','
        << dims_string(r.r_blocks) << ',' << (r.has_face ? (r.rank_ok ? "1" : "0") : "") << ','
        << status << '\n';
  }
}

void write_plot_data(std::ostream& out, const std::vector<SweepRow>& rows) {
  const SweepRow* z = zero_row(rows);
  out << "# t  primal(t)-primal(0)\n";
  for (const auto& r : rows) {
    if (!usable(r) || !z) continue;
    out << r.t.to_string(17) << ' ' << (r.primal - z->primal).to_string(17) << '\n';
  }
}

std::string to_string(ContinuityVerdict v) {
  return v == ContinuityVerdict::Continuous ? "Continuous" : "SuspectedJump";
}

ContinuityReport continuity_diagnostic(const std::vector<SweepRow>& rows, const MpScalar& jump_tol) {
  const SweepRow* z = zero_row(rows);
  if (!z || !usable(*z)) throw Error("continuity_diagnostic: no usable row at t = 0");
  std::vector<const SweepRow*> off;
  for (const auto& r : rows) {
    if (!r.t.is_zero() && usable(r)) off.push_back(&r);
  }
  std::sort(off.begin(), off.end(),
            [](const SweepRow* a, const SweepRow* b) { return abs(a->t) < abs(b->t); });
  ContinuityReport rep;
  if (off.empty()) return rep;
  const std::size_t decile = std::max<std::size_t>(1, (off.size() + 9) / 10);
  for (std::size_t i = 0; i < decile; ++i) {
    const MpScalar d = abs(off[i]->primal - z->primal);
    rep.decile_max_delta = max(rep.decile_max_delta, d);
    rep.modulus_estimate = max(rep.modulus_estimate, d / abs(off[i]->t));
  }
  // limsup |dv| as t -> 0, per side: intercept of the least squares line
  // |dv| ~ a + c |t| through the decile, or |dv| itself with one point.
  for (int side : {1, -1}) {
    std::vector<std::pair<MpScalar, MpScalar>> pts;
    for (std::size_t i = 0; i < decile; ++i) {
      if (off[i]->t.sign() == side) pts.emplace_back(abs(off[i]->t), abs(off[i]->primal - z->primal));
    }
    if (pts.empty()) continue;
    MpScalar est = pts.front().second;
    if (pts.size() > 1) {
      MpScalar st, sd, stt, std_;
      const MpScalar n(static_cast<long>(pts.size()));
      for (const auto& [t, d] : pts) {
        st += t;
        sd += d;
        stt.add_product(t, t);
        std_.add_product(t, d);
      }
      const MpScalar den = n * stt - st * st;
      if (!den.is_zero()) est = max(MpScalar(0), (sd * stt - st * std_) / den);
    }
    rep.max_jump = max(rep.max_jump, est);
  }
  // Per side, |dv| should not grow as |t| shrinks.
  const MpScalar slack = jump_tol * MpScalar::parse("1e-6");
  for (int side : {1, -1}) {
    MpScalar prev;
    bool first = true;
    for (std::size_t i = decile; i-- > 0;) {
      if (off[i]->t.sign() != side) continue;
      const MpScalar d = abs(off[i]->primal - z->primal);
      if (!first && d > prev + slack) rep.shrinking_near_zero = false;
      prev = d;
      first = false;
    }
  }
  // Lipschitz probe on rows that keep the base face and the rank condition.
  MpScalar c;
  for (std::size_t i = off.size() / 2; i < off.size(); ++i) {
    c = max(c, abs(off[i]->primal - z->primal) / abs(off[i]->t));
  }
  for (std::size_t i = 0; i < off.size() / 2; ++i) {
    const SweepRow& r = *off[i];
    if (!r.has_face || !r.face_equals_base || !r.rank_ok) continue;
    if (abs(r.primal - z->primal) > c * abs(r.t) + slack) rep.lipschitz_flags.push_back(r.t);
  }
  rep.verdict = rep.max_jump > jump_tol ? ContinuityVerdict::SuspectedJump : ContinuityVerdict::Continuous;
  return rep;
}

AttainmentResult attainment_check(const SdpProblem& prob, const BlockMatrix& x, const MpScalar& tol) {
  prob.validate();
  if (x.dims() != prob.block_dims) throw ShapeMismatch("attainment_check: X has the wrong blocks");
  const MpScalar hi = sqrt(tol);
  MpScalar xmax;
  std::vector<mpla::SymEig> eigs;
  for (const auto& blk : x.blocks()) {
    eigs.push_back(mpla::sym_eig(blk.symmetrized()));
    for (const auto& l : eigs.back().eigenvalues) xmax = max(xmax, abs(l));
  }
  const std::size_t m = prob.m();
  std::vector<MpVector> rows;
  MpVector rhs;
  for (std::size_t b = 0; b < eigs.size(); ++b) {
    const auto& e = eigs[b];
    for (std::size_t l = 0; l < e.eigenvalues.size(); ++l) {
      const MpScalar& lam = e.eigenvalues[l];
      if (lam <= tol * xmax) continue;
      if (lam <= hi * xmax) {
        throw RankAmbiguity("eigenvalue " + lam.to_string(6) + " of X block " +
                            std::to_string(b + 1) + " is neither zero nor in the range at tol");
      }
      const MpVector v = e.eigenvectors.column_vector(l);
      const MpVector a0v = prob.a0.block(b) * v;
      std::vector<MpVector> akv;
      for (std::size_t k = 0; k < m; ++k) akv.push_back(prob.a[k].block(b) * v);
      for (std::size_t i = 0; i < v.size(); ++i) {
        MpVector row(m);
        for (std::size_t k = 0; k < m; ++k) row[k] = akv[k][i];
        rows.push_back(std::move(row));
        rhs.push_back(a0v[i]);
      }
    }
  }
  rows.push_back(prob.b);
  rhs.push_back(sdp::dot(prob.a0, x));

  mpla::MpMatrix e(rows.size(), m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < m; ++k) e(i, k) = rows[i][k];
  }
  const MpVector y = mpla::pseudoinverse(e, hi) * rhs;
  const MpVector fit = e * y;
  AttainmentResult res;
  MpScalar scale(1);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    res.residual = max(res.residual, abs(fit[i] - rhs[i]));
    scale = max(scale, abs(rhs[i]));
  }
  scale = max(scale, e.max_abs());
  if (res.residual > hi * scale) {
    res.detail = "complementarity system is inconsistent: residual " + res.residual.to_string(6);
    return res;
  }
  res.attained = true;
  res.witness = y;
  res.witness_min_eig = sdp::min_eigenvalue(prob.slack(y));
  res.detail = "candidate y with slack eigenvalue " + res.witness_min_eig.to_string(6);
  return res;
}

bool CertificateReport::all_ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

CertificateReport verify_value_certificates() {
  namespace sf = sdp::fixtures;
  namespace ff = facial::fixtures;
  CertificateReport rep;
  const MpScalar bound = MpScalar::pow2(-200);
  const MpScalar root5 = sqrt(MpScalar(5));
  const SdpProblem p = sf::expprimal();

  for (long n : {1L, 10L, 100L, 1000L}) {
    const MpVector y = sf::feasible_sequence(n);
    const MpScalar lo = sdp::min_eigenvalue(p.slack(y));
    MpScalar obj;
    for (std::size_t k = 0; k < p.m(); ++k) obj.add_product(p.b[k], y[k]);
    const MpScalar miss = abs(obj - (-root5 - MpScalar(1) / MpScalar(n)));
    Check c{"sequence point n=" + std::to_string(n), lo >= -bound && miss <= bound,
            "min slack eigenvalue " + lo.to_string(6) + ", objective error " + miss.to_string(6)};
    rep.checks.push_back(std::move(c));
  }

  {
    const BlockMatrix x = sf::rank1_dual_point();
    const MpVector v = p.constraint_values(x);
    MpScalar miss;
    std::string worst;
    for (std::size_t k = 0; k < p.m(); ++k) {
      const MpScalar d = abs(v[k] - p.b[k]);
      if (d > miss) {
        miss = d;
        worst = " (constraint " + std::to_string(k + 1) + ")";
      }
    }
    const MpScalar lo = sdp::min_eigenvalue(x);
    const MpScalar obj = sdp::dot(p.a0, x);
    const MpScalar objmiss = abs(obj + root5);
    rep.checks.push_back({"dual point feasible", miss <= bound && lo >= -bound,
                          "residual " + miss.to_string(6) + worst + ", min eigenvalue " + lo.to_string(6)});
    rep.checks.push_back({"dual point objective -sqrt5", objmiss <= bound,
                          "objective " + obj.to_string(20)});
  }

  {
    const MpScalar lo = mpla::min_eigenvalue(sf::p1_reduced_slack());
    const MpScalar miss = abs(lo + sqrt(MpScalar(2)));
    rep.checks.push_back({"reduced eigenvalue -sqrt2", miss <= bound, "min eigenvalue " + lo.to_string(20)});
  }

  // The reduction chain for (P1): the two displayed steps plus y = e3, all
  // exact, then the reduced problem is solved.
  try {
    const MpScalar eps = MpScalar::parse("1e-16");
    const SdpProblem p1 = sdp::apply(sf::p1_family(eps), 1);
    const facial::Face f1 = ff::first_face();
    const facial::Face f2 = facial::intersect_face(f1, ff::p1_second_certificate(eps).u, bound);
    BlockMatrix u3 = BlockMatrix::zeros({6, 2});
    u3.block(1)(1, 1) = 1;
    const facial::Face f3 = facial::intersect_face(f2, u3, bound);
    ipm::SolverConfig cfg;
    cfg.set_tolerance(MpScalar::parse("1e-30"));
    const auto sol = ipm::solve(facial::restrict_to_face(p1, f3), cfg);
    const MpScalar miss = abs(sol.solution.primal_obj + sqrt(MpScalar(2)));
    rep.checks.push_back({"reduced (P1) dual value -sqrt2",
                          sol.status == ipm::Status::Optimal && miss < MpScalar::parse("1e-12"),
                          ipm::to_string(sol.status) + ", value " + sol.solution.primal_obj.to_string(20)});
  } catch (const Error& e) {
    rep.checks.push_back({"reduced (P1) dual value -sqrt2", false, e.what()});
  }
  return rep;
}

}  // namespace sdpsens::sensitivity
