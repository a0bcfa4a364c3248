#include "sdpsens/hinf/hinf.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

#include "sdpsens/error.hpp"
#include "sdpsens/mpla/linalg.hpp"

namespace sdpsens::hinf {

namespace {

using sdp::BlockMatrix;
using CMatrix = Eigen::MatrixXcd;

MpMatrix unit_sym(std::size_t n, std::size_t i, std::size_t j) {
  MpMatrix e(n, n);
  e(i, j) = 1;
  e(j, i) = 1;
  return e;
}

MpMatrix unit(std::size_t rows, std::size_t cols, std::size_t i, std::size_t j) {
  MpMatrix e(rows, cols);
  e(i, j) = 1;
  return e;
}

// Places the lower-left block (and its mirror) of the first LMI block.
void put_mirrored(MpMatrix& m, std::size_t row0, std::size_t col0, const MpMatrix& b) {
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      m(row0 + i, col0 + j) = b(i, j);
      m(col0 + j, row0 + i) = b(i, j);
    }
  }
}

MpMatrix matrix_from_json(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw DimensionMismatch(std::string("plant JSON lacks ") + name);
  const auto& rows = j.at(name);
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.at(0).size() : 0;
  MpMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows.at(i).size() != c) throw DimensionMismatch(std::string("ragged matrix ") + name);
    for (std::size_t k = 0; k < c; ++k) {
      const auto& v = rows.at(i).at(k);
      m(i, k) = v.is_string() ? MpScalar::parse(v.get<std::string>()) : MpScalar::parse(v.dump());
    }
  }
  return m;
}

nlohmann::json matrix_json(const MpMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j).to_string(40));
    rows.push_back(row);
  }
  return rows;
}

CMatrix to_complex(const MpMatrix& m) {
  CMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).to_double();
  }
  return out;
}

std::vector<std::complex<double>> eigenvalues(const MpMatrix& a) {
  const Eigen::MatrixXcd c = to_complex(a);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c, false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()(i));
  return out;
}

double smallest_singular_value(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (m.rows() < m.cols()) return 0.0;
  return s.size() ? s(s.size() - 1) : 0.0;
}

bool full_row_rank(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  const auto& s = svd.singularValues();
  if (m.rows() > m.cols() || s.size() == 0) return false;
  return s(s.size() - 1) > 1e-10 * std::max(1.0, s(0));
}

const std::vector<std::complex<double>>& declared_grid() {
  static const std::vector<std::complex<double>> grid = [] {
    std::vector<std::complex<double>> g;
    for (int re = -40; re <= 0; ++re) {
      for (int im = -40; im <= 40; ++im) g.emplace_back(0.25 * re, 0.25 * im);
    }
    return g;
  }();
  return grid;
}

FaceBehavior behavior_of(const facial::Face& base, const facial::FacialReductionResult& r,
                         const MpScalar& tol) {
  if (r.status != facial::ReductionStatus::MinimalFaceFound) return FaceBehavior::Unknown;
  const facial::Face& f = r.minimal_face();
  if (f.is_whole()) return FaceBehavior::FullDimensional;
  switch (facial::compare_faces(base, f, tol)) {
    case facial::FaceRelation::Equal: return FaceBehavior::Invariant;
    case facial::FaceRelation::GSubsetF: return FaceBehavior::Shrunk;
    default: return FaceBehavior::Unknown;
  }
}

}  // namespace

void ControlSystem::validate() const {
  const std::size_t n = a.rows();
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DimensionMismatch(std::string("plant: ") + what);
  };
  need(n > 0 && a.cols() == n, "A must be square");
  need(b1.rows() == n, "rows(B1) != rows(A)");
  need(b2.rows() == n, "rows(B2) != rows(A)");
  need(c1.cols() == n, "cols(C1) != rows(A)");
  need(d11.rows() == c1.rows() && d12.rows() == c1.rows(), "rows of C1, D11, D12 differ");
  need(d11.cols() == b1.cols(), "cols(D11) != cols(B1)");
  need(d12.cols() == b2.cols(), "cols(D12) != cols(B2)");
}

ControlSystem system2() {
  ControlSystem s;
  s.a = MpMatrix{{-1, -1}, {1, 0}};
  s.b1 = MpMatrix{{-1, -1}, {-1, 0}};
  s.b2 = MpMatrix{{0}, {1}};
  s.c1 = MpMatrix{{2, -1}, {-1, 2}};
  s.d11 = MpMatrix{{-1, 0}, {-1, 0}};
  s.d12 = MpMatrix{{2}, {-1}};
  return s;
}

nlohmann::json to_json(const ControlSystem& sys) {
  return {{"A", matrix_json(sys.a)},   {"B1", matrix_json(sys.b1)},
          {"B2", matrix_json(sys.b2)}, {"C1", matrix_json(sys.c1)},
          {"D11", matrix_json(sys.d11)}, {"D12", matrix_json(sys.d12)}};
}

ControlSystem system_from_json(const nlohmann::json& j) {
  ControlSystem s;
  s.a = matrix_from_json(j, "A");
  s.b1 = matrix_from_json(j, "B1");
  s.b2 = matrix_from_json(j, "B2");
  s.c1 = matrix_from_json(j, "C1");
  s.d11 = matrix_from_json(j, "D11");
  s.d12 = matrix_from_json(j, "D12");
  s.validate();
  return s;
}

ControlSystem read_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return system_from_json(nlohmann::json::parse(in));
}

SdpProblem build_hinf_sdp(const ControlSystem& sys) {
  sys.validate();
  const std::size_t nx = sys.nx(), nz = sys.nz(), nw = sys.nw(), nu = sys.nu();
  const std::size_t n1 = nx + nz + nw;
  const std::vector<std::size_t> dims{n1, nx};

  std::vector<BlockMatrix> g;
  auto coefficient = [&](const MpMatrix& top_left, const MpMatrix& mid, const MpMatrix& second) {
    MpMatrix b(n1, n1);
    b.set_block(0, 0, top_left);
    put_mirrored(b, nx, 0, mid);
    g.push_back(BlockMatrix(std::vector<MpMatrix>{b.symmetrized(), second}));
  };
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = i; j < nx; ++j) {
      const MpMatrix e = unit_sym(nx, i, j);
      coefficient(-sdp::he(sys.a * e), -(sys.c1 * e), e);
    }
  }
  for (std::size_t p = 0; p < nu; ++p) {
    for (std::size_t q = 0; q < nx; ++q) {
      const MpMatrix f = unit(nu, nx, p, q);
      coefficient(-sdp::he(sys.b2 * f), -(sys.d12 * f), MpMatrix(nx, nx));
    }
  }
  {
    MpMatrix b(n1, n1);
    for (std::size_t i = nx; i < n1; ++i) b(i, i) = 1;
    g.push_back(BlockMatrix(std::vector<MpMatrix>{b, MpMatrix(nx, nx)}));
  }

  MpMatrix c(n1, n1);
  put_mirrored(c, nx + nz, 0, -sys.b1.transposed());
  put_mirrored(c, nx + nz, nx, -sys.d11.transposed());
  const BlockMatrix c_block(std::vector<MpMatrix>{c, MpMatrix(nx, nx)});

  std::vector<BlockMatrix> a;
  for (const auto& gk : g) a.push_back(-gk);
  mpla::MpVector b(g.size());
  b.back() = -1;
  return sdp::make_problem(dims, -c_block, std::move(a), std::move(b));
}

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names{"a11", "a12", "a21", "a22", "b1",  "b2",
                                              "c11", "c12", "c21", "c22", "d1",  "d2"};
  return names;
}

MpScalar& parameter(ControlSystem& sys, const std::string& name) {
  auto digit = [&](std::size_t pos) -> std::size_t {
    if (pos >= name.size() || name[pos] < '1' || name[pos] > '9') throw UnknownParam(name);
    return static_cast<std::size_t>(name[pos] - '1');
  };
  if (name.empty()) throw UnknownParam(name);
  MpMatrix* m = nullptr;
  std::size_t i = 0, j = 0;
  switch (name[0]) {
    case 'a':
    case 'c':
      if (name.size() != 3) throw UnknownParam(name);
      m = name[0] == 'a' ? &sys.a : &sys.c1;
      i = digit(1);
      j = digit(2);
      break;
    case 'b':
    case 'd':
      if (name.size() != 2) throw UnknownParam(name);
      m = name[0] == 'b' ? &sys.b2 : &sys.d12;
      i = digit(1);
      break;
    default:
      throw UnknownParam(name);
  }
  if (i >= m->rows() || j >= m->cols()) throw UnknownParam(name + " is outside the plant");
  return (*m)(i, j);
}

PerturbedFamily matrixwise_family(const ControlSystem& sys, const std::string& param) {
  ControlSystem moved = sys;
  parameter(moved, param) += MpScalar(1);
  PerturbedFamily fam;
  fam.name = param;
  fam.base = build_hinf_sdp(sys);
  // The LMI is affine in each plant entry, so one unit step is the derivative.
  const SdpProblem p = build_hinf_sdp(moved);
  for (std::size_t k = 0; k < fam.base.m(); ++k) {
    BlockMatrix d = p.a[k] - fam.base.a[k];
    if (!d.is_zero()) fam.deltas.emplace(k + 1, std::move(d));
  }
  BlockMatrix d0 = p.a0 - fam.base.a0;
  if (!d0.is_zero()) fam.deltas.emplace(0, std::move(d0));
  return fam;
}

bool stabilizability_check(const ControlSystem& sys,
                           const std::vector<std::complex<double>>& grid) {
  sys.validate();
  std::vector<std::complex<double>> probes = eigenvalues(sys.a);
  probes.insert(probes.end(), grid.begin(), grid.end());
  const std::size_t n = sys.nx(), nu = sys.nu();
  const CMatrix a = to_complex(sys.a);
  const CMatrix b2 = to_complex(sys.b2);
  for (const auto& lam : probes) {
    if (!(lam.real() < 0)) continue;
    CMatrix m(n, n + nu);
    m.leftCols(n) = a - lam * CMatrix::Identity(n, n);
    m.rightCols(nu) = b2;
    if (!full_row_rank(m)) return false;
  }
  return true;
}

StrictnessResult nonstrict_feasibility_criterion(const ControlSystem& sys) {
  sys.validate();
  const std::size_t nx = sys.nx(), nu = sys.nu(), nz = sys.nz();
  StrictnessResult res;
  if (nz < nu) {
    res.strict = false;
    res.witness = 0.0;
    res.witness_exact = MpScalar(0);
    res.method = "fewer rows than columns: rank drops for every lambda";
    return res;
  }

  // Any w in the kernel of the stacked matrix lies in ker [C1 D12].
  MpMatrix cd(nz, nx + nu);
  cd.set_block(0, 0, sys.c1);
  cd.set_block(0, nx, sys.d12);
  const MpMatrix k = mpla::null_space(cd, mpla::default_rank_tol());
  const MpScalar tol = mpla::default_rank_tol();

  if (k.cols() == 0) {
    res.method = "ker [C1 D12] = 0";
    return res;
  }
  if (k.cols() == 1) {
    // (A - lambda I) k_u + B2 k_v = 0, i.e. A k_u + B2 k_v = lambda k_u.
    res.method = "one-dimensional ker [C1 D12]";
    mpla::MpVector ku(nx), kv(nu);
    for (std::size_t i = 0; i < nx; ++i) ku[i] = k(i, 0);
    for (std::size_t i = 0; i < nu; ++i) kv[i] = k(nx + i, 0);
    mpla::MpVector r = sys.a * ku;
    const mpla::MpVector bv = sys.b2 * kv;
    for (std::size_t i = 0; i < nx; ++i) r[i] += bv[i];
    const MpScalar kk = mpla::dot(ku, ku);
    const MpScalar scale = max(MpScalar(1), mpla::norm_inf(r));
    if (!(kk > tol)) {
      if (mpla::norm_inf(r) <= tol * scale) {
        res.strict = false;
        res.witness = 0.0;
        res.witness_exact = MpScalar(0);
      }
      return res;
    }
    const MpScalar lam = mpla::dot(r, ku) / kk;
    MpScalar miss;
    for (std::size_t i = 0; i < nx; ++i) miss = max(miss, abs(r[i] - lam * ku[i]));
    if (miss <= tol * scale && !(lam > 0)) {
      res.strict = false;
      res.witness = lam.to_double();
      res.witness_exact = lam;
    }
    return res;
  }

  // General case: minimize the smallest singular value over the declared grid
  // and the eigenvalues of A, then refine by pattern search.
  res.method = "grid search";
  const CMatrix a = to_complex(sys.a), b2 = to_complex(sys.b2), c1 = to_complex(sys.c1),
                d12 = to_complex(sys.d12);
  auto sigma = [&](std::complex<double> lam) {
    CMatrix m(nx + nz, nx + nu);
    m.topLeftCorner(nx, nx) = a - lam * CMatrix::Identity(nx, nx);
    m.topRightCorner(nx, nu) = b2;
    m.bottomLeftCorner(nz, nx) = c1;
    m.bottomRightCorner(nz, nu) = d12;
    return smallest_singular_value(m);
  };
  std::vector<std::complex<double>> cands = declared_grid();
  for (const auto& e : eigenvalues(sys.a)) {
    if (e.real() <= 0) cands.push_back(e);
  }
  std::complex<double> best = cands.front();
  double best_s = sigma(best);
  for (const auto& c : cands) {
    const double s = sigma(c);
    if (s < best_s) {
      best_s = s;
      best = c;
    }
  }
  for (double h = 0.125; h > 1e-15; h /= 2) {
    bool moved = true;
    while (moved) {
      moved = false;
      for (const auto& d : {std::complex<double>(h, 0), std::complex<double>(-h, 0),
                            std::complex<double>(0, h), std::complex<double>(0, -h)}) {
        const auto c = best + d;
        if (c.real() > 0) continue;
        const double s = sigma(c);
        if (s < best_s) {
          best_s = s;
          best = c;
          moved = true;
        }
      }
    }
  }
  double norm = 1;
  for (const MpMatrix* m : {&sys.a, &sys.b2, &sys.c1, &sys.d12}) norm = std::max(norm, m->max_abs().to_double());
  if (best_s <= 1e-9 * norm) {
    res.strict = false;
    res.witness = best;
  }
  return res;
}

std::string to_string(FaceBehavior b) {
  switch (b) {
    case FaceBehavior::Invariant: return "Invariant";
    case FaceBehavior::FullDimensional: return "Full-dimensional";
    case FaceBehavior::Shrunk: return "Shrunk";
    case FaceBehavior::Unknown: return "Unknown";
  }
  return "?";
}

ClassifyOptions ClassifyOptions::defaults(int precision) {
  if (precision == 0) precision = mpla::default_precision();
  mpla::PrecisionGuard guard(precision);
  ClassifyOptions o;
  o.facial = facial::DiscriminantOptions::defaults(precision);
  for (const char* e : {"1e-16", "1e-8"}) {
    const MpScalar v = MpScalar::parse(e);
    o.probes.push_back(v);
    o.probes.push_back(-v);
  }
  return o;
}

facial::FacialReductionResult base_reduction(const ControlSystem& sys,
                                             const facial::DiscriminantOptions& opt) {
  return facial::facial_reduction(build_hinf_sdp(sys), opt);
}

Classification classify_face_behavior(const ControlSystem& sys, const std::string& param,
                                      const facial::FacialReductionResult& base,
                                      const ClassifyOptions& opt) {
  mpla::PrecisionGuard guard(opt.facial.solver.precision);
  Classification out;
  out.param = param;
  const PerturbedFamily fam = matrixwise_family(sys, param);
  std::optional<FaceBehavior> agreed;
  bool split = false;
  for (const auto& t : opt.probes) {
    ProbeOutcome po;
    po.t = t;
    try {
      const auto r = facial::facial_reduction(sdp::apply(fam, t), opt.facial);
      po.residual_dims = r.minimal_face().r;
      po.degree = r.degree;
      po.behavior = behavior_of(base.minimal_face(), r, opt.facial.tol_zero);
    } catch (const Error& e) {
      out.log += "t = " + t.to_string(3) + ": " + e.what() + "\n";
    }
    if (!agreed) agreed = po.behavior;
    split = split || po.behavior != *agreed;
    out.probes.push_back(std::move(po));
  }
  out.behavior = (!agreed || split) ? FaceBehavior::Unknown : *agreed;
  if (split) out.log += "probes disagree\n";
  if (out.behavior == FaceBehavior::Invariant) {
    out.cross_check = facial::invariance_by_eigenspan(base, fam, opt.facial.tol_cert);
    if (out.cross_check->verdict != facial::Verdict::Holds) {
      out.log += "eigenspan criterion does not confirm: " + out.cross_check->reason + "\n";
    }
  }
  return out;
}

std::vector<Classification> classify_all(const ControlSystem& sys,
                                         const std::vector<std::string>& params,
                                         const ClassifyOptions& opt) {
  for (const auto& p : params) {
    ControlSystem probe = sys;
    (void)parameter(probe, p);  // reject unknown names before starting workers
  }
  const auto base = base_reduction(sys, opt.facial);
  std::vector<Classification> out(params.size());
  std::atomic<std::size_t> next{0};
  unsigned workers = opt.workers ? opt.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, params.size()));
  auto run = [&] {
    for (std::size_t i = next++; i < params.size(); i = next++) {
      out[i] = classify_face_behavior(sys, params[i], base, opt);
    }
  };
  if (workers <= 1) {
    run();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace sdpsens::hinf
