#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "sdpsens/error.hpp"
#include "sdpsens/ipm/solver.hpp"
#include "sdpsens/mpla/linalg.hpp"
#include "sdpsens/sdp/fixtures.hpp"

namespace {

using namespace sdpsens;
using namespace sdpsens::ipm;
using mpla::MpMatrix;
using mpla::MpScalar;
using mpla::MpVector;
using sdp::BlockMatrix;
namespace sf = sdpsens::sdp::fixtures;

const MpScalar kEps16 = MpScalar::parse("1e-16");

SolverConfig config(const char* delta) {
  SolverConfig cfg;
  cfg.set_tolerance(MpScalar::parse(delta));
  return cfg;
}

// Number of leading significant digits shared with the reference.
double digits(const MpScalar& v, const MpScalar& ref) {
  const MpScalar err = abs(v - ref) / abs(ref);
  if (err.is_zero()) return 1e9;
  return -mpla::log10(err).to_double();
}

bool positive_definite(const BlockMatrix& m) {
  for (const auto& b : m.blocks()) {
    if (std::holds_alternative<NotPositiveDefinite>(mpla::try_cholesky(b))) return false;
  }
  return true;
}

const SolveReport& solved(const sdp::SdpProblem& p, const char* delta) {
  // Solves are the slow part; cache by problem name and tolerance.
  static std::map<std::string, SolveReport> cache;
  std::ostringstream key;
  key << delta << '|' << p.a[4].block(0)(1, 1).to_string() << '|' << p.a[4].block(0)(1, 2).to_string()
      << '|' << p.a[4].block(0)(1, 3).to_string();
  auto it = cache.find(key.str());
  if (it == cache.end()) it = cache.emplace(key.str(), solve(p, config(delta))).first;
  return it->second;
}

sdp::SdpProblem p1() { return sdp::apply(sf::p1_family(kEps16), MpScalar(1)); }
sdp::SdpProblem p3() { return sdp::apply(sf::p3_family(kEps16), MpScalar(1)); }

TEST(Config, DefaultsMatchTheStockValues) {
  const SolverConfig cfg;
  EXPECT_EQ(cfg.maxIteration, 10000);
  EXPECT_EQ(cfg.lambdaStar, MpScalar::parse("1e4"));
  EXPECT_EQ(cfg.gammaStar, MpScalar::parse("0.5"));
  EXPECT_EQ(cfg.precision, 1024);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ValidateRejectsBadBounds) {
  SolverConfig cfg;
  cfg.gammaStar = MpScalar(1);
  EXPECT_THROW(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.betaStar = MpScalar::parse("0.6");
  EXPECT_THROW(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.lowerBound = cfg.upperBound;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Config, ParamFileBothOrders) {
  std::istringstream in("maxIteration = 50\n1.0e-20  epsilonStar  * SDPA order\n# comment\ngammaStar: 0.7\n");
  const SolverConfig cfg = parse_params(in);
  EXPECT_EQ(cfg.maxIteration, 50);
  EXPECT_EQ(cfg.epsilonStar, MpScalar::parse("1e-20"));
  EXPECT_EQ(cfg.gammaStar, MpScalar::parse("0.7"));
}

TEST(Config, UnknownKeyThrows) {
  std::istringstream in("stepFudge = 3\n");
  EXPECT_THROW(parse_params(in), UnknownParam);
}

TEST(Config, FixtureParamFile) {
  const SolverConfig cfg = read_param_file(std::string(SDPSENS_FIXTURE_DIR) + "/defaults.prm");
  EXPECT_EQ(cfg.omegaStar, MpScalar(2));
  EXPECT_EQ(cfg.lowerBound, MpScalar::parse("-1e5"));
  EXPECT_EQ(cfg.betaBar, MpScalar::parse("0.5"));
}

TEST(Solve, Toy) {
  const auto r = solve(sf::toy_1x1(), config("1e-50"));
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_LE(abs(r.solution.dual_obj - 1), MpScalar::parse("1e-45"));
  EXPECT_LE(abs(r.solution.primal_obj - 1), MpScalar::parse("1e-45"));
}

TEST(Solve, OptimalMeansWithinTolerance) {
  const auto cfg = config("1e-30");
  const auto& r = solved(sf::expprimal(), "1e-30");
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_LE(r.primal_residual, cfg.epsilonStar);
  EXPECT_LE(r.dual_residual, cfg.epsilonStar);
  EXPECT_LE(r.relative_gap, cfg.epsilonDash);
  EXPECT_TRUE(positive_definite(r.solution.x));
  EXPECT_TRUE(positive_definite(r.solution.z));
}

TEST(Solve, BaseAt1e30IsMinusSqrt5) {
  const auto& r = solved(sf::expprimal(), "1e-30");
  EXPECT_GE(digits(r.solution.primal_obj, -sqrt(MpScalar(5))), 14);
}

TEST(Solve, P3At1e50IsMinusSqrt2) {
  const auto& r = solved(p3(), "1e-50");
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_GE(digits(r.solution.primal_obj, -sqrt(MpScalar(2))), 16);
}

TEST(Solve, P1ToleranceSweepGivesDistinctValues) {
  const MpScalar v10 = solved(p1(), "1e-10").solution.primal_obj;
  const MpScalar v30 = solved(p1(), "1e-30").solution.primal_obj;
  const MpScalar v50 = solved(p1(), "1e-50").solution.primal_obj;
  EXPECT_NE(v10, v30);
  EXPECT_NE(v30, v50);
  EXPECT_NE(v10, v50);
  EXPECT_GE(digits(v50, -sqrt(MpScalar(2))), 10);
}

TEST(Solve, BaseComplementarityDecreasesOnceNearlyFeasible) {
  // With large residuals the infeasible start lets X . Z grow for a while.
  const auto& h = solved(sf::expprimal(), "1e-30").residual_history;
  std::size_t checked = 0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i - 1].primal_residual > 1e-20 || h[i - 1].dual_residual > 1e-20) continue;
    EXPECT_LE(h[i].mu, h[i - 1].mu * (1 + 1e-12)) << i;
    ++checked;
  }
  EXPECT_GT(checked, 100u);
}

TEST(Solve, InconsistentEqualitiesDetected) {
  auto p = sdp::apply(sf::lost_feasibility_family(), MpScalar::parse("1e-4"));
  // Same span, different right-hand side: 2(1+t) X12 = 2 against 2 X12 = 2.
  const auto r = solve(p, config("1e-20"));
  EXPECT_NE(r.status, Status::Optimal);
}

TEST(StrictlyFeasiblePoint, ReproducesX0AtZero) {
  const auto fam = sf::lost_feasibility_family();
  const BlockMatrix x0 = sf::lost_feasibility_x0();
  const BlockMatrix xt = strictly_feasible_point(fam.base, x0, MpScalar::pow2(-300));
  EXPECT_LE((xt - x0).max_abs(), MpScalar::pow2(-900));
  const MpVector v = fam.base.constraint_values(xt);
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_LE(abs(v[k] - fam.base.b[k]), MpScalar::pow2(-900));
}

TEST(StrictlyFeasiblePoint, LostFeasibilityFamilyIsInfeasibleForPositiveT) {
  const auto fam = sf::lost_feasibility_family();
  for (const char* t : {"1e-8", "1e-4"}) {
    const auto p = sdp::apply(fam, MpScalar::parse(t));
    EXPECT_EQ(mpla::numeric_rank(p.constraint_matrix(), mpla::default_rank_tol()),
              mpla::numeric_rank(fam.base.constraint_matrix(), mpla::default_rank_tol()));
    EXPECT_THROW(strictly_feasible_point(p, sf::lost_feasibility_x0(), MpScalar::pow2(-300)), Infeasible) << t;
  }
}

TEST(StrictlyFeasiblePoint, ResidualDecaysAlongASolvableFamily) {
  // Only b moves, so b(t) stays in the range and X_t -> X0.
  auto fam = sf::lost_feasibility_family();
  fam.deltas.clear();
  fam.b_delta = MpVector{MpScalar(1), MpScalar(1), MpScalar(1)};
  MpScalar last(1000);
  for (const char* t : {"1e-2", "1e-4", "1e-8", "1e-16"}) {
    const auto p = sdp::apply(fam, MpScalar::parse(t));
    const BlockMatrix xt = strictly_feasible_point(p, sf::lost_feasibility_x0(), MpScalar::pow2(-300));
    const MpScalar dist = (xt - sf::lost_feasibility_x0()).max_abs();
    EXPECT_LT(dist, last);
    last = dist;
    EXPECT_TRUE(positive_definite(xt));
  }
  EXPECT_LE(last, MpScalar::parse("1e-15"));
}

std::vector<SaddleProbe> random_probes(const sdp::SdpProblem& p, int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(-20, 20);
  std::vector<SaddleProbe> out;
  for (int i = 0; i < count; ++i) {
    std::vector<MpMatrix> blocks;
    for (auto n : p.block_dims) {
      MpMatrix g(n, n);
      for (auto& v : g.entries()) v = MpScalar(d(rng)) / 10;
      blocks.push_back(mpla::transpose_times(g, g));
    }
    MpVector y(p.m());
    for (auto& v : y) v = MpScalar(d(rng)) / 10;
    out.push_back({BlockMatrix(std::move(blocks)), std::move(y)});
  }
  return out;
}

TEST(SaddlePoint, ToyOptimumPassesRandomProbes) {
  const auto p = sf::toy_1x1();
  const BlockMatrix x({MpMatrix{{1}}});
  EXPECT_TRUE(check_saddle_point(p, x, MpVector{MpScalar(1)}, random_probes(p, 100, 1), MpScalar::pow2(-500)));
}

TEST(SaddlePoint, ShiftedMultiplierFails) {
  const auto p = sf::toy_1x1();
  const BlockMatrix x({MpMatrix{{2}}});  // b_1 - A_1 . X = -1
  const std::vector<SaddleProbe> probes{{x, MpVector{MpScalar(0)}}};
  EXPECT_FALSE(check_saddle_point(p, x, MpVector{MpScalar(1)}, probes, MpScalar::pow2(-500)));
}

TEST(SaddlePoint, P1SolutionAgreesWithEigenvalueOracle) {
  const auto& r = solved(p1(), "1e-50");
  ASSERT_EQ(r.status, Status::Optimal);
  const MpScalar oracle = mpla::min_eigenvalue(sf::p1_reduced_slack());
  EXPECT_LE(abs(r.solution.dual_obj - oracle), MpScalar::parse("1e-40"));
  const auto p = p1();
  EXPECT_TRUE(check_saddle_point(p, r.solution.x, r.solution.y, random_probes(p, 30, 7), MpScalar::parse("1e-40")));
}

}  // namespace
