#include <gtest/gtest.h>

#include <sstream>

#include "sdpsens/error.hpp"
#include "sdpsens/facial/fixtures.hpp"
#include "sdpsens/hinf/hinf.hpp"
#include "sdpsens/sdp/fixtures.hpp"
#include "sdpsens/sensitivity/sensitivity.hpp"

namespace {

using namespace sdpsens;
using namespace sdpsens::sensitivity;
using mpla::MpMatrix;
using mpla::MpScalar;
using sdp::BlockMatrix;
namespace sf = sdpsens::sdp::fixtures;

ipm::SolverConfig config(const char* delta) {
  ipm::SolverConfig cfg;
  cfg.set_tolerance(MpScalar::parse(delta));
  return cfg;
}

SweepRow row(const char* t, const MpScalar& v) {
  SweepRow r;
  r.t = MpScalar::parse(t);
  r.primal = v;
  r.dual = v;
  r.status = "Optimal";
  return r;
}

// Toy family: min{(1 + t) x : x = 1}. Cheap enough for repeated sweeps.
sdp::PerturbedFamily toy_family() {
  sdp::PerturbedFamily f;
  f.name = "toy";
  f.base = sf::toy_1x1();
  f.deltas.emplace(0, BlockMatrix({MpMatrix{{1}}}));
  return f;
}

TEST(Grid, SymmetricRange) {
  const auto g = parse_grid("+-k*1e-5:1..100");
  ASSERT_EQ(g.size(), 200u);
  EXPECT_EQ(g.front(), -MpScalar(100) * MpScalar::parse("1e-5"));
  EXPECT_EQ(g.back(), MpScalar(100) * MpScalar::parse("1e-5"));
  EXPECT_EQ(parse_grid("±k*1e-5:1..100"), g);
}

TEST(Grid, OneSidedAndList) {
  const auto g = parse_grid("k*0.5:0..3");
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[3], MpScalar::parse("1.5"));
  const auto l = parse_grid("0, 1e-3,-2");
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[2], MpScalar(-2));
}

TEST(Grid, Malformed) {
  EXPECT_THROW(parse_grid("+-k*1e-5:5..1"), Error);
  EXPECT_THROW(parse_grid("1e-3,,2"), Error);
  EXPECT_THROW(parse_grid("abc"), Error);
}

TEST(Grid, SymmetricGridHasZero) {
  const auto g = symmetric_grid(MpScalar::parse("0.25"), 3);
  ASSERT_EQ(g.size(), 7u);
  EXPECT_TRUE(g[3].is_zero());
  EXPECT_EQ(g[0], MpScalar::parse("-0.75"));
}

TEST(Continuity, ConstantRowsAreContinuous) {
  std::vector<SweepRow> rows;
  for (const char* t : {"-2", "-1", "0", "1", "2"}) rows.push_back(row(t, MpScalar(3)));
  const auto d = continuity_diagnostic(rows);
  EXPECT_EQ(d.verdict, ContinuityVerdict::Continuous);
  EXPECT_TRUE(d.max_jump.is_zero());
  EXPECT_TRUE(d.modulus_estimate.is_zero());
}

TEST(Continuity, LinearRowsExtrapolateToZero) {
  std::vector<SweepRow> rows{row("0", MpScalar(0))};
  for (int k = 1; k <= 100; ++k) {
    const MpScalar t = MpScalar(k) * MpScalar::parse("1e-5");
    for (int s : {1, -1}) {
      SweepRow r = row("0", MpScalar::parse("0.8") * t * MpScalar(s));
      r.t = t * MpScalar(s);
      rows.push_back(r);
    }
  }
  const auto d = continuity_diagnostic(rows);
  EXPECT_EQ(d.verdict, ContinuityVerdict::Continuous);
  EXPECT_LE(d.max_jump, MpScalar::parse("1e-100"));
  EXPECT_LE(abs(d.modulus_estimate - MpScalar::parse("0.8")), MpScalar::parse("1e-100"));
  EXPECT_TRUE(d.shrinking_near_zero);
}

TEST(Continuity, OffsetIsAJump) {
  std::vector<SweepRow> rows{row("0", MpScalar(0))};
  for (const char* t : {"-1e-3", "-1e-4", "1e-4", "1e-3"}) rows.push_back(row(t, MpScalar::parse("1e-3")));
  const auto d = continuity_diagnostic(rows);
  EXPECT_EQ(d.verdict, ContinuityVerdict::SuspectedJump);
  EXPECT_LE(abs(d.max_jump - MpScalar::parse("1e-3")), MpScalar::parse("1e-100"));
}

TEST(Continuity, MissingZeroRowThrows) {
  std::vector<SweepRow> rows{row("1", MpScalar(0))};
  EXPECT_THROW(continuity_diagnostic(rows), Error);
}

TEST(Sweep, ZeroFamilyGivesIdenticalRows) {
  sdp::PerturbedFamily fam = toy_family();
  fam.deltas.clear();
  SweepSpec spec{fam, parse_grid("+-k*0.1:1..3"), config("1e-30")};
  spec.run_facial = false;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 7u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.primal, rows.front().primal);
    EXPECT_EQ(r.dual, rows.front().dual);
  }
}

TEST(Sweep, AddsZeroAndSorts) {
  SweepSpec spec{toy_family(), parse_grid("0.5,-0.5,0.25"), config("1e-30")};
  spec.run_facial = false;
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_TRUE(rows[1].t.is_zero());
  EXPECT_LE(abs(rows[3].dual - MpScalar::parse("1.5")), MpScalar::parse("1e-25"));
}

TEST(Sweep, FailuresStayInTheirRow) {
  SweepSpec spec{sf::lost_feasibility_family(), parse_grid("0,1e-4"), config("1e-20")};
  const auto rows = run_sweep(spec);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].feasibility, "infeasible");
  EXPECT_NE(rows[1].status, "Optimal");
}

TEST(Sweep, CsvReplayIsDeterministic) {
  SweepSpec spec{toy_family(), parse_grid("+-k*0.125:1..4"), config("1e-30")};
  spec.seed = 5;
  std::ostringstream a, b;
  spec.workers = 1;
  write_csv(a, run_sweep(spec));
  spec.workers = 3;
  write_csv(b, run_sweep(spec));
  const std::string csv = a.str();
  EXPECT_EQ(csv, b.str());
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,primal,dual,gap,degree,r_blocks,rank_ok,status");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
}

TEST(Sweep, PlotDataIsRelativeToZero) {
  SweepSpec spec{toy_family(), parse_grid("-1,1"), config("1e-30")};
  spec.run_facial = false;
  std::ostringstream out;
  write_plot_data(out, run_sweep(spec));
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  double t, d;
  std::vector<double> ds;
  while (in >> t >> d) ds.push_back(d);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_NEAR(ds[0], -1, 1e-20);
  EXPECT_EQ(ds[1], 0);
  EXPECT_NEAR(ds[2], 1, 1e-20);
}

TEST(Sweep, P1OnOffIsAJumpOfSqrt5MinusSqrt2) {
  // Scaling the (P1) direction by t switches the perturbation on for every t != 0.
  SweepSpec spec{sf::p1_family(MpScalar(1)), parse_grid("+-k*1e-5:1..5"), config("1e-30")};
  spec.run_facial = false;
  const auto d = continuity_diagnostic(run_sweep(spec));
  EXPECT_EQ(d.verdict, ContinuityVerdict::SuspectedJump);
  EXPECT_NEAR(d.max_jump.to_double(), 0.8218544, 1e-7);
  EXPECT_NEAR(d.max_jump.to_double(), (sqrt(MpScalar(5)) - sqrt(MpScalar(2))).to_double(), 1e-12);
}

TEST(Sweep, A11ValuesStayPut) {
  SweepSpec spec{hinf::matrixwise_family(hinf::system2(), "a11"), parse_grid("-1e-3,1e-5,1e-3"),
                 config("1e-30")};
  spec.run_facial = false;
  const auto rows = run_sweep(spec);
  for (const auto& r : rows) EXPECT_LE(abs(r.primal - rows[1].primal), MpScalar::parse("1e-8"));
}

TEST(Sweep, A21RefinementDoesNotRaiseTheModulus) {
  const auto fam = hinf::matrixwise_family(hinf::system2(), "a21");
  // Two decile points per side, so the jump estimate is an intercept fit.
  SweepSpec spec{fam, parse_grid("+-k*1e-6:1..20"), config("1e-20")};
  spec.run_facial = false;
  const auto rows = run_sweep(spec);
  const auto coarse = continuity_diagnostic(rows);
  spec.t_grid = parse_grid("5e-7,-5e-7");
  auto extra = run_sweep(spec);
  std::vector<SweepRow> fine = rows;
  for (auto& r : extra) {
    if (!r.t.is_zero()) fine.push_back(r);
  }
  std::sort(fine.begin(), fine.end(), [](const SweepRow& a, const SweepRow& b) { return a.t < b.t; });
  const auto refined = continuity_diagnostic(fine);
  EXPECT_LE(refined.modulus_estimate, coarse.modulus_estimate + MpScalar::parse("1e-6"));
  EXPECT_EQ(coarse.verdict, ContinuityVerdict::Continuous);
  EXPECT_EQ(refined.verdict, ContinuityVerdict::Continuous);
}

TEST(Attainment, BaseProblemIsNotAttained) {
  const auto r = attainment_check(sf::expprimal(), sf::rank1_dual_point(), MpScalar::pow2(-200));
  EXPECT_FALSE(r.attained);
  EXPECT_FALSE(r.witness.has_value());
}

TEST(Attainment, ToyIsAttainedAtOne) {
  const auto r = attainment_check(sf::toy_1x1(), BlockMatrix({MpMatrix{{1}}}), MpScalar::pow2(-200));
  ASSERT_TRUE(r.attained);
  EXPECT_LE(abs((*r.witness)[0] - 1), MpScalar::pow2(-500));
}

TEST(Attainment, ReducedProblemIsAttained) {
  const auto red = facial::restrict_to_face(sf::expprimal(), facial::fixtures::first_face());
  const auto rep = ipm::solve(red, config("1e-50"));
  ASSERT_EQ(rep.status, ipm::Status::Optimal);
  const auto r = attainment_check(red, rep.solution.x, MpScalar::parse("1e-20"));
  EXPECT_TRUE(r.attained) << r.detail;
  EXPECT_GE(r.witness_min_eig, -MpScalar::parse("1e-40"));
}

TEST(Attainment, AmbiguousSpectrumThrows) {
  // 1e-15 is above the zero cut (1e-20) and below the range cut (1e-10).
  const BlockMatrix x({MpMatrix{{1, 0}, {0, MpScalar::parse("1e-15")}}});
  const auto p = sdp::make_problem({2}, BlockMatrix({MpMatrix::identity(2)}), {BlockMatrix({MpMatrix::identity(2)})},
                                   mpla::MpVector{MpScalar(1)});
  EXPECT_THROW(attainment_check(p, x, MpScalar::parse("1e-20")), RankAmbiguity);
}

TEST(ValueCertificates, AllPass) {
  const auto rep = verify_value_certificates();
  EXPECT_GE(rep.checks.size(), 7u);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.ok) << c.name << ": " << c.detail;
  EXPECT_TRUE(rep.all_ok());
}

}  // namespace
