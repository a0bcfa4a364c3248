#include "sdpsens/sdp/fixtures.hpp"

#include <tuple>

namespace sdpsens::sdp::fixtures {

namespace {

using Entry = std::tuple<std::size_t, std::size_t, MpScalar>;  // 1-based

MpMatrix sym(std::size_t n, std::initializer_list<Entry> entries) {
  MpMatrix m(n, n);
  for (const auto& [i, j, v] : entries) {
    m(i - 1, j - 1) = v;
    m(j - 1, i - 1) = v;
  }
  return m;
}

BlockMatrix pair(MpMatrix b1, MpMatrix b2) {
  return BlockMatrix(std::vector<MpMatrix>{std::move(b1), std::move(b2)});
}

// Displayed coefficients of the LMI, first block then second block.
std::vector<BlockMatrix> displayed_coefficients() {
  std::vector<BlockMatrix> g;
  g.push_back(pair(sym(6, {{5, 1, 1}, {5, 2, 1}, {5, 3, 1}, {5, 4, 1}, {6, 1, 1}}), MpMatrix(2, 2)));
  g.push_back(pair(sym(6, {{1, 1, 2}, {2, 1, -1}, {3, 1, -2}, {4, 1, 1}}), sym(2, {{1, 1, 1}})));
  g.push_back(pair(sym(6, {{1, 1, 2}, {2, 1, 1}, {2, 2, -2}, {3, 1, 1}, {3, 2, -2}, {4, 1, -2},
                           {4, 2, 1}}),
                   sym(2, {{2, 1, 1}})));
  g.push_back(pair(sym(6, {{2, 1, 1}, {3, 2, 1}, {4, 2, -2}}), sym(2, {{2, 2, 1}})));
  g.push_back(pair(sym(6, {{2, 1, -1}, {3, 1, -2}, {4, 1, 1}}), MpMatrix(2, 2)));
  g.push_back(pair(sym(6, {{2, 2, -2}, {3, 2, -2}, {4, 2, 1}}), MpMatrix(2, 2)));
  g.push_back(pair(sym(6, {{3, 3, 1}, {4, 4, 1}, {5, 5, 1}, {6, 6, 1}}), MpMatrix(2, 2)));
  return g;
}

PerturbedFamily x5_family(std::string name, std::initializer_list<Entry> entries) {
  PerturbedFamily f;
  f.name = std::move(name);
  f.base = expprimal();
  f.deltas.emplace(5, pair(sym(6, entries), MpMatrix(2, 2)));
  return f;
}

}  // namespace

SdpProblem expprimal() {
  const auto g = displayed_coefficients();
  std::vector<BlockMatrix> a;
  for (std::size_t k = 1; k <= 6; ++k) a.push_back(-g[k]);
  MpVector b(6);
  b[5] = -1;
  return make_problem({6, 2}, -g[0], std::move(a), std::move(b));
}

BlockMatrix lmi_coefficient(const SdpProblem& prob, std::size_t k) {
  return k == 0 ? -prob.a0 : -prob.a.at(k - 1);
}

// Stored entries are the negated displayed ones, so "-2 into -2(1+eps)" is a
// change of +2 eps in the stored (2,2) entry, and so on.
PerturbedFamily p1_family(const MpScalar& eps) { return x5_family("P1", {{2, 2, 2 * eps}}); }

PerturbedFamily p2_family(const MpScalar& eps) { return x5_family("P2", {{3, 2, 2 * eps}}); }

PerturbedFamily p3_family(const MpScalar& eps) { return x5_family("P3", {{4, 2, -eps}}); }

SdpProblem toy_1x1() {
  return make_problem({1}, BlockMatrix({MpMatrix{{1}}}), {BlockMatrix({MpMatrix{{1}}})},
                      MpVector{MpScalar(1)});
}

PerturbedFamily lost_feasibility_family() {
  const MpMatrix off{{0, 1}, {1, 0}};
  PerturbedFamily f;
  f.name = "lost_feasibility";
  f.base = make_problem({2}, BlockMatrix({MpMatrix{{0, 0}, {0, 1}}}),
                        {BlockMatrix({MpMatrix{{1, 0}, {0, 0}}}), BlockMatrix({off}),
                         BlockMatrix({off})},
                        MpVector{MpScalar(2), MpScalar(2), MpScalar(2)});
  f.deltas.emplace(3, BlockMatrix({off}));
  return f;
}

BlockMatrix lost_feasibility_x0() { return BlockMatrix({MpMatrix{{2, 1}, {1, 1}}}); }

PerturbedFamily template_family() {
  PerturbedFamily f;
  f.name = "template";
  f.base = expprimal();
  // Arbitrary values in the free positions; x1 and x4 are left untouched.
  const long seeds[] = {2, 3, 5, 6};
  for (long k : seeds) {
    MpMatrix b1(6, 6);
    for (std::size_t i = 1; i <= 6; ++i) {
      const MpScalar v(static_cast<long>((k * 7 + static_cast<long>(i) * 3) % 11) - 5);
      b1(i - 1, 0) = v;
      b1(0, i - 1) = v;
    }
    MpMatrix b2{{MpScalar(k), MpScalar(1 - k)}, {MpScalar(1 - k), MpScalar(0)}};
    f.deltas.emplace(static_cast<std::size_t>(k), pair(std::move(b1), std::move(b2)));
  }
  return f;
}

MpVector feasible_sequence(long n) {
  const MpScalar gamma = -sqrt(MpScalar(5));
  const MpScalar nn(n);
  return MpVector{nn, MpScalar(0), MpScalar(0), -nn, gamma / 4, -gamma + 1 / nn};
}

BlockMatrix rank1_dual_point() {
  const MpVector v{0, -4, 1, -2, -sqrt(MpScalar(5)), 0};
  MpMatrix x1(6, 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) x1(i, j) = v[i] * v[j] / 10;
  }
  return pair(std::move(x1), MpMatrix{{0, 0}, {0, 4}});
}

MpMatrix p1_reduced_slack() { return sym(4, {{3, 1, -1}, {3, 2, -1}}); }

}  // namespace sdpsens::sdp::fixtures
