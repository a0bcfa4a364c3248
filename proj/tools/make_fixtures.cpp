// Regenerates fixtures/ from the in-code reference problems.
// Usage: make_fixtures <dir>

#include <cmath>
#include <fstream>
#include <iostream>

#include "sdpsens/hinf/hinf.hpp"
#include "sdpsens/mpla/scalar.hpp"
#include "sdpsens/sdp/fixtures.hpp"
#include "sdpsens/sdp/sdpa_io.hpp"

using namespace sdpsens;
using nlohmann::json;

namespace {

void write_pair(const std::string& dir, const std::string& stem, const sdp::SdpProblem& prob,
                const json& meta) {
  sdp::write_sdpa_file(dir + "/" + stem + ".dat-s", prob);
  std::ofstream(dir + "/" + stem + ".json") << sdp::manifest(prob, meta).dump(2) << '\n';
}

json family_meta(const std::string& name, const std::string& entry, const std::string& eps) {
  return {{"name", name}, {"variable", 5}, {"block", 1}, {"entries", entry}, {"eps", eps}};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 2;
  }
  const std::string dir = argv[1];
  mpla::set_default_precision(1024);
  const auto eps = mpla::MpScalar::parse("1e-16");
  const auto base = sdp::fixtures::expprimal();

  write_pair(dir, "expprimal", base, json{{"name", "base"}});
  // Same data; reduce works on the inf side, which is what the file's objective row encodes.
  write_pair(dir, "expprimal-dual", base, json{{"name", "base"}, {"side", "inf A0 . X"}});
  write_pair(dir, "p1", sdp::apply(sdp::fixtures::p1_family(eps), mpla::MpScalar(1)),
             family_meta("P1", "(2,2)", "1e-16"));
  write_pair(dir, "p2", sdp::apply(sdp::fixtures::p2_family(eps), mpla::MpScalar(1)),
             family_meta("P2", "(2,3),(3,2)", "1e-16"));
  write_pair(dir, "p3", sdp::apply(sdp::fixtures::p3_family(eps), mpla::MpScalar(1)),
             family_meta("P3", "(2,4),(4,2)", "1e-16"));

  // Integer plant, so plain JSON numbers keep it readable.
  json plant = hinf::to_json(hinf::system2());
  for (auto& [key, rows] : plant.items()) {
    for (auto& row : rows) {
      for (auto& v : row) v = std::lround(std::stod(v.get<std::string>()));
    }
  }
  std::ofstream(dir + "/system2.json") << plant.dump() << '\n';

  std::ofstream prm(dir + "/defaults.prm");
  prm << "# solver parameters; epsilonStar/epsilonDash are overridden by --epsilon\n"
         "maxIteration = 10000\n"
         "epsilonStar  = 1.0e-50\n"
         "epsilonDash  = 1.0e-50\n"
         "lambdaStar   = 1.0e+4\n"
         "omegaStar    = 2.0\n"
         "lowerBound   = -1.0e+5\n"
         "upperBound   = 1.0e+5\n"
         "betaStar     = 0.5\n"
         "betaBar      = 0.5\n"
         "gammaStar    = 0.5\n"
         "precision    = 1024\n";
  return 0;
}
