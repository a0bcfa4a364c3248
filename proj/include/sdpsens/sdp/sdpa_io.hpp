#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdpsens/sdp/problem.hpp"

namespace sdpsens::sdp {

// SDPA sparse format. SDPA reads matrix 0 as F0 in "max F0 . Y s.t. F_k . Y = c_k",
// so the file holds F0 = -A0, F_k = A_k and c = b.

struct ReadResult {
  SdpProblem problem;
  /// Non-fatal diagnostics, e.g. literals too short for the working precision.
  std::vector<std::string> warnings;
};

/// Throws ParseError (with 1-based line number).
ReadResult read_sdpa(std::istream& in);
ReadResult read_sdpa_file(const std::string& path);

void write_sdpa(std::ostream& out, const SdpProblem& prob);
void write_sdpa_file(const std::string& path, const SdpProblem& prob);

/// Sidecar manifest written next to a .dat-s file.
nlohmann::json manifest(const SdpProblem& prob, const nlohmann::json& family_meta = {});

}  // namespace sdpsens::sdp
