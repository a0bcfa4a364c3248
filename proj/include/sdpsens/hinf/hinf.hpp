#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdpsens/facial/facial.hpp"
#include "sdpsens/sdp/problem.hpp"

namespace sdpsens::hinf {

using mpla::MpMatrix;
using mpla::MpScalar;
using sdp::PerturbedFamily;
using sdp::SdpProblem;

/// x' = A x + B1 w + B2 u,  z = C1 x + D11 w + D12 u.
struct ControlSystem {
  MpMatrix a, b1, b2, c1, d11, d12;

  std::size_t nx() const { return a.rows(); }
  std::size_t nw() const { return b1.cols(); }
  std::size_t nu() const { return b2.cols(); }
  std::size_t nz() const { return c1.rows(); }
  /// Throws DimensionMismatch.
  void validate() const;
};

/// The plant of the worked example.
ControlSystem system2();

nlohmann::json to_json(const ControlSystem& sys);
/// {"A": [[...]], "B1": ..., "B2": ..., "C1": ..., "D11": ..., "D12": ...};
/// entries may be numbers or decimal strings.
ControlSystem system_from_json(const nlohmann::json& j);
ControlSystem read_system_file(const std::string& path);

/// sup -x6 over the LMI
///   [ -He(A X1 + B2 X2)      *          *     ]
///   [ -C1 X1 - D12 X2      x6 I         *     ]  >= 0,   X1 >= 0
///   [ -B1^T               -D11^T      x6 I    ]
/// Variables: upper triangle of X1 row by row, then X2 row by row, then x6.
/// Stored as A_k = -G_k, A0 = -C, b = -e_last like sdp::fixtures::expprimal().
SdpProblem build_hinf_sdp(const ControlSystem& sys);

/// The twelve scalar entries of A, B2, C1, D12 for the 2-state example.
const std::vector<std::string>& parameter_names();
/// Throws UnknownParam. Names: a<ij>, b<i>, c<ij>, d<i> (1-based).
MpScalar& parameter(ControlSystem& sys, const std::string& name);

/// Derivative of build_hinf_sdp in one plant entry, as a family around sys:
/// apply(family, t) == build_hinf_sdp(sys with that entry + t).
PerturbedFamily matrixwise_family(const ControlSystem& sys, const std::string& param);

/// rank [A - lambda I, B2] = nx at every eigenvalue of A with Re < 0 and at
/// every supplied grid point with Re < 0.
bool stabilizability_check(const ControlSystem& sys,
                           const std::vector<std::complex<double>>& grid);

struct StrictnessResult {
  bool strict = true;  // the dual of the SDP is strictly feasible
  std::optional<std::complex<double>> witness;
  /// Exact real witness when it came out of the kernel computation.
  std::optional<MpScalar> witness_exact;
  std::string method;
};

/// Looks for lambda with Re(lambda) <= 0 and
/// rank [A - lambda I, B2; C1, D12] < nx + nu.
StrictnessResult nonstrict_feasibility_criterion(const ControlSystem& sys);

enum class FaceBehavior { Invariant, FullDimensional, Shrunk, Unknown };
std::string to_string(FaceBehavior b);

struct ClassifyOptions {
  std::vector<MpScalar> probes;  // default: 1e-16 and 1e-8, each with both signs
  facial::DiscriminantOptions facial;
  unsigned workers = 0;  // 0: hardware concurrency

  static ClassifyOptions defaults(int precision = 0);
};

struct ProbeOutcome {
  MpScalar t;
  std::vector<std::size_t> residual_dims;
  std::size_t degree = 0;
  FaceBehavior behavior = FaceBehavior::Unknown;
};

struct Classification {
  std::string param;
  FaceBehavior behavior = FaceBehavior::Unknown;
  std::vector<ProbeOutcome> probes;
  /// Eigenspan criterion with the rank condition, for Invariant verdicts.
  std::optional<facial::InvarianceReport> cross_check;
  std::string log;
};

/// Base minimal face, computed once and shared by the probes.
facial::FacialReductionResult base_reduction(const ControlSystem& sys,
                                             const facial::DiscriminantOptions& opt);

Classification classify_face_behavior(const ControlSystem& sys, const std::string& param,
                                      const facial::FacialReductionResult& base,
                                      const ClassifyOptions& opt);

/// All parameters, one worker per parameter; results in parameter order.
std::vector<Classification> classify_all(const ControlSystem& sys,
                                         const std::vector<std::string>& params,
                                         const ClassifyOptions& opt);

}  // namespace sdpsens::hinf
