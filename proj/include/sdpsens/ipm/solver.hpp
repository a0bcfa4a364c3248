#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sdpsens/sdp/problem.hpp"

namespace sdpsens::ipm {

using mpla::MpScalar;
using mpla::MpVector;
using sdp::BlockMatrix;
using sdp::SdpProblem;
using sdp::SolutionPair;

/// Parameters named after SDPA's parameter file. omegaStar is kept for
/// fidelity only; the initial point is always X = Z = lambdaStar * I.
struct SolverConfig {
  int maxIteration = 10000;
  MpScalar epsilonStar = MpScalar::parse("1e-50");
  MpScalar epsilonDash = MpScalar::parse("1e-50");
  MpScalar lambdaStar = MpScalar::parse("1e4");
  MpScalar omegaStar = MpScalar(2);
  MpScalar lowerBound = MpScalar::parse("-1e5");
  MpScalar upperBound = MpScalar::parse("1e5");
  MpScalar betaStar = MpScalar::parse("0.5");
  MpScalar betaBar = MpScalar::parse("0.5");
  MpScalar gammaStar = MpScalar::parse("0.5");
  int precision = 1024;

  /// Throws Error naming the violated bound.
  void validate() const;
  /// Sets epsilonStar and epsilonDash together.
  void set_tolerance(const MpScalar& delta);
};

/// key=value lines (or SDPA-style "value  key" lines); '#' and '*' start comments.
/// Unknown keys throw UnknownParam.
SolverConfig read_param_file(const std::string& path);
SolverConfig parse_params(std::istream& in);

enum class Status {
  Optimal,
  PrimalInfeasibleDetected,  // (P) infeasible: (D) objective fell below lowerBound
  DualInfeasibleDetected,  // (D) infeasible: inconsistent equality constraints
  Unbounded,  // (P) objective exceeded upperBound
  IterationCap,
  NumericalBreakdown,
};

std::string to_string(Status s);

struct IterationRecord {
  double mu;
  double primal_residual;
  double dual_residual;
  double primal_obj;
  double dual_obj;
  double step_primal;
  double step_dual;
};

struct SolveReport {
  Status status = Status::NumericalBreakdown;
  SolutionPair solution;
  int iterations = 0;
  MpScalar final_mu;
  MpScalar primal_residual;
  MpScalar dual_residual;
  MpScalar relative_gap;
  std::vector<IterationRecord> residual_history;
  std::string message;
};

/// Infeasible primal-dual path following with the HKM direction and a
/// Mehrotra-type predictor-corrector. Linearly dependent constraints are
/// merged before the iteration; y is mapped back to the original indexing.
SolveReport solve(const SdpProblem& prob, const SolverConfig& cfg);

/// X_t = (I - S^+ S) vec(X0) + S^+ b for the constraint matrix S of prob.
/// Throws Infeasible when b is not in the range of S within tol.
BlockMatrix strictly_feasible_point(const SdpProblem& prob, const BlockMatrix& x0,
                                    const MpScalar& tol);

/// Necessary saddle-point test L(X~, y) <= L(X~, y~) <= L(X, y~) over probes.
struct SaddleProbe {
  BlockMatrix x;
  MpVector y;
};
bool check_saddle_point(const SdpProblem& prob, const BlockMatrix& x_tilde,
                        const MpVector& y_tilde, const std::vector<SaddleProbe>& probes,
                        const MpScalar& tol);

}  // namespace sdpsens::ipm
