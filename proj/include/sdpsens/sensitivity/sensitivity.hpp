#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdpsens/facial/facial.hpp"
#include "sdpsens/ipm/solver.hpp"

namespace sdpsens::sensitivity {

using mpla::MpScalar;
using mpla::MpVector;
using sdp::BlockMatrix;
using sdp::PerturbedFamily;
using sdp::SdpProblem;

struct SweepSpec {
  PerturbedFamily family;
  std::vector<MpScalar> t_grid;  // 0 is added when missing
  ipm::SolverConfig solver;
  facial::DiscriminantOptions facial = facial::DiscriminantOptions::defaults();
  bool run_facial = true;
  unsigned seed = 0;  // forwarded to the auxiliary SDPs
  unsigned workers = 0;  // 0: hardware concurrency
};

/// +-k*step for k = 1..kmax, plus 0, ascending.
std::vector<MpScalar> symmetric_grid(const MpScalar& step, int kmax);
/// "+-k*1e-5:1..100" (also "±k*..."), "k*1e-5:1..100", or a comma list "0,1e-3".
/// Throws Error on malformed input.
std::vector<MpScalar> parse_grid(const std::string& spec);

struct SweepRow {
  MpScalar t;
  MpScalar primal;  // b^T y
  MpScalar dual;  // A0 . X
  MpScalar gap;
  std::string status;  // solver status
  int iterations = 0;
  bool has_face = false;
  std::vector<std::size_t> r_blocks;
  std::size_t degree = 0;
  bool face_equals_base = false;
  bool rank_ok = false;
  std::string feasibility;  // strict, nonstrict, infeasible or unknown
  std::string error;
};

/// One row per grid point, ordered by t. Failures are recorded in the row.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Columns t, primal, dual, gap, degree, r_blocks, rank_ok, status.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// Two columns: t and primal(t) - primal(0).
void write_plot_data(std::ostream& out, const std::vector<SweepRow>& rows);

enum class ContinuityVerdict { Continuous, SuspectedJump };
std::string to_string(ContinuityVerdict v);

struct ContinuityReport {
  /// Estimated limsup of |v(t) - v(0)| as t -> 0 from the smallest-|t|
  /// decile: per side, the intercept of a line fitted to |dv| against |t|.
  MpScalar max_jump;
  MpScalar decile_max_delta;  // largest |dv| in the decile
  MpScalar modulus_estimate;  // max |dv| / |t| over the decile
  /// |dv| does not grow as |t| shrinks, on each side, within the decile.
  bool shrinking_near_zero = true;
  /// Rows on the base face with the rank condition whose |dv| exceeds C |t|,
  /// C fitted on the outer half of the grid.
  std::vector<MpScalar> lipschitz_flags;
  ContinuityVerdict verdict = ContinuityVerdict::Continuous;
};

/// Throws Error when no row sits at t = 0 or it failed.
ContinuityReport continuity_diagnostic(const std::vector<SweepRow>& rows,
                                       const MpScalar& jump_tol = MpScalar::parse("1e-6"));

struct AttainmentResult {
  bool attained = false;
  std::optional<MpVector> witness;  // y solving the complementarity system
  MpScalar residual;  // of that linear system
  MpScalar witness_min_eig;  // smallest eigenvalue of A0 - sum y A at the witness
  std::string detail;
};

/// Complementary slackness with an optimal X forces (A0 - sum y_k A_k) X = 0
/// and b^T y = A0 . X. Eigenvalues of X at or below tol * |X| count as zero,
/// those above sqrt(tol) * |X| span its range; anything between throws
/// RankAmbiguity. The linear system is declared inconsistent when its least
/// squares residual exceeds sqrt(tol) * scale.
AttainmentResult attainment_check(const SdpProblem& prob, const BlockMatrix& x,
                                  const MpScalar& tol);

struct Check {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct CertificateReport {
  std::vector<Check> checks;
  bool all_ok() const;
};

/// The feasible sequence and dual point for the base problem, and the value
/// of the (P1) dual after reduction. Residual bound 2^-200.
CertificateReport verify_value_certificates();

}  // namespace sdpsens::sensitivity
