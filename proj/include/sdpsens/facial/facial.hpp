#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sdpsens/ipm/solver.hpp"
#include "sdpsens/sdp/problem.hpp"

namespace sdpsens::facial {

using mpla::MpMatrix;
using mpla::MpScalar;
using mpla::MpVector;
using sdp::BlockMatrix;
using sdp::PerturbedFamily;
using sdp::SdpProblem;

/// {Q (0 + X) Q^T : X in S^r_+} per block. The residual directions are the
/// last r columns of Q.
struct Face {
  std::vector<MpMatrix> q;
  std::vector<std::size_t> r;

  static Face whole(const std::vector<std::size_t>& dims);
  std::vector<std::size_t> dims() const;
  std::size_t num_blocks() const { return q.size(); }
  std::size_t total_residual() const;
  bool is_whole() const;
  /// n x r matrix of residual directions for one block.
  MpMatrix residual_basis(std::size_t blk) const;
};

/// (Q^T M Q)_3 for every block.
std::vector<MpMatrix> face_part(const Face& f, const BlockMatrix& m);
/// Largest |entry| of (Q^T M Q)_3 over blocks; M is in F^perp iff this is 0.
MpScalar face_part_norm(const Face& f, const BlockMatrix& m);

/// b^T y = 0, -sum y_k A_k = U + V, U psd, V in F^perp, U + V not in F^perp.
struct ReducingCertificate {
  MpVector y;
  BlockMatrix u;
  BlockMatrix v;
};

/// Faces compare by the ranges of their residual bases.
enum class FaceRelation { Equal, FSubsetG, GSubsetF, Incomparable };
std::string to_string(FaceRelation r);

/// F cap {U}^perp. Eigenvalues of (Q^T U Q)_3 at or below tol count as zero.
/// Throws NotPSD when (Q^T U Q)_3 has an eigenvalue below -tol.
Face intersect_face(const Face& f, const BlockMatrix& u, const MpScalar& tol);

/// The problem in the residual coordinates: (Q^T A_k Q)_3 . X = b_k over
/// S^r_+ per block. Blocks with r = 0 are dropped.
SdpProblem restrict_to_face(const SdpProblem& prob, const Face& f);
/// Same, then the reduced constraints (and b) are projected onto the singular
/// directions of the constraint matrix above rank_tol * sigma_max. A computed
/// face leaves dependent constraints only nearly dependent, with an
/// inconsistency of the face's accuracy; this makes them dependent again.
SdpProblem restrict_to_face(const SdpProblem& prob, const Face& f, const MpScalar& rank_tol);

struct DiscriminantOptions {
  ipm::SolverConfig solver;  // for the auxiliary SDP
  MpScalar tol_cert;  // largest tolerated -lambda_min of the normalized W
  MpScalar tol_zero;  // eigenvalue cut when forming the next face
  unsigned seed = 0;  // rotates the auxiliary variables; 0 keeps them as is

  /// Defaults derived from the working precision.
  static DiscriminantOptions defaults(int precision = 0);
};

enum class DiscriminantOutcome { Certificate, Farkas, NoneFound };
std::string to_string(DiscriminantOutcome o);

struct DiscriminantResult {
  DiscriminantOutcome outcome = DiscriminantOutcome::NoneFound;
  /// Set for Certificate; for Farkas only y is meaningful.
  std::optional<ReducingCertificate> certificate;
  MpScalar tau;  // optimal relaxation of the auxiliary SDP
  std::string log;
};

/// Searches for a reducing certificate on face F via a trace-normalized
/// auxiliary SDP. Also reports y with b^T y > 0 and -sum y_k A_k in F^* (or
/// sum y_k A_k = 0 on F), which prove (D) infeasible.
DiscriminantResult solve_discriminant(const SdpProblem& prob, const Face& f,
                                      const DiscriminantOptions& opt);

/// Checks the four certificate conditions from scratch.
bool verify_certificate(const SdpProblem& prob, const Face& f, const ReducingCertificate& cert,
                        const MpScalar& tol, std::string* why = nullptr);

enum class ReductionStatus { MinimalFaceFound, InfeasibleDetected };
std::string to_string(ReductionStatus s);

struct FacialReductionResult {
  std::vector<Face> faces;  // faces[0] is the whole cone
  std::vector<ReducingCertificate> certificates;
  std::size_t degree = 0;
  ReductionStatus status = ReductionStatus::MinimalFaceFound;
  std::string message;

  const Face& minimal_face() const { return faces.back(); }
};

/// Throws SolverFailure when the auxiliary solve breaks down.
FacialReductionResult facial_reduction(const SdpProblem& prob, const DiscriminantOptions& opt);

/// rank <(Q^T A_k Q)_3> with every block's part concatenated.
std::size_t face_rank(const SdpProblem& prob, const Face& f, const MpScalar& tol);
/// Rank equality against the base problem at each t.
std::vector<bool> rank_condition(const PerturbedFamily& fam, const Face& f_min,
                                 const std::vector<MpScalar>& t_grid, const MpScalar& tol);

FaceRelation compare_faces(const Face& f, const Face& g, const MpScalar& tol);

enum class Verdict { Holds, Fails, NotFactorable };
std::string to_string(Verdict v);

struct InvarianceReport {
  Verdict verdict = Verdict::Fails;
  bool structural = false;  // the criterion's own condition on the E_k
  bool rank_ok = false;  // rank condition on the probe grid
  std::string reason;
};

/// Perturbed indices must avoid every nonzero y^i_k. The verdict is the
/// structural test alone; rank_ok is reported alongside.
InvarianceReport invariance_by_support(const FacialReductionResult& seq,
                                       const PerturbedFamily& fam, const MpScalar& tol);
/// Support test plus E_k in F_min^perp, which forces the rank condition.
InvarianceReport invariance_by_orthogonality(const FacialReductionResult& seq,
                                             const PerturbedFamily& fam, const MpScalar& tol);
/// sum_k y^i_k E_k in L_i + F_{i-1}^perp for each i, where L_i is spanned by
/// q q^T over the positive eigenvectors of U^i. Holds needs the rank condition too.
InvarianceReport invariance_by_eigenspan(const FacialReductionResult& seq,
                                         const PerturbedFamily& fam, const MpScalar& tol);
/// E_k = w_k E with w orthogonal to every y^i. Holds needs the rank condition too.
InvarianceReport invariance_by_proportionality(const FacialReductionResult& seq,
                                               const PerturbedFamily& fam,
                                               const MpScalar& tol);

nlohmann::json to_json(const Face& f);
Face face_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReducingCertificate& c);
ReducingCertificate certificate_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FacialReductionResult& r);
FacialReductionResult reduction_from_json(const nlohmann::json& j);

}  // namespace sdpsens::facial
