#pragma once

#include "sdpsens/sdp/problem.hpp"

// Reference problems from the H-infinity example and its perturbations.
//
// The LMI is written as C + sum_k x_k G_k in S^6_+ x S^2_+ with G_k the
// displayed coefficient of x_k. We store A_k = -G_k, A0 = -C and b = -e6 so
// that y = x and A0 - sum y_k A_k = D (C + sum x_k G_k) D with
// D = diag(1,1,1,1,-1,-1): a congruence, hence the same feasible set.
namespace sdpsens::sdp::fixtures {

/// The H-infinity SDP in the stored convention.
SdpProblem expprimal();

/// Displayed LMI coefficient of x_k (k = 1..6), i.e. -A_k; k = 0 gives C.
BlockMatrix lmi_coefficient(const SdpProblem& prob, std::size_t k);

/// Families on the (2,2), (2,3)/(3,2) and (2,4)/(4,2) entries of the x5
/// coefficient. eps is baked into the direction so apply(family, 1) is the
/// perturbed problem with that eps; apply(family, t) scales it by t.
PerturbedFamily p1_family(const MpScalar& eps);
PerturbedFamily p2_family(const MpScalar& eps);
PerturbedFamily p3_family(const MpScalar& eps);

/// 1x1 toy: (D) inf{x : x = 1, x >= 0}, (P) sup{y : 1 - y >= 0}.
SdpProblem toy_1x1();

/// Strictly feasible 2x2 problem whose third constraint is tilted to
/// [[0, 1+t], [1+t, 0]] by the family.
PerturbedFamily lost_feasibility_family();
/// Strictly feasible X for the base of lost_feasibility_family().
BlockMatrix lost_feasibility_x0();

/// Perturbations supported only on the first row/column of block 1 and the
/// (1,1), (1,2) entries of block 2, for x2, x3, x5, x6.
PerturbedFamily template_family();

/// Point n of the feasible sequence approaching -sqrt(5).
MpVector feasible_sequence(long n);
/// Dual point (v v^T / 10, diag(0, 4)) with v = (0,-4,1,-2,-sqrt5,0); the
/// second block is forced by the x1..x3 constraints.
BlockMatrix rank1_dual_point();
/// The 4x4 matrix whose smallest eigenvalue is the optimum of the reduced (P1) dual.
MpMatrix p1_reduced_slack();

}  // namespace sdpsens::sdp::fixtures
