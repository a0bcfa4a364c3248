#pragma once

#include "sdpsens/facial/facial.hpp"

// Certificates displayed for the dual of the H-infinity SDP, in the stored
// sign convention of sdp::fixtures (so -sum y_k A_k = sum y_k G_k).
namespace sdpsens::facial::fixtures {

/// y = (1,0,0,-1,0,0), U = (2 e1 e1^T, e1 e1^T), V = 0 on the whole cone.
ReducingCertificate base_certificate();

/// The face left by base_certificate(): Q = I, residual dims (5, 1).
Face first_face();

/// Second step for (P1) with parameter eps, on first_face():
/// y = (-1,1,0,2,-1,0), U = (2 eps e2 e2^T, 0), V1 with (3,1) = (4,1) = -1 and
/// V2 = [[-1,1],[1,0]].
ReducingCertificate p1_second_certificate(const MpScalar& eps);

}  // namespace sdpsens::facial::fixtures
