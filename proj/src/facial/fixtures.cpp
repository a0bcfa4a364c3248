#include "sdpsens/facial/fixtures.hpp"

namespace sdpsens::facial::fixtures {

namespace {

BlockMatrix pair(MpMatrix b1, MpMatrix b2) {
  return BlockMatrix(std::vector<MpMatrix>{std::move(b1), std::move(b2)});
}

}  // namespace

ReducingCertificate base_certificate() {
  MpMatrix u1(6, 6);
  u1(0, 0) = 2;
  MpMatrix u2(2, 2);
  u2(0, 0) = 1;
  return {MpVector{1, 0, 0, -1, 0, 0}, pair(std::move(u1), std::move(u2)),
          BlockMatrix::zeros({6, 2})};
}

Face first_face() {
  Face f = Face::whole({6, 2});
  f.r = {5, 1};
  return f;
}

ReducingCertificate p1_second_certificate(const MpScalar& eps) {
  MpMatrix u1(6, 6);
  u1(1, 1) = 2 * eps;
  MpMatrix v1(6, 6);
  v1(2, 0) = v1(0, 2) = -1;
  v1(3, 0) = v1(0, 3) = -1;
  return {MpVector{-1, 1, 0, 2, -1, 0}, pair(std::move(u1), MpMatrix(2, 2)),
          pair(std::move(v1), MpMatrix{{-1, 1}, {1, 0}})};
}

}  // namespace sdpsens::facial::fixtures
