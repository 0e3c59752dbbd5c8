#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <hardylab/operators.hpp>

using namespace hardylab;

namespace {

std::mt19937_64 eng(19);

Vec rv(int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(u(eng), u(eng));
  return v;
}

FramePtr small_frame() {
  return frame_build(BlaschkeProduct({cplx(0, 0), cplx(0.3, 0.1)}), 2, 3, 100);
}

}  // namespace

TEST_CASE("orthonormalize drops dependent vectors") {
  const auto fr = small_frame();
  const Vec a = rv(fr->dim());
  const Vec b = rv(fr->dim());
  const Subspace S = orthonormalize(fr, {a, b, a + b, 2.0 * a});
  CHECK(S.dim() == 2);
  const Mat gram = S.onb.adjoint() * S.onb;
  CHECK((gram - Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK((S.project_coords(a) - a).norm() < 1e-10 * a.norm());
}

TEST_CASE("explicit scale stops noise from becoming dimensions") {
  const auto fr = small_frame();
  // residuals of projecting an orthonormal set onto itself: numerically zero
  std::vector<Vec> tiny;
  for (int i = 0; i < 3; ++i) tiny.push_back(1e-15 * rv(fr->dim()));
  CHECK(orthonormalize(fr, tiny, 1e-10, 1.0).dim() == 0);
  // without the anchor the relative cut keeps them
  CHECK(orthonormalize(fr, tiny, 1e-10).dim() == 3);
}

TEST_CASE("complement splits the space orthogonally") {
  const auto fr = small_frame();
  const Subspace S = orthonormalize(fr, {rv(fr->dim()), rv(fr->dim())});
  const Subspace C = complement(S);
  CHECK(S.dim() + C.dim() == fr->dim());
  CHECK((C.onb.adjoint() * S.onb).norm() < 1e-12);
  const Vec x = rv(fr->dim());
  CHECK((S.project_coords(x) + C.project_coords(x) - x).norm() < 1e-10 * x.norm());
}

TEST_CASE("intersection of overlapping spans") {
  const auto fr = small_frame();
  const Vec shared = rv(fr->dim());
  const Vec a = rv(fr->dim()), b = rv(fr->dim());
  const Subspace S1 = orthonormalize(fr, {shared, a});
  const Subspace S2 = orthonormalize(fr, {shared, b});
  const Subspace I = intersect(S1, S2);
  CHECK(I.dim() == 1);
  const Vec sn = shared / shared.norm();
  CHECK((I.project_coords(sn) - sn).norm() < 1e-8);
}

TEST_CASE("ominus removes exactly the given directions") {
  const auto fr = small_frame();
  const Vec a = rv(fr->dim()), b = rv(fr->dim()), c = rv(fr->dim());
  const Subspace M = orthonormalize(fr, {a, b, c});
  const Subspace S = orthonormalize(fr, {a});
  const Subspace R = ominus(M, S);
  CHECK(R.dim() == 2);
  CHECK((R.onb.adjoint() * S.onb).norm() < 1e-8);
  // R + S spans M again
  const Subspace U = span_union(R, S);
  CHECK(U.dim() == 3);
  CHECK((U.project_coords(b) - b).norm() < 1e-8 * b.norm());
}

TEST_CASE("principal angles on a known pair") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  Vec e1 = Vec::Zero(4), e2 = Vec::Zero(4), d = Vec::Zero(4);
  e1[0] = 1.0;
  e2[1] = 1.0;
  d[0] = d[1] = 1.0 / std::sqrt(2.0);
  const auto angles =
      principal_angles(orthonormalize(fr, {e1}), orthonormalize(fr, {d}));
  REQUIRE(angles.size() == 1);
  CHECK(angles[0] == doctest::Approx(std::acos(1.0 / std::sqrt(2.0))).epsilon(1e-10));
  const auto zero = principal_angles(orthonormalize(fr, {e2}),
                                     orthonormalize(fr, {e2}));
  CHECK(zero[0] < 1e-8);
}

TEST_CASE("invariant closure under the block left shift") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const OperatorMatrix T = toeplitz_adjoint(fr);
  Vec top = Vec::Zero(4);
  top[3] = 1.0;
  const Subspace K = krylov_closure({&T}, {WoldVector{fr, top}});
  CHECK(K.dim() == 4);  // z^3 pulls down the whole chain
  Vec mid = Vec::Zero(4);
  mid[1] = 1.0;
  const Subspace K2 = krylov_closure({&T}, {WoldVector{fr, mid}});
  CHECK(K2.dim() == 2);
  const Vec img = T.mat * K2.onb.col(0);
  CHECK((img - K2.project_coords(img)).norm() < 1e-12);
}
