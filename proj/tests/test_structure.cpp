#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <hardylab/structure.hpp>

using namespace hardylab;

namespace {

std::mt19937_64 eng(31);

Vec rv(int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = cplx(u(eng), u(eng));
  return v;
}

Vec unit(int n, int i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

}  // namespace

TEST_CASE("one-dimensional decomposition by hand") {
  // B = z, m = 1, N = 4, U = V = 1, M = span{1}: p = 1, G = 1,
  // K = span{(1,0) at block 0}, every residual identically zero
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const WoldVector one{fr, unit(4, 0)};
  const Subspace M = orthonormalize(fr, {unit(4, 0)});
  const auto res = decompose_thm32(M, {one}, {one}, 1e-10);
  CHECK(res.p == 1);
  CHECK((res.G[0].coords - unit(4, 0)).norm() < 1e-14);
  REQUIRE(res.K.dim() == 1);
  CHECK(std::abs(std::abs(res.K.onb(0, 0)) - 1.0) < 1e-14);
  CHECK(res.K.onb.col(0).tail(res.concat->dim() - 1).norm() < 1e-14);
  CHECK(res.invariance_residual < 1e-14);
  CHECK(res.parseval_gap < 1e-14);
  CHECK(res.reconstruction_residual < 1e-14);
  CHECK(res.k_invariance_residual < 1e-14);
  CHECK(res.r_support_residual < 1e-14);
  CHECK(res.isometry_residual < 1e-14);
  CHECK(res.max_terminal_ratio < 1e-14);
  const auto rep = verify_canonical_conditions(res, M, 1e-10);
  CHECK(rep.pass);
}

TEST_CASE("orthogonal perturbation pairs take the trivial branch") {
  // M closed under the plain left shift, U orthogonal to M: p = 0
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const Subspace M = orthonormalize(fr, {unit(4, 0), unit(4, 1)});
  const WoldVector u{fr, unit(4, 3)};
  const WoldVector v{fr, rv(4)};
  const auto res = decompose_thm32(M, {u}, {v}, 1e-10);
  CHECK(res.p == 0);
  CHECK(res.reconstruction_residual < 1e-12);
  CHECK(res.parseval_gap < 1e-12);
  CHECK(res.max_terminal_ratio < 1e-12);
}

TEST_CASE("invariance hypothesis failure is reported, not silently absorbed") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const Subspace M = orthonormalize(fr, {unit(4, 1)});  // span{z}, not invariant
  const WoldVector u{fr, unit(4, 3)}, v{fr, unit(4, 3)};
  CHECK_THROWS_AS(decompose_thm32(M, {u}, {v}, 1e-10), HypothesisError);
  try {
    decompose_thm32(M, {u}, {v}, 1e-10);
  } catch (const HypothesisError& e) {
    CHECK(e.hypothesis == "invariance");
  }
}

TEST_CASE("converse checker rejects a tampered K") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const WoldVector one{fr, unit(4, 0)};
  const Subspace M = orthonormalize(fr, {unit(4, 0)});
  const auto res = decompose_thm32(M, {one}, {one}, 1e-10);
  CHECK(check_thm36_converse(res.G, res.K, M, 1e-10) < 1e-12);
  // move K off the shift-invariant lattice
  Subspace bad = res.K;
  bad.onb = Mat(res.concat->dim(), 1);
  bad.onb.setZero();
  bad.onb(res.concat->dim() - 2, 0) = 1.0;  // top block only: not invariant
  CHECK_THROWS_AS(check_thm36_converse(res.G, bad, M, 1e-10), HypothesisError);
}

TEST_CASE("defect vanishes exactly for invariant subspaces") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0), cplx(0.2, 0.1)}), 2, 3, 100);
  const OperatorMatrix T = toeplitz_adjoint(fr);
  const int lm = fr->l() * fr->m();
  // blocks 0..1 span: invariant under the left shift
  std::vector<Vec> vs;
  for (int i = 0; i < 2 * lm; ++i) vs.push_back(unit(fr->dim(), i));
  const Subspace M = orthonormalize(fr, vs);
  CHECK(almost_defect(T, M).defect == 0);
  // a generic subspace is not invariant
  const Subspace R = orthonormalize(fr, {rv(fr->dim()), rv(fr->dim())});
  const auto d = almost_defect(T, R);
  CHECK(d.defect > 0);
  CHECK(d.residual < 1e-12);
  // dropping any defect direction breaks the containment by a visible margin
  for (int drop = 0; drop < d.defect; ++drop) {
    std::vector<Vec> keep;
    for (int i = 0; i < R.dim(); ++i) keep.push_back(R.onb.col(i));
    for (int i = 0; i < d.defect; ++i)
      if (i != drop) keep.push_back(d.basis[i].coords);
    const Subspace MJ = orthonormalize(fr, keep, 1e-10, 1.0);
    const Mat rem = T.mat * R.onb - MJ.onb * (MJ.onb.adjoint() * (T.mat * R.onb));
    CHECK(op_norm(rem) > 0.05);
  }
}

TEST_CASE("single defect representation by hand") {
  // B = B' = z, m = 1, M = span{z}: contained case, J = 1, K = span{1}
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const Subspace M = orthonormalize(fr, {unit(4, 1)});
  const BlaschkeProduct Bp({cplx(0, 0)});
  const auto out = nearly_defect_decompose(M, Bp, 1e-10);
  CHECK(out.contained);
  CHECK(out.p == 0);
  CHECK(out.defect == 1);
  REQUIRE(out.Js.size() == 1);
  CHECK(std::abs(std::abs(out.Js[0].coords[0]) - 1.0) < 1e-14);
  REQUIRE(out.K.dim() == 1);
  CHECK(std::abs(std::abs(out.K.onb(0, 0)) - 1.0) < 1e-14);
  CHECK(out.norm_gap < 1e-14);
  CHECK(out.reconstruction_residual < 1e-14);
  CHECK(out.max_terminal_ratio < 1e-14);
  const auto rep = nearly_defect_converse(out.G, out.K, out.Js, Bp, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.defect <= 1);
}

TEST_CASE("intersection with a multiplier range by kernel computation") {
  // M = span{1, z} inside B = z frame; T_z H^2 cuts out span{z}
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const Subspace M = orthonormalize(fr, {unit(4, 0), unit(4, 1)});
  const BlaschkeProduct Bp({cplx(0, 0)});
  const Subspace X = intersect_multiplier_range(M, Bp);
  REQUIRE(X.dim() == 1);
  CHECK(std::abs(std::abs(X.onb(1, 0)) - 1.0) < 1e-12);
  const auto wb = wandering_bound_lemma39(M, Bp, 1e-8);
  CHECK(wb.dim == 1);
  CHECK(wb.bound == 1);
}

TEST_CASE("nearly invariant check distinguishes the two cases") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0)}), 1, 4, 30);
  const BlaschkeProduct Bp({cplx(0, 0)});
  // span{1, z}: T*(z) = 1 stays inside
  const Subspace good = orthonormalize(fr, {unit(4, 0), unit(4, 1)});
  CHECK(nearly_check(good, Bp, 1e-10).ok);
  // span{z^2}: T*(z^2) = z leaves
  const Subspace bad = orthonormalize(fr, {unit(4, 2)});
  CHECK_FALSE(nearly_check(bad, Bp, 1e-10).ok);
  CHECK_THROWS_AS(nearly_decompose_thm313(bad, Bp, 1e-10), HypothesisError);
}

TEST_CASE("divisibility hypothesis is enforced") {
  const auto fr = frame_build(BlaschkeProduct({cplx(0, 0), cplx(0.3, 0.1)}), 1, 3, 100);
  const Subspace M = orthonormalize(fr, {unit(fr->dim(), 0)});
  const BlaschkeProduct Bp({cplx(0, 0), cplx(0.5, 0.0)});  // does not divide
  CHECK_THROWS_AS(nearly_decompose_thm313(M, Bp, 1e-10), HypothesisError);
  CHECK_THROWS_AS(nearly_defect_decompose(M, Bp, 1e-10), HypothesisError);
}
