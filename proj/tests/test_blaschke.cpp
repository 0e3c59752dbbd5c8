#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hardylab/blaschke.hpp>

using namespace hardylab;

TEST_CASE("geometric series coefficients") {
  const Vec g = series::geometric(cplx(0.5, 0.0), 6);
  for (int d = 0; d <= 6; ++d) CHECK(std::abs(g[d] - std::pow(0.5, d)) < 1e-15);
}

TEST_CASE("truncated product matches hand convolution") {
  Vec a(4), b(4);
  a << 1, 2, 0, 1;
  b << 3, 1, 0, 0;
  const Vec c = series::mul(a, b);
  CHECK(std::abs(c[0] - 3.0) < 1e-15);
  CHECK(std::abs(c[1] - 7.0) < 1e-15);
  CHECK(std::abs(c[2] - 2.0) < 1e-15);
  CHECK(std::abs(c[3] - 3.0) < 1e-15);
}

TEST_CASE("single factor taylor expansion") {
  // (z - 1/2)/(1 - z/2) = -1/2 + (3/4) z + (3/8) z^2 + (3/16) z^3 + ...
  const BlaschkeProduct B({cplx(0.5, 0.0)});
  const Vec t = B.taylor(3);
  CHECK(std::abs(t[0] - cplx(-0.5, 0.0)) < 1e-12);
  CHECK(std::abs(t[1] - cplx(0.75, 0.0)) < 1e-12);
  CHECK(std::abs(t[2] - cplx(0.375, 0.0)) < 1e-12);
  CHECK(std::abs(t[3] - cplx(0.1875, 0.0)) < 1e-12);
}

TEST_CASE("evaluation is unimodular on the circle and vanishes at zeros") {
  const BlaschkeProduct B({cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(-0.4, 0.1)});
  for (const cplx& w : B.zeros()) CHECK(std::abs(B.eval(w)) < 1e-14);
  for (int k = 0; k < 8; ++k) {
    const cplx z = std::polar(1.0, 0.7 * k);
    CHECK(std::abs(std::abs(B.eval(z)) - 1.0) < 1e-12);
  }
}

TEST_CASE("taylor series agrees with pointwise evaluation inside the disk") {
  const BlaschkeProduct B({cplx(0.0, 0.0), cplx(0.35, 0.2)});
  const Vec t = B.taylor(200);
  for (int k = 0; k < 5; ++k) {
    const cplx z = std::polar(0.5, 1.1 * k);
    CHECK(std::abs(series::eval(t, z) - B.eval(z)) < 1e-12);
  }
}

TEST_CASE("canonical zero order makes equal multisets compare equal") {
  const BlaschkeProduct a({cplx(0.3, 0.1), cplx(0.0, 0.0), cplx(-0.2, 0.4)});
  const BlaschkeProduct b({cplx(-0.2, 0.4), cplx(0.3, 0.1), cplx(0.0, 0.0)});
  CHECK(a == b);
  CHECK(a.zeros()[0] == cplx(0.0, 0.0));
}

TEST_CASE("divisibility is multiset inclusion") {
  const BlaschkeProduct B({cplx(0.0, 0.0), cplx(0.3, 0.1)});
  const BlaschkeProduct Bp({cplx(0.3, 0.1), cplx(0.0, 0.0), cplx(0.5, 0.0)});
  CHECK(B.divides(Bp));
  CHECK_FALSE(Bp.divides(B));
  CHECK(B.divides(B));
}

TEST_CASE("compose_power_series frozen example") {
  // blocks (1, 2) composed with B = (z - 1/2)/(1 - z/2), degree 2:
  // 1 + 2 B = 0 + (3/2) z + (3/4) z^2 + ...
  const BlaschkeProduct B({cplx(0.5, 0.0)});
  Vec b0(1), b1(1);
  b0 << cplx(1, 0);
  b1 << cplx(2, 0);
  const Mat out = compose_power_series({b0, b1}, B, 2);
  REQUIRE(out.rows() == 1);
  CHECK(std::abs(out(0, 0)) < 1e-12);
  CHECK(std::abs(out(0, 1) - cplx(1.5, 0.0)) < 1e-12);
  CHECK(std::abs(out(0, 2) - cplx(0.75, 0.0)) < 1e-12);
}

TEST_CASE("compose_power_series is linear in the blocks") {
  const BlaschkeProduct B({cplx(0.0, 0.0), cplx(0.2, 0.3)});
  Vec b0(2), b1(2), z2(2);
  b0 << cplx(1, -1), cplx(0.5, 0);
  b1 << cplx(0, 2), cplx(-1, 0.25);
  z2 << cplx(0, 0), cplx(0, 0);
  const Mat s = compose_power_series({b0, b1}, B, 40);
  const Mat s0 = compose_power_series({b0, z2}, B, 40);
  const Mat s1 = compose_power_series({z2, b1}, B, 40);
  CHECK((s - s0 - s1).norm() < 1e-12);
}
