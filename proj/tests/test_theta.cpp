#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "clsrivc/theta.hpp"

using namespace clsrivc;

TEST_CASE("polynomials from parameters") {
  ThetaVector theta{{0.5, 1.5}, {2.0}};
  CHECK(theta.n() == 2);
  CHECK(theta.m() == 0);
  CHECK(theta.dim() == 3);
  CHECK(theta.a_poly() == Polynomial({0.5, 1.5, 1.0}));
  CHECK(theta.b_poly() == Polynomial({2.0}));
  CHECK(theta.model().dc_gain() == doctest::Approx(2.0));
}

TEST_CASE("stacking round trip") {
  ThetaVector theta{{0.5, 1.5}, {2.0, -1.0}};
  Eigen::VectorXd v = theta.stacked();
  REQUIRE(v.size() == 4);
  CHECK(v(0) == 0.5);
  CHECK(v(1) == 1.5);
  CHECK(v(2) == 2.0);
  CHECK(v(3) == -1.0);
  ThetaVector back = ThetaVector::from_stacked(v, 2, 1);
  CHECK(back.a == theta.a);
  CHECK(back.b == theta.b);
  CHECK_THROWS(ThetaVector::from_stacked(v, 2, 2));
}

TEST_CASE("extraction from a model rescales the denominator") {
  // 3/(2p + 4) should normalize to A(0) = 1: a_1 = 0.5, b_0 = 0.75
  ThetaVector theta = ThetaVector::from_model(
      TransferFunction(Polynomial({3.0}), Polynomial({2.0, 4.0})));
  REQUIRE(theta.n() == 1);
  CHECK(theta.a[0] == doctest::Approx(0.5));
  CHECK(theta.b[0] == doctest::Approx(0.75));

  CHECK_THROWS(ThetaVector::from_model(
      TransferFunction(Polynomial({1.0}), Polynomial({1.0, 0.0}))));
}
