#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "clsrivc/lti.hpp"
#include "test_util.hpp"

using namespace clsrivc;
using testutil::random_hurwitz_poly;

TEST_CASE("transfer function basics") {
  CHECK_THROWS(TransferFunction(Polynomial({1, 0, 0}), Polynomial({1, 1})));
  CHECK_THROWS(TransferFunction(Polynomial({1}), Polynomial::zero()));

  TransferFunction g(Polynomial({1}), Polynomial({0.5, 1.5, 1}));
  CHECK(g.dc_gain() == doctest::Approx(1.0));
  CHECK(g.is_strictly_proper());

  TransferFunction c(Polynomial({2, 2}), Polynomial({1, 10}));
  CHECK(c.dc_gain() == doctest::Approx(0.2));
  CHECK_FALSE(c.is_strictly_proper());

  TransferFunction gc = g.series(c);
  CHECK(gc.dc_gain() == doctest::Approx(0.2));

  CHECK_THROWS(TransferFunction(Polynomial({1}), Polynomial({1, 0})).dc_gain());
}

TEST_CASE("realization splits off feedthrough") {
  // (p + 2)/(p + 1) = 1 + 1/(p + 1)
  StateSpace ss = TransferFunction(Polynomial({1, 2}), Polynomial({1, 1})).realize();
  REQUIRE(ss.order() == 1);
  CHECK(ss.d == doctest::Approx(1.0));
  CHECK(ss.a(0, 0) == doctest::Approx(-1.0));
  CHECK(ss.c(0) * ss.b(0) == doctest::Approx(1.0));

  StateSpace strict = TransferFunction(Polynomial({1}), Polynomial({0.5, 1.5, 1})).realize();
  CHECK(strict.order() == 2);
  CHECK(strict.d == 0.0);
}

TEST_CASE("sensitivities share the closed-loop characteristic polynomial") {
  TransferFunction g(Polynomial({1}), Polynomial({0.5, 1.5, 1}));
  TransferFunction c(Polynomial({2, 2}), Polynomial({1, 10}));
  SensitivitySet s = sensitivities(g, c);
  const Polynomial q_expected({0.5, 6.5, 18, 12});
  CHECK(s.q == q_expected);
  CHECK(s.s.den() == q_expected);
  // S + GCS = 1 pointwise
  for (double w : {0.0, 0.5, 2.0, 9.0}) {
    const std::complex<double> jw(0.0, w);
    const auto total = s.s.num().eval(jw) / s.s.den().eval(jw) +
                       s.gcs.num().eval(jw) / s.gcs.den().eval(jw);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("derivative filter properness") {
  const Polynomial den({0.5, 1.5, 1});
  TransferFunction f2 = derivative_filter(2, Polynomial::one(), den);
  CHECK(f2.num() == Polynomial({1, 0, 0}));
  CHECK_FALSE(f2.is_strictly_proper());
  CHECK_THROWS(derivative_filter(3, Polynomial::one(), den));
  CHECK_THROWS(derivative_filter(1, Polynomial({1, 0, 1}), den));
}

TEST_CASE("zoh discretization analytic oracles") {
  const double h = 0.1;
  // 1/(s+1): pole e^{-h}, unit dc gain
  DiscreteFilter f = discretize(TransferFunction(Polynomial({1}), Polynomial({1, 1})), h, Hold::kZoh);
  auto poles = f.poles();
  REQUIRE(poles.size() == 1);
  CHECK(std::abs(poles[0] - std::complex<double>(std::exp(-h), 0)) < 1e-14);
  CHECK(std::abs(f.eval(1.0) - 1.0) < 1e-14);

  // static gain
  DiscreteFilter g = discretize(TransferFunction(Polynomial({3.5}), Polynomial({1})), h, Hold::kZoh);
  CHECK(std::abs(g.eval(std::complex<double>(0.3, 0.4)) - 3.5) < 1e-14);

  // integrator: h/(z-1), i.e. h z^-1/(1 - z^-1)
  DiscreteFilter i = discretize(TransferFunction(Polynomial({1}), Polynomial({1, 0})), h, Hold::kZoh);
  const std::complex<double> z(1.7, 0.2);
  CHECK(std::abs(i.eval(z) - h / (z - 1.0)) < 1e-13);
}

TEST_CASE("zoh step response matches the continuous solution") {
  const double h = 0.1;
  DiscreteFilter f = discretize(TransferFunction(Polynomial({1}), Polynomial({1, 1})), h, Hold::kZoh);
  std::vector<double> step(80, 1.0);
  std::vector<double> y = f.apply(step);
  for (int k = 0; k < 80; ++k) {
    CHECK(y[k] == doctest::Approx(1.0 - std::exp(-k * h)).epsilon(1e-13));
  }
}

TEST_CASE("foh ramp response matches the continuous solution") {
  const double h = 0.1;
  DiscreteFilter f = discretize(TransferFunction(Polynomial({1}), Polynomial({1, 1})), h, Hold::kFoh);
  std::vector<double> ramp(80);
  for (int k = 0; k < 80; ++k) ramp[k] = k * h;
  std::vector<double> y = f.apply(ramp);
  // 1/(s+1) driven by r(t) = t from rest: y(t) = t - 1 + e^{-t}
  for (int k = 0; k < 80; ++k) {
    const double t = k * h;
    CHECK(y[k] == doctest::Approx(t - 1.0 + std::exp(-t)).epsilon(1e-12));
  }
}

TEST_CASE("discretization properties over random stable filters") {
  std::mt19937_64 rng(11);
  const double h = 0.1;
  for (int trial = 0; trial < 20; ++trial) {
    Polynomial den = random_hurwitz_poly(rng, 3);
    Polynomial num1 = testutil::random_poly(rng, 2);
    Polynomial num2 = testutil::random_poly(rng, 2);
    for (Hold hold : {Hold::kZoh, Hold::kFoh}) {
      TransferFunction tf1(num1, den), tf2(num2, den);
      TransferFunction tfsum(num1 + num2, den);
      DiscreteFilter d1 = discretize(tf1, h, hold);
      DiscreteFilter d2 = discretize(tf2, h, hold);
      DiscreteFilter dsum = discretize(tfsum, h, hold);

      // dc gain preserved
      CHECK(std::abs(d1.eval(1.0) - tf1.dc_gain()) < 1e-10);
      // stable poles map inside the unit circle
      for (const auto& p : d1.poles()) CHECK(std::abs(p) < 1.0);

      // numerator linearity for a shared denominator
      std::mt19937_64 urng(trial);
      std::normal_distribution<double> dist(0.0, 1.0);
      std::vector<double> u(120);
      for (auto& x : u) x = dist(urng);
      auto y1 = d1.apply(u);
      auto y2 = d2.apply(u);
      auto ysum = dsum.apply(u);
      for (int k = 0; k < 120; ++k) {
        CHECK(std::abs(ysum[k] - y1[k] - y2[k]) < 1e-10);
      }
    }
  }
}

TEST_CASE("streaming and batch application agree") {
  DiscreteFilter f = discretize(TransferFunction(Polynomial({1, 1}), Polynomial({0.5, 1.5, 1})), 0.1, Hold::kZoh);
  std::vector<double> u = {1.0, -0.5, 0.25, 2.0, 0.0, -1.0};
  std::vector<double> batch = f.apply(u);
  f.reset();
  for (std::size_t k = 0; k < u.size(); ++k) {
    CHECK(f.step(u[k]) == doctest::Approx(batch[k]).epsilon(1e-14));
  }
}

TEST_CASE("filter_signal period mismatch") {
  DiscreteFilter f = discretize(TransferFunction(Polynomial({1}), Polynomial({1, 1})), 0.1, Hold::kZoh);
  SampledSignal x{std::vector<double>(10, 1.0), 0.2, Hold::kZoh};
  CHECK_THROWS(filter_signal(f, x));
  x.period = 0.1;
  SampledSignal y = filter_signal(f, x);
  CHECK(y.size() == 10);
}
