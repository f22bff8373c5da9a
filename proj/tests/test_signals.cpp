#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numeric>

#include "clsrivc/signals.hpp"
#include "test_util.hpp"

using namespace clsrivc;

TEST_CASE("multisine values and nyquist guard") {
  const double h = 0.1;
  SampledSignal x = gen_multisine({1.0, 2.5}, {1.0, 0.5}, {0.0, 0.3}, 50, h);
  REQUIRE(x.size() == 50);
  for (int k = 0; k < x.size(); ++k) {
    const double want = std::sin(1.0 * k * h) + 0.5 * std::sin(2.5 * k * h + 0.3);
    CHECK(x.values[k] == doctest::Approx(want).epsilon(1e-14));
  }
  // at and above the Nyquist rate pi/h
  CHECK_THROWS(gen_multisine({31.5}, {1.0}, {0.0}, 10, h));
  CHECK_THROWS(gen_multisine({M_PI / h}, {1.0}, {0.0}, 10, h));
  CHECK_THROWS(gen_multisine({1.0, 2.0}, {1.0}, {0.0, 0.0}, 10, h));
}

TEST_CASE("piecewise constant reference") {
  SampledSignal x = gen_piecewise_constant({-1.0, 0.5, 2.0}, 5, 60, 99, 0.1);
  REQUIRE(x.size() == 60);
  CHECK(x.hold == Hold::kZoh);
  for (int k = 0; k < 60; ++k) {
    const int block = (k / 5) * 5;
    CHECK(x.values[k] == x.values[block]);  // constant within a dwell block
    const double v = x.values[k];
    CHECK((v == -1.0 || v == 0.5 || v == 2.0));
  }
  SampledSignal again = gen_piecewise_constant({-1.0, 0.5, 2.0}, 5, 60, 99, 0.1);
  CHECK(x.values == again.values);
  SampledSignal other = gen_piecewise_constant({-1.0, 0.5, 2.0}, 5, 60, 100, 0.1);
  CHECK(x.values != other.values);
}

TEST_CASE("noise generators") {
  const int n = 200000;
  SampledSignal w = gen_white_noise(0.25, n, 7, 0.1);
  const double mean = std::accumulate(w.values.begin(), w.values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : w.values) var += (v - mean) * (v - mean);
  var /= n;
  CHECK(std::abs(mean) < 5e-3);
  CHECK(var == doctest::Approx(0.25).epsilon(0.02));

  SampledSignal c = gen_colored_noise(0.25, 0.8, n, 7, 0.1);
  double cmean = std::accumulate(c.values.begin(), c.values.end(), 0.0) / n;
  double cvar = 0.0, lag1 = 0.0;
  for (double v : c.values) cvar += (v - cmean) * (v - cmean);
  cvar /= n;
  for (int k = 1; k < n; ++k)
    lag1 += (c.values[k] - cmean) * (c.values[k - 1] - cmean);
  lag1 /= (n - 1);
  CHECK(cvar == doctest::Approx(0.25).epsilon(0.02));
  CHECK(lag1 / cvar == doctest::Approx(0.8).epsilon(0.05));

  CHECK(gen_white_noise(0.0, 10, 1, 0.1).values == std::vector<double>(10, 0.0));
}

TEST_CASE("excitation order of multisines") {
  const int n = 20000;
  const double h = 0.1;
  for (int tones = 1; tones <= 4; ++tones) {
    SampledSignal x = testutil::integer_cycle_multisine(tones, n, h);
    CHECK(excitation_order(x, 12) == 2 * tones);
  }
  // a nonzero-mean signal gains one order from the dc component
  SampledSignal x = testutil::integer_cycle_multisine(1, n, h);
  for (double& v : x.values) v += 1.0;
  CHECK(excitation_order(x, 12) == 3);

  SampledSignal zero{std::vector<double>(n, 0.0), h, Hold::kZoh};
  CHECK(excitation_order(zero, 12) == 0);
}

TEST_CASE("signal csv round trip") {
  const char* path = "signals_roundtrip.csv";
  SampledSignal x = gen_multisine({1.0}, {1.0}, {0.1}, 37, 0.05);
  x.hold = Hold::kFoh;
  write_signal_csv(path, x);
  SampledSignal back = read_signal_csv(path, Hold::kFoh);
  REQUIRE(back.size() == x.size());
  CHECK(back.period == doctest::Approx(x.period).epsilon(1e-12));
  CHECK(back.hold == Hold::kFoh);
  for (int k = 0; k < x.size(); ++k) CHECK(back.values[k] == x.values[k]);
  std::remove(path);

  CHECK_THROWS(read_signal_csv("does_not_exist.csv"));
}
