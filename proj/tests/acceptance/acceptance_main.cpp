// Acceptance suite for the closed-loop estimator library. Each criterion
// prints exactly one PASS/FAIL line; the process exits nonzero if any fail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "clsrivc/analysis.hpp"
#include "clsrivc/config.hpp"
#include "clsrivc/estimator.hpp"
#include "clsrivc/sim.hpp"
#include "test_util.hpp"

using namespace clsrivc;

namespace {

constexpr double kPeriod = 0.1;
const ThetaVector kThetaTrue{{0.5, 1.5}, {1.0}};
const Polynomial kF({2.0, 2.0});
const Polynomial kL({1.0, 10.0});

SampledSignal zeros(int n) {
  return SampledSignal{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                       kPeriod, Hold::kZoh};
}

SampledSignal pwc_reference(int n, std::uint64_t seed) {
  return gen_piecewise_constant({-1.0, 1.0}, 5, n, seed, kPeriod);
}

struct Criterion {
  bool pass = false;
  std::string detail;
};

// 1. Both the instrument stack and the noise-free regressor stack factor
// through the polynomial coefficient matrix, over randomized stable loops.
Criterion sylvester_factorization() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick_n(1, 3);
  double worst = 0.0;
  int done = 0;
  const int nsamp = 1500;
  while (done < 20) {
    const int n = pick_n(rng);
    std::uniform_int_distribution<int> pick_m(0, n);
    const int m = pick_m(rng);
    Polynomial a = testutil::random_hurwitz_poly(rng, n);
    Polynomial b = testutil::random_poly(rng, m, 0.8);
    if (!coprime(a, b)) continue;
    Polynomial l = testutil::random_hurwitz_poly(rng, 1);
    Polynomial f = testutil::random_poly(rng, std::min(1, n), 0.3);
    const Polynomial q = closed_loop_char(a, b, l, f);
    if (q.degree() < 1 || !is_hurwitz(q)) continue;
    ThetaVector theta = ThetaVector::from_model(TransferFunction(b, a));

    SampledSignal r = gen_white_noise(1.0, nsamp, 100 + done, kPeriod);

    // instrument stack: direct filters vs factored form
    Eigen::MatrixXd direct = build_instruments(r, theta, f, l, Hold::kZoh);
    Eigen::MatrixXd factored =
        instruments_via_sylvester(r, theta, f, l, Hold::kZoh);
    worst = std::max(worst, (direct - factored).norm() / direct.norm());

    // noise-free regressor stack at the true parameters: elementwise
    // filters (-p^i B L / (A Q), p^j A L / (A Q)) vs the coefficient-matrix
    // route on the common stack L/(A Q)
    const int dim = n + m + 1;
    const Polynomial den = theta.a_poly() * q;
    Eigen::MatrixXd elementwise(nsamp, dim);
    for (int i = 1; i <= n; ++i) {
      auto col = discretize(derivative_filter(n + 1 - i, theta.b_poly() * l, den),
                            kPeriod, Hold::kZoh)
                     .apply(r.values);
      for (int k = 0; k < nsamp; ++k)
        elementwise(k, i - 1) = -col[static_cast<std::size_t>(k)];
    }
    for (int j = 1; j <= m + 1; ++j) {
      auto col = discretize(
                     derivative_filter(m + 1 - j, theta.a_poly() * l, den),
                     kPeriod, Hold::kZoh)
                     .apply(r.values);
      for (int k = 0; k < nsamp; ++k)
        elementwise(k, n + j - 1) = col[static_cast<std::size_t>(k)];
    }
    Eigen::MatrixXd stack(nsamp, dim);
    for (int d = 1; d <= dim; ++d) {
      auto col = discretize(derivative_filter(dim - d, l, den), kPeriod,
                            Hold::kZoh)
                     .apply(r.values);
      for (int k = 0; k < nsamp; ++k) stack(k, d - 1) = col[static_cast<std::size_t>(k)];
    }
    Eigen::MatrixXd via_s =
        stack * sylvester(theta.b_poly(), theta.a_poly(), n, m).transpose();
    worst = std::max(worst, (elementwise - via_s).norm() / elementwise.norm());
    ++done;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst relative mismatch %.3g over 20 configs",
                worst);
  return {worst < 1e-9, buf};
}

// 2. The instrument is orthogonal to the filtered noise: every entry of the
// empirical cross moment stays within 4 standard errors of zero and its
// magnitude shrinks like 1/sqrt(N).
Criterion noise_orthogonality() {
  ClosedLoopSystem sys =
      testutil::reference_loop(ControllerKind::kContinuous, kPeriod);

  auto cross_moment = [&](int n, std::uint64_t seed, double* max_se_ratio) {
    SampledSignal r = pwc_reference(n, seed);
    SampledSignal v = gen_white_noise(0.05, n, seed + 5000, kPeriod);
    Dataset data = simulate(sys, r, v);
    auto [phi, y_f] = build_regressor(data.u, data.y, kThetaTrue, Hold::kZoh);
    (void)y_f;
    auto [phi_star, y_star] =
        build_regressor(data.u_star, data.x_star, kThetaTrue, Hold::kZoh);
    (void)y_star;
    Eigen::MatrixXd phi_hat =
        build_instruments(r, kThetaTrue, sys.f, sys.l, Hold::kZoh);
    const int w = std::min(warmup_samples(sys, kThetaTrue), n / 2);
    const int neff = n - w;
    Eigen::MatrixXd v_f =
        phi.bottomRows(neff) - phi_star.bottomRows(neff);
    Eigen::MatrixXd inst = phi_hat.bottomRows(neff);
    const int dim = static_cast<int>(phi.cols());
    Eigen::MatrixXd moment(dim, dim);
    double worst_ratio = 0.0;
    // batch-means standard error: the per-sample products are serially
    // correlated through the noise filters (correlation time ~ 1 s), so
    // batches much longer than that give a valid error estimate
    const int batch_len = 250;
    const int nbatch = neff / batch_len;
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        Eigen::ArrayXd z = inst.col(i).array() * v_f.col(j).array();
        const double mean = z.mean();
        double bvar = 0.0;
        for (int b = 0; b < nbatch; ++b) {
          const double bm = z.segment(b * batch_len, batch_len).mean();
          bvar += (bm - mean) * (bm - mean);
        }
        bvar /= (nbatch - 1);
        const double se = std::sqrt(bvar / nbatch);
        moment(i, j) = mean;
        worst_ratio = std::max(worst_ratio, std::abs(mean) / se);
      }
    }
    if (max_se_ratio) *max_se_ratio = worst_ratio;
    return moment;
  };

  double ratio_large = 0.0;
  Eigen::MatrixXd m_small = cross_moment(25000, 1, nullptr);
  Eigen::MatrixXd m_large = cross_moment(100000, 2, &ratio_large);
  const double shrink = m_small.norm() / m_large.norm();
  const bool pass = ratio_large < 4.0 && shrink > 1.0 && shrink < 3.0;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "max |moment|/SE = %.2f at N=1e5; norm shrink factor "
                "2.5e4 -> 1e5 = %.2f (expect ~2)",
                ratio_large, shrink);
  return {pass, buf};
}

// 3. With a continuous-time controller the iteration converges to a point
// that is measurably away from the truth, stably across N.
Criterion inconsistency(ThetaVector* theta_bar_out) {
  ClosedLoopSystem sys =
      testutil::reference_loop(ControllerKind::kContinuous, kPeriod);
  EstimatorOptions opt;
  opt.theta_0 = kThetaTrue;

  std::vector<double> errs;
  bool converged = true;
  double worst_residual = 0.0;
  for (int n : {50000, 100000}) {
    SampledSignal r = pwc_reference(n, 33);
    Dataset data = simulate(sys, r, zeros(n));
    EstimateResult est = clsrivc::clsrivc(data, sys.f, sys.l, opt);
    converged = converged && est.converged &&
                est.fixed_point_residual <= 10.0 * opt.tol;
    worst_residual = std::max(worst_residual, est.fixed_point_residual);
    errs.push_back((est.theta.stacked() - kThetaTrue.stacked()).norm());
    if (n == 100000 && theta_bar_out) *theta_bar_out = est.theta;
  }
  const double plateau = std::abs(errs[1] - errs[0]) / errs[0];
  const bool pass =
      converged && errs[0] > 100.0 * opt.tol && errs[1] > 100.0 * opt.tol &&
      plateau < 0.1;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "|theta_bar - theta*| = %.3g (N=5e4), %.3g (N=1e5); plateau "
                "change %.2f%%; residual %.2g",
                errs[0], errs[1], 100.0 * plateau, worst_residual);
  return {pass, buf};
}

// 4. Replacing the controller by its sampled version plus a hold restores
// consistency: errors shrink like 1/sqrt(N) and the noise-free bias is gone.
Criterion consistency_restoration() {
  ClosedLoopSystem sys =
      testutil::reference_loop(ControllerKind::kDiscreteWithHold, kPeriod);

  // 10 dB signal-to-noise: noise variance = var(y*) / 10
  double y_var;
  {
    const int n = 20000;
    Dataset pilot = simulate(sys, pwc_reference(n, 5), zeros(n));
    double mean = 0.0;
    for (double y : pilot.y.values) mean += y;
    mean /= n;
    y_var = 0.0;
    for (double y : pilot.y.values) y_var += (y - mean) * (y - mean);
    y_var /= n;
  }

  SweepSpec spec;
  spec.n_grid = {10000, 40000};
  spec.replicates = 50;
  spec.seed = 4242;
  spec.noise_variance = y_var / 10.0;
  spec.reference_factory = pwc_reference;
  spec.estimator.model_n = 2;
  spec.estimator.model_m = 0;
  spec.estimator.theta_0 = kThetaTrue;
  spec.theta_true = kThetaTrue;
  spec.kinds = {ControllerKind::kDiscreteWithHold};

  SweepTable table = consistency_sweep(sys, spec);
  const double med_small =
      table.median_err(ControllerKind::kDiscreteWithHold, 10000);
  const double med_large =
      table.median_err(ControllerKind::kDiscreteWithHold, 40000);
  const double ratio = med_small / med_large;

  double bias = 0.0;
  for (const auto& row : table.rows) {
    if (row.replicate < 0) bias = std::max(bias, row.bias_norm);
  }
  const bool pass = ratio >= 1.5 && ratio <= 2.7 && bias < 1e-6;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "median error %.3g (N=1e4) vs %.3g (N=4e4), ratio %.2f "
                "(band [1.5, 2.7]); noise-free bias %.2g",
                med_small, med_large, ratio, bias);
  return {pass, buf};
}

// 5. The nonsingularity condition holds on the benchmark loop, the normal
// matrix is well conditioned, and the decomposition closes.
Criterion nonsingularity_condition() {
  ClosedLoopSystem sys =
      testutil::reference_loop(ControllerKind::kContinuous, kPeriod);
  const int n = 30000;
  SampledSignal r = pwc_reference(n, 9);
  NormalMatrixDecomposition d =
      decompose_normal_matrix(sys, r, zeros(n), kThetaTrue);
  Theorem1Condition c = theorem1_condition(d);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.total);
  const double cond = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);
  const double closure =
      (d.total - d.sylvester_term - d.delta_term - d.noise_term).norm() /
      d.total.norm();
  const bool pass = c.holds && cond < 1e12 && closure < 1e-6;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "|delta term| = %.3g < sigma_min = %.3g; cond = %.3g; "
                "closure residual %.2g",
                c.lhs, c.sigma_min, cond, closure);
  return {pass, buf};
}

// 6. The converging-point bias is reproduced by the certificate and the
// underlying rational identity holds to machine precision.
Criterion bias_certificate_check(const ThetaVector& theta_bar) {
  ClosedLoopSystem sys =
      testutil::reference_loop(ControllerKind::kContinuous, kPeriod);
  const int n = 100000;
  SampledSignal r = pwc_reference(n, 33);
  BiasCertificate cert = bias_certificate(sys, r, theta_bar, kThetaTrue);

  const Polynomial h_poly = kThetaTrue.b_poly() * theta_bar.a_poly() -
                            theta_bar.b_poly() * kThetaTrue.a_poly();
  double identity_err = 0.0;
  for (double im : {0.3, 1.1, 4.0}) {
    const std::complex<double> s(0.2, im);
    const auto lhs = theta_bar.b_poly().eval(s) / theta_bar.a_poly().eval(s) -
                     kThetaTrue.b_poly().eval(s) / kThetaTrue.a_poly().eval(s);
    const auto rhs =
        -h_poly.eval(s) /
        (theta_bar.a_poly().eval(s) * kThetaTrue.a_poly().eval(s));
    identity_err = std::max(identity_err, std::abs(lhs - rhs) / std::abs(lhs));
  }
  const bool pass = cert.relative_match < 0.05 && identity_err < 1e-12;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "relative match %.3g (limit 0.05); rational identity error %.2g",
                cert.relative_match, identity_err);
  return {pass, buf};
}

// 7. The simulator is exact: refining the grid changes nothing, and an
// independent oversampled integrator agrees.
Criterion oracle_exactness() {
  ClosedLoopSystem sys =
      testutil::reference_loop(ControllerKind::kContinuous, kPeriod);
  const int n = 5000;
  SampledSignal r = pwc_reference(n, 12);
  SampledSignal v = gen_white_noise(0.02, n, 13, kPeriod);

  Dataset d = simulate(sys, r, v);
  double scale = 0.0;
  for (double y : d.y.values) scale = std::max(scale, std::abs(y));

  // same held input sampled twice as fast
  ClosedLoopSystem fine =
      testutil::reference_loop(ControllerKind::kContinuous, kPeriod / 2);
  SampledSignal r2{std::vector<double>(static_cast<std::size_t>(2 * n)),
                   kPeriod / 2, Hold::kZoh};
  SampledSignal v2 = r2;
  for (int k = 0; k < n; ++k) {
    r2.values[2 * k] = r2.values[2 * k + 1] = r.values[k];
    v2.values[2 * k] = v2.values[2 * k + 1] = v.values[k];
  }
  Dataset df = simulate(fine, r2, v2);
  double refine_err = 0.0;
  for (int k = 0; k < n; ++k) {
    refine_err = std::max(refine_err,
                          std::abs(d.y.values[k] - df.y.values[2 * k]));
  }

  std::vector<double> x_rk = testutil::rk4_loop(sys, r.values, v.values, 64);
  double rk_err = 0.0;
  for (int k = 0; k < n; ++k) {
    rk_err = std::max(rk_err,
                      std::abs(d.y.values[k] - v.values[k] - x_rk[k]));
  }
  const bool pass = refine_err < 1e-9 * scale && rk_err < 1e-6 * scale;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "grid refinement error %.2g, oversampled integrator error "
                "%.2g (scale %.2g)",
                refine_err, rk_err, scale);
  return {pass, buf};
}

// 8. The excitation-order measurement is exact on multisines and the
// assumption validator flags an insufficient reference.
Criterion excitation_order_check() {
  const int n = 20000;
  bool orders_ok = true;
  std::string orders;
  for (int tones = 1; tones <= 4; ++tones) {
    SampledSignal x = testutil::integer_cycle_multisine(tones, n, kPeriod);
    const int order = excitation_order(x, 12);
    orders += (tones > 1 ? "," : "") + std::to_string(order);
    orders_ok = orders_ok && order == 2 * tones;
  }

  const double base = 2.0 * M_PI / (n * kPeriod);
  char cfg[512];
  std::snprintf(cfg, sizeof(cfg),
                "plant.a = 0.5, 1.5, 1\nplant.b = 1\n"
                "controller.f = 2, 2\ncontroller.l = 1, 10\n"
                "sim.period = 0.1\n"
                "sim.reference.freqs = %.17g, %.17g\n",
                base * (n / 24), base * (n / 9));
  ValidationReport rep = validate(ExperimentConfig::parse_string(cfg));
  bool a3_flagged = false;
  for (const auto& c : rep.checks) {
    if (c.name == "A3") a3_flagged = !c.pass;
  }
  const bool pass = orders_ok && a3_flagged;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "measured orders {%s} for 1..4 tones; 2-tone reference "
                "flagged insufficient: %s",
                orders.c_str(), a3_flagged ? "yes" : "no");
  return {pass, buf};
}

}  // namespace

int main() {
  int failures = 0;
  ThetaVector theta_bar;
  auto report = [&](int idx, const char* name, const Criterion& c) {
    std::printf("criterion %d (%s): %s — %s\n", idx, name,
                c.pass ? "PASS" : "FAIL", c.detail.c_str());
    std::fflush(stdout);
    if (!c.pass) ++failures;
  };
  auto guarded = [&](std::function<Criterion()> fn) -> Criterion {
    try {
      return fn();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "coefficient-matrix factorization",
         guarded(sylvester_factorization));
  report(2, "instrument/noise orthogonality", guarded(noise_orthogonality));
  report(3, "continuous-controller inconsistency",
         guarded([&] { return inconsistency(&theta_bar); }));
  report(4, "sampled-controller consistency restoration",
         guarded(consistency_restoration));
  report(5, "nonsingularity condition and closure",
         guarded(nonsingularity_condition));
  report(6, "converging-point bias certificate",
         guarded([&] { return bias_certificate_check(theta_bar); }));
  report(7, "simulator exactness", guarded(oracle_exactness));
  report(8, "excitation-order measurement", guarded(excitation_order_check));

  if (failures > 0) {
    std::printf("%d of 8 criteria failed\n", failures);
    return 1;
  }
  std::printf("all 8 criteria passed\n");
  return 0;
}
