#include "clsrivc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <stdexcept>
#include <thread>

namespace clsrivc {

namespace {

double slowest_pole_rate(const std::vector<Polynomial>& polys) {
  double min_rate = std::numeric_limits<double>::infinity();
  for (const auto& p : polys) {
    if (p.degree() < 1) continue;
    for (const auto& root : roots(p)) {
      min_rate = std::min(min_rate, -root.real());
    }
  }
  return min_rate;
}

Eigen::MatrixXd filtered_reference_stack(const SampledSignal& r,
                                         const Polynomial& a,
                                         const Polynomial& q,
                                         const Polynomial& l, Hold hold,
                                         int dim) {
  const Polynomial den = a * q;
  Eigen::MatrixXd stack(r.size(), dim);
  for (int d = 1; d <= dim; ++d) {
    auto col = discretize(derivative_filter(dim - d, l, den), r.period, hold)
                   .apply(r.values);
    for (int k = 0; k < r.size(); ++k) {
      stack(k, d - 1) = col[static_cast<std::size_t>(k)];
    }
  }
  return stack;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

int warmup_samples(const ClosedLoopSystem& sys, const ThetaVector& theta_j) {
  const Polynomial aj = theta_j.a_poly();
  const Polynomial qj = closed_loop_char(aj, theta_j.b_poly(), sys.l, sys.f);
  const double rate = slowest_pole_rate({sys.char_poly(), aj, qj});
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("warmup_samples: loop or filters not stable");
  }
  return static_cast<int>(std::ceil(10.0 / rate / sys.sample_period));
}

NormalMatrixDecomposition decompose_normal_matrix(const ClosedLoopSystem& sys,
                                                  const SampledSignal& r,
                                                  const SampledSignal& v,
                                                  const ThetaVector& theta_j,
                                                  Hold est_hold) {
  sys.validate();
  const int n = theta_j.n();
  const int m = theta_j.m();
  const int dim = n + m + 1;
  const int nsamp = r.size();

  Dataset data = simulate(sys, r, v);
  auto [phi, y_f] = build_regressor(data.u, data.y, theta_j, est_hold);
  (void)y_f;
  Eigen::MatrixXd phi_hat =
      build_instruments(r, theta_j, sys.f, sys.l, est_hold);

  // Exact filter-then-sample paths of the noise-free loop.
  const Polynomial aj = theta_j.a_poly();
  std::vector<Probe> probes;
  for (int i = 1; i <= n; ++i) {
    probes.push_back({derivative_filter(n + 1 - i, Polynomial::one(), aj),
                      ProbeChannel::kPlantOutput});
  }
  for (int j = 1; j <= m + 1; ++j) {
    probes.push_back({derivative_filter(m + 1 - j, Polynomial::one(), aj),
                      ProbeChannel::kPlantInput});
  }
  auto true_paths = simulate_probes(sys, r, probes);

  Eigen::MatrixXd phi_tilde(nsamp, dim);
  for (int c = 0; c < dim; ++c) {
    const double sign = c < n ? -1.0 : 1.0;
    for (int k = 0; k < nsamp; ++k) {
      phi_tilde(k, c) = sign * true_paths[static_cast<std::size_t>(c)]
                                         [static_cast<std::size_t>(k)];
    }
  }

  DeltaResult dres = delta_vector(sys, r, theta_j, est_hold);
  Eigen::MatrixXd delta_signed(nsamp, dim);
  delta_signed.leftCols(n) = dres.delta.leftCols(n);
  delta_signed.rightCols(m + 1) = -dres.u_discrepancy;

  Eigen::MatrixXd v_f = phi - phi_tilde - delta_signed;

  const int w = std::min(warmup_samples(sys, theta_j), nsamp / 2);
  const int neff = nsamp - w;
  auto avg = [&](const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs) {
    return (lhs.bottomRows(neff).transpose() * rhs.bottomRows(neff)) /
           static_cast<double>(neff);
  };

  NormalMatrixDecomposition d;
  d.total = avg(phi_hat, phi);
  d.sylvester_term = avg(phi_hat, phi_tilde);
  d.delta_term = avg(phi_hat, delta_signed);
  d.noise_term = avg(phi_hat, v_f);
  d.n_samples = neff;
  return d;
}

Theorem1Condition theorem1_condition(const NormalMatrixDecomposition& d) {
  if (!d.total.allFinite()) {
    throw std::invalid_argument("theorem1_condition: non-finite decomposition");
  }
  Theorem1Condition c;
  c.lhs = d.delta_term.jacobiSvd().singularValues()(0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.sylvester_term);
  c.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  c.holds = c.lhs < c.sigma_min;
  return c;
}

BiasCertificate bias_certificate(const ClosedLoopSystem& sys,
                                 const SampledSignal& r,
                                 const ThetaVector& theta_bar,
                                 const ThetaVector& theta_true,
                                 Hold est_hold) {
  sys.validate();
  const int n = theta_bar.n();
  const int m = theta_bar.m();
  const int dim = n + m + 1;

  const Polynomial a_bar = theta_bar.a_poly();
  const Polynomial b_bar = theta_bar.b_poly();
  const Polynomial a_true = theta_true.a_poly();
  const Polynomial b_true = theta_true.b_poly();
  const Polynomial h_poly = b_true * a_bar - b_bar * a_true;

  BiasCertificate cert;
  cert.h = Eigen::VectorXd::Zero(dim);
  for (int d = 1; d <= dim; ++d) {
    cert.h(d - 1) = h_poly.coeff_of(dim - d);
  }

  const Polynomial q_bar = closed_loop_char(a_bar, b_bar, sys.l, sys.f);
  if (!is_hurwitz(q_bar)) {
    throw std::invalid_argument(
        "bias_certificate: theta_bar violates Assumption A4");
  }
  Eigen::MatrixXd stack =
      filtered_reference_stack(r, a_bar, q_bar, sys.l, est_hold, dim);
  SampledSignal eps = epsilon_u(sys, r, theta_bar, est_hold);
  Eigen::Map<const Eigen::VectorXd> eps_v(eps.values.data(), eps.size());

  const int w = std::min(warmup_samples(sys, theta_bar), r.size() / 2);
  const int neff = r.size() - w;
  cert.phi_bar = (stack.bottomRows(neff).transpose() * stack.bottomRows(neff)) /
                 static_cast<double>(neff);
  cert.psi_bar = (stack.bottomRows(neff).transpose() * eps_v.tail(neff)) /
                 static_cast<double>(neff);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(cert.phi_bar);
  if (!lu.isInvertible()) {
    throw std::runtime_error(
        "bias_certificate: singular moment matrix (insufficient excitation "
        "order)");
  }
  cert.predicted_h = -lu.solve(cert.psi_bar);
  const double hnorm = cert.h.norm();
  cert.relative_match =
      hnorm > 0.0 ? (cert.h - cert.predicted_h).norm() / hnorm
                  : cert.predicted_h.norm();
  return cert;
}

void BiasCertificate::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("BiasCertificate::write_csv: cannot open " + path);
  out << "index,h,predicted_h,relative_match\n";
  char buf[128];
  for (int i = 0; i < h.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", i + 1, h(i),
                  predicted_h(i), relative_match);
    out << buf;
  }
}

double SweepTable::median_err(ControllerKind kind, int n) const {
  std::vector<double> errs;
  for (const auto& row : rows) {
    if (row.controller_kind == kind && row.n == n && row.converged) {
      errs.push_back(row.err_norm);
    }
  }
  if (errs.empty()) {
    throw std::runtime_error("median_err: no converged replicates");
  }
  std::sort(errs.begin(), errs.end());
  const std::size_t mid = errs.size() / 2;
  return errs.size() % 2 == 1 ? errs[mid]
                              : 0.5 * (errs[mid - 1] + errs[mid]);
}

void SweepTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("SweepTable::write_csv: cannot open " + path);
  out << "controller_kind,N,replicate,err_norm,bias_norm,converged\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.17g,%.17g,%d\n",
                  to_string(row.controller_kind).c_str(), row.n, row.replicate,
                  row.err_norm, row.bias_norm, row.converged ? 1 : 0);
    out << buf;
  }
}

SweepTable consistency_sweep(const ClosedLoopSystem& sys,
                             const SweepSpec& spec) {
  if (!std::is_sorted(spec.n_grid.begin(), spec.n_grid.end())) {
    throw std::invalid_argument("consistency_sweep: n_grid must be ascending");
  }
  if (!spec.reference_factory) {
    throw std::invalid_argument("consistency_sweep: missing reference factory");
  }

  struct Job {
    ControllerKind kind;
    int n;
    int replicate;  // -1: noise-free bias run
  };
  std::vector<Job> jobs;
  for (ControllerKind kind : spec.kinds) {
    for (int n : spec.n_grid) {
      jobs.push_back({kind, n, -1});
      for (int rep = 0; rep < spec.replicates; ++rep) {
        jobs.push_back({kind, n, rep});
      }
    }
  }

  const Eigen::VectorXd theta_star = spec.theta_true.stacked();
  auto run_job = [&](const Job& job) -> SweepRow {
    ClosedLoopSystem s = sys;
    s.controller_kind = job.kind;
    const std::uint64_t stream =
        static_cast<std::uint64_t>(job.n) * 1000 +
        static_cast<std::uint64_t>(job.replicate + 1);
    SampledSignal r = spec.reference_factory(job.n, mix_seed(spec.seed, stream));
    const double variance = job.replicate < 0 ? 0.0 : spec.noise_variance;
    SampledSignal v = gen_white_noise(variance, job.n,
                                      mix_seed(spec.seed, stream + 0x5eedULL),
                                      s.sample_period);
    SweepRow row;
    row.controller_kind = job.kind;
    row.n = job.n;
    row.replicate = job.replicate;
    try {
      Dataset data = simulate(s, r, v);
      EstimateResult est = clsrivc(data, s.f, s.l, spec.estimator);
      row.converged = est.converged;
      row.err_norm = (est.theta.stacked() - theta_star).norm();
    } catch (const std::exception&) {
      row.converged = false;
      row.err_norm = std::numeric_limits<double>::quiet_NaN();
    }
    return row;
  };

  unsigned nthreads = spec.threads > 0
                          ? static_cast<unsigned>(spec.threads)
                          : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads, static_cast<unsigned>(jobs.size()));
  std::vector<SweepRow> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < nthreads; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        results[i] = run_job(jobs[i]);
      }
    });
  }
  for (auto& w : workers) w.join();

  SweepTable table;
  int failures = 0, noisy_runs = 0;
  // bias per (kind, N) from the noise-free runs
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].replicate >= 0) continue;
    const double bias = results[i].err_norm;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].kind == jobs[i].kind && jobs[j].n == jobs[i].n &&
          jobs[j].replicate >= 0) {
        results[j].bias_norm = bias;
      }
    }
    results[i].bias_norm = bias;
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (jobs[i].replicate >= 0) {
      ++noisy_runs;
      if (!results[i].converged) ++failures;
    }
    table.rows.push_back(results[i]);
  }
  table.failure_rate = noisy_runs > 0
                           ? static_cast<double>(failures) / noisy_runs
                           : 0.0;
  if (table.failure_rate > 0.2) {
    throw std::runtime_error(
        "consistency_sweep: more than 20% of replicates failed to converge");
  }

  // Positive definiteness of the reference moment matrix at theta_true.
  {
    const int n_big = spec.n_grid.back();
    SampledSignal r = spec.reference_factory(n_big, mix_seed(spec.seed, 7));
    const int dim = spec.theta_true.dim();
    Eigen::MatrixXd stack = filtered_reference_stack(
        r, spec.theta_true.a_poly(), sys.char_poly(), sys.l,
        spec.estimator.hold, dim);
    const int w = std::min(warmup_samples(sys, spec.theta_true), n_big / 2);
    const int neff = n_big - w;
    Eigen::MatrixXd phi_star =
        (stack.bottomRows(neff).transpose() * stack.bottomRows(neff)) / neff;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(phi_star);
    table.phi_star_min_eig = eig.eigenvalues().minCoeff();
  }
  return table;
}

}  // namespace clsrivc
