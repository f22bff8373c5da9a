#include "clsrivc/estimator.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace clsrivc {

namespace {

constexpr double kConditionLimit = 1e12;

Polynomial poly_from_roots(const std::vector<std::complex<double>>& rts) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : rts) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  std::vector<double> real(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) real[i] = c[i].real();
  return Polynomial(std::move(real));
}

void require_a4_filters(const ThetaVector& theta) {
  if (theta.m() > theta.n()) {
    throw std::invalid_argument("A4 violated: model order m > n");
  }
  if (!is_hurwitz(theta.a_poly())) {
    throw std::invalid_argument("A4 violated: model denominator is not Hurwitz");
  }
}

}  // namespace

std::pair<Eigen::MatrixXd, Eigen::VectorXd> build_regressor(
    const SampledSignal& u, const SampledSignal& y, const ThetaVector& theta_j,
    Hold hold) {
  if (u.size() != y.size()) {
    throw std::invalid_argument("build_regressor: u/y length mismatch");
  }
  if (std::abs(u.period - y.period) > 1e-12 * std::max(1.0, u.period)) {
    throw std::invalid_argument("build_regressor: u/y period mismatch");
  }
  require_a4_filters(theta_j);
  const int n = theta_j.n();
  const int m = theta_j.m();
  const int nsamp = y.size();
  const double h = y.period;
  const Polynomial aj = theta_j.a_poly();

  Eigen::MatrixXd phi(nsamp, n + m + 1);
  for (int i = 1; i <= n; ++i) {
    auto col = discretize(derivative_filter(n + 1 - i, Polynomial::one(), aj),
                          h, hold)
                   .apply(y.values);
    for (int k = 0; k < nsamp; ++k) phi(k, i - 1) = -col[static_cast<std::size_t>(k)];
  }
  for (int j = 1; j <= m + 1; ++j) {
    auto col = discretize(derivative_filter(m + 1 - j, Polynomial::one(), aj),
                          h, hold)
                   .apply(u.values);
    for (int k = 0; k < nsamp; ++k) phi(k, n + j - 1) = col[static_cast<std::size_t>(k)];
  }
  auto yf = discretize(TransferFunction(Polynomial::one(), aj), h, hold)
                .apply(y.values);
  Eigen::VectorXd y_f(nsamp);
  for (int k = 0; k < nsamp; ++k) y_f(k) = yf[static_cast<std::size_t>(k)];
  return {std::move(phi), std::move(y_f)};
}

Eigen::MatrixXd build_instruments(const SampledSignal& r,
                                  const ThetaVector& theta_j,
                                  const Polynomial& f, const Polynomial& l,
                                  Hold hold) {
  require_a4_filters(theta_j);
  const int n = theta_j.n();
  const int m = theta_j.m();
  const Polynomial aj = theta_j.a_poly();
  const Polynomial bj = theta_j.b_poly();
  const Polynomial qj = closed_loop_char(aj, bj, l, f);
  if (!is_hurwitz(qj)) {
    throw std::invalid_argument(
        "A4 violated: model closed loop (A_j L + B_j F) is not Hurwitz");
  }
  const Polynomial den = aj * qj;
  const int nsamp = r.size();
  const double h = r.period;

  Eigen::MatrixXd phi_hat(nsamp, n + m + 1);
  for (int i = 1; i <= n; ++i) {
    auto col = discretize(derivative_filter(n + 1 - i, bj * l, den), h, hold)
                   .apply(r.values);
    for (int k = 0; k < nsamp; ++k) {
      phi_hat(k, i - 1) = -col[static_cast<std::size_t>(k)];
    }
  }
  for (int j = 1; j <= m + 1; ++j) {
    // p^i/(A_j(1 + C G_j)) reduces to p^i L/Q_j
    auto col = discretize(derivative_filter(m + 1 - j, l, qj), h, hold)
                   .apply(r.values);
    for (int k = 0; k < nsamp; ++k) {
      phi_hat(k, n + j - 1) = col[static_cast<std::size_t>(k)];
    }
  }
  return phi_hat;
}

Eigen::MatrixXd instruments_via_sylvester(const SampledSignal& r,
                                          const ThetaVector& theta_j,
                                          const Polynomial& f,
                                          const Polynomial& l, Hold hold) {
  require_a4_filters(theta_j);
  const int n = theta_j.n();
  const int m = theta_j.m();
  const Polynomial aj = theta_j.a_poly();
  const Polynomial bj = theta_j.b_poly();
  const Polynomial qj = closed_loop_char(aj, bj, l, f);
  const Polynomial den = aj * qj;
  const int dim = n + m + 1;
  const int nsamp = r.size();

  Eigen::MatrixXd stack(nsamp, dim);
  for (int d = 1; d <= dim; ++d) {
    auto col = discretize(derivative_filter(dim - d, l, den), r.period, hold)
                   .apply(r.values);
    for (int k = 0; k < nsamp; ++k) stack(k, d - 1) = col[static_cast<std::size_t>(k)];
  }
  Eigen::MatrixXd s = sylvester(bj, aj, n, m);
  return stack * s.transpose();
}

ThetaVector clsrivc_step(const Eigen::MatrixXd& phi_hat,
                         const Eigen::MatrixXd& phi, const Eigen::VectorXd& y_f,
                         int n, int m) {
  const int dim = n + m + 1;
  if (phi.rows() < dim) {
    throw std::invalid_argument("clsrivc_step: fewer samples than parameters");
  }
  const double nsamp = static_cast<double>(phi.rows());
  Eigen::MatrixXd normal = (phi_hat.transpose() * phi) / nsamp;
  Eigen::VectorXd rhs = (phi_hat.transpose() * y_f) / nsamp;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      normal, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(dim - 1);
  if (smin <= 0.0 || smax / smin > kConditionLimit) {
    throw std::runtime_error(
        "clsrivc_step: normal matrix is singular or ill conditioned "
        "(insufficient excitation order, or the interpolation-error bound "
        "guaranteeing nonsingularity does not hold)");
  }
  Eigen::VectorXd theta = svd.solve(rhs);
  return ThetaVector::from_stacked(theta, n, m);
}

ThetaVector stabilize(const ThetaVector& theta, const Polynomial& f,
                      const Polynomial& l) {
  ThetaVector out = theta;
  Polynomial aj = out.a_poly();
  if (!is_hurwitz(aj)) {
    auto rts = roots(aj);
    for (auto& r : rts) {
      if (r.real() > 0.0) {
        r = std::complex<double>(-r.real(), r.imag());
      } else if (r.real() == 0.0) {
        r -= std::abs(r) > 0.0 ? 1e-6 * std::abs(r) : 1e-6;
      }
    }
    Polynomial reflected = poly_from_roots(rts);
    const double c0 = reflected.constant_term();
    if (c0 == 0.0) {
      throw std::runtime_error("stabilize: reflected denominator has a root at 0");
    }
    reflected = reflected.scaled(1.0 / c0);
    ThetaVector t = ThetaVector::from_model(
        TransferFunction(out.b_poly(), reflected));
    // keep b; from_model would re-derive it identically
    out.a = t.a;
  }
  aj = out.a_poly();
  Polynomial bj = out.b_poly();
  double scale = 1.0;
  for (int iter = 0; iter <= 50; ++iter) {
    if (is_hurwitz(closed_loop_char(aj, bj.scaled(scale), l, f))) {
      for (auto& b : out.b) b *= scale;
      return out;
    }
    scale *= 0.5;
  }
  throw std::runtime_error("stabilize: could not restore a stable model loop");
}

namespace {

bool satisfies_a4(const ThetaVector& theta, const Polynomial& f,
                  const Polynomial& l) {
  Polynomial aj = theta.a_poly();
  return is_hurwitz(aj) &&
         is_hurwitz(closed_loop_char(aj, theta.b_poly(), l, f));
}

ThetaVector default_initial_theta(const Dataset& data, const Polynomial& f,
                                  const Polynomial& l, int n, int m,
                                  Hold hold) {
  // Self-instrumented least squares behind a fixed stable prefilter
  // (tau p + 1)^n with tau a few sampling periods.
  const double tau = 5.0 * data.r.period;
  Polynomial a_init = Polynomial::one();
  for (int i = 0; i < n; ++i) a_init = a_init * Polynomial({tau, 1.0});
  ThetaVector init = ThetaVector::from_model(
      TransferFunction(Polynomial::zero(), a_init));
  init.b.assign(static_cast<std::size_t>(m) + 1, 0.0);
  auto [phi, y_f] = build_regressor(data.u, data.y, init, hold);
  ThetaVector ls = clsrivc_step(phi, phi, y_f, n, m);
  if (!satisfies_a4(ls, f, l)) ls = stabilize(ls, f, l);
  return ls;
}

}  // namespace

EstimateResult clsrivc(const Dataset& data, const Polynomial& f,
                       const Polynomial& l, const EstimatorOptions& options) {
  ThetaVector theta;
  if (options.theta_0) {
    theta = *options.theta_0;
    if (!satisfies_a4(theta, f, l)) {
      throw std::invalid_argument("clsrivc: theta_0 violates Assumption A4");
    }
  } else {
    theta = default_initial_theta(data, f, l, options.model_n, options.model_m,
                                  options.hold);
  }

  EstimateResult result;
  result.theta = theta;
  int consecutive_projections = 0;
  for (int j = 0; j < options.max_iter; ++j) {
    auto [phi, y_f] = build_regressor(data.u, data.y, theta, options.hold);
    Eigen::MatrixXd phi_hat =
        build_instruments(data.r, theta, f, l, options.hold);
    ThetaVector next = clsrivc_step(phi_hat, phi, y_f, theta.n(), theta.m());

    if (!satisfies_a4(next, f, l)) {
      next = stabilize(next, f, l);
      if (++consecutive_projections > 20) {
        throw std::runtime_error(
            "clsrivc: iterates persistently violate Assumption A4");
      }
    } else {
      consecutive_projections = 0;
    }

    const double denom = theta.stacked().norm();
    const double rel_step =
        denom > 0.0 ? (next.stacked() - theta.stacked()).norm() / denom
                    : (next.stacked()).norm();
    theta = next;
    result.trace.push_back({theta, rel_step});
    result.iterations = j + 1;
    if (rel_step <= options.tol) {
      result.converged = true;
      break;
    }
  }
  result.theta = theta;

  // Residual of the converging-point equation at the final iterate.
  try {
    auto [phi, y_f] = build_regressor(data.u, data.y, theta, options.hold);
    Eigen::MatrixXd phi_hat =
        build_instruments(data.r, theta, f, l, options.hold);
    result.fixed_point_residual =
        ((phi_hat.transpose() * (y_f - phi * theta.stacked())) /
         static_cast<double>(phi.rows()))
            .norm();
  } catch (const std::exception&) {
    result.fixed_point_residual = std::numeric_limits<double>::infinity();
  }
  return result;
}

void EstimateResult::write_trace_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
  out << "iter";
  const int n = theta.n();
  const int m = theta.m();
  for (int i = 1; i <= n; ++i) out << ",a_" << i;
  for (int j = 0; j <= m; ++j) out << ",b_" << j;
  out << ",rel_step\n";
  char buf[64];
  for (std::size_t j = 0; j < trace.size(); ++j) {
    out << (j + 1);
    for (double a : trace[j].theta.a) {
      std::snprintf(buf, sizeof(buf), ",%.17g", a);
      out << buf;
    }
    for (double b : trace[j].theta.b) {
      std::snprintf(buf, sizeof(buf), ",%.17g", b);
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g\n", trace[j].rel_step);
    out << buf;
  }
}

}  // namespace clsrivc
