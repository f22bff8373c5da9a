#include "clsrivc/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace clsrivc {

std::string to_string(ControllerKind kind) {
  return kind == ControllerKind::kContinuous ? "continuous" : "discrete_zoh";
}

ClosedLoopSystem ClosedLoopSystem::make(const TransferFunction& plant,
                                        const Polynomial& f,
                                        const Polynomial& l,
                                        ControllerKind kind,
                                        double sample_period,
                                        Hold reference_hold, Hold noise_hold,
                                        RefChannel ref_channel) {
  if (sample_period <= 0.0) {
    throw std::invalid_argument("ClosedLoopSystem: sample_period <= 0");
  }
  const double a0 = plant.den().constant_term();
  if (a0 == 0.0) {
    throw std::invalid_argument(
        "ClosedLoopSystem: plant denominator must have nonzero constant term");
  }
  ClosedLoopSystem sys;
  sys.plant = TransferFunction(plant.num().scaled(1.0 / a0),
                               plant.den().scaled(1.0 / a0));
  sys.f = f;
  sys.l = l;
  sys.controller_kind = kind;
  sys.sample_period = sample_period;
  sys.reference_hold = reference_hold;
  sys.noise_hold = noise_hold;
  sys.ref_channel = ref_channel;
  return sys;
}

void ClosedLoopSystem::validate() const {
  if (!is_hurwitz(plant.den())) {
    throw std::runtime_error("A1 violated: plant denominator is not Hurwitz");
  }
  if (!plant.num().is_zero() && !coprime(plant.num(), plant.den())) {
    throw std::runtime_error(
        "A1 violated: plant numerator and denominator share a root");
  }
  if (!is_hurwitz(l)) {
    throw std::runtime_error("A1 violated: controller denominator is not Hurwitz");
  }
  if (!f.is_zero() && f.degree() > l.degree()) {
    throw std::runtime_error("A1 violated: improper controller");
  }
  if (!is_hurwitz(char_poly())) {
    throw std::runtime_error("A1 violated: closed loop (AL + BF) is not Hurwitz");
  }
}

namespace {

// Exact one-period integrator for x' = A x + B w where every input channel
// is held over the period (constant for ZOH, linear for FOH).
class ExactStepper {
 public:
  ExactStepper(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
               double period, const std::vector<Hold>& holds) {
    const int n = static_cast<int>(a.rows());
    const int nin = static_cast<int>(b.cols());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 2 * nin, n + 2 * nin);
    m.topLeftCorner(n, n) = a;
    m.block(0, n, n, nin) = b;
    m.block(n, n + nin, nin, nin).setIdentity();
    Eigen::MatrixXd e = (m * period).exp();
    if (!e.allFinite()) throw std::runtime_error("ExactStepper: exp overflow");
    ad_ = e.topLeftCorner(n, n);
    g1_ = e.block(0, n, n, nin);
    g2_ = e.block(0, n + nin, n, nin) / period;
    for (int i = 0; i < nin; ++i) {
      if (holds[static_cast<std::size_t>(i)] == Hold::kZoh) g2_.col(i).setZero();
    }
  }

  const Eigen::MatrixXd& ad() const { return ad_; }
  Eigen::VectorXd input_gain(int i) const { return g1_.col(i); }

  Eigen::VectorXd step(const Eigen::VectorXd& x, const Eigen::VectorXd& wk,
                       const Eigen::VectorXd& wk1) const {
    return ad_ * x + g1_ * wk + g2_ * (wk1 - wk);
  }

 private:
  Eigen::MatrixXd ad_, g1_, g2_;
};

struct SimOutputs {
  std::vector<double> u, y, x;
  std::vector<std::vector<double>> probes;
};

// Rows are expressed over the extended vector z = [states; inputs].
struct LoopRows {
  Eigen::MatrixXd abig;  // ns x (ns + nin); left block A, right block B
  Eigen::RowVectorXd row_u, row_x;
  std::vector<Eigen::RowVectorXd> probe_rows;
  int ns = 0;
  int nin = 0;
};

double eval_row(const Eigen::RowVectorXd& row, const Eigen::VectorXd& x,
                const Eigen::VectorXd& w) {
  const int ns = static_cast<int>(x.size());
  const int nin = static_cast<int>(w.size());
  double v = 0.0;
  if (ns > 0) v += row.head(ns) * x;
  if (nin > 0) v += row.tail(nin) * w;
  return v;
}

// Continuous-controller loop with inputs [rw, v]; plant, controller and
// probe filters form one LTI system.
LoopRows build_continuous_rows(const ClosedLoopSystem& sys,
                               const std::vector<Probe>& probes) {
  const StateSpace g = sys.plant.realize();
  const StateSpace c = sys.controller().realize();
  std::vector<StateSpace> pf;
  for (const auto& p : probes) pf.push_back(p.filt.realize());

  const int ng = g.order();
  const int nc = c.order();
  int ns = ng + nc;
  std::vector<int> pofs;
  for (const auto& s : pf) {
    pofs.push_back(ns);
    ns += s.order();
  }
  const int nin = 2;
  const int nz = ns + nin;
  const int irw = ns, iv = ns + 1;

  const double denom = 1.0 + c.d * g.d;
  if (std::abs(denom) < 1e-12) {
    throw std::runtime_error("simulate: algebraic loop is not well posed");
  }
  const double alpha = 1.0 / denom;

  LoopRows lr;
  lr.ns = ns;
  lr.nin = nin;
  lr.row_u = Eigen::RowVectorXd::Zero(nz);
  lr.row_u.segment(0, ng) = -alpha * c.d * g.c;
  if (sys.ref_channel == RefChannel::kR1) {
    lr.row_u.segment(ng, nc) = -alpha * c.c;
    lr.row_u(irw) = alpha;
  } else {
    lr.row_u.segment(ng, nc) = alpha * c.c;
    lr.row_u(irw) = alpha * c.d;
  }
  lr.row_u(iv) = -alpha * c.d;

  lr.row_x = Eigen::RowVectorXd::Zero(nz);
  lr.row_x.segment(0, ng) = g.c;
  lr.row_x += g.d * lr.row_u;

  Eigen::RowVectorXd row_y = lr.row_x;
  row_y(iv) += 1.0;
  Eigen::RowVectorXd ctrl_in;
  if (sys.ref_channel == RefChannel::kR1) {
    ctrl_in = row_y;
  } else {
    ctrl_in = -row_y;
    ctrl_in(irw) += 1.0;
  }

  lr.abig = Eigen::MatrixXd::Zero(ns, nz);
  lr.abig.block(0, 0, ng, ng) = g.a;
  lr.abig.block(0, 0, ng, nz) += g.b * lr.row_u;
  lr.abig.block(ng, ng, nc, nc) += c.a;
  lr.abig.block(ng, 0, nc, nz) += c.b * ctrl_in;
  for (std::size_t p = 0; p < pf.size(); ++p) {
    const StateSpace& s = pf[p];
    const int ofs = pofs[p];
    const Eigen::RowVectorXd& chan =
        probes[p].channel == ProbeChannel::kPlantInput ? lr.row_u : lr.row_x;
    lr.abig.block(ofs, ofs, s.order(), s.order()) = s.a;
    lr.abig.block(ofs, 0, s.order(), nz) += s.b * chan;
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(nz);
    out.segment(ofs, s.order()) = s.c;
    out += s.d * chan;
    lr.probe_rows.push_back(out);
  }
  return lr;
}

SimOutputs run_continuous(const ClosedLoopSystem& sys,
                          const std::vector<double>& rw,
                          const std::vector<double>& v,
                          const std::vector<Probe>& probes) {
  LoopRows lr = build_continuous_rows(sys, probes);
  const int n = static_cast<int>(rw.size());
  const int ns = lr.ns;
  ExactStepper stepper(lr.abig.leftCols(ns), lr.abig.rightCols(lr.nin),
                       sys.sample_period, {sys.reference_hold, sys.noise_hold});

  SimOutputs out;
  out.u.resize(static_cast<std::size_t>(n));
  out.y.resize(static_cast<std::size_t>(n));
  out.x.resize(static_cast<std::size_t>(n));
  out.probes.assign(probes.size(), std::vector<double>(static_cast<std::size_t>(n)));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(ns);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd wk(2), wk1(2);
    wk << rw[static_cast<std::size_t>(k)], v[static_cast<std::size_t>(k)];
    const int k1 = std::min(k + 1, n - 1);
    wk1 << rw[static_cast<std::size_t>(k1)], v[static_cast<std::size_t>(k1)];
    const double uk = eval_row(lr.row_u, x, wk);
    const double xk = eval_row(lr.row_x, x, wk);
    out.u[static_cast<std::size_t>(k)] = uk;
    out.x[static_cast<std::size_t>(k)] = xk;
    out.y[static_cast<std::size_t>(k)] = xk + v[static_cast<std::size_t>(k)];
    for (std::size_t p = 0; p < probes.size(); ++p) {
      out.probes[p][static_cast<std::size_t>(k)] = eval_row(lr.probe_rows[p], x, wk);
    }
    if (k + 1 < n) x = stepper.step(x, wk, wk1);
  }
  return out;
}

// Discrete-controller loop: plant and probe filters are continuous with
// inputs [rw, c]; the controller acts on sampled measurements and its
// output is held (ZOH).
LoopRows build_discrete_rows(const ClosedLoopSystem& sys,
                             const std::vector<Probe>& probes) {
  const StateSpace g = sys.plant.realize();
  std::vector<StateSpace> pf;
  for (const auto& p : probes) pf.push_back(p.filt.realize());

  const int ng = g.order();
  int ns = ng;
  std::vector<int> pofs;
  for (const auto& s : pf) {
    pofs.push_back(ns);
    ns += s.order();
  }
  const int nin = 2;
  const int nz = ns + nin;
  const int irw = ns, ic = ns + 1;

  LoopRows lr;
  lr.ns = ns;
  lr.nin = nin;
  lr.row_u = Eigen::RowVectorXd::Zero(nz);
  if (sys.ref_channel == RefChannel::kR1) {
    lr.row_u(irw) = 1.0;
    lr.row_u(ic) = -1.0;
  } else {
    lr.row_u(ic) = 1.0;
  }
  lr.row_x = Eigen::RowVectorXd::Zero(nz);
  lr.row_x.segment(0, ng) = g.c;
  lr.row_x += g.d * lr.row_u;

  lr.abig = Eigen::MatrixXd::Zero(ns, nz);
  lr.abig.block(0, 0, ng, ng) = g.a;
  lr.abig.block(0, 0, ng, nz) += g.b * lr.row_u;
  for (std::size_t p = 0; p < pf.size(); ++p) {
    const StateSpace& s = pf[p];
    const int ofs = pofs[p];
    const Eigen::RowVectorXd& chan =
        probes[p].channel == ProbeChannel::kPlantInput ? lr.row_u : lr.row_x;
    lr.abig.block(ofs, ofs, s.order(), s.order()) = s.a;
    lr.abig.block(ofs, 0, s.order(), nz) += s.b * chan;
    Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(nz);
    out.segment(ofs, s.order()) = s.c;
    out += s.d * chan;
    lr.probe_rows.push_back(out);
  }
  return lr;
}

SimOutputs run_discrete(const ClosedLoopSystem& sys,
                        const std::vector<double>& rw,
                        const std::vector<double>& v,
                        const std::vector<Probe>& probes) {
  LoopRows lr = build_discrete_rows(sys, probes);
  const int n = static_cast<int>(rw.size());
  const int ns = lr.ns;
  ExactStepper stepper(lr.abig.leftCols(ns), lr.abig.rightCols(lr.nin),
                       sys.sample_period, {sys.reference_hold, Hold::kZoh});

  DiscreteFilter ctrl =
      discretize(sys.controller(), sys.sample_period, Hold::kZoh);
  const int ndc = static_cast<int>(ctrl.ad().rows());

  const StateSpace g = sys.plant.realize();
  const double denom = 1.0 + g.d * ctrl.dd();
  if (std::abs(denom) < 1e-12) {
    throw std::runtime_error("simulate: sampled algebraic loop is not well posed");
  }

  // Closed-loop sampled stability: eliminate the measurement and check the
  // spectral radius of the homogeneous [continuous states; controller] map.
  {
    const double sgn = sys.ref_channel == RefChannel::kR1 ? -1.0 : 1.0;
    Eigen::RowVectorXd y_x = Eigen::RowVectorXd::Zero(ns);
    y_x.head(g.order()) = g.c;
    Eigen::RowVectorXd y_xd = sgn * g.d * ctrl.cd();
    y_x /= denom;
    y_xd /= denom;
    // c = Cd xd + Dd e, with e = y (r1) or -y (r2, homogeneous part)
    const double esgn = sys.ref_channel == RefChannel::kR1 ? 1.0 : -1.0;
    Eigen::RowVectorXd c_x = ctrl.dd() * esgn * y_x;
    Eigen::RowVectorXd c_xd = ctrl.cd() + ctrl.dd() * esgn * y_xd;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ns + ndc, ns + ndc);
    m.topLeftCorner(ns, ns) = stepper.ad();
    Eigen::VectorXd gc = stepper.input_gain(1);
    m.block(0, 0, ns, ns) += gc * c_x;
    m.block(0, ns, ns, ndc) += gc * c_xd;
    m.block(ns, 0, ndc, ns) = ctrl.bd() * esgn * y_x;
    m.block(ns, ns, ndc, ndc) = ctrl.ad() + ctrl.bd() * esgn * y_xd;
    if (ns + ndc > 0) {
      Eigen::VectorXcd eig = m.eigenvalues();
      for (int i = 0; i < eig.size(); ++i) {
        if (std::abs(eig(i)) >= 1.0) {
          throw std::runtime_error(
              "simulate: sampled closed loop is unstable");
        }
      }
    }
  }

  SimOutputs out;
  out.u.resize(static_cast<std::size_t>(n));
  out.y.resize(static_cast<std::size_t>(n));
  out.x.resize(static_cast<std::size_t>(n));
  out.probes.assign(probes.size(), std::vector<double>(static_cast<std::size_t>(n)));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(ns);
  ctrl.reset();
  Eigen::VectorXd xd = Eigen::VectorXd::Zero(ndc);
  for (int k = 0; k < n; ++k) {
    const double cgx = g.order() > 0 ? (g.c * x.head(g.order()))(0) : 0.0;
    const double cdx = ndc > 0 ? (ctrl.cd() * xd)(0) : 0.0;
    const double rk = rw[static_cast<std::size_t>(k)];
    const double vk = v[static_cast<std::size_t>(k)];
    double yk, ck, uk, ek;
    if (sys.ref_channel == RefChannel::kR1) {
      yk = (cgx + g.d * rk - g.d * cdx + vk) / denom;
      ek = yk;
      ck = cdx + ctrl.dd() * ek;
      uk = rk - ck;
    } else {
      yk = (cgx + g.d * cdx + g.d * ctrl.dd() * rk + vk) / denom;
      ek = rk - yk;
      ck = cdx + ctrl.dd() * ek;
      uk = ck;
    }
    out.u[static_cast<std::size_t>(k)] = uk;
    out.y[static_cast<std::size_t>(k)] = yk;
    out.x[static_cast<std::size_t>(k)] = yk - vk;

    Eigen::VectorXd wk(2), wk1(2);
    wk << rk, ck;
    const int k1 = std::min(k + 1, n - 1);
    wk1 << rw[static_cast<std::size_t>(k1)], ck;
    for (std::size_t p = 0; p < probes.size(); ++p) {
      out.probes[p][static_cast<std::size_t>(k)] = eval_row(lr.probe_rows[p], x, wk);
    }
    if (ndc > 0) xd = ctrl.ad() * xd + ctrl.bd() * ek;
    if (k + 1 < n) x = stepper.step(x, wk, wk1);
  }
  return out;
}

SimOutputs run_loop(const ClosedLoopSystem& sys, const std::vector<double>& rw,
                    const std::vector<double>& v,
                    const std::vector<Probe>& probes) {
  if (rw.size() != v.size()) {
    throw std::invalid_argument("simulate: reference/noise length mismatch");
  }
  return sys.controller_kind == ControllerKind::kContinuous
             ? run_continuous(sys, rw, v, probes)
             : run_discrete(sys, rw, v, probes);
}

void check_period(const ClosedLoopSystem& sys, const SampledSignal& s,
                  const char* what) {
  if (std::abs(s.period - sys.sample_period) >
      1e-12 * std::max(1.0, sys.sample_period)) {
    throw std::invalid_argument(std::string("simulate: ") + what +
                                " period does not match the loop period");
  }
}

void check_a4(const ThetaVector& theta, const ClosedLoopSystem& sys) {
  Polynomial aj = theta.a_poly();
  if (!is_hurwitz(aj)) {
    throw std::invalid_argument("A4 violated: model denominator is not Hurwitz");
  }
  Polynomial qj = closed_loop_char(aj, theta.b_poly(), sys.l, sys.f);
  if (!is_hurwitz(qj)) {
    throw std::invalid_argument(
        "A4 violated: model closed loop (A_j L + B_j F) is not Hurwitz");
  }
}

}  // namespace

Dataset simulate(const ClosedLoopSystem& sys, const SampledSignal& r,
                 const SampledSignal& v) {
  check_period(sys, r, "reference");
  check_period(sys, v, "noise");
  sys.validate();
  std::vector<double> zeros(r.values.size(), 0.0);
  SimOutputs noisy = run_loop(sys, r.values, v.values, {});
  SimOutputs free = run_loop(sys, r.values, zeros, {});
  const double h = sys.sample_period;
  Dataset d;
  d.r = r;
  d.v = v;
  d.u = SampledSignal{std::move(noisy.u), h, Hold::kZoh};
  d.y = SampledSignal{std::move(noisy.y), h, Hold::kZoh};
  d.u_star = SampledSignal{std::move(free.u), h, Hold::kZoh};
  d.x_star = SampledSignal{std::move(free.x), h, Hold::kZoh};
  return d;
}

std::vector<std::vector<double>> simulate_probes(const ClosedLoopSystem& sys,
                                                 const SampledSignal& r,
                                                 const std::vector<Probe>& probes) {
  check_period(sys, r, "reference");
  sys.validate();
  std::vector<double> zeros(r.values.size(), 0.0);
  return run_loop(sys, r.values, zeros, probes).probes;
}

SampledSignal true_filtered_derivative(const ClosedLoopSystem& sys,
                                       const SampledSignal& r,
                                       const TransferFunction& filt,
                                       ProbeChannel channel) {
  auto outs = simulate_probes(sys, r, {Probe{filt, channel}});
  return SampledSignal{std::move(outs[0]), sys.sample_period, Hold::kZoh};
}

DeltaResult delta_vector(const ClosedLoopSystem& sys, const SampledSignal& r,
                         const ThetaVector& theta_j, Hold est_hold) {
  check_a4(theta_j, sys);
  const int n = theta_j.n();
  const int m = theta_j.m();
  const Polynomial aj = theta_j.a_poly();

  std::vector<Probe> probes;
  for (int i = 1; i <= n; ++i) {
    probes.push_back(
        {derivative_filter(n + 1 - i, Polynomial::one(), aj), ProbeChannel::kPlantOutput});
  }
  for (int j = 1; j <= m + 1; ++j) {
    probes.push_back(
        {derivative_filter(m + 1 - j, Polynomial::one(), aj), ProbeChannel::kPlantInput});
  }

  check_period(sys, r, "reference");
  sys.validate();
  std::vector<double> zeros(r.values.size(), 0.0);
  SimOutputs outs = run_loop(sys, r.values, zeros, probes);

  const int nsamp = r.size();
  const double h = sys.sample_period;
  DeltaResult res;
  res.delta = Eigen::MatrixXd::Zero(nsamp, n + m + 1);
  res.u_discrepancy = Eigen::MatrixXd::Zero(nsamp, m + 1);
  for (int i = 1; i <= n; ++i) {
    auto stf = discretize(derivative_filter(n + 1 - i, Polynomial::one(), aj),
                          h, est_hold)
                   .apply(outs.x);
    for (int k = 0; k < nsamp; ++k) {
      res.delta(k, i - 1) = outs.probes[static_cast<std::size_t>(i - 1)]
                                       [static_cast<std::size_t>(k)] -
                            stf[static_cast<std::size_t>(k)];
    }
  }
  for (int j = 1; j <= m + 1; ++j) {
    auto stf = discretize(derivative_filter(m + 1 - j, Polynomial::one(), aj),
                          h, est_hold)
                   .apply(outs.u);
    for (int k = 0; k < nsamp; ++k) {
      res.u_discrepancy(k, j - 1) =
          outs.probes[static_cast<std::size_t>(n + j - 1)]
                     [static_cast<std::size_t>(k)] -
          stf[static_cast<std::size_t>(k)];
    }
  }
  return res;
}

SampledSignal epsilon_u(const ClosedLoopSystem& sys, const SampledSignal& r,
                        const ThetaVector& theta_bar, Hold est_hold) {
  check_a4(theta_bar, sys);
  check_period(sys, r, "reference");
  sys.validate();
  TransferFunction model = theta_bar.model();
  std::vector<double> zeros(r.values.size(), 0.0);
  SimOutputs outs =
      run_loop(sys, r.values, zeros, {Probe{model, ProbeChannel::kPlantInput}});
  auto sampled_path =
      discretize(model, sys.sample_period, est_hold).apply(outs.u);
  SampledSignal eps{std::vector<double>(r.values.size()), sys.sample_period,
                    Hold::kZoh};
  for (std::size_t k = 0; k < eps.values.size(); ++k) {
    eps.values[k] = outs.probes[0][k] - sampled_path[k];
  }
  return eps;
}

void Dataset::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Dataset::write_csv: cannot open " + path);
  out << "t,r,u,y,u_star,x_star,v\n";
  char buf[256];
  for (int k = 0; k < size(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", k * r.period,
                  r.values[i], u.values[i], y.values[i], u_star.values[i],
                  x_star.values[i], v.values[i]);
    out << buf;
  }
}

}  // namespace clsrivc
