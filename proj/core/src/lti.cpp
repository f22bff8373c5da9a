#include "clsrivc/lti.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace clsrivc {

TransferFunction::TransferFunction(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) {
    throw std::invalid_argument("TransferFunction: zero denominator");
  }
  if (!num_.is_zero() && num_.degree() > den_.degree()) {
    throw std::invalid_argument("TransferFunction: improper (deg num > deg den)");
  }
}

double TransferFunction::dc_gain() const {
  const double d0 = den_.eval(0.0);
  if (d0 == 0.0) throw std::invalid_argument("dc_gain: pole at the origin");
  return num_.eval(0.0) / d0;
}

StateSpace TransferFunction::realize() const {
  const int r = den_.degree();
  const double lead = den_.leading();
  StateSpace ss;
  if (r == 0) {  // static gain
    ss.a.resize(0, 0);
    ss.b.resize(0);
    ss.c.resize(0);
    ss.d = num_.is_zero() ? 0.0 : num_.leading() / lead;
    return ss;
  }
  // Monic denominator p^r + d_1 p^{r-1} + ... + d_r.
  std::vector<double> d(static_cast<std::size_t>(r));
  for (int k = 1; k <= r; ++k) {
    d[static_cast<std::size_t>(k - 1)] =
        den_.coeffs()[static_cast<std::size_t>(k)] / lead;
  }
  // Split feedthrough: num/den = q + num'/den with deg num' < r.
  double q = 0.0;
  Polynomial rem = num_.scaled(1.0 / lead);
  if (!rem.is_zero() && rem.degree() == r) {
    q = rem.leading();
    rem = rem - den_.scaled(q / lead);
  }
  ss.a = Eigen::MatrixXd::Zero(r, r);
  for (int k = 0; k < r; ++k) ss.a(0, k) = -d[static_cast<std::size_t>(k)];
  if (r > 1) ss.a.block(1, 0, r - 1, r - 1).setIdentity();
  ss.b = Eigen::VectorXd::Zero(r);
  ss.b(0) = 1.0;
  ss.c = Eigen::RowVectorXd::Zero(r);
  for (int k = 0; k < r; ++k) {
    ss.c(k) = rem.coeff_of(r - 1 - k);
  }
  ss.d = q;
  return ss;
}

Polynomial closed_loop_char(const Polynomial& a, const Polynomial& b,
                            const Polynomial& l, const Polynomial& f) {
  return a * l + b * f;
}

SensitivitySet sensitivities(const TransferFunction& g,
                             const TransferFunction& c) {
  const Polynomial& a = g.den();
  const Polynomial& b = g.num();
  const Polynomial& f = c.num();
  const Polynomial& l = c.den();
  Polynomial q = closed_loop_char(a, b, l, f);
  if (q.is_zero()) {
    throw std::invalid_argument("sensitivities: 1 + GC is identically zero");
  }
  SensitivitySet out;
  out.q = q;
  out.s = TransferFunction(a * l, q);
  out.cs = TransferFunction(a * f, q);
  out.gs = TransferFunction(b * l, q);
  out.gcs = TransferFunction(b * f, q);
  return out;
}

TransferFunction derivative_filter(int i, const Polynomial& extra_num,
                                   const Polynomial& den) {
  if (i < 0) throw std::invalid_argument("derivative_filter: i < 0");
  Polynomial num = Polynomial::monomial(i) * extra_num;
  if (!num.is_zero() && num.degree() > den.degree()) {
    throw std::invalid_argument(
        "derivative_filter: improper request (violated degree condition)");
  }
  return TransferFunction(num, den);
}

namespace {

// Coefficients of det(zI - A) (monic, descending) and the matrix
// coefficients of adj(zI - A), via the Faddeev-LeVerrier recurrence.
void char_poly_and_adjugate(const Eigen::MatrixXd& a,
                            std::vector<double>* den,
                            std::vector<Eigen::MatrixXd>* adj) {
  const int r = static_cast<int>(a.rows());
  den->assign(static_cast<std::size_t>(r) + 1, 0.0);
  (*den)[0] = 1.0;
  adj->clear();
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(r, r);
  adj->push_back(m);
  for (int k = 1; k <= r; ++k) {
    Eigen::MatrixXd am = a * m;
    const double ck = -am.trace() / k;
    (*den)[static_cast<std::size_t>(k)] = ck;
    m = am + ck * Eigen::MatrixXd::Identity(r, r);
    if (k < r) adj->push_back(m);
  }
}

}  // namespace

DiscreteFilter::DiscreteFilter(const TransferFunction& tf, double period,
                               Hold hold)
    : period_(period), hold_(hold) {
  if (period <= 0.0) throw std::invalid_argument("discretize: period <= 0");
  StateSpace ss = tf.realize();
  const int r = ss.order();
  cd_ = ss.c;
  dd_ = ss.d;
  init_coupling_ = Eigen::VectorXd::Zero(r);
  if (r == 0) {
    ad_.resize(0, 0);
    bd_.resize(0);
    num_z_ = {dd_};
    den_z_ = {1.0};
    reset();
    return;
  }
  if (hold == Hold::kZoh) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r + 1, r + 1);
    m.topLeftCorner(r, r) = ss.a;
    m.topRightCorner(r, 1) = ss.b;
    Eigen::MatrixXd e = (m * period).exp();
    if (!e.allFinite()) throw std::runtime_error("discretize: exp overflow");
    ad_ = e.topLeftCorner(r, r);
    bd_ = e.topRightCorner(r, 1);
  } else {
    // Triangle-hold equivalent. With gamma1 = int_0^h e^{A(h-s)} B ds and
    // gamma2 = (1/h) int_0^h e^{A(h-s)} B s ds, the shifted state
    // xi_k = x_k - gamma2 u_k obeys
    //   xi_{k+1} = Ad xi_k + (gamma1 + Ad gamma2 - gamma2) u_k,
    //   y_k      = C xi_k + (D + C gamma2) u_k.
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(r + 2, r + 2);
    m.topLeftCorner(r, r) = ss.a;
    m.block(0, r, r, 1) = ss.b;
    m(r, r + 1) = 1.0;
    Eigen::MatrixXd e = (m * period).exp();
    if (!e.allFinite()) throw std::runtime_error("discretize: exp overflow");
    ad_ = e.topLeftCorner(r, r);
    Eigen::VectorXd gamma1 = e.block(0, r, r, 1);
    Eigen::VectorXd gamma2 = e.block(0, r + 1, r, 1) / period;
    bd_ = gamma1 + ad_ * gamma2 - gamma2;
    cd_ = ss.c;
    dd_ = ss.d + (ss.c * gamma2)(0);
    init_coupling_ = -gamma2;  // zero continuous initial state
  }
  std::vector<Eigen::MatrixXd> adj;
  char_poly_and_adjugate(ad_, &den_z_, &adj);
  num_z_.assign(static_cast<std::size_t>(r) + 1, 0.0);
  for (int k = 0; k <= r; ++k) {
    num_z_[static_cast<std::size_t>(k)] = dd_ * den_z_[static_cast<std::size_t>(k)];
  }
  for (int k = 0; k < r; ++k) {
    num_z_[static_cast<std::size_t>(k) + 1] += (cd_ * adj[static_cast<std::size_t>(k)] * bd_)(0);
  }
  reset();
}

std::complex<double> DiscreteFilter::eval(std::complex<double> z) const {
  std::complex<double> num = 0.0, den = 0.0;
  for (double c : num_z_) num = num * z + c;
  for (double c : den_z_) den = den * z + c;
  return num / den;
}

std::vector<std::complex<double>> DiscreteFilter::poles() const {
  if (ad_.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(ad_, false);
  std::vector<std::complex<double>> out;
  for (int k = 0; k < ad_.rows(); ++k) out.push_back(solver.eigenvalues()(k));
  return out;
}

void DiscreteFilter::reset() {
  state_ = Eigen::VectorXd::Zero(ad_.rows());
  primed_ = false;
}

double DiscreteFilter::step(double u) {
  if (!primed_) {
    state_ += init_coupling_ * u;
    primed_ = true;
  }
  const double y = ad_.rows() > 0 ? (cd_ * state_)(0) + dd_ * u : dd_ * u;
  if (ad_.rows() > 0) state_ = ad_ * state_ + bd_ * u;
  return y;
}

std::vector<double> DiscreteFilter::apply(const std::vector<double>& u) const {
  DiscreteFilter f = *this;
  f.reset();
  std::vector<double> y(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) y[k] = f.step(u[k]);
  return y;
}

DiscreteFilter discretize(const TransferFunction& tf, double period,
                          Hold hold) {
  return DiscreteFilter(tf, period, hold);
}

SampledSignal filter_signal(const DiscreteFilter& f, const SampledSignal& x) {
  if (std::abs(f.period() - x.period) > 1e-12 * std::max(1.0, x.period)) {
    throw std::invalid_argument("filter_signal: period mismatch");
  }
  return SampledSignal{f.apply(x.values), x.period, x.hold};
}

SampledSignal filter_signal(const TransferFunction& tf,
                            const SampledSignal& x, Hold hold) {
  return filter_signal(discretize(tf, x.period, hold), x);
}

}  // namespace clsrivc
