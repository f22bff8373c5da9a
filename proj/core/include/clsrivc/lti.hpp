#pragma once

#include <vector>

#include <Eigen/Dense>

#include "clsrivc/poly.hpp"
#include "clsrivc/signals.hpp"

namespace clsrivc {

/// Minimal SISO state-space realization (controllable canonical form).
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::RowVectorXd c;
  double d = 0.0;

  int order() const { return static_cast<int>(a.rows()); }
};

/// Proper rational function num(p)/den(p).
class TransferFunction {
 public:
  TransferFunction() : num_(Polynomial::zero()), den_(Polynomial::one()) {}
  TransferFunction(Polynomial num, Polynomial den);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool is_strictly_proper() const {
    return num_.is_zero() || num_.degree() < den_.degree();
  }
  /// H(0); throws if den(0) == 0.
  double dc_gain() const;

  TransferFunction series(const TransferFunction& other) const {
    return TransferFunction(num_ * other.num_, den_ * other.den_);
  }

  /// Controllable canonical realization; monic denominator, feedthrough
  /// split off by polynomial division when biproper.
  StateSpace realize() const;

 private:
  Polynomial num_, den_;
};

struct SensitivitySet {
  TransferFunction s;    // 1/(1+GC)  = AL/Q
  TransferFunction cs;   // C/(1+GC)  = AF/Q
  TransferFunction gs;   // G/(1+GC)  = BL/Q
  TransferFunction gcs;  // GC/(1+GC) = BF/Q
  Polynomial q;           // AL + BF, shared denominator
};

/// Q = A L + B F.
Polynomial closed_loop_char(const Polynomial& a, const Polynomial& b,
                            const Polynomial& l, const Polynomial& f);

/// All four closed-loop sensitivity functions of plant G = B/A and
/// controller C = F/L over the shared denominator Q = AL + BF.
SensitivitySet sensitivities(const TransferFunction& g,
                             const TransferFunction& c);

/// p^i * extra_num / den; throws if the result would be improper.
TransferFunction derivative_filter(int i, const Polynomial& extra_num,
                                   const Polynomial& den);

/// Exact hold-equivalent discretization of a proper continuous filter:
/// applying the discrete filter to a sampled sequence reproduces, at the
/// sample instants, the continuous filter driven by the held (ZOH) or
/// linearly interpolated (FOH) reconstruction of that sequence.
///
/// Carries mutable state; clone (copy) for independent concurrent use.
class DiscreteFilter {
 public:
  DiscreteFilter(const TransferFunction& tf, double period, Hold hold);

  double period() const { return period_; }
  Hold hold() const { return hold_; }

  /// z^-1-domain coefficients; den_z[0] == 1.
  const std::vector<double>& num_z() const { return num_z_; }
  const std::vector<double>& den_z() const { return den_z_; }

  /// H_d evaluated at z.
  std::complex<double> eval(std::complex<double> z) const;
  std::vector<std::complex<double>> poles() const;

  /// Internal state-space form (used when embedding the filter in a
  /// sampled-data loop).
  const Eigen::MatrixXd& ad() const { return ad_; }
  const Eigen::VectorXd& bd() const { return bd_; }
  const Eigen::RowVectorXd& cd() const { return cd_; }
  double dd() const { return dd_; }

  void reset();
  double step(double u);

  /// Zero-initial-condition response; leaves the streaming state untouched.
  std::vector<double> apply(const std::vector<double>& u) const;

 private:
  Eigen::MatrixXd ad_;
  Eigen::VectorXd bd_;
  Eigen::RowVectorXd cd_;
  double dd_ = 0.0;
  Eigen::VectorXd init_coupling_;  // state(0) = init_coupling * u[0]
  double period_;
  Hold hold_;
  std::vector<double> num_z_, den_z_;

  Eigen::VectorXd state_;
  bool primed_ = false;
};

DiscreteFilter discretize(const TransferFunction& tf, double period,
                          Hold hold);

/// Filters x with a fresh zero-initial-condition copy of f.
SampledSignal filter_signal(const DiscreteFilter& f, const SampledSignal& x);

/// Convenience: discretize tf at x.period with the given hold and filter x.
SampledSignal filter_signal(const TransferFunction& tf,
                            const SampledSignal& x, Hold hold);

}  // namespace clsrivc
