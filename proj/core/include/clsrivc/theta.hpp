#pragma once

#include <Eigen/Dense>

#include "clsrivc/lti.hpp"
#include "clsrivc/poly.hpp"

namespace clsrivc {

/// Parameter vector [a_1..a_n, b_0..b_m] of the model
///   B(p)/A(p) = (b_0 p^m + ... + b_m) / (a_1 p^n + ... + a_n p + 1),
/// with the A(0) = 1 normalization built in.
struct ThetaVector {
  std::vector<double> a;  // a_1..a_n (descending powers, constant term fixed at 1)
  std::vector<double> b;  // b_0..b_m

  int n() const { return static_cast<int>(a.size()); }
  int m() const { return static_cast<int>(b.size()) - 1; }
  int dim() const { return n() + m() + 1; }

  Polynomial a_poly() const;
  Polynomial b_poly() const;
  TransferFunction model() const { return TransferFunction(b_poly(), a_poly()); }

  Eigen::VectorXd stacked() const;
  static ThetaVector from_stacked(const Eigen::VectorXd& v, int n, int m);

  /// Extracts [a, b] from a proper transfer function, rescaling so that the
  /// denominator's constant term is 1. Throws if den(0) == 0.
  static ThetaVector from_model(const TransferFunction& g);
};

}  // namespace clsrivc
