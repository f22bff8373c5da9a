#include "clsrivc/theta.hpp"

#include <stdexcept>

namespace clsrivc {

Polynomial ThetaVector::a_poly() const {
  std::vector<double> c = a;
  c.push_back(1.0);
  return Polynomial(std::move(c));
}

Polynomial ThetaVector::b_poly() const { return Polynomial(b); }

Eigen::VectorXd ThetaVector::stacked() const {
  Eigen::VectorXd v(dim());
  for (int i = 0; i < n(); ++i) v(i) = a[static_cast<std::size_t>(i)];
  for (int j = 0; j <= m(); ++j) v(n() + j) = b[static_cast<std::size_t>(j)];
  return v;
}

ThetaVector ThetaVector::from_stacked(const Eigen::VectorXd& v, int n, int m) {
  if (v.size() != n + m + 1) {
    throw std::invalid_argument("ThetaVector::from_stacked: size mismatch");
  }
  ThetaVector t;
  t.a.resize(static_cast<std::size_t>(n));
  t.b.resize(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i < n; ++i) t.a[static_cast<std::size_t>(i)] = v(i);
  for (int j = 0; j <= m; ++j) t.b[static_cast<std::size_t>(j)] = v(n + j);
  return t;
}

ThetaVector ThetaVector::from_model(const TransferFunction& g) {
  const double a0 = g.den().constant_term();
  if (a0 == 0.0) {
    throw std::invalid_argument(
        "ThetaVector::from_model: denominator constant term is zero");
  }
  Polynomial den = g.den().scaled(1.0 / a0);
  Polynomial num = g.num().scaled(1.0 / a0);
  ThetaVector t;
  const int n = den.degree();
  for (int k = n; k >= 1; --k) t.a.push_back(den.coeff_of(k));
  const int m = num.is_zero() ? 0 : num.degree();
  for (int k = m; k >= 0; --k) t.b.push_back(num.coeff_of(k));
  return t;
}

}  // namespace clsrivc
