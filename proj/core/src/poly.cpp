#include "clsrivc/poly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clsrivc {

namespace {

std::vector<double> trim_leading_zeros(std::vector<double> c) {
  auto it = std::find_if(c.begin(), c.end(),
                         [](double x) { return x != 0.0; });
  c.erase(c.begin(), it);
  return c;
}

double coeff_norm(const Polynomial& a) {
  double s = 0.0;
  for (double c : a.coeffs()) s += c * c;
  return std::sqrt(s);
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs)
    : coeffs_(trim_leading_zeros(std::move(coeffs))) {
  for (double c : coeffs_) {
    if (!std::isfinite(c)) {
      throw std::invalid_argument("Polynomial: non-finite coefficient");
    }
  }
}

Polynomial Polynomial::monomial(int k, double coeff) {
  if (k < 0) throw std::invalid_argument("Polynomial::monomial: k < 0");
  std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
  c[0] = coeff;
  return Polynomial(std::move(c));
}

double Polynomial::leading() const {
  if (is_zero()) throw std::invalid_argument("leading(): zero polynomial");
  return coeffs_.front();
}

double Polynomial::constant_term() const {
  return is_zero() ? 0.0 : coeffs_.back();
}

double Polynomial::coeff_of(int k) const {
  if (k < 0 || k > degree()) return 0.0;
  return coeffs_[static_cast<std::size_t>(degree() - k)];
}

std::complex<double> Polynomial::eval(std::complex<double> s) const {
  std::complex<double> acc = 0.0;
  for (double c : coeffs_) acc = acc * s + c;
  return acc;
}

double Polynomial::eval(double s) const {
  double acc = 0.0;
  for (double c : coeffs_) acc = acc * s + c;
  return acc;
}

Polynomial Polynomial::scaled(double factor) const {
  std::vector<double> c = coeffs_;
  for (double& x : c) x *= factor;
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
  const std::size_t n = std::max(coeffs_.size(), other.coeffs_.size());
  std::vector<double> c(n, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    c[n - coeffs_.size() + i] += coeffs_[i];
  }
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) {
    c[n - other.coeffs_.size() + i] += other.coeffs_[i];
  }
  return Polynomial(std::move(c));
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
  return *this + other.scaled(-1.0);
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
  if (is_zero() || other.is_zero()) return Polynomial();
  std::vector<double> c(coeffs_.size() + other.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < other.coeffs_.size(); ++j) {
      c[i + j] += coeffs_[i] * other.coeffs_[j];
    }
  }
  return Polynomial(std::move(c));
}

std::vector<std::complex<double>> roots(const Polynomial& a) {
  if (a.is_zero()) throw std::invalid_argument("roots(): zero polynomial");
  const int n = a.degree();
  if (n < 1) throw std::invalid_argument("roots(): degree must be >= 1");

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  const double lead = a.leading();
  for (int k = 0; k < n; ++k) {
    companion(0, k) = -a.coeffs()[static_cast<std::size_t>(k) + 1] / lead;
  }
  companion.block(1, 0, n - 1, n - 1).setIdentity();

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = solver.eigenvalues()(k);
  return out;
}

bool is_hurwitz(const Polynomial& a, double margin) {
  if (a.is_zero()) throw std::invalid_argument("is_hurwitz(): zero polynomial");
  if (a.degree() == 0) return true;
  for (const auto& r : roots(a)) {
    if (r.real() >= -margin) return false;
  }
  return true;
}

double scaled_resultant(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) {
    throw std::invalid_argument("scaled_resultant(): zero polynomial");
  }
  const int da = a.degree();
  const int db = b.degree();
  if (da == 0 || db == 0) return 1.0;  // constants share no roots

  // Classic (da+db) x (da+db) Sylvester resultant matrix.
  const int dim = da + db;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < db; ++i) {
    for (int k = 0; k <= da; ++k) {
      s(i, i + k) = a.coeffs()[static_cast<std::size_t>(k)];
    }
  }
  for (int i = 0; i < da; ++i) {
    for (int k = 0; k <= db; ++k) {
      s(db + i, i + k) = b.coeffs()[static_cast<std::size_t>(k)];
    }
  }
  const double scale =
      std::pow(coeff_norm(a), db) * std::pow(coeff_norm(b), da);
  return std::abs(s.determinant()) / scale;
}

bool coprime(const Polynomial& a, const Polynomial& b, double tol) {
  return scaled_resultant(a, b) > tol;
}

Eigen::MatrixXd sylvester(const Polynomial& b, const Polynomial& a, int n,
                          int m) {
  if (a.degree() != n) {
    throw std::invalid_argument("sylvester(): deg a must equal n");
  }
  if (a.constant_term() == 0.0) {
    throw std::invalid_argument("sylvester(): a must have nonzero constant term");
  }
  if (b.degree() > m) {
    throw std::invalid_argument("sylvester(): deg b must be <= m");
  }
  const int dim = n + m + 1;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
  // Column d (1-indexed) corresponds to basis element p^{n+m+1-d}.
  for (int i = 1; i <= n; ++i) {
    // -p^{n+1-i} b(p): coefficient of p^{n+1-i+k} is -b.coeff_of(k).
    for (int k = 0; k <= m; ++k) {
      const int power = n + 1 - i + k;
      s(i - 1, dim - 1 - power) = -b.coeff_of(k);
    }
  }
  for (int j = 1; j <= m + 1; ++j) {
    // p^{m+1-j} a(p)
    for (int k = 0; k <= n; ++k) {
      const int power = m + 1 - j + k;
      s(n + j - 1, dim - 1 - power) = a.coeff_of(k);
    }
  }
  return s;
}

}  // namespace clsrivc
