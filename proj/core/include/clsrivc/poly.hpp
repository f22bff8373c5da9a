#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace clsrivc {

/// Real polynomial in the differential operator p, stored with descending
/// powers (coeffs()[0] is the leading coefficient). The zero polynomial is
/// represented by an empty coefficient vector and has degree() == -1.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> coeffs)
      : Polynomial(std::vector<double>(coeffs)) {}
  explicit Polynomial(std::vector<double> coeffs);

  static Polynomial zero() { return Polynomial(); }
  static Polynomial one() { return Polynomial({1.0}); }
  /// p^k
  static Polynomial monomial(int k, double coeff = 1.0);

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }

  double leading() const;
  double constant_term() const;
  /// Coefficient of p^k (0 for k > degree).
  double coeff_of(int k) const;

  std::complex<double> eval(std::complex<double> s) const;
  double eval(double s) const;

  Polynomial scaled(double factor) const;

  Polynomial operator+(const Polynomial& other) const;
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator*(const Polynomial& other) const;
  Polynomial operator-() const { return scaled(-1.0); }

  bool operator==(const Polynomial& other) const {
    return coeffs_ == other.coeffs_;
  }

 private:
  std::vector<double> coeffs_;  // descending powers, trimmed
};

/// All complex roots with multiplicity, via companion-matrix eigenvalues.
/// Throws std::invalid_argument for the zero polynomial or degree 0.
std::vector<std::complex<double>> roots(const Polynomial& a);

/// True iff every root has real part < -margin. Constants are vacuously
/// Hurwitz. Throws for the zero polynomial.
bool is_hurwitz(const Polynomial& a, double margin = 0.0);

/// Resultant of (a, b) normalized by coefficient 2-norms so that the result
/// is scale invariant.
double scaled_resultant(const Polynomial& a, const Polynomial& b);

/// True iff a and b share no common root, decided by the scaled resultant
/// exceeding tol.
bool coprime(const Polynomial& a, const Polynomial& b, double tol = 1e-8);

/// The (n+m+1)x(n+m+1) coefficient matrix S(-b, a): row i (i = 1..n) holds
/// the coefficients of -p^{n+1-i} b(p) in the basis [p^{n+m}, ..., p, 1];
/// row n+j (j = 1..m+1) holds the coefficients of p^{m+1-j} a(p) in the
/// same basis. Nonsingular whenever (b, a) is coprime, deg a = n with
/// nonzero constant term and deg b <= m.
Eigen::MatrixXd sylvester(const Polynomial& b, const Polynomial& a, int n,
                          int m);

}  // namespace clsrivc
