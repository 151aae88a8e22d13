#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toral/int_matrix.hpp"

namespace toral {

/// Polynomial with integer coefficients stored in ascending degree order.
/// The zero polynomial has no coefficients; otherwise the leading coefficient
/// is nonzero.
class IntPolynomial {
 public:
  IntPolynomial() = default;
  explicit IntPolynomial(std::vector<BigInt> ascending);
  IntPolynomial(std::initializer_list<long long> ascending);

  /// Degree, or -1 for the zero polynomial.
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  const std::vector<BigInt>& coefficients() const { return coeffs_; }
  const BigInt& coeff(int i) const { return coeffs_[i]; }
  const BigInt& leading() const { return coeffs_.back(); }

  IntPolynomial operator*(const IntPolynomial& o) const;
  IntPolynomial operator+(const IntPolynomial& o) const;
  IntPolynomial operator-(const IntPolynomial& o) const;
  IntPolynomial operator-() const;
  friend bool operator==(const IntPolynomial&, const IntPolynomial&) = default;
  friend bool operator<(const IntPolynomial& a, const IntPolynomial& b);

  IntPolynomial derivative() const;
  BigInt content() const;
  /// Divides out the content and makes the leading coefficient positive.
  IntPolynomial primitive_part() const;

  /// p(M) by Horner's rule, exact.
  IntMatrix evaluate(const IntMatrix& m) const;
  std::complex<long double> evaluate(std::complex<long double> z) const;

  /// Euclidean norm of the coefficient vector.
  double norm2() const;

  /// Human-readable form in descending powers of `var`, e.g. "x^2 - 3*x + 1".
  std::string to_string(const std::string& var = "x") const;

 private:
  void trim();
  std::vector<BigInt> coeffs_;
};

/// q with p = d*q over Z, or nullopt when d does not divide p exactly.
std::optional<IntPolynomial> exact_divide(const IntPolynomial& p, const IntPolynomial& d);

/// Greatest common divisor over Q[x], returned primitive with positive
/// leading coefficient.
IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b);

/// det(xI - A), exact, by the Faddeev-LeVerrier recurrence.
IntPolynomial char_poly(const IntMatrix& a);

/// Highest degree accepted by factor_over_int.
inline constexpr int kMaxFactorDegree = 8;

/// Complete factorization into irreducible factors over Z, with repetition.
///
/// The input must have leading coefficient +-1 and degree in [1, 8]. Factors
/// are monic and sorted; if the input's leading coefficient is -1 the first
/// factor is negated so that the product reproduces the input exactly.
///
/// Square-free parts are split by searching conjugation-closed subsets of
/// numerically polished roots; every candidate has its coefficients checked
/// against the Landau-Mignotte bound and is confirmed by exact division, so a
/// reported factor is always a true factor.
std::vector<IntPolynomial> factor_over_int(const IntPolynomial& p);

/// Groups equal factors: (factor, multiplicity), in first-seen order.
std::vector<std::pair<IntPolynomial, int>> group_factors(const std::vector<IntPolynomial>& factors);

/// Landau-Mignotte bound on |b_j| for any degree-m factor of p.
double landau_mignotte_bound(const IntPolynomial& p, int m, int j);

}  // namespace toral
