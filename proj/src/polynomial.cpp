#include "toral/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "toral/errors.hpp"

namespace toral {

using cld = std::complex<long double>;

IntPolynomial::IntPolynomial(std::vector<BigInt> ascending) : coeffs_(std::move(ascending)) {
  trim();
}

IntPolynomial::IntPolynomial(std::initializer_list<long long> ascending) {
  for (long long c : ascending) coeffs_.emplace_back(c);
  trim();
}

void IntPolynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

IntPolynomial IntPolynomial::operator*(const IntPolynomial& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<BigInt> out(coeffs_.size() + o.coeffs_.size() - 1);
  for (std::size_t i = 0; i < coeffs_.size(); ++i)
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) out[i + j] += coeffs_[i] * o.coeffs_[j];
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator+(const IntPolynomial& o) const {
  std::vector<BigInt> out(std::max(coeffs_.size(), o.coeffs_.size()));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i] += coeffs_[i];
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) out[i] += o.coeffs_[i];
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator-() const {
  std::vector<BigInt> out = coeffs_;
  for (auto& c : out) c = -c;
  return IntPolynomial(std::move(out));
}

IntPolynomial IntPolynomial::operator-(const IntPolynomial& o) const { return *this + (-o); }

bool operator<(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  for (int i = a.degree(); i >= 0; --i)
    if (a.coeffs_[i] != b.coeffs_[i]) return a.coeffs_[i] < b.coeffs_[i];
  return false;
}

IntPolynomial IntPolynomial::derivative() const {
  if (degree() < 1) return {};
  std::vector<BigInt> out(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) out[i - 1] = coeffs_[i] * static_cast<long long>(i);
  return IntPolynomial(std::move(out));
}

BigInt IntPolynomial::content() const {
  BigInt g = 0;
  for (const auto& c : coeffs_) g = boost::multiprecision::gcd(g, c);
  return boost::multiprecision::abs(g);
}

IntPolynomial IntPolynomial::primitive_part() const {
  if (is_zero()) return {};
  BigInt g = content();
  if (leading() < 0) g = -g;
  std::vector<BigInt> out = coeffs_;
  for (auto& c : out) c /= g;
  return IntPolynomial(std::move(out));
}

IntMatrix IntPolynomial::evaluate(const IntMatrix& m) const {
  const int n = m.rows();
  IntMatrix acc(n, n);
  for (int i = degree(); i >= 0; --i) {
    acc = acc * m;
    for (int d = 0; d < n; ++d) acc(d, d) += coeffs_[i];
  }
  return acc;
}

cld IntPolynomial::evaluate(cld z) const {
  cld acc = 0;
  for (int i = degree(); i >= 0; --i) acc = acc * z + static_cast<long double>(coeffs_[i].convert_to<long double>());
  return acc;
}

double IntPolynomial::norm2() const {
  long double s = 0;
  for (const auto& c : coeffs_) {
    const long double v = c.convert_to<long double>();
    s += v * v;
  }
  return static_cast<double>(std::sqrt(s));
}

std::string IntPolynomial::to_string(const std::string& var) const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const BigInt& c = coeffs_[i];
    if (c == 0) continue;
    const BigInt mag = boost::multiprecision::abs(c);
    if (first) {
      if (c < 0) os << '-';
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    if (i == 0 || mag != 1) os << mag;
    if (i > 0) {
      if (mag != 1) os << '*';
      os << var;
      if (i > 1) os << '^' << i;
    }
  }
  return os.str();
}

std::optional<IntPolynomial> exact_divide(const IntPolynomial& p, const IntPolynomial& d) {
  if (d.is_zero()) throw InvalidInput("division by the zero polynomial");
  if (p.is_zero()) return IntPolynomial{};
  if (p.degree() < d.degree()) return std::nullopt;
  std::vector<BigInt> rem = p.coefficients();
  std::vector<BigInt> quot(p.degree() - d.degree() + 1);
  const BigInt& lead = d.leading();
  for (int i = p.degree(); i >= d.degree(); --i) {
    if (rem[i] == 0) continue;
    if (rem[i] % lead != 0) return std::nullopt;
    const BigInt q = rem[i] / lead;
    quot[i - d.degree()] = q;
    for (int j = 0; j <= d.degree(); ++j) rem[i - d.degree() + j] -= q * d.coeff(j);
  }
  for (const auto& r : rem)
    if (r != 0) return std::nullopt;
  return IntPolynomial(std::move(quot));
}

namespace {

IntPolynomial pseudo_remainder(IntPolynomial a, const IntPolynomial& b) {
  const BigInt lb = b.leading();
  while (!a.is_zero() && a.degree() >= b.degree()) {
    const int shift = a.degree() - b.degree();
    std::vector<BigInt> scaled = a.coefficients();
    for (auto& c : scaled) c *= lb;
    const BigInt la = a.leading();
    for (int j = 0; j <= b.degree(); ++j) scaled[shift + j] -= la * b.coeff(j);
    a = IntPolynomial(std::move(scaled));
  }
  return a;
}

}  // namespace

IntPolynomial gcd(const IntPolynomial& a, const IntPolynomial& b) {
  IntPolynomial x = a.primitive_part();
  IntPolynomial y = b.primitive_part();
  if (x.degree() < y.degree()) std::swap(x, y);
  while (!y.is_zero()) {
    IntPolynomial r = pseudo_remainder(x, y);
    x = std::move(y);
    y = r.primitive_part();
  }
  return x.primitive_part();
}

IntPolynomial char_poly(const IntMatrix& a) {
  if (!a.square()) throw InvalidInput("char_poly: matrix is not square");
  const int n = a.rows();
  std::vector<BigInt> c(n + 1);
  c[n] = 1;
  IntMatrix m(n, n);
  for (int k = 1; k <= n; ++k) {
    m = a * m;
    for (int d = 0; d < n; ++d) m(d, d) += c[n - k + 1];
    const BigInt t = (a * m).trace();
    c[n - k] = -t / k;
  }
  return IntPolynomial(std::move(c));
}

double landau_mignotte_bound(const IntPolynomial& p, int m, int j) {
  double binom = 1.0;
  for (int i = 0; i < j; ++i) binom = binom * (m - i) / (i + 1);
  return binom * p.norm2();
}

namespace {

std::vector<cld> polished_roots(const IntPolynomial& p) {
  const int d = p.degree();
  const long double lead = p.leading().convert_to<long double>();
  Mat companion = Mat::Zero(d, d);
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i)
    companion(i, d - 1) = -static_cast<double>(p.coeff(i).convert_to<long double>() / lead);
  Eigen::EigenSolver<Mat> solver(companion, false);
  const IntPolynomial dp = p.derivative();
  std::vector<cld> roots;
  roots.reserve(d);
  for (int i = 0; i < d; ++i) {
    cld z(solver.eigenvalues()[i].real(), solver.eigenvalues()[i].imag());
    for (int it = 0; it < 60; ++it) {
      const cld fz = p.evaluate(z);
      const cld dz = dp.evaluate(z);
      if (std::abs(dz) == 0) break;
      const cld step = fz / dz;
      z -= step;
      if (std::abs(step) <= 1e-18L * std::max<long double>(1, std::abs(z))) break;
    }
    roots.push_back(z);
  }
  return roots;
}

// Rounds the monic product of (x - r) over the chosen roots, or nullopt when
// the product is not close to a real integer polynomial within the bound.
std::optional<IntPolynomial> candidate_from_roots(const std::vector<cld>& roots,
                                                  const std::vector<int>& subset,
                                                  const IntPolynomial& p) {
  std::vector<cld> prod{cld(1)};
  for (int idx : subset) {
    std::vector<cld> next(prod.size() + 1, cld(0));
    for (std::size_t i = 0; i < prod.size(); ++i) {
      next[i + 1] += prod[i];
      next[i] -= prod[i] * roots[idx];
    }
    prod = std::move(next);
  }
  const int m = static_cast<int>(subset.size());
  std::vector<BigInt> coeffs(m + 1);
  for (int j = 0; j <= m; ++j) {
    const long double re = prod[j].real();
    const long double im = prod[j].imag();
    const long double scale = std::max<long double>(1, std::abs(re));
    if (std::abs(im) > 1e-6L * scale) return std::nullopt;
    const long double rounded = std::round(re);
    if (std::abs(re - rounded) > 1e-3L * scale) return std::nullopt;
    if (std::abs(rounded) > landau_mignotte_bound(p, m, j) + 0.5) return std::nullopt;
    coeffs[j] = BigInt(static_cast<long long>(rounded));
  }
  return IntPolynomial(std::move(coeffs));
}

bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  int i = k - 1;
  while (i >= 0 && idx[i] == n - k + i) --i;
  if (i < 0) return false;
  ++idx[i];
  for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  return true;
}

// Factors a monic square-free polynomial.
void factor_squarefree(const IntPolynomial& s, std::vector<IntPolynomial>& out) {
  const int d = s.degree();
  if (d <= 1) {
    out.push_back(s);
    return;
  }
  if (landau_mignotte_bound(s, d / 2, d / 4) > 1e15)
    throw Unsupported("factor_over_int: coefficients too large for the root-subset search");
  const auto roots = polished_roots(s);
  for (int m = 1; m <= d / 2; ++m) {
    std::vector<int> subset(m);
    std::iota(subset.begin(), subset.end(), 0);
    do {
      auto cand = candidate_from_roots(roots, subset, s);
      if (!cand || cand->degree() != m) continue;
      if (auto q = exact_divide(s, *cand)) {
        out.push_back(*cand);
        factor_squarefree(*q, out);
        return;
      }
    } while (next_combination(subset, d));
  }
  out.push_back(s);
}

}  // namespace

std::vector<IntPolynomial> factor_over_int(const IntPolynomial& p) {
  if (p.degree() < 1) throw PreconditionError("factor_over_int: degree must be at least 1");
  if (p.degree() > kMaxFactorDegree)
    throw Unsupported("factor_over_int: degree " + std::to_string(p.degree()) + " exceeds " +
                      std::to_string(kMaxFactorDegree));
  if (boost::multiprecision::abs(p.leading()) != 1)
    throw PreconditionError("factor_over_int: leading coefficient must be +-1");

  const bool negate = p.leading() < 0;
  const IntPolynomial monic = negate ? -p : p;

  // Square-free part first so that the root search sees simple roots only.
  const IntPolynomial g = gcd(monic, monic.derivative());
  const IntPolynomial squarefree = *exact_divide(monic, g);

  std::vector<IntPolynomial> irreducible;
  factor_squarefree(squarefree, irreducible);

  std::vector<IntPolynomial> factors;
  IntPolynomial rest = monic;
  for (const auto& q : irreducible) {
    while (auto quotient = exact_divide(rest, q)) {
      factors.push_back(q);
      rest = *quotient;
    }
  }
  if (rest.degree() != 0 || rest.coeff(0) != 1)
    throw Error("factor_over_int: internal error, factors do not reproduce the input");
  std::sort(factors.begin(), factors.end());
  if (negate) factors.front() = -factors.front();
  return factors;
}

std::vector<std::pair<IntPolynomial, int>> group_factors(const std::vector<IntPolynomial>& factors) {
  std::vector<std::pair<IntPolynomial, int>> grouped;
  for (const auto& f : factors) {
    const IntPolynomial key = f.leading() < 0 ? -f : f;
    auto it = std::find_if(grouped.begin(), grouped.end(), [&](const auto& g) { return g.first == key; });
    if (it == grouped.end())
      grouped.emplace_back(key, 1);
    else
      ++it->second;
  }
  return grouped;
}

}  // namespace toral
