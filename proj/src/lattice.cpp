#include "toral/lattice.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <utility>

namespace toral {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using boost::multiprecision::abs;
using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

struct Echelon {
  std::vector<std::vector<Rational>> rows;
  std::vector<int> pivots;
};

Echelon reduced_row_echelon(const IntMatrix& m) {
  Echelon e;
  e.rows.assign(m.rows(), std::vector<Rational>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) e.rows[i][j] = Rational(m(i, j));
  int r = 0;
  for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
    int piv = -1;
    for (int i = r; i < m.rows(); ++i)
      if (e.rows[i][c] != 0) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    std::swap(e.rows[r], e.rows[piv]);
    const Rational lead = e.rows[r][c];
    for (auto& x : e.rows[r]) x /= lead;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == r || e.rows[i][c] == 0) continue;
      const Rational f = e.rows[i][c];
      for (int j = 0; j < m.cols(); ++j) e.rows[i][j] -= f * e.rows[r][j];
    }
    e.pivots.push_back(c);
    ++r;
  }
  return e;
}

IntVector make_primitive(const std::vector<Rational>& v) {
  BigInt lcm = 1;
  for (const auto& x : v) lcm = boost::multiprecision::lcm(lcm, denominator(x));
  IntVector out(v.size());
  BigInt g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = numerator(Rational(v[i] * lcm));
    g = boost::multiprecision::gcd(g, out[i]);
  }
  if (g != 0)
    for (auto& x : out) x /= abs(g);
  return out;
}

IntMatrix rows_to_matrix(const std::vector<IntVector>& rows, int n) {
  IntMatrix m(static_cast<int>(rows.size()), n);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j];
  return m;
}

void axpy(IntVector& y, const BigInt& a, const IntVector& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= a * x[i];
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::vector<IntVector> rational_nullspace(const IntMatrix& m) {
  const Echelon e = reduced_row_echelon(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (int p : e.pivots) is_pivot[p] = true;
  std::vector<IntVector> basis;
  for (int f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    std::vector<Rational> x(m.cols());
    x[f] = 1;
    for (std::size_t r = 0; r < e.pivots.size(); ++r) x[e.pivots[r]] = -e.rows[r][f];
    basis.push_back(make_primitive(x));
  }
  return basis;
}

int rational_rank(const std::vector<IntVector>& vectors) {
  if (vectors.empty()) return 0;
  return static_cast<int>(
      reduced_row_echelon(rows_to_matrix(vectors, static_cast<int>(vectors.front().size()))).pivots.size());
}

std::vector<IntVector> hermite_normal_form(std::vector<IntVector> rows) {
  if (rows.empty()) return rows;
  const int n = static_cast<int>(rows.front().size());
  std::size_t r = 0;
  for (int c = 0; c < n && r < rows.size(); ++c) {
    // Euclid on column c among rows r..end.
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        if (best == rows.size() || abs(rows[i][c]) < abs(rows[best][c])) best = i;
      }
      if (best == rows.size()) break;
      std::swap(rows[r], rows[best]);
      bool done = true;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        axpy(rows[i], rows[i][c] / rows[r][c], rows[r]);
        if (rows[i][c] != 0) done = false;
      }
      if (done) break;
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0)
      for (auto& x : rows[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) axpy(rows[i], floor_div(rows[i][c], rows[r][c]), rows[r]);
    ++r;
  }
  rows.resize(r);
  return rows;
}

std::vector<IntVector> integer_kernel(const IntMatrix& m) {
  const int rows = m.rows();
  const int n = m.cols();
  // Rows of [M^T | I]; unimodular row operations keep the right block a basis
  // of Z^n, and rows whose left block vanishes span the kernel lattice.
  std::vector<IntVector> aug(n, IntVector(rows + n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < rows; ++i) aug[j][i] = m(i, j);
    aug[j][rows + j] = 1;
  }
  aug = hermite_normal_form(std::move(aug));
  std::vector<IntVector> kernel;
  for (const auto& row : aug) {
    bool left_zero = true;
    for (int i = 0; i < rows; ++i)
      if (row[i] != 0) {
        left_zero = false;
        break;
      }
    if (left_zero) kernel.emplace_back(row.begin() + rows, row.end());
  }
  return hermite_normal_form(std::move(kernel));
}

std::vector<IntVector> saturate(const std::vector<IntVector>& vectors, int n) {
  if (rational_rank(vectors) == 0) return {};
  const auto complement = rational_nullspace(rows_to_matrix(vectors, n));
  if (complement.empty()) {
    std::vector<IntVector> id(n, IntVector(n));
    for (int i = 0; i < n; ++i) id[i][i] = 1;
    return id;
  }
  return integer_kernel(rows_to_matrix(complement, n));
}

std::optional<IntVector> lattice_coordinates(const std::vector<IntVector>& basis, const IntVector& v) {
  IntVector residual = v;
  IntVector coords(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    std::size_t p = 0;
    while (p < basis[i].size() && basis[i][p] == 0) ++p;
    if (p == basis[i].size()) return std::nullopt;
    if (residual[p] % basis[i][p] != 0) return std::nullopt;
    coords[i] = residual[p] / basis[i][p];
    axpy(residual, coords[i], basis[i]);
  }
  for (const auto& x : residual)
    if (x != 0) return std::nullopt;
  return coords;
}

Mat to_real_columns(const std::vector<IntVector>& vectors, int n) {
  Mat m(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j)
    for (int i = 0; i < n; ++i) m(i, static_cast<Eigen::Index>(j)) = to_double(vectors[j][i]);
  return m;
}

}  // namespace toral
