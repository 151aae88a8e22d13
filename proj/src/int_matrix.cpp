#include "toral/int_matrix.hpp"

#include <cctype>
#include <sstream>

#include "toral/errors.hpp"

namespace toral {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

BigInt parse_integer(std::string_view tok) {
  tok = trim(tok);
  std::size_t i = 0;
  if (i < tok.size() && (tok[i] == '-' || tok[i] == '+')) ++i;
  if (i == tok.size()) throw InvalidInput("matrix entry is not an integer: '" + std::string(tok) + "'");
  for (std::size_t j = i; j < tok.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(tok[j])))
      throw InvalidInput("matrix entry is not an integer: '" + std::string(tok) + "'");
  }
  std::string digits(tok.substr(tok[0] == '+' ? 1 : 0));
  return BigInt(digits);
}

}  // namespace

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<long long>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(std::size_t(rows_) * cols_);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) throw InvalidInput("ragged matrix initializer");
    for (long long v : r) data_.emplace_back(v);
  }
}

IntMatrix IntMatrix::identity(int n) {
  IntMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw InvalidInput("empty matrix string");
  const auto row_parts = split(text, ';');
  std::vector<std::vector<BigInt>> rows;
  for (auto rp : row_parts) {
    std::vector<BigInt> row;
    for (auto tok : split(rp, ',')) row.push_back(parse_integer(tok));
    rows.push_back(std::move(row));
  }
  const int cols = static_cast<int>(rows.front().size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols)
      throw InvalidInput("matrix rows have different lengths: '" + std::string(text) + "'");
  }
  IntMatrix m(static_cast<int>(rows.size()), cols);
  for (int i = 0; i < m.rows_; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const {
  IntMatrix out(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const BigInt& a = (*this)(i, k);
      if (a == 0) continue;
      for (int j = 0; j < o.cols_; ++j) out(i, j) += a * o(k, j);
    }
  return out;
}

IntMatrix IntMatrix::operator+(const IntMatrix& o) const {
  IntMatrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += o.data_[i];
  return out;
}

IntMatrix& IntMatrix::operator*=(const BigInt& s) {
  for (auto& x : data_) x *= s;
  return *this;
}

IntVector IntMatrix::operator*(const IntVector& v) const {
  IntVector out(rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

IntMatrix IntMatrix::pow(int k) const {
  IntMatrix result = identity(rows_);
  IntMatrix base = *this;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k) base = base * base;
  }
  return result;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

BigInt IntMatrix::trace() const {
  BigInt t = 0;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

bool IntMatrix::is_zero() const {
  for (const auto& x : data_)
    if (x != 0) return false;
  return true;
}

double to_double(const BigInt& x) { return x.convert_to<double>(); }

Mat IntMatrix::to_real() const {
  Mat m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = to_double((*this)(i, j));
  return m;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  for (int i = 0; i < rows_; ++i) {
    if (i) os << ';';
    for (int j = 0; j < cols_; ++j) {
      if (j) os << ',';
      os << (*this)(i, j);
    }
  }
  return os.str();
}

}  // namespace toral
