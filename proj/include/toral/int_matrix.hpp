#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "toral/torus.hpp"

namespace toral {

using BigInt = boost::multiprecision::cpp_int;
using IntVector = std::vector<BigInt>;

/// Dense exact integer matrix, row-major.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(std::size_t(rows) * cols) {}
  IntMatrix(std::initializer_list<std::initializer_list<long long>> rows);

  static IntMatrix identity(int n);

  /// Parses "2,1;1,1" (rows separated by ';', entries by ','). Throws
  /// InvalidInput on ragged rows, empty input or non-integer entries.
  static IntMatrix parse(std::string_view text);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  BigInt& operator()(int r, int c) { return data_[std::size_t(r) * cols_ + c]; }
  const BigInt& operator()(int r, int c) const { return data_[std::size_t(r) * cols_ + c]; }

  IntMatrix operator*(const IntMatrix& o) const;
  IntMatrix operator+(const IntMatrix& o) const;
  IntMatrix& operator*=(const BigInt& s);
  IntVector operator*(const IntVector& v) const;
  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

  IntMatrix pow(int k) const;
  IntMatrix transpose() const;
  BigInt trace() const;
  bool is_zero() const;

  Mat to_real() const;
  /// "2,1;1,1" form, inverse of parse().
  std::string to_string() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<BigInt> data_;
};

double to_double(const BigInt& x);

}  // namespace toral
