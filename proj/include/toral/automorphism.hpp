#pragma once

#include <complex>
#include <string>
#include <vector>

#include "toral/int_matrix.hpp"
#include "toral/polynomial.hpp"
#include "toral/torus.hpp"

namespace toral {

using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;

/// An automorphism of T^n given by a square integer matrix with |det| = 1.
///
/// Spectral data are computed once at construction. The stable and unstable
/// bases are orthonormal columns spanning E^s and E^u; they are only
/// available for hyperbolic matrices.
class ToralAutomorphism {
 public:
  /// Throws InvalidInput for non-square input, NotAnAutomorphism if |det| != 1.
  explicit ToralAutomorphism(IntMatrix matrix, Tolerances tol = {});

  static ToralAutomorphism parse(std::string_view text, Tolerances tol = {}) {
    return ToralAutomorphism(IntMatrix::parse(text), tol);
  }

  int dim() const { return matrix_.rows(); }
  const IntMatrix& matrix() const { return matrix_; }
  const Mat& real_matrix() const { return real_; }
  /// Exact integer inverse.
  const IntMatrix& inverse() const { return inverse_; }
  const BigInt& det() const { return det_; }
  const IntPolynomial& characteristic_polynomial() const { return char_poly_; }
  /// Eigenvalues sorted by decreasing modulus (ties by argument).
  const std::vector<Complex>& spectrum() const { return spectrum_; }
  const Tolerances& tolerances() const { return tol_; }

  bool hyperbolic() const { return hyperbolic_; }
  /// Throws PreconditionError when the matrix is not hyperbolic.
  const Mat& stable_basis() const;
  const Mat& unstable_basis() const;

 private:
  void compute_splitting();

  IntMatrix matrix_;
  IntMatrix inverse_;
  Mat real_;
  BigInt det_;
  IntPolynomial char_poly_;
  std::vector<Complex> spectrum_;
  Tolerances tol_;
  bool hyperbolic_ = false;
  Mat stable_;
  Mat unstable_;
};

/// char_poly of the automorphism's matrix.
inline IntPolynomial char_poly(const ToralAutomorphism& a) { return a.characteristic_polynomial(); }

/// True iff no eigenvalue modulus lies within tol.geo of 1. Throws
/// NotAnAutomorphism when |det| != 1.
bool is_hyperbolic(const IntMatrix& m, Tolerances tol = {});

/// Eigenvalues and unit eigenvectors (columns), sorted by decreasing modulus.
/// Each eigenvector's largest-magnitude component is real and positive.
struct EigenBasis {
  std::vector<Complex> values;
  Eigen::MatrixXcd vectors;
};

/// Throws Unsupported when two eigenvalues coincide within tol.geo.
EigenBasis eigen_basis(const ToralAutomorphism& a);

/// Coefficients a_i with v = sum a_i * nu_i in the eigen_basis order.
ComplexVec eigen_coordinates(const ToralAutomorphism& a, const TangentVector& v);

/// A proper rational subspace W with A^power W = W, represented by the
/// primitive lattice W cap Z^n in Hermite normal form. Its image in T^n is the
/// invariant subtorus.
struct InvariantSubgroup {
  std::vector<IntVector> lattice_basis;
  int power = 1;

  int rank() const { return static_cast<int>(lattice_basis.size()); }
  /// Lattice vectors as real columns.
  Mat real_basis(int n) const;
  friend bool operator==(const InvariantSubgroup&, const InvariantSubgroup&) = default;
};

/// Invariant subtori found from the factorizations of char_poly(A^k),
/// k = 1..max_power.
///
/// For each reducible power the candidates are: kernels of products of
/// primary components, kernels of each repeated irreducible factor, and the
/// cyclic A^k-subspaces generated by the lattice basis of those kernels (the
/// repeated-factor case has infinitely many invariant subspaces; this samples
/// the coordinate-aligned ones). Empty iff every checked power is irreducible.
std::vector<InvariantSubgroup> invariant_subgroups(const ToralAutomorphism& a, int max_power);

/// invariant_subgroups plus how far the power search actually got. The search
/// stops early when char_poly(A^k) is too large to factor; `truncation` then
/// says why and `checked_power` < `requested_power`.
struct SubgroupSearch {
  std::vector<InvariantSubgroup> subgroups;
  int requested_power = 0;
  int checked_power = 0;
  std::string truncation;
};
SubgroupSearch search_invariant_subgroups(const ToralAutomorphism& a, int max_power);

/// Exact check that A^power maps the lattice span into itself.
bool is_invariant(const ToralAutomorphism& a, const InvariantSubgroup& g);

/// A linear foliation of T^n: leaves are cosets of the subspace P (dim P < n).
class LinearFoliation {
 public:
  /// `spanning` columns span P; the rank is decided with tol.rank. Throws
  /// DegenerateFoliation when P = R^n and InvalidInput when P = {0}.
  LinearFoliation(const Mat& spanning, std::string label, Tolerances tol = {});

  /// Orthonormal basis of P, one column per dimension.
  const Mat& leaf_basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  const std::string& label() const { return label_; }

  Vec orthogonal_component(const Vec& v) const { return v - basis_ * (basis_.transpose() * v); }
  /// True when the unit-normalized v is within tol of P.
  bool contains(const Vec& v, double tol) const;
  /// Subspace inclusion, other's P inside this P.
  bool contains(const LinearFoliation& other, double tol) const;

 private:
  Mat basis_;
  std::string label_;
};

/// Foliation by translates of E^s.
LinearFoliation stable_foliation(const ToralAutomorphism& a);

/// The foliation F_G with leaves parallel to span(W u E^s). Throws
/// DegenerateFoliation when W + E^s = R^n.
LinearFoliation foliation_fg(const ToralAutomorphism& a, const InvariantSubgroup& g, std::string label);

}  // namespace toral
