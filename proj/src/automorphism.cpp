#include "toral/automorphism.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "toral/errors.hpp"
#include "toral/lattice.hpp"
#include "toral/random.hpp"

namespace toral {

namespace {

bool modulus_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) > 1e-12 * std::max(1.0, ma)) return ma > mb;
  return std::arg(a) < std::arg(b);
}

void fix_column_signs(Mat& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    Eigen::Index imax = 0;
    m.col(j).cwiseAbs().maxCoeff(&imax);
    if (m(imax, j) < 0) m.col(j) *= -1.0;
  }
}

// Orthonormal basis for the top-`d` left singular directions of `cols`.
Mat dominant_span(const Mat& cols, int d) {
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(d);
}

// Dominant d-dimensional invariant subspace of `m` by orthogonal iteration,
// started from `guess`.
Mat invariant_subspace(const Mat& m, Mat guess, int d) {
  Mat q = dominant_span(guess, d);
  for (int it = 0; it < 20000; ++it) {
    Eigen::HouseholderQR<Mat> qr(m * q);
    Mat next = qr.householderQ() * Mat::Identity(m.rows(), d);
    const double change = (next - q * (q.transpose() * next)).norm();
    q = std::move(next);
    if (change < 1e-15 && it > 3) break;
  }
  return q;
}

}  // namespace

ToralAutomorphism::ToralAutomorphism(IntMatrix matrix, Tolerances tol)
    : matrix_(std::move(matrix)), tol_(tol) {
  if (!matrix_.square() || matrix_.rows() == 0)
    throw InvalidInput("toral automorphism needs a non-empty square matrix");
  const int n = matrix_.rows();
  char_poly_ = toral::char_poly(matrix_);
  det_ = (n % 2 == 0) ? char_poly_.coeff(0) : BigInt(-char_poly_.coeff(0));
  if (boost::multiprecision::abs(det_) != 1)
    throw NotAnAutomorphism("matrix " + matrix_.to_string() + " has determinant " + det_.str() +
                            ", not +-1");

  // Cayley-Hamilton: A^{-1} = -(c_1 I + c_2 A + ... + c_n A^{n-1}) / c_0.
  IntMatrix acc(n, n);
  for (int i = n; i >= 1; --i) {
    acc = acc * matrix_;
    for (int d = 0; d < n; ++d) acc(d, d) += char_poly_.coeff(i);
  }
  acc *= BigInt(-char_poly_.coeff(0));  // c_0 = +-1, so dividing equals multiplying
  inverse_ = acc;

  real_ = matrix_.to_real();
  Eigen::EigenSolver<Mat> es(real_, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) spectrum_.push_back(es.eigenvalues()[i]);
  std::sort(spectrum_.begin(), spectrum_.end(), modulus_order);

  double gap = std::numeric_limits<double>::infinity();
  for (const auto& l : spectrum_) gap = std::min(gap, std::abs(std::abs(l) - 1.0));
  hyperbolic_ = gap > tol_.geo;
  if (hyperbolic_) compute_splitting();
}

void ToralAutomorphism::compute_splitting() {
  const int n = dim();
  int du = 0;
  for (const auto& l : spectrum_)
    if (std::abs(l) > 1.0) ++du;
  const int ds = n - du;

  Eigen::EigenSolver<Mat> es(real_, true);
  Mat guess_u(n, 0), guess_s(n, 0);
  auto append = [](Mat& m, const Vec& v) {
    m.conservativeResize(Eigen::NoChange, m.cols() + 1);
    m.col(m.cols() - 1) = v;
  };
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const Eigen::VectorXcd v = es.eigenvectors().col(i);
    Mat& target = std::abs(es.eigenvalues()[i]) > 1.0 ? guess_u : guess_s;
    append(target, v.real());
    if (v.imag().norm() > 0) append(target, v.imag());
  }
  // Defective spectra can leave the eigenvector guesses rank deficient; pad
  // with fixed pseudo-random directions.
  RandomStream rng(0x5eed, 0);
  auto pad = [&](Mat& m, int d) {
    for (int extra = 0; extra < d; ++extra) {
      Vec r(n);
      for (int i = 0; i < n; ++i) r[i] = rng.uniform(-1, 1);
      append(m, 1e-3 * r);
    }
  };
  pad(guess_u, du);
  pad(guess_s, ds);

  if (du > 0) unstable_ = invariant_subspace(real_, guess_u, du);
  else unstable_ = Mat(n, 0);
  if (ds > 0) stable_ = invariant_subspace(inverse_.to_real(), guess_s, ds);
  else stable_ = Mat(n, 0);
  fix_column_signs(unstable_);
  fix_column_signs(stable_);
}

const Mat& ToralAutomorphism::stable_basis() const {
  if (!hyperbolic_) throw PreconditionError("stable splitting requested for a non-hyperbolic matrix");
  return stable_;
}

const Mat& ToralAutomorphism::unstable_basis() const {
  if (!hyperbolic_) throw PreconditionError("unstable splitting requested for a non-hyperbolic matrix");
  return unstable_;
}

bool is_hyperbolic(const IntMatrix& m, Tolerances tol) { return ToralAutomorphism(m, tol).hyperbolic(); }

EigenBasis eigen_basis(const ToralAutomorphism& a) {
  const int n = a.dim();
  Eigen::EigenSolver<Mat> es(a.real_matrix(), true);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return modulus_order(es.eigenvalues()[i], es.eigenvalues()[j]); });
  EigenBasis out;
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values.push_back(es.eigenvalues()[order[k]]);
    Eigen::VectorXcd v = es.eigenvectors().col(order[k]);
    v.normalize();
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v[imax]) / std::abs(v[imax]);
    v[imax] = std::abs(v[imax]);
    out.vectors.col(k) = v;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(out.values[i] - out.values[j]) <=
          a.tolerances().geo * std::max(1.0, std::abs(out.values[i])))
        throw Unsupported("eigen coordinates need distinct eigenvalues");
  return out;
}

ComplexVec eigen_coordinates(const ToralAutomorphism& a, const TangentVector& v) {
  if (v.size() != a.dim()) throw InvalidInput("eigen_coordinates: dimension mismatch");
  const EigenBasis basis = eigen_basis(a);
  if (v.isZero(0.0)) return ComplexVec::Zero(a.dim());
  const ComplexVec rhs = v.cast<Complex>();
  return basis.vectors.fullPivLu().solve(rhs);
}

Mat InvariantSubgroup::real_basis(int n) const { return to_real_columns(lattice_basis, n); }

bool is_invariant(const ToralAutomorphism& a, const InvariantSubgroup& g) {
  const IntMatrix ap = a.matrix().pow(g.power);
  for (const auto& b : g.lattice_basis)
    if (!lattice_coordinates(g.lattice_basis, ap * b)) return false;
  return true;
}

namespace {

std::vector<IntVector> cyclic_span(const IntMatrix& b, const IntVector& v) {
  std::vector<IntVector> span{v};
  for (;;) {
    IntVector next = b * span.back();
    span.push_back(next);
    if (rational_rank(span) < static_cast<int>(span.size())) {
      span.pop_back();
      return span;
    }
  }
}

}  // namespace

SubgroupSearch search_invariant_subgroups(const ToralAutomorphism& a, int max_power) {
  if (max_power < 1) throw InvalidInput("invariant_subgroups: max_power must be >= 1");
  if (!a.hyperbolic()) throw PreconditionError("invariant_subgroups: matrix is not hyperbolic");
  const int n = a.dim();
  SubgroupSearch result;
  result.requested_power = max_power;
  auto& found = result.subgroups;

  auto consider = [&](const std::vector<IntVector>& spanning, int k) {
    const int r = rational_rank(spanning);
    if (r == 0 || r == n) return;
    InvariantSubgroup g{saturate(spanning, n), k};
    for (const auto& f : found)
      if (f.lattice_basis == g.lattice_basis) return;
    for (int j = 1; j <= k; ++j) {
      g.power = j;
      if (is_invariant(a, g)) break;
    }
    found.push_back(std::move(g));
  };

  for (int k = 1; k <= max_power; ++k) {
    const IntMatrix ak = a.matrix().pow(k);
    std::vector<std::pair<IntPolynomial, int>> grouped;
    try {
      grouped = group_factors(factor_over_int(char_poly(ak)));
    } catch (const Unsupported& e) {
      result.truncation = "stopped before power " + std::to_string(k) + ": " + e.what();
      break;
    }
    result.checked_power = k;
    if (grouped.size() == 1 && grouped.front().second == 1) continue;

    const std::size_t r = grouped.size();
    for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << r); ++mask) {
      IntPolynomial q{1};
      for (std::size_t i = 0; i < r; ++i)
        if (mask & (std::size_t{1} << i))
          for (int m = 0; m < grouped[i].second; ++m) q = q * grouped[i].first;
      consider(rational_nullspace(q.evaluate(ak)), k);
    }
    for (const auto& [q, mult] : grouped) {
      if (mult < 2) continue;
      const auto kernel = saturate(rational_nullspace(q.evaluate(ak)), n);
      consider(kernel, k);
      for (const auto& v : kernel) consider(cyclic_span(ak, v), k);
    }
  }
  std::sort(found.begin(), found.end(), [](const InvariantSubgroup& x, const InvariantSubgroup& y) {
    if (x.rank() != y.rank()) return x.rank() < y.rank();
    return x.lattice_basis < y.lattice_basis;
  });
  return result;
}

std::vector<InvariantSubgroup> invariant_subgroups(const ToralAutomorphism& a, int max_power) {
  return search_invariant_subgroups(a, max_power).subgroups;
}

LinearFoliation::LinearFoliation(const Mat& spanning, std::string label, Tolerances tol)
    : label_(std::move(label)) {
  const Eigen::Index n = spanning.rows();
  Mat cols = spanning;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double norm = cols.col(j).norm();
    if (norm > 0) cols.col(j) /= norm;
  }
  if (cols.cols() == 0 || cols.isZero(0.0))
    throw InvalidInput("foliation '" + label_ + "' has a zero-dimensional leaf space");
  int rank = 0;
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol.rank * sv[0]) ++rank;
  if (rank == 0) throw InvalidInput("foliation '" + label_ + "' has a zero-dimensional leaf space");
  if (rank == n)
    throw DegenerateFoliation("foliation '" + label_ + "' is degenerate: leaf space is all of R^" +
                              std::to_string(n));
  basis_ = svd.matrixU().leftCols(rank);
  fix_column_signs(basis_);
}

bool LinearFoliation::contains(const Vec& v, double tol) const {
  const double norm = v.norm();
  if (norm == 0) return true;
  return orthogonal_component(v).norm() <= tol * norm;
}

bool LinearFoliation::contains(const LinearFoliation& other, double tol) const {
  for (Eigen::Index j = 0; j < other.basis_.cols(); ++j)
    if (!contains(Vec(other.basis_.col(j)), tol)) return false;
  return true;
}

LinearFoliation stable_foliation(const ToralAutomorphism& a) {
  return LinearFoliation(a.stable_basis(), "stable", a.tolerances());
}

LinearFoliation foliation_fg(const ToralAutomorphism& a, const InvariantSubgroup& g, std::string label) {
  const Mat& es = a.stable_basis();
  const Mat w = g.real_basis(a.dim());
  Mat spanning(a.dim(), w.cols() + es.cols());
  spanning << w, es;
  return LinearFoliation(spanning, std::move(label), a.tolerances());
}

}  // namespace toral
