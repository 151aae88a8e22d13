#pragma once

#include <utility>
#include <vector>

#include "toral/automorphism.hpp"
#include "toral/random.hpp"
#include "toral/torus.hpp"

namespace toral {

/// One term c * sin(2*pi*<freq, x> + phase). Integer frequencies keep the
/// term well defined on the torus.
struct TrigTerm {
  Eigen::VectorXi freq;
  Vec coeff;
  double phase = 0.0;
};

/// A unit vector field V = R / |R| on T^n. R is either a constant direction
/// or a trigonometric polynomial base + sum of TrigTerms.
class VectorField {
 public:
  enum class Kind { constant, trig };

  /// Normalizes `direction`; throws InvalidInput when it is zero or non-finite.
  static VectorField constant(const Vec& direction);
  /// Throws InvalidInput when |R| <= 1e-6 somewhere on a 64^n sample grid.
  static VectorField trig(Vec base, std::vector<TrigTerm> terms);

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  int dim() const { return static_cast<int>(base_.size()); }
  /// Unit direction for constant fields, raw base vector for trig fields.
  const Vec& base() const { return base_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }

  /// Raw field R at a lifted point.
  Vec raw(const Vec& x) const;
  /// Unit field V at a lifted point (periodic, so no wrapping needed).
  Vec operator()(const Vec& x) const;
  Vec operator()(const TorusPoint& x) const { return (*this)(x.coords()); }
  /// DV at a lifted point.
  Mat jacobian(const Vec& x) const;

 private:
  VectorField(Kind kind, Vec base, std::vector<TrigTerm> terms)
      : kind_(kind), base_(std::move(base)), terms_(std::move(terms)) {}

  Kind kind_;
  Vec base_;
  std::vector<TrigTerm> terms_;
};

/// A C^2 self-map of T^n: x -> A x, optionally plus a trigonometric
/// displacement sum c * sin(2*pi*<k, x> + phase).
class SmoothMap {
 public:
  static SmoothMap automorphism(const IntMatrix& a);
  static SmoothMap automorphism(const ToralAutomorphism& a) { return automorphism(a.matrix()); }
  static SmoothMap composed(const IntMatrix& a, std::vector<TrigTerm> displacement);

  int dim() const { return static_cast<int>(linear_.rows()); }
  bool is_linear() const { return displacement_.empty(); }
  const Mat& linear_part() const { return linear_; }
  const IntMatrix& integer_matrix() const { return integer_; }
  const std::vector<TrigTerm>& displacement() const { return displacement_; }

  /// The lift R^n -> R^n (no wrapping).
  Vec lift(const Vec& x) const;
  TorusPoint operator()(const TorusPoint& x) const { return wrap(lift(x.coords())); }
  Mat jacobian(const Vec& x) const;
  Mat jacobian(const TorusPoint& x) const { return jacobian(x.coords()); }

 private:
  IntMatrix integer_;
  Mat linear_;
  std::vector<TrigTerm> displacement_;
};

/// Fields V_1..V_k with sizes eps_1..eps_k defining the sequential smear
/// Q_x = (F_k)_* ... (F_1)_* delta_x.
class RankKDiskSpec {
 public:
  /// Validates matching dimensions, positive finite sizes, k <= n, and that
  /// the fields are pairwise non-tangent (rank k) at 1000 sampled points.
  RankKDiskSpec(std::vector<VectorField> fields, std::vector<double> epsilons, Tolerances tol = {});

  int rank() const { return static_cast<int>(fields_.size()); }
  int dim() const { return fields_.front().dim(); }
  const std::vector<VectorField>& fields() const { return fields_; }
  const std::vector<double>& epsilons() const { return epsilons_; }
  double total_epsilon() const;
  bool all_constant() const;

 private:
  std::vector<VectorField> fields_;
  std::vector<double> epsilons_;
};

/// Time-t map of x' = V(x) on the lift. Constant fields are exact; otherwise
/// classical RK4 with N = ceil(|t| / min(1e-3, |t|/8)) equal steps.
Vec flow_lift(const VectorField& v, const Vec& x, double t);

/// flow_lift wrapped to the torus. Requires |t| <= 1.
TorusPoint flow(const VectorField& v, const TorusPoint& x, double t);

/// The point at signed arclength t on I_eps(x). Throws OutOfRange if |t| > eps.
TorusPoint curve_i_eps(const VectorField& v, const TorusPoint& x, double eps, double t);

/// One draw from Q_x: t_i ~ U[-eps_i, eps_i], flowing along V_1 then V_2 ...
TorusPoint sample_disk(const RankKDiskSpec& spec, const TorusPoint& x, RandomStream& rng);
/// Same draw on the lift, without the final wrap.
Vec sample_disk_lift(const RankKDiskSpec& spec, const Vec& x, RandomStream& rng);

/// [(f x, Df_x), (f^2 x, Df_{f x}), ..., (f^k x, Df_{f^{k-1} x})].
std::vector<std::pair<TorusPoint, Mat>> orbit_jacobians(const SmoothMap& f, const TorusPoint& x, int k);

}  // namespace toral
