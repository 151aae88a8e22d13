#pragma once

#include <Eigen/Dense>

#include <initializer_list>

namespace toral {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Tangent vectors live in the universal cover and are never wrapped.
using TangentVector = Vec;

/// Numeric thresholds shared by every module. `rank` is relative to the
/// largest singular value; `geo` is an absolute geometric tolerance.
struct Tolerances {
  double rank = 1e-9;
  double geo = 1e-10;
};

/// A point of the flat torus R^n / Z^n. Coordinates always lie in [0, 1).
class TorusPoint {
 public:
  TorusPoint() = default;

  /// Reduces `v` modulo 1. Throws InvalidInput on non-finite components.
  static TorusPoint wrap(const Vec& v);
  static TorusPoint wrap(std::initializer_list<double> v);

  const Vec& coords() const { return coords_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  double operator[](int i) const { return coords_[i]; }

  friend bool operator==(const TorusPoint& a, const TorusPoint& b) {
    return a.coords_ == b.coords_;
  }

 private:
  explicit TorusPoint(Vec c) : coords_(std::move(c)) {}
  Vec coords_;
};

TorusPoint wrap(const Vec& v);

/// Flat-torus distance: minimum over integer shifts of the Euclidean distance.
double torus_distance(const TorusPoint& a, const TorusPoint& b);

}  // namespace toral
