#include "toral/torus.hpp"

#include <cmath>

#include "toral/errors.hpp"

namespace toral {

TorusPoint TorusPoint::wrap(const Vec& v) {
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double c = v[i];
    if (!std::isfinite(c)) throw InvalidInput("wrap: non-finite coordinate");
    double r = c - std::floor(c);
    // c slightly below an integer can round up to exactly 1.0
    if (r >= 1.0) r = 0.0;
    out[i] = r;
  }
  return TorusPoint(std::move(out));
}

TorusPoint TorusPoint::wrap(std::initializer_list<double> v) {
  Vec tmp(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double c : v) tmp[i++] = c;
  return wrap(tmp);
}

TorusPoint wrap(const Vec& v) { return TorusPoint::wrap(v); }

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double d = std::abs(a[i] - b[i]);
    d = std::min(d, 1.0 - d);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace toral
