#include "toral/vector_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "toral/errors.hpp"

namespace toral {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinRawNorm = 1e-6;

double phase_of(const TrigTerm& term, const Vec& x) {
  double s = term.phase;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += kTwoPi * term.freq[i] * x[i];
  return s;
}

void check_terms(const std::vector<TrigTerm>& terms, Eigen::Index n, const char* what) {
  for (const auto& t : terms) {
    if (t.freq.size() != n || t.coeff.size() != n)
      throw InvalidInput(std::string(what) + ": trig term dimension mismatch");
    if (!t.coeff.allFinite() || !std::isfinite(t.phase))
      throw InvalidInput(std::string(what) + ": non-finite trig term");
  }
}

// Grid points per axis for the normalizability scan; 64 up to n = 4, then
// shrunk so the scan stays near 64^4 evaluations.
int scan_points_per_axis(int n) {
  if (n <= 4) return 64;
  return std::max(4, static_cast<int>(std::pow(64.0, 4.0 / n)));
}

Vec rk4(const VectorField& v, Vec x, double t) {
  const double h_max = std::min(1e-3, std::abs(t) / 8.0);
  const long steps = static_cast<long>(std::ceil(std::abs(t) / h_max));
  const double h = t / static_cast<double>(steps);
  for (long s = 0; s < steps; ++s) {
    const Vec k1 = v(x);
    const Vec k2 = v(Vec(x + 0.5 * h * k1));
    const Vec k3 = v(Vec(x + 0.5 * h * k2));
    const Vec k4 = v(Vec(x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace

VectorField VectorField::constant(const Vec& direction) {
  if (direction.size() == 0 || !direction.allFinite())
    throw InvalidInput("constant field: empty or non-finite direction");
  const double norm = direction.norm();
  if (norm <= kMinRawNorm) throw InvalidInput("constant field: zero direction");
  return VectorField(Kind::constant, direction / norm, {});
}

VectorField VectorField::trig(Vec base, std::vector<TrigTerm> terms) {
  if (base.size() == 0 || !base.allFinite()) throw InvalidInput("trig field: empty or non-finite base");
  check_terms(terms, base.size(), "trig field");
  VectorField field(Kind::trig, std::move(base), std::move(terms));
  if (field.terms_.empty()) {
    if (field.base_.norm() <= kMinRawNorm) throw InvalidInput("trig field: zero somewhere on the torus");
    return field;
  }
  // |R| >= |base| - sum |c|; when that bound already clears the threshold
  // the grid scan cannot fail.
  double slack = field.base_.norm();
  for (const auto& t : field.terms_) slack -= t.coeff.norm();
  if (slack > kMinRawNorm) return field;
  const int n = field.dim();
  const int per_axis = scan_points_per_axis(n);
  std::vector<int> idx(n, 0);
  Vec x(n);
  for (;;) {
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(idx[i]) / per_axis;
    if (field.raw(x).norm() <= kMinRawNorm) throw InvalidInput("trig field: zero somewhere on the torus");
    int i = 0;
    while (i < n && ++idx[i] == per_axis) idx[i++] = 0;
    if (i == n) break;
  }
  return field;
}

Vec VectorField::raw(const Vec& x) const {
  if (kind_ == Kind::constant) return base_;
  Vec r = base_;
  for (const auto& t : terms_) r += t.coeff * std::sin(phase_of(t, x));
  return r;
}

Vec VectorField::operator()(const Vec& x) const {
  if (kind_ == Kind::constant) return base_;
  const Vec r = raw(x);
  return r / r.norm();
}

Mat VectorField::jacobian(const Vec& x) const {
  const int n = dim();
  if (kind_ == Kind::constant) return Mat::Zero(n, n);
  Mat dr = Mat::Zero(n, n);
  for (const auto& t : terms_) dr += (kTwoPi * std::cos(phase_of(t, x))) * t.coeff * t.freq.cast<double>().transpose();
  const Vec r = raw(x);
  const double norm = r.norm();
  const Vec v = r / norm;
  return (Mat::Identity(n, n) - v * v.transpose()) * dr / norm;
}

SmoothMap SmoothMap::automorphism(const IntMatrix& a) { return composed(a, {}); }

SmoothMap SmoothMap::composed(const IntMatrix& a, std::vector<TrigTerm> displacement) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("smooth map: matrix must be square");
  check_terms(displacement, a.rows(), "smooth map");
  SmoothMap f;
  f.integer_ = a;
  f.linear_ = a.to_real();
  f.displacement_ = std::move(displacement);
  return f;
}

Vec SmoothMap::lift(const Vec& x) const {
  Vec y = linear_ * x;
  for (const auto& t : displacement_) y += t.coeff * std::sin(phase_of(t, x));
  return y;
}

Mat SmoothMap::jacobian(const Vec& x) const {
  Mat j = linear_;
  for (const auto& t : displacement_)
    j += (kTwoPi * std::cos(phase_of(t, x))) * t.coeff * t.freq.cast<double>().transpose();
  return j;
}

RankKDiskSpec::RankKDiskSpec(std::vector<VectorField> fields, std::vector<double> epsilons, Tolerances tol)
    : fields_(std::move(fields)), epsilons_(std::move(epsilons)) {
  if (fields_.empty()) throw InvalidInput("disk spec: no fields");
  if (fields_.size() != epsilons_.size()) throw InvalidInput("disk spec: fields and epsilons differ in length");
  const int n = fields_.front().dim();
  if (static_cast<int>(fields_.size()) > n) throw InvalidInput("disk spec: more fields than dimensions");
  for (const auto& v : fields_)
    if (v.dim() != n) throw InvalidInput("disk spec: field dimension mismatch");
  for (double e : epsilons_)
    if (!std::isfinite(e) || e <= 0.0) throw InvalidInput("disk spec: epsilons must be positive and finite");

  const int k = rank();
  const int points = all_constant() ? 1 : 1000;
  RandomStream rng(0x6e6f6e74616e67ULL, 0);
  Mat frame(n, k);
  Vec x(n);
  for (int p = 0; p < points; ++p) {
    for (int i = 0; i < n; ++i) x[i] = rng.uniform();
    for (int j = 0; j < k; ++j) frame.col(j) = fields_[j](x);
    const Eigen::JacobiSVD<Mat> svd(frame);
    const auto& s = svd.singularValues();
    if (!(s[k - 1] > tol.rank * s[0])) throw InvalidInput("disk spec: fields are tangent to each other somewhere");
  }
}

double RankKDiskSpec::total_epsilon() const {
  double s = 0.0;
  for (double e : epsilons_) s += e;
  return s;
}

bool RankKDiskSpec::all_constant() const {
  for (const auto& v : fields_)
    if (!v.is_constant()) return false;
  return true;
}

Vec flow_lift(const VectorField& v, const Vec& x, double t) {
  if (!std::isfinite(t)) throw InvalidInput("flow: non-finite time");
  if (t == 0.0) return x;
  if (v.is_constant()) return x + t * v.base();
  return rk4(v, x, t);
}

TorusPoint flow(const VectorField& v, const TorusPoint& x, double t) {
  if (std::abs(t) > 1.0) throw OutOfRange("flow: |t| must be at most 1");
  return wrap(flow_lift(v, x.coords(), t));
}

TorusPoint curve_i_eps(const VectorField& v, const TorusPoint& x, double eps, double t) {
  if (!(std::abs(t) <= eps)) throw OutOfRange("curve_i_eps: |t| exceeds eps");
  return flow(v, x, t);
}

Vec sample_disk_lift(const RankKDiskSpec& spec, const Vec& x, RandomStream& rng) {
  Vec y = x;
  for (int i = 0; i < spec.rank(); ++i) {
    const double e = spec.epsilons()[i];
    y = flow_lift(spec.fields()[i], y, rng.uniform(-e, e));
  }
  return y;
}

TorusPoint sample_disk(const RankKDiskSpec& spec, const TorusPoint& x, RandomStream& rng) {
  return wrap(sample_disk_lift(spec, x.coords(), rng));
}

std::vector<std::pair<TorusPoint, Mat>> orbit_jacobians(const SmoothMap& f, const TorusPoint& x, int k) {
  if (k < 1) throw PreconditionError("orbit_jacobians: k must be at least 1");
  std::vector<std::pair<TorusPoint, Mat>> out;
  out.reserve(k);
  TorusPoint y = x;
  for (int j = 0; j < k; ++j) {
    Mat d = f.jacobian(y);
    y = f(y);
    out.emplace_back(y, std::move(d));
  }
  return out;
}

}  // namespace toral
