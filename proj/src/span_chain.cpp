#include "toral/span_chain.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "toral/errors.hpp"
#include "toral/parallel.hpp"

namespace toral {

namespace {

void normalize_columns(Eigen::Ref<Mat> m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (norm > 0) m.col(j) /= norm;
  }
}

std::size_t ipow(int base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) out *= static_cast<std::size_t>(base);
  return out;
}

// Cell multi-index of a flat index, first coordinate most significant.
std::vector<int> cell_digits(std::size_t cell, int dim, int r) {
  std::vector<int> d(dim);
  for (int i = dim - 1; i >= 0; --i) {
    d[i] = static_cast<int>(cell % r);
    cell /= r;
  }
  return d;
}

double lipschitz_bound(const SmoothMap& f) {
  if (f.is_linear()) return Eigen::JacobiSVD<Mat>(f.linear_part()).singularValues()[0];
  RandomStream rng(0x11b5c4, 0);
  double best = 0.0;
  Vec x(f.dim());
  for (int t = 0; t < 4096; ++t) {
    for (auto& c : x) c = rng.uniform();
    best = std::max(best, Eigen::JacobiSVD<Mat>(f.jacobian(x)).singularValues()[0]);
  }
  return 1.05 * best;
}

}  // namespace

int numerical_rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  // wide inputs: the R factor of m^T has the same singular values
  Mat tri;
  if (m.cols() > m.rows()) {
    const Eigen::HouseholderQR<Mat> qr(m.transpose());
    tri = qr.matrixQR().topRows(m.rows()).triangularView<Eigen::Upper>();
  }
  const Eigen::JacobiSVD<Mat> svd(m.cols() > m.rows() ? tri : m);
  const auto& s = svd.singularValues();
  if (!(s[0] > 0)) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return r;
}

Mat span_vectors(const SmoothMap& f, const RankKDiskSpec& spec, const TorusPoint& x, int l) {
  if (l < 1) throw PreconditionError("span_vectors: l must be at least 1");
  const int n = f.dim();
  const int k = spec.rank();
  const auto orbit = orbit_jacobians(f, x, l);
  Mat out(n, k * l);
  for (int j = 1; j <= l; ++j) {
    const TorusPoint& y = orbit[j - 1].first;
    for (int i = 0; i < k; ++i) {
      Vec v = spec.fields()[i](y);
      // Df at f^m x is orbit[m].second
      for (int m = j; m < l; ++m) v = orbit[m].second * v;
      out.col((j - 1) * k + i) = v.normalized();
    }
  }
  return out;
}

SpanChainReport compute_n0(const SmoothMap& f, const RankKDiskSpec& spec, const TorusPoint& x, int k_cap,
                           Tolerances tol) {
  const int n = f.dim();
  if (spec.dim() != n || x.dim() != n) throw InvalidInput("compute_n0: dimension mismatch");
  if (k_cap < n) throw PreconditionError("compute_n0: k_cap must be at least the dimension");
  const int k = spec.rank();
  SpanChainReport report;
  report.point = x;
  report.k_cap = k_cap;
  Mat cols(n, static_cast<Eigen::Index>(k) * k_cap);
  Mat pushed(n, cols.cols());
  Mat d = f.linear_part();
  Eigen::Index used = 0;
  TorusPoint prev = x;
  TorusPoint y = f(x);
  for (int l = 1; l <= k_cap; ++l) {
    if (l > 1) {
      if (!f.is_linear()) d = f.jacobian(prev);
      pushed.leftCols(used).noalias() = d * cols.leftCols(used);
      cols.leftCols(used) = pushed.leftCols(used);
      normalize_columns(cols.leftCols(used));
      y = f(prev);
    }
    for (int i = 0; i < k; ++i) cols.col(used++) = spec.fields()[i](y);
    const int r = numerical_rank(cols.leftCols(used), tol.rank);
    report.rank_trace.emplace_back(l, r);
    if (r == n) {
      report.n0 = l;
      break;
    }
    prev = y;
  }
  return report;
}

int resolve_k_cap(int k_cap, int n) { return k_cap > 0 ? k_cap : 4 * n; }

ReachabilityEstimate estimate_n(const SmoothMap& f, const RankKDiskSpec& spec, const TorusPoint& x,
                                const ReachabilityParams& params, const RandomStream& rng, Tolerances tol) {
  if (params.K < 0 || params.M < 1 || params.M_max < 1)
    throw PreconditionError("estimate_n: need K >= 0, M >= 1, M_max >= 1");
  ReachabilityEstimate est;
  est.point = x;
  est.params = params;
  est.params.k_cap = resolve_k_cap(params.k_cap, f.dim());
  const int k_cap = est.params.k_cap;

  const auto root = compute_n0(f, spec, x, k_cap, tol);
  est.visited = 1;
  if (root.n0) {
    est.n_est = *root.n0;
    est.witnesses.push_back({0, x, *root.n0});
  }

  struct Node {
    TorusPoint point;
    RandomStream stream;
  };
  std::vector<Node> frontier{{x, rng}};
  for (int j = 1; j <= params.K; ++j) {
    // n0 >= 1, so depth j can only give j + 1 or more
    if (est.n_est && *est.n_est <= j + 1) break;
    std::vector<Node> next;
    for (const auto& node : frontier) {
      const TorusPoint fy = f(node.point);
      for (int m = 0; m < params.M && static_cast<int>(next.size()) < params.M_max; ++m) {
        RandomStream child = node.stream.split(static_cast<std::uint64_t>(m));
        RandomStream draw = child;
        next.push_back({sample_disk(spec, fy, draw), child});
      }
      if (static_cast<int>(next.size()) >= params.M_max) break;
    }
    for (const auto& node : next) {
      const auto r = compute_n0(f, spec, node.point, k_cap, tol);
      ++est.visited;
      if (r.n0 && (!est.n_est || j + *r.n0 < *est.n_est)) {
        est.n_est = j + *r.n0;
        est.witnesses.push_back({j, node.point, *r.n0});
        if (*est.n_est <= j + 1) break;
      }
    }
    frontier = std::move(next);
  }
  return est;
}

GridSetEstimate GridSetEstimate::empty(int dim, int resolution, std::string kind) {
  if (dim < 1 || resolution < 1) throw InvalidInput("grid: dimension and resolution must be positive");
  GridSetEstimate g;
  g.dim = dim;
  g.resolution = resolution;
  g.kind = std::move(kind);
  g.flagged.assign(ipow(resolution, dim), 0);
  return g;
}

GridSetEstimate GridSetEstimate::full(int dim, int resolution, std::string kind) {
  GridSetEstimate g = empty(dim, resolution, std::move(kind));
  std::fill(g.flagged.begin(), g.flagged.end(), 1);
  return g;
}

std::size_t GridSetEstimate::flagged_count() const {
  return static_cast<std::size_t>(std::count(flagged.begin(), flagged.end(), 1));
}

TorusPoint GridSetEstimate::center(std::size_t cell) const {
  const auto d = cell_digits(cell, dim, resolution);
  Vec c(dim);
  for (int i = 0; i < dim; ++i) c[i] = (d[i] + 0.5) / resolution;
  return wrap(c);
}

std::size_t GridSetEstimate::cell_of(const TorusPoint& p) const {
  std::size_t idx = 0;
  for (int i = 0; i < dim; ++i) {
    const int d = std::min(resolution - 1, static_cast<int>(p[i] * resolution));
    idx = idx * resolution + static_cast<std::size_t>(d);
  }
  return idx;
}

GridSetEstimate estimate_S(const SmoothMap& f, const RankKDiskSpec& spec, int resolution,
                           const ReachabilityParams& params, const RandomStream& rng, int workers, Tolerances tol) {
  if (resolution < 4) throw PreconditionError("estimate_S: grid resolution must be at least 4");
  GridSetEstimate g = GridSetEstimate::empty(f.dim(), resolution, "S");
  g.params = params;
  g.params.k_cap = resolve_k_cap(params.k_cap, f.dim());
  g.n_est.assign(g.cell_count(), kInfinity);
  parallel_for(g.cell_count(), workers, [&](std::size_t cell) {
    const auto est = estimate_n(f, spec, g.center(cell), g.params, rng.split(cell), tol);
    g.n_est[cell] = encode_count(est.n_est);
    g.flagged[cell] = est.n_est ? 0 : 1;
  });
  return g;
}

GridSetEstimate invariant_core(const GridSetEstimate& est, const SmoothMap& f, int iterations, int samples_per_axis,
                               int workers) {
  if (est.dim != f.dim()) throw InvalidInput("invariant_core: dimension mismatch");
  if (iterations < 0) throw PreconditionError("invariant_core: iterations must be non-negative");
  const int n = est.dim;
  const int r = est.resolution;
  const int s = samples_per_axis > 0 ? samples_per_axis
                                     : static_cast<int>(std::ceil(std::sqrt(double(n)) * lipschitz_bound(f))) + 1;
  const std::size_t per_cell = ipow(s, n);

  GridSetEstimate out = est;
  out.kind = "S_in";
  out.n_est.clear();
  out.iterations = 0;
  std::vector<std::vector<std::size_t>> targets(est.cell_count());
  for (int it = 0; it < iterations; ++it) {
    parallel_for(out.cell_count(), workers, [&](std::size_t cell) {
      auto& t = targets[cell];
      t.clear();
      if (!out.flagged[cell]) return;
      const auto d = cell_digits(cell, n, r);
      Vec y(n);
      for (std::size_t q = 0; q < per_cell; ++q) {
        std::size_t code = q;
        for (int i = 0; i < n; ++i) {
          y[i] = (d[i] + (static_cast<double>(code % s) + 0.5) / s) / r;
          code /= s;
        }
        t.push_back(out.cell_of(wrap(f.lift(y))));
      }
    });
    std::vector<std::uint8_t> hit(out.cell_count(), 0);
    for (const auto& t : targets)
      for (std::size_t c : t) hit[c] = 1;
    std::vector<std::uint8_t> next(out.cell_count());
    for (std::size_t c = 0; c < next.size(); ++c) next[c] = out.flagged[c] && hit[c];
    ++out.iterations;
    if (next == out.flagged) break;
    out.flagged = std::move(next);
  }
  return out;
}

GridSetEstimate kernel_closure(const GridSetEstimate& seed, const SmoothMap& f, const RankKDiskSpec& spec, int rounds,
                               const RandomStream& rng, int samples, int workers) {
  if (seed.dim != f.dim() || spec.dim() != f.dim()) throw InvalidInput("kernel_closure: dimension mismatch");
  if (rounds < 1) throw PreconditionError("kernel_closure: rounds must be at least 1");
  if (samples < 1) throw PreconditionError("kernel_closure: samples must be at least 1");
  const int n = seed.dim;
  const int r = seed.resolution;
  GridSetEstimate out = seed;
  out.kind = "S_prime";
  out.n_est.clear();
  out.rounds = 0;
  std::vector<std::vector<std::size_t>> targets(seed.cell_count());
  for (int round = 0; round < rounds; ++round) {
    if (out.flagged_count() == out.cell_count()) break;
    const RandomStream round_stream = rng.split(static_cast<std::uint64_t>(round));
    parallel_for(out.cell_count(), workers, [&](std::size_t cell) {
      auto& t = targets[cell];
      t.clear();
      if (!out.flagged[cell]) return;
      RandomStream s = round_stream.split(cell);
      const auto d = cell_digits(cell, n, r);
      Vec y(n);
      for (int m = 0; m < samples; ++m) {
        for (int i = 0; i < n; ++i) y[i] = (d[i] + s.uniform()) / r;
        t.push_back(out.cell_of(wrap(sample_disk_lift(spec, f.lift(y), s))));
      }
    });
    for (const auto& t : targets)
      for (std::size_t c : t) out.flagged[c] = 1;
    ++out.rounds;
  }
  return out;
}

}  // namespace toral
