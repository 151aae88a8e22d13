#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "toral/random.hpp"
#include "toral/torus.hpp"
#include "toral/vector_field.hpp"

namespace toral {

/// Serialized stand-in for an infinite n0 or n estimate.
inline constexpr int kInfinity = -1;

inline int encode_count(const std::optional<int>& n) { return n ? *n : kInfinity; }

/// Numerical rank of the columns of `m`: singular values strictly above
/// rel_tol times the largest. Ties count as deficient.
int numerical_rank(const Mat& m, double rel_tol);

/// The k*l unit vectors Df^{l-j}_{f^j x} V_i(f^j x), j = 1..l, i = 1..k, as
/// columns, grouped by j.
Mat span_vectors(const SmoothMap& f, const RankKDiskSpec& spec, const TorusPoint& x, int l);

struct SpanChainReport {
  TorusPoint point;
  /// nullopt means no l <= k_cap spans.
  std::optional<int> n0;
  /// (l, rank of span_vectors(l)), one entry per step computed.
  std::vector<std::pair<int, int>> rank_trace;
  int k_cap = 0;
};

/// Smallest l <= k_cap at which the span vectors have full rank n.
/// Throws PreconditionError when k_cap < n.
SpanChainReport compute_n0(const SmoothMap& f, const RankKDiskSpec& spec, const TorusPoint& x, int k_cap,
                           Tolerances tol = {});

struct ReachabilityParams {
  int K = 3;
  int M = 4;
  int M_max = 32;
  int k_cap = 0;  ///< 0 selects 4n
};

int resolve_k_cap(int k_cap, int n);

struct Witness {
  int depth = 0;
  TorusPoint point;
  int n0 = 0;
};

struct ReachabilityEstimate {
  TorusPoint point;
  /// Certified upper bound on n(x); nullopt when no visited point spans.
  std::optional<int> n_est;
  ReachabilityParams params;
  /// Visited points that improved the running minimum, in discovery order.
  std::vector<Witness> witnesses;
  /// Number of n0 evaluations performed.
  int visited = 0;
};

/// Sampled exploration of H_1(x), ..., H_K(x). Level j+1 draws M children
/// sample_disk(spec, f y) for each y in level j, in parent order, keeping at
/// most M_max. Child m of a node uses the node's stream split(m), so larger
/// budgets revisit the same points first.
ReachabilityEstimate estimate_n(const SmoothMap& f, const RankKDiskSpec& spec, const TorusPoint& x,
                                const ReachabilityParams& params, const RandomStream& rng, Tolerances tol = {});

/// A set of grid cells on T^n. Cell i_1..i_n (first coordinate most
/// significant) covers prod [i_d / r, (i_d + 1) / r).
struct GridSetEstimate {
  int dim = 0;
  int resolution = 0;
  /// "S", "S_in" or "S_prime".
  std::string kind = "S";
  std::vector<std::uint8_t> flagged;
  /// Per-cell n_est (kInfinity encodes infinity); filled by estimate_S only.
  std::vector<int> n_est;
  ReachabilityParams params;
  int iterations = 0;
  int rounds = 0;

  static GridSetEstimate empty(int dim, int resolution, std::string kind = "S");
  static GridSetEstimate full(int dim, int resolution, std::string kind = "S");

  std::size_t cell_count() const { return flagged.size(); }
  std::size_t flagged_count() const;
  TorusPoint center(std::size_t cell) const;
  std::size_t cell_of(const TorusPoint& p) const;
};

/// Runs estimate_n at every cell center (stream rng.split(cell)); flags the
/// cell when n_est is infinite.
GridSetEstimate estimate_S(const SmoothMap& f, const RankKDiskSpec& spec, int resolution,
                           const ReachabilityParams& params, const RandomStream& rng, int workers = 1,
                           Tolerances tol = {});

/// Grid approximation of the intersection of f^i S. Each round keeps a
/// flagged cell only if the image of some sub-sample point of a flagged cell
/// lands in it. `samples_per_axis` 0 picks ceil(sqrt(n) * Lip(f)) + 1, enough
/// for the images of a fully flagged grid to hit every cell.
GridSetEstimate invariant_core(const GridSetEstimate& est, const SmoothMap& f, int iterations,
                               int samples_per_axis = 0, int workers = 1);

/// Grid approximation of the closure of the union of S_k, S_k the union of
/// I_eps(f x) over x in S_{k-1}. Each round, every flagged cell draws
/// `samples` uniform points y and flags the cell of sample_disk(spec, f y).
GridSetEstimate kernel_closure(const GridSetEstimate& seed, const SmoothMap& f, const RankKDiskSpec& spec,
                               int rounds, const RandomStream& rng, int samples = 16, int workers = 1);

}  // namespace toral
