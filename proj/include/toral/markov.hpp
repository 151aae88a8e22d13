#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "toral/density.hpp"
#include "toral/random.hpp"
#include "toral/torus.hpp"
#include "toral/vector_field.hpp"

namespace toral {

/// The chain x -> f(x) -> Q_{f x}.
struct PerturbationKernel {
  SmoothMap map;
  RankKDiskSpec disk;
};

/// One transition: sample_disk(disk, f(x)).
TorusPoint step(const PerturbationKernel& kernel, const TorusPoint& x, RandomStream& rng);

/// Unweighted particles. Particle p draws its step-s randomness from
/// RandomStream(master_seed, p, s + 1); substream 0 seeds the initial point.
struct ParticleEnsemble {
  std::vector<TorusPoint> particles;
  std::uint64_t master_seed = 0;
  int step_count = 0;

  static ParticleEnsemble uniform(int dim, std::size_t count, std::uint64_t master_seed);
  static ParticleEnsemble at(const TorusPoint& x, std::size_t count, std::uint64_t master_seed);
};

ParticleEnsemble evolve(const PerturbationKernel& kernel, const ParticleEnsemble& ensemble, int steps, int workers = 1);

/// Bins the ensemble's current positions.
GridHistogram histogram_of(const ParticleEnsemble& ensemble, int resolution);

/// Exact stepping for a linear map with constant fields, carried out in real
/// eigen-coordinates of A. Block-diagonal dynamics keep each invariant
/// subspace closed, so a chain started on the stable line of a fixed point
/// stays on it; wrap-every-step arithmetic would drift off along E^u.
class EigenLiftWalker {
 public:
  /// nullopt unless the map is linear, every field is constant, and A has a
  /// real eigenbasis with condition number below 1e8.
  static std::optional<EigenLiftWalker> make(const PerturbationKernel& kernel, const TorusPoint& x0,
                                             Tolerances tol = {});

  void advance(RandomStream& rng);
  TorusPoint position() const;

 private:
  Mat basis_;       // columns: real eigenbasis E
  Mat basis_inv_;   // E^{-1}
  Mat dynamics_;    // block-diagonal E^{-1} A E
  std::vector<Vec> directions_;  // eigen-coordinates of each field
  std::vector<double> epsilons_;
  Vec state_;
};

struct OccupationParams {
  int burn_in = 1000;
  std::int64_t samples = 1000000;
  std::vector<int> resolutions{8, 16, 32, 64};
  /// Average over `starts` independent trajectories from uniform random
  /// starting points instead of one trajectory from x0.
  bool multi_start = false;
  int starts = 64;
  /// Use EigenLiftWalker when it applies.
  bool eigen_lift = true;
};

/// Birkhoff occupation histograms, one per resolution, all fed by the same
/// samples. Throws PreconditionError when samples < 10^4.
std::vector<GridHistogram> occupation(const PerturbationKernel& kernel, const TorusPoint& x0,
                                      const OccupationParams& params, const RandomStream& rng, int workers = 1);

}  // namespace toral
