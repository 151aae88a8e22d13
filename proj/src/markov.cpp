#include "toral/markov.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "toral/errors.hpp"
#include "toral/parallel.hpp"

namespace toral {

namespace {

constexpr double kReduceAbove = 64.0;

}  // namespace

TorusPoint step(const PerturbationKernel& kernel, const TorusPoint& x, RandomStream& rng) {
  return wrap(sample_disk_lift(kernel.disk, kernel.map.lift(x.coords()), rng));
}

ParticleEnsemble ParticleEnsemble::uniform(int dim, std::size_t count, std::uint64_t master_seed) {
  ParticleEnsemble e;
  e.master_seed = master_seed;
  e.particles.reserve(count);
  Vec x(dim);
  for (std::size_t p = 0; p < count; ++p) {
    RandomStream rng(master_seed, p, 0);
    for (auto& c : x) c = rng.uniform();
    e.particles.push_back(wrap(x));
  }
  return e;
}

ParticleEnsemble ParticleEnsemble::at(const TorusPoint& x, std::size_t count, std::uint64_t master_seed) {
  ParticleEnsemble e;
  e.master_seed = master_seed;
  e.particles.assign(count, x);
  return e;
}

ParticleEnsemble evolve(const PerturbationKernel& kernel, const ParticleEnsemble& ensemble, int steps, int workers) {
  if (steps < 1) throw PreconditionError("evolve: steps must be at least 1");
  ParticleEnsemble out = ensemble;
  parallel_for(out.particles.size(), workers, [&](std::size_t p) {
    TorusPoint x = out.particles[p];
    for (int s = 0; s < steps; ++s) {
      RandomStream rng(out.master_seed, p, static_cast<std::uint32_t>(ensemble.step_count + s + 1));
      x = step(kernel, x, rng);
    }
    out.particles[p] = x;
  });
  out.step_count += steps;
  return out;
}

GridHistogram histogram_of(const ParticleEnsemble& ensemble, int resolution) {
  if (ensemble.particles.empty()) throw PreconditionError("histogram_of: empty ensemble");
  GridHistogram h(ensemble.particles.front().dim(), resolution);
  for (const auto& p : ensemble.particles) h.add(p);
  return h;
}

std::optional<EigenLiftWalker> EigenLiftWalker::make(const PerturbationKernel& kernel, const TorusPoint& x0,
                                                     Tolerances tol) {
  if (!kernel.map.is_linear() || !kernel.disk.all_constant()) return std::nullopt;
  const Mat& a = kernel.map.linear_part();
  const int n = static_cast<int>(a.rows());
  const Eigen::EigenSolver<Mat> es(a, true);
  Mat basis(n, n);
  std::vector<int> block_start;
  for (int i = 0; i < n;) {
    const auto lambda = es.eigenvalues()[i];
    block_start.push_back(i);
    if (lambda.imag() == 0.0) {
      basis.col(i) = es.eigenvectors().col(i).real();
      ++i;
    } else {
      if (i + 1 >= n) return std::nullopt;
      basis.col(i) = es.eigenvectors().col(i).real();
      basis.col(i + 1) = es.eigenvectors().col(i).imag();
      i += 2;
    }
  }
  block_start.push_back(n);
  const Eigen::JacobiSVD<Mat> svd(basis);
  const auto& sv = svd.singularValues();
  if (!(sv[n - 1] > 0) || sv[0] / sv[n - 1] > 1e8) return std::nullopt;

  EigenLiftWalker w;
  w.basis_ = basis;
  w.basis_inv_ = basis.inverse();
  Mat d = w.basis_inv_ * a * basis;
  // zero everything outside the diagonal blocks
  Mat blocks = Mat::Zero(n, n);
  for (std::size_t b = 0; b + 1 < block_start.size(); ++b) {
    const int lo = block_start[b], len = block_start[b + 1] - lo;
    blocks.block(lo, lo, len, len) = d.block(lo, lo, len, len);
  }
  w.dynamics_ = blocks;
  for (std::size_t i = 0; i < kernel.disk.fields().size(); ++i) {
    Vec c = w.basis_inv_ * kernel.disk.fields()[i].base();
    const double norm = c.norm();
    for (std::size_t b = 0; b + 1 < block_start.size(); ++b) {
      const int lo = block_start[b], len = block_start[b + 1] - lo;
      if (c.segment(lo, len).norm() <= tol.rank * norm) c.segment(lo, len).setZero();
    }
    w.directions_.push_back(c);
    w.epsilons_.push_back(kernel.disk.epsilons()[i]);
  }
  w.state_ = w.basis_inv_ * x0.coords();
  return w;
}

void EigenLiftWalker::advance(RandomStream& rng) {
  state_ = dynamics_ * state_;
  for (std::size_t i = 0; i < directions_.size(); ++i) state_ += rng.uniform(-epsilons_[i], epsilons_[i]) * directions_[i];
  if (state_.cwiseAbs().maxCoeff() > kReduceAbove) state_ = basis_inv_ * wrap(basis_ * state_).coords();
}

TorusPoint EigenLiftWalker::position() const { return wrap(basis_ * state_); }

std::vector<GridHistogram> occupation(const PerturbationKernel& kernel, const TorusPoint& x0,
                                      const OccupationParams& params, const RandomStream& rng, int workers) {
  if (params.samples < 10000) throw PreconditionError("occupation: samples must be at least 10^4");
  if (params.burn_in < 0) throw PreconditionError("occupation: burn_in must be non-negative");
  if (params.resolutions.empty()) throw PreconditionError("occupation: no resolutions");
  if (params.multi_start && params.starts < 1) throw PreconditionError("occupation: starts must be positive");
  const int n = kernel.map.dim();
  if (x0.dim() != n) throw InvalidInput("occupation: starting point dimension mismatch");

  auto run = [&](const TorusPoint& start, std::int64_t samples, RandomStream stream) {
    std::vector<GridHistogram> hs;
    for (int r : params.resolutions) hs.emplace_back(n, r);
    auto record = [&](const TorusPoint& p) {
      for (auto& h : hs) h.add(p);
    };
    std::optional<EigenLiftWalker> lift;
    if (params.eigen_lift) lift = EigenLiftWalker::make(kernel, start);
    if (lift) {
      for (int s = 0; s < params.burn_in; ++s) lift->advance(stream);
      for (std::int64_t s = 0; s < samples; ++s) {
        lift->advance(stream);
        record(lift->position());
      }
    } else {
      TorusPoint x = start;
      for (int s = 0; s < params.burn_in; ++s) x = step(kernel, x, stream);
      for (std::int64_t s = 0; s < samples; ++s) {
        x = step(kernel, x, stream);
        record(x);
      }
    }
    return hs;
  };

  if (!params.multi_start) return run(x0, params.samples, rng);

  const int starts = params.starts;
  std::vector<std::vector<GridHistogram>> parts(starts);
  parallel_for(static_cast<std::size_t>(starts), workers, [&](std::size_t s) {
    RandomStream init = rng.split(2 * s);
    Vec x(n);
    for (auto& c : x) c = init.uniform();
    // spread the remainder over the first starts so the total is exact
    const std::int64_t share = params.samples / starts + (static_cast<std::int64_t>(s) < params.samples % starts ? 1 : 0);
    parts[s] = run(wrap(x), share, rng.split(2 * s + 1));
  });
  std::vector<GridHistogram> out = parts.front();
  for (int s = 1; s < starts; ++s)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += parts[s][i];
  return out;
}

}  // namespace toral
