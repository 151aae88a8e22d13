#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "toral/torus.hpp"

namespace toral {

/// Occupation counts on the r^n grid of T^n. Cells are indexed like
/// GridSetEstimate: first coordinate most significant.
class GridHistogram {
 public:
  GridHistogram() = default;
  GridHistogram(int dim, int resolution);

  int dim() const { return dim_; }
  int resolution() const { return resolution_; }
  std::size_t cell_count() const { return counts_.size(); }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }

  std::size_t cell_index(const TorusPoint& p) const;
  Vec cell_center(std::size_t cell) const;
  void add(const TorusPoint& p) { add_cell(cell_index(p)); }
  void add_cell(std::size_t cell, std::uint64_t count = 1) {
    counts_[cell] += count;
    total_ += count;
  }

  /// Aggregates blocks of factor^n cells; resolution must be divisible.
  GridHistogram coarsen(int factor) const;
  /// Adds counts cellwise; shapes must match.
  GridHistogram& operator+=(const GridHistogram& other);
  friend bool operator==(const GridHistogram&, const GridHistogram&) = default;

 private:
  int dim_ = 0;
  int resolution_ = 0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// 1/2 sum |count/total - r^-n|. Throws EmptyHistogram when total = 0.
double tv_to_uniform(const GridHistogram& h);

/// Fraction of cells with a positive count. Throws EmptyHistogram when total = 0.
double occupancy(const GridHistogram& h);

/// max count * r^n / total: the largest cell-averaged density.
double sup_density(const GridHistogram& h);

/// Least-squares slope of log sup_density against log r. Needs at least three
/// distinct resolutions (PreconditionError otherwise).
double ac_slope(const std::vector<GridHistogram>& hs);

/// "ac" below 0.3, "singular" above 0.5, "inconclusive" in between.
std::string density_verdict(double slope);

struct DensityDiagnostics {
  double tv_to_uniform = 0.0;
  double occupancy = 0.0;
  std::vector<std::pair<int, double>> sup_density;
  double ac_slope = 0.0;
  std::string verdict;
  /// Resolution used for tv_to_uniform and occupancy.
  int reference_resolution = 0;
};

/// Diagnostics over histograms of one sample stream. TV and occupancy use
/// `reference_resolution` when present, otherwise the finest histogram.
DensityDiagnostics diagnose(const std::vector<GridHistogram>& hs, int reference_resolution = 32);

}  // namespace toral
