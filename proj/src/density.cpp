#include "toral/density.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "toral/errors.hpp"

namespace toral {

namespace {

void require_mass(const GridHistogram& h, const char* what) {
  if (h.total() == 0) throw EmptyHistogram(std::string(what) + ": histogram is empty");
}

}  // namespace

GridHistogram::GridHistogram(int dim, int resolution) : dim_(dim), resolution_(resolution) {
  if (dim < 1 || resolution < 1) throw InvalidInput("histogram: dimension and resolution must be positive");
  std::size_t cells = 1;
  for (int i = 0; i < dim; ++i) cells *= static_cast<std::size_t>(resolution);
  counts_.assign(cells, 0);
}

std::size_t GridHistogram::cell_index(const TorusPoint& p) const {
  if (p.dim() != dim_) throw InvalidInput("histogram: point dimension mismatch");
  std::size_t idx = 0;
  for (int i = 0; i < dim_; ++i) {
    const int d = std::min(resolution_ - 1, static_cast<int>(p[i] * resolution_));
    idx = idx * resolution_ + static_cast<std::size_t>(d);
  }
  return idx;
}

Vec GridHistogram::cell_center(std::size_t cell) const {
  Vec c(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    c[i] = (static_cast<double>(cell % resolution_) + 0.5) / resolution_;
    cell /= resolution_;
  }
  return c;
}

GridHistogram GridHistogram::coarsen(int factor) const {
  if (factor < 1 || resolution_ % factor != 0) throw InvalidInput("histogram: resolution not divisible by factor");
  GridHistogram out(dim_, resolution_ / factor);
  for (std::size_t cell = 0; cell < counts_.size(); ++cell) {
    if (counts_[cell] == 0) continue;
    std::size_t rest = cell, coarse = 0, scale = 1;
    for (int i = dim_ - 1; i >= 0; --i) {
      const std::size_t d = rest % resolution_;
      rest /= resolution_;
      coarse += (d / factor) * scale;
      scale *= static_cast<std::size_t>(out.resolution_);
    }
    out.add_cell(coarse, counts_[cell]);
  }
  return out;
}

GridHistogram& GridHistogram::operator+=(const GridHistogram& other) {
  if (other.dim_ != dim_ || other.resolution_ != resolution_) throw InvalidInput("histogram: shape mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

double tv_to_uniform(const GridHistogram& h) {
  require_mass(h, "tv_to_uniform");
  const double u = 1.0 / static_cast<double>(h.cell_count());
  const double total = static_cast<double>(h.total());
  double s = 0.0;
  for (auto c : h.counts()) s += std::abs(static_cast<double>(c) / total - u);
  return std::min(1.0, 0.5 * s);
}

double occupancy(const GridHistogram& h) {
  require_mass(h, "occupancy");
  const auto filled = std::count_if(h.counts().begin(), h.counts().end(), [](auto c) { return c > 0; });
  return static_cast<double>(filled) / static_cast<double>(h.cell_count());
}

double sup_density(const GridHistogram& h) {
  require_mass(h, "sup_density");
  const auto top = *std::max_element(h.counts().begin(), h.counts().end());
  return static_cast<double>(top) * static_cast<double>(h.cell_count()) / static_cast<double>(h.total());
}

double ac_slope(const std::vector<GridHistogram>& hs) {
  std::set<int> distinct;
  for (const auto& h : hs) distinct.insert(h.resolution());
  if (distinct.size() < 3) throw PreconditionError("ac_slope: need at least three distinct resolutions");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& h : hs) {
    const double x = std::log(static_cast<double>(h.resolution()));
    const double y = std::log(sup_density(h));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double m = static_cast<double>(hs.size());
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::string density_verdict(double slope) {
  if (slope < 0.3) return "ac";
  if (slope > 0.5) return "singular";
  return "inconclusive";
}

DensityDiagnostics diagnose(const std::vector<GridHistogram>& hs, int reference_resolution) {
  if (hs.empty()) throw PreconditionError("diagnose: no histograms");
  DensityDiagnostics d;
  const GridHistogram* ref = &hs.front();
  for (const auto& h : hs) {
    if (h.resolution() > ref->resolution()) ref = &h;
  }
  for (const auto& h : hs)
    if (h.resolution() == reference_resolution) ref = &h;
  d.reference_resolution = ref->resolution();
  d.tv_to_uniform = tv_to_uniform(*ref);
  d.occupancy = occupancy(*ref);
  for (const auto& h : hs) d.sup_density.emplace_back(h.resolution(), sup_density(h));
  d.ac_slope = ac_slope(hs);
  d.verdict = density_verdict(d.ac_slope);
  return d;
}

}  // namespace toral
