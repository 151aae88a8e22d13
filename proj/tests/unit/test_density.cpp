#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "toral/errors.hpp"
#include "toral/density.hpp"
#include "toral/random.hpp"

using namespace toral;

namespace {

std::vector<GridHistogram> bin_all(const std::vector<Vec>& pts, std::vector<int> rs) {
  std::vector<GridHistogram> hs;
  for (int r : rs) {
    GridHistogram h(static_cast<int>(pts.front().size()), r);
    for (const auto& p : pts) h.add(wrap(p));
    hs.push_back(std::move(h));
  }
  return hs;
}

std::vector<Vec> uniform_points(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  std::vector<Vec> pts(n, Vec(2));
  for (auto& p : pts) p << rng.uniform(), rng.uniform();
  return pts;
}

}  // namespace

TEST_CASE("GridHistogram basics") {
  GridHistogram h(2, 4);
  CHECK(h.cell_count() == 16);
  h.add(TorusPoint::wrap({0.3, 0.8}));
  CHECK(h.cell_index(TorusPoint::wrap({0.3, 0.8})) == 1 * 4 + 3);
  CHECK(h.counts()[7] == 1);
  CHECK(h.total() == 1);
  CHECK(h.cell_center(7).isApprox(Vec{{0.375, 0.875}}));
  GridHistogram g(2, 4);
  g.add_cell(0, 5);
  h += g;
  CHECK(h.total() == 6);
  CHECK_THROWS_AS(h += GridHistogram(2, 8), InvalidInput);
  CHECK_THROWS_AS(h.coarsen(3), InvalidInput);
}

TEST_CASE("tv_to_uniform examples") {
  GridHistogram flat(2, 32);
  for (std::size_t c = 0; c < flat.cell_count(); ++c) flat.add_cell(c, 7);
  CHECK(tv_to_uniform(flat) == doctest::Approx(0.0).epsilon(1e-15));

  GridHistogram atom(2, 32);
  atom.add_cell(123, 1000);
  CHECK(tv_to_uniform(atom) == doctest::Approx(0.5 * ((1.0 - 1.0 / 1024) + 1023.0 / 1024)));
  CHECK(tv_to_uniform(atom) == doctest::Approx(0.9990234375));

  const auto hs = bin_all(uniform_points(1000000, 61), {32});
  const double tv = tv_to_uniform(hs[0]);
  // binomial noise floor: 1/2 * 1024 * sqrt(2/pi) * sqrt(p(1-p)/N)
  const double p = 1.0 / 1024;
  const double floor = 0.5 * 1024 * std::sqrt(2 / std::numbers::pi) * std::sqrt(p * (1 - p) / 1e6);
  CHECK(tv < 0.03);
  CHECK(tv == doctest::Approx(floor).epsilon(0.2));

  CHECK_THROWS_AS(tv_to_uniform(GridHistogram(2, 4)), EmptyHistogram);
}

TEST_CASE("tv_to_uniform invariants") {
  RandomStream rng(62, 0);
  for (int t = 0; t < 50; ++t) {
    GridHistogram h(2, 8), perm(2, 8);
    std::vector<std::uint64_t> counts(64);
    for (auto& c : counts) c = rng.next_u32() % 10;
    counts[0] += 1;
    for (std::size_t i = 0; i < 64; ++i) h.add_cell(i, counts[i]);
    std::vector<std::size_t> order(64);
    for (std::size_t i = 0; i < 64; ++i) order[i] = i;
    for (std::size_t i = 63; i > 0; --i) std::swap(order[i], order[rng.next_u32() % (i + 1)]);
    for (std::size_t i = 0; i < 64; ++i) perm.add_cell(order[i], counts[i]);
    const double tv = tv_to_uniform(h);
    REQUIRE(tv == doctest::Approx(tv_to_uniform(perm)).epsilon(1e-14));
    REQUIRE(tv <= 1.0);
    REQUIRE(tv >= 0.0);
    const bool equal = std::all_of(counts.begin(), counts.end(), [&](auto c) { return c == counts[0]; });
    REQUIRE((tv == 0.0) == equal);
  }
}

TEST_CASE("occupancy examples") {
  GridHistogram atom(2, 32);
  atom.add_cell(5, 10);
  CHECK(occupancy(atom) == doctest::Approx(1.0 / 1024));
  GridHistogram flat(2, 8);
  for (std::size_t c = 0; c < flat.cell_count(); ++c) flat.add_cell(c, 3);
  CHECK(occupancy(flat) == 1.0);
  // (1 - 1/1024)^1e6 is about e^-976
  CHECK(occupancy(bin_all(uniform_points(1000000, 63), {32})[0]) == 1.0);
  CHECK_THROWS_AS(occupancy(GridHistogram(2, 4)), EmptyHistogram);
}

TEST_CASE("ac_slope examples") {
  const std::vector<int> rs{8, 16, 32, 64};
  const double uniform = ac_slope(bin_all(uniform_points(1000000, 64), rs));
  CHECK(uniform > -0.2);
  CHECK(uniform < 0.2);

  RandomStream rng(65, 0);
  std::vector<Vec> line(200000, Vec(2));
  for (auto& p : line) p << rng.uniform(), 0.5;
  const double one = ac_slope(bin_all(line, rs));
  CHECK(one > 0.8);
  CHECK(one < 1.2);

  const std::vector<Vec> point(1000, Vec{{0.3, 0.7}});
  const double two = ac_slope(bin_all(point, rs));
  CHECK(two > 1.8);
  CHECK(two < 2.2);

  CHECK_THROWS_AS(ac_slope(bin_all(point, {8, 16})), PreconditionError);
  CHECK_THROWS_AS(ac_slope(bin_all(point, {8, 8, 16})), PreconditionError);
}

TEST_CASE("refinement consistency") {
  const auto pts = uniform_points(50000, 66);
  const auto hs = bin_all(pts, {8, 16, 32, 64});
  CHECK(hs[3].coarsen(2) == hs[2]);
  CHECK(hs[3].coarsen(4) == hs[1]);
  CHECK(hs[3].coarsen(8) == hs[0]);
  const std::vector<GridHistogram> aggregated{hs[3].coarsen(8), hs[3].coarsen(4), hs[3].coarsen(2), hs[3]};
  CHECK(ac_slope(aggregated) == ac_slope(hs));

  GridHistogram h3(3, 4);
  RandomStream rng(67, 0);
  GridHistogram c3(3, 2);
  for (int i = 0; i < 1000; ++i) {
    const auto p = TorusPoint::wrap({rng.uniform(), rng.uniform(), rng.uniform()});
    h3.add(p);
    c3.add(p);
  }
  CHECK(h3.coarsen(2) == c3);
}

TEST_CASE("diagnose and verdicts") {
  CHECK(density_verdict(0.1) == "ac");
  CHECK(density_verdict(0.4) == "inconclusive");
  CHECK(density_verdict(0.9) == "singular");
  const auto hs = bin_all(uniform_points(200000, 68), {8, 16, 32, 64});
  const auto d = diagnose(hs);
  CHECK(d.reference_resolution == 32);
  CHECK(d.tv_to_uniform == tv_to_uniform(hs[2]));
  CHECK(d.sup_density.size() == 4);
  CHECK(d.sup_density[0].first == 8);
  CHECK(d.verdict == "ac");
  CHECK(diagnose(hs, 128).reference_resolution == 64);
}
