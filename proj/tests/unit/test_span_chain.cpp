#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "toral/automorphism.hpp"
#include "toral/errors.hpp"
#include "toral/span_chain.hpp"

using namespace toral;

namespace {

const IntMatrix kCat{{2, 1}, {1, 1}};
const IntMatrix kBlock{{2, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 2, 1}, {0, 0, 1, 1}};

// Cat-map eigenvectors from the closed form: slopes (sqrt5 - 1)/2 and -(sqrt5 + 1)/2.
Vec nu_u() { return Vec{{1.0, (std::sqrt(5.0) - 1) / 2}}.normalized(); }
Vec nu_s() { return Vec{{1.0, -(std::sqrt(5.0) + 1) / 2}}.normalized(); }

RankKDiskSpec rank1(const Vec& z, double eps = 0.1) { return RankKDiskSpec({VectorField::constant(z)}, {eps}); }

TorusPoint random_point(RandomStream& rng, int n) {
  Vec v(n);
  for (auto& x : v) x = rng.uniform();
  return wrap(v);
}

// Field that is nu_u where sin(2 pi x1) = 0 and tilts toward nu_s elsewhere.
RankKDiskSpec tilting_spec() {
  return RankKDiskSpec({VectorField::trig(nu_u(), {TrigTerm{Eigen::Vector2i(1, 0), 0.5 * nu_s(), 0.0}})}, {0.1});
}

}  // namespace

TEST_CASE("numerical_rank") {
  CHECK(numerical_rank(Mat::Identity(3, 3), 1e-9) == 3);
  CHECK(numerical_rank(Mat::Zero(2, 2), 1e-9) == 0);
  Mat m(2, 2);
  m << 1, 1, 1, 1 + 1e-12;
  CHECK(numerical_rank(m, 1e-9) == 1);
}

TEST_CASE("span_vectors examples") {
  const auto f = SmoothMap::automorphism(kCat);
  const auto spec = rank1(Vec{{1.0, 0.0}});
  const auto x = TorusPoint::wrap({0.3, 0.6});
  const Mat v2 = span_vectors(f, spec, x, 2);
  REQUIRE(v2.cols() == 2);
  CHECK(v2.col(0).isApprox(Vec{{2.0, 1.0}} / std::sqrt(5.0), 1e-15));
  CHECK(v2.col(1).isApprox(Vec{{1.0, 0.0}}, 1e-15));

  const Mat v1 = span_vectors(f, spec, x, 1);
  REQUIRE(v1.cols() == 1);
  CHECK(v1.col(0) == Vec{{1.0, 0.0}});

  RandomStream rng(41, 0);
  const Mat ref = span_vectors(f, spec, x, 4);
  for (int t = 0; t < 10; ++t) CHECK(span_vectors(f, spec, random_point(rng, 2), 4).isApprox(ref, 1e-14));
  // oracle: A^(l-j) zeta by repeated multiplication
  const Mat a = kCat.to_real();
  for (int j = 1; j <= 4; ++j) {
    Vec z{{1.0, 0.0}};
    for (int m = j; m < 4; ++m) z = a * z;
    CHECK(ref.col(j - 1).isApprox(z.normalized(), 1e-14));
  }
}

TEST_CASE("compute_n0 examples") {
  const auto f = SmoothMap::automorphism(kCat);
  RandomStream rng(42, 0);
  for (int t = 0; t < 1000; ++t) {
    const auto x = random_point(rng, 2);
    const auto r = compute_n0(f, rank1(Vec{{1.0, 0.0}}), x, 8);
    REQUIRE(r.n0 == 2);
    REQUIRE(r.rank_trace == std::vector<std::pair<int, int>>{{1, 1}, {2, 2}});
  }
  // 2x2 determinant oracle for l = 2
  CHECK(Mat((Mat(2, 2) << 2, 1, 1, 0).finished()).determinant() == doctest::Approx(-1.0));

  const auto deg = compute_n0(f, rank1(nu_u()), TorusPoint::wrap({0.2, 0.7}), 50);
  CHECK_FALSE(deg.n0.has_value());
  CHECK(deg.rank_trace.size() == 50);
  for (const auto& [l, r] : deg.rank_trace) CHECK(r == 1);

  const auto g = SmoothMap::automorphism(kBlock);
  const Vec z{{1.0, 0.3, 0.0, 0.0}};
  const auto blk = compute_n0(g, rank1(z), TorusPoint::wrap({0.1, 0.2, 0.3, 0.4}), 16);
  CHECK_FALSE(blk.n0.has_value());
  // oracle: Krylov columns stay in the first block
  Mat krylov(4, 16);
  Vec w = z;
  for (int j = 0; j < 16; ++j, w = kBlock.to_real() * w) krylov.col(j) = w.normalized();
  CHECK(oracle::svd_rank(krylov) == 2);
  for (const auto& [l, r] : blk.rank_trace) CHECK(r <= 2);

  CHECK_THROWS_AS(compute_n0(f, rank1(Vec{{1.0, 0.0}}), TorusPoint::wrap({0.0, 0.0}), 1), PreconditionError);
}

TEST_CASE("compute_n0 matches the span_vectors rank oracle on a nonlinear map") {
  const auto f = SmoothMap::composed(kCat, {TrigTerm{Eigen::Vector2i(1, 1), Vec{{0.01, 0.02}}, 0.4}});
  const auto spec = tilting_spec();
  RandomStream rng(43, 0);
  for (int t = 0; t < 50; ++t) {
    const auto x = random_point(rng, 2);
    const auto r = compute_n0(f, spec, x, 6);
    int prev = 0;
    for (const auto& [l, rank] : r.rank_trace) {
      CHECK(rank == oracle::svd_rank(span_vectors(f, spec, x, l)));
      CHECK(rank >= prev);
      CHECK(rank <= 2);
      prev = rank;
    }
    if (r.n0) CHECK(r.rank_trace.back() == std::pair<int, int>{*r.n0, 2});
    else CHECK(r.rank_trace.size() == 6);
  }
}

TEST_CASE("compute_n0 rank trace is scale invariant") {
  const auto f = SmoothMap::automorphism(kCat);
  RandomStream rng(44, 0);
  const Vec base = nu_u();
  const TrigTerm term{Eigen::Vector2i(1, 0), 0.5 * nu_s(), 0.0};
  const auto unit = RankKDiskSpec({VectorField::trig(base, {term})}, {0.1});
  const auto scaled = RankKDiskSpec({VectorField::trig(7.0 * base, {TrigTerm{term.freq, 7.0 * term.coeff, 0.0}})}, {0.1});
  for (int t = 0; t < 100; ++t) {
    const auto x = random_point(rng, 2);
    REQUIRE(compute_n0(f, unit, x, 8).rank_trace == compute_n0(f, scaled, x, 8).rank_trace);
  }
  CHECK(compute_n0(f, rank1(Vec{{3.0, 0.0}}), TorusPoint::wrap({0.1, 0.1}), 4).rank_trace ==
        compute_n0(f, rank1(Vec{{1.0, 0.0}}), TorusPoint::wrap({0.1, 0.1}), 4).rank_trace);
}

TEST_CASE("compute_n0 openness") {
  RandomStream rng(45, 0);
  const auto f = SmoothMap::automorphism(kCat);
  const auto spec = rank1(Vec{{1.0, 0.0}});
  const auto g = SmoothMap::composed(kCat, {TrigTerm{Eigen::Vector2i(0, 1), Vec{{0.02, 0.0}}, 0.0}});
  const auto tilt = tilting_spec();
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const auto x = random_point(rng, 2);
    const auto base = compute_n0(f, spec, x, 8);
    REQUIRE(base.n0 == 2);
    const auto nonlinear = compute_n0(g, tilt, x, 8);
    for (int p = 0; p < 20; ++p) {
      const double angle = rng.uniform(0, 2 * std::numbers::pi);
      const auto y = wrap(x.coords() + 1e-3 * Vec{{std::cos(angle), std::sin(angle)}});
      REQUIRE(compute_n0(f, spec, y, 8).n0 <= 2);
      if (nonlinear.n0) {
        const auto ny = compute_n0(g, tilt, y, 8).n0;
        REQUIRE(ny.has_value());
        REQUIRE(*ny <= *nonlinear.n0);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("full-rank constant fields give n0 = 1") {
  const auto f = SmoothMap::automorphism(kCat);
  const RankKDiskSpec spec({VectorField::constant(Vec{{1.0, 0.0}}), VectorField::constant(Vec{{0.0, 1.0}})}, {0.1, 0.1});
  RandomStream rng(46, 0);
  for (int t = 0; t < 100; ++t) REQUIRE(compute_n0(f, spec, random_point(rng, 2), 8).n0 == 1);
}

TEST_CASE("estimate_n examples") {
  const auto f = SmoothMap::automorphism(kCat);
  const RandomStream rng(47, 0);
  const auto x = TorusPoint::wrap({0.4, 0.1});
  const auto regular = estimate_n(f, rank1(Vec{{1.0, 0.0}}), x, {3, 4, 32, 8}, rng);
  CHECK(regular.n_est == 2);
  CHECK(regular.n_est == compute_n0(f, rank1(Vec{{1.0, 0.0}}), x, 8).n0);

  const auto k0 = estimate_n(f, tilting_spec(), x, {0, 4, 32, 8}, rng);
  CHECK(k0.n_est == compute_n0(f, tilting_spec(), x, 8).n0);
  CHECK(k0.visited == 1);

  for (int K = 0; K <= 3; ++K) {
    const auto deg = estimate_n(f, rank1(nu_u()), x, {K, 4, 32, 50}, rng);
    CHECK_FALSE(deg.n_est.has_value());
    CHECK(deg.witnesses.empty());
  }
  CHECK(estimate_n(f, rank1(nu_u()), x, {}, rng).params.k_cap == 8);
}

TEST_CASE("estimate_n witnesses and monotone budgets") {
  const auto f = SmoothMap::automorphism(kCat);
  const auto spec = tilting_spec();
  RandomStream pick(48, 0);
  for (int t = 0; t < 40; ++t) {
    const auto x = random_point(pick, 2);
    const RandomStream rng(49, static_cast<std::uint64_t>(t));
    auto n_of = [&](int K, int M) { return encode_count(estimate_n(f, spec, x, {K, M, 100000, 2}, rng).n_est); };
    auto le = [](int a, int b) { return b == kInfinity || (a != kInfinity && a <= b); };
    for (int K = 0; K < 4; ++K) REQUIRE(le(n_of(K + 1, 3), n_of(K, 3)));
    for (int M = 1; M < 5; ++M) REQUIRE(le(n_of(3, M + 1), n_of(3, M)));

    const auto est = estimate_n(f, spec, x, {3, 3, 100000, 2}, rng);
    if (est.n_est) {
      REQUIRE_FALSE(est.witnesses.empty());
      int best = 1 << 30;
      for (const auto& w : est.witnesses) {
        best = std::min(best, w.depth + w.n0);
        REQUIRE(compute_n0(f, spec, w.point, 2).n0 == w.n0);
      }
      REQUIRE(best == *est.n_est);
    } else {
      REQUIRE(est.witnesses.empty());
    }
  }
  // the origin is fixed and V(0) = nu_u, so only reachable points can certify
  const auto origin = TorusPoint::wrap({0.0, 0.0});
  CHECK_FALSE(compute_n0(f, spec, origin, 50).n0.has_value());
  const auto est = estimate_n(f, spec, origin, {3, 4, 32, 2}, RandomStream(53, 0));
  REQUIRE(est.n_est.has_value());
  CHECK(est.witnesses.front().depth >= 1);
  CHECK(*est.n_est >= 2);
}

TEST_CASE("estimate_S examples") {
  const auto f = SmoothMap::automorphism(kCat);
  const RandomStream rng(50, 0);
  const auto regular = estimate_S(f, rank1(Vec{{1.0, 0.0}}), 32, {}, rng);
  CHECK(regular.cell_count() == 1024);
  CHECK(regular.flagged_count() == 0);
  for (int n : regular.n_est) CHECK(n == 2);

  const auto deg = estimate_S(f, rank1(nu_u()), 32, {3, 4, 32, 50}, rng);
  CHECK(deg.flagged_count() == 1024);
  for (int n : deg.n_est) CHECK(n == kInfinity);
  // forward invariance of the estimate: every flagged center maps into a flagged cell
  for (std::size_t c = 0; c < deg.cell_count(); ++c) CHECK(deg.flagged[deg.cell_of(f(deg.center(c)))] == 1);

  const RankKDiskSpec full({VectorField::constant(Vec{{1.0, 0.0}}), VectorField::constant(Vec{{0.0, 1.0}})}, {0.1, 0.1});
  const auto none = estimate_S(f, full, 32, {}, rng);
  CHECK(none.flagged_count() == 0);
  for (int n : none.n_est) CHECK(n == 1);

  CHECK_THROWS_AS(estimate_S(f, full, 3, {}, rng), PreconditionError);
}

TEST_CASE("estimate_S does not depend on the worker count") {
  const auto f = SmoothMap::automorphism(kCat);
  const RandomStream rng(51, 0);
  const auto a = estimate_S(f, tilting_spec(), 8, {2, 3, 16, 2}, rng, 1);
  const auto b = estimate_S(f, tilting_spec(), 8, {2, 3, 16, 2}, rng, 3);
  CHECK(a.n_est == b.n_est);
  CHECK(a.flagged == b.flagged);
}

TEST_CASE("grid geometry") {
  const auto g = GridSetEstimate::empty(2, 4);
  CHECK(g.cell_count() == 16);
  CHECK(g.center(0) == TorusPoint::wrap({0.125, 0.125}));
  CHECK(g.center(1) == TorusPoint::wrap({0.125, 0.375}));
  CHECK(g.center(4) == TorusPoint::wrap({0.375, 0.125}));
  for (std::size_t c = 0; c < g.cell_count(); ++c) CHECK(g.cell_of(g.center(c)) == c);
}

TEST_CASE("invariant_core") {
  const auto f = SmoothMap::automorphism(kCat);
  const auto full = invariant_core(GridSetEstimate::full(2, 32), f, 10);
  CHECK(full.flagged_count() == 1024);
  CHECK(full.kind == "S_in");
  CHECK(invariant_core(GridSetEstimate::empty(2, 32), f, 10).flagged_count() == 0);

  // oracle: with s = 5 sub-samples per axis, cell (5, 9) never maps into itself
  auto single = GridSetEstimate::empty(2, 32);
  const std::size_t cell = 5 * 32 + 9;
  single.flagged[cell] = 1;
  bool self_hit = false;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b) {
      const Vec y{{(5 + (a + 0.5) / 5) / 32, (9 + (b + 0.5) / 5) / 32}};
      const Vec z = kCat.to_real() * y;
      const int i0 = static_cast<int>(std::floor((z[0] - std::floor(z[0])) * 32));
      const int i1 = static_cast<int>(std::floor((z[1] - std::floor(z[1])) * 32));
      self_hit = self_hit || (i0 == 5 && i1 == 9);
    }
  REQUIRE_FALSE(self_hit);
  const auto core = invariant_core(single, f, 3);
  CHECK(core.flagged_count() == 0);

  // the cell at the fixed point keeps itself
  auto origin = GridSetEstimate::empty(2, 32);
  origin.flagged[0] = 1;
  CHECK(invariant_core(origin, f, 5).flagged[0] == 1);
}

TEST_CASE("kernel_closure") {
  const auto f = SmoothMap::automorphism(kCat);
  const auto spec = rank1(Vec{{1.0, 0.0}});
  const RandomStream rng(52, 0);
  CHECK(kernel_closure(GridSetEstimate::empty(2, 32), f, spec, 5, rng).flagged_count() == 0);

  auto seed = GridSetEstimate::empty(2, 32);
  seed.flagged[17 * 32 + 3] = 1;
  std::size_t prev = 1;
  auto cur = seed;
  for (int round = 0; round < 10; ++round) {
    cur = kernel_closure(cur, f, spec, 1, rng.split(1000 + round));
    CHECK(cur.flagged_count() >= prev);
    for (std::size_t c = 0; c < cur.cell_count(); ++c)
      if (seed.flagged[c]) CHECK(cur.flagged[c] == 1);
    prev = cur.flagged_count();
  }

  const auto all = kernel_closure(seed, f, spec, 200, rng);
  CHECK(all.flagged_count() == 1024);
  CHECK(all.kind == "S_prime");
  // pinned regression: the dilation covers the grid well before 200 rounds
  CHECK(all.rounds < 40);
}
