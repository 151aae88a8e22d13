#include <doctest.h>

#include <cmath>
#include <limits>

#include "toral/errors.hpp"
#include "toral/random.hpp"
#include "toral/torus.hpp"

using namespace toral;

namespace {

// Oracle: brute force over the 3^n nearest integer shifts.
double shift_distance(const Vec& a, const Vec& b) {
  const int n = static_cast<int>(a.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  double best = std::numeric_limits<double>::infinity();
  for (int code = 0; code < total; ++code) {
    int c = code;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = a[i] - b[i] + (c % 3 - 1);
      c /= 3;
      s += d * d;
    }
    best = std::min(best, std::sqrt(s));
  }
  return best;
}

Vec random_vec(RandomStream& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("wrap reduces modulo one") {
  CHECK(TorusPoint::wrap({0.25, 0.75}).coords() == Vec{{0.25, 0.75}});
  CHECK(TorusPoint::wrap({1.25, -0.25}).coords() == Vec{{0.25, 0.75}});
  CHECK(TorusPoint::wrap({3.0, -2.0}).coords() == Vec{{0.0, 0.0}});
  // just below an integer must not land on 1.0
  const auto p = TorusPoint::wrap({-1e-18});
  CHECK(p[0] >= 0.0);
  CHECK(p[0] < 1.0);
}

TEST_CASE("wrap rejects non-finite input") {
  CHECK_THROWS_AS(TorusPoint::wrap({std::nan(""), 0.0}), InvalidInput);
  CHECK_THROWS_AS(TorusPoint::wrap({std::numeric_limits<double>::infinity()}), InvalidInput);
}

TEST_CASE("torus_distance examples") {
  CHECK(torus_distance(TorusPoint::wrap({0.1, 0.1}), TorusPoint::wrap({0.1, 0.1})) == 0.0);
  CHECK(torus_distance(TorusPoint::wrap({0.05, 0.0}), TorusPoint::wrap({0.95, 0.0})) ==
        doctest::Approx(0.1).epsilon(1e-12));
  const Vec a{{0.0, 0.0}}, b{{0.5, 0.5}};
  CHECK(torus_distance(wrap(a), wrap(b)) == doctest::Approx(shift_distance(a, b)).epsilon(1e-14));
  CHECK(torus_distance(wrap(a), wrap(b)) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("torus_distance is symmetric, bounded, and matches the shift oracle") {
  RandomStream rng(11, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + trial % 4;
    const auto a = wrap(random_vec(rng, n, -3, 3));
    const auto b = wrap(random_vec(rng, n, -3, 3));
    const double d = torus_distance(a, b);
    REQUIRE(d == torus_distance(b, a));
    REQUIRE(d <= std::sqrt(n) / 2 + 1e-12);
    REQUIRE(d == doctest::Approx(shift_distance(a.coords(), b.coords())).epsilon(1e-12));
  }
}

TEST_CASE("wrap is a homomorphism and idempotent") {
  RandomStream rng(12, 0);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = 1 + trial % 4;
    const Vec u = random_vec(rng, n, -10, 10);
    const Vec v = random_vec(rng, n, -10, 10);
    const auto lhs = wrap(u + v);
    const auto rhs = wrap(wrap(u).coords() + wrap(v).coords());
    // 1 - tiny and 0 are the same torus point
    REQUIRE(torus_distance(lhs, rhs) < 1e-12);
    REQUIRE(wrap(lhs.coords()) == lhs);
    for (int i = 0; i < n; ++i) {
      REQUIRE(lhs[i] >= 0.0);
      REQUIRE(lhs[i] < 1.0);
    }
  }
}

TEST_CASE("Philox4x32-10 known answers") {
  // Random123 kat_vectors
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("RandomStream determinism and independence") {
  RandomStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  int same_c = 0, same_d = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    REQUIRE(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
}

TEST_CASE("RandomStream uniform range and mean") {
  RandomStream rng(5, 0);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // mean of U[0,1) has sd 1/sqrt(12 n)
  CHECK(std::abs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
  const double v = rng.uniform(-0.1, 0.1);
  CHECK(v >= -0.1);
  CHECK(v < 0.1);
}

TEST_CASE("split streams are reproducible and distinct") {
  const RandomStream root(9, 3);
  auto s1 = root.split(4), s2 = root.split(4), s3 = root.split(5);
  CHECK(s1.stream_id() == s2.stream_id());
  CHECK(s1.stream_id() != s3.stream_id());
  for (int i = 0; i < 100; ++i) REQUIRE(s1.next_u32() == s2.next_u32());
}
