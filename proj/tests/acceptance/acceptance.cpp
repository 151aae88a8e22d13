// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// fail. Usage: acceptance <toralperturb executable> <configs dir> <work dir>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "toral/coincidence.hpp"
#include "toral/density.hpp"
#include "toral/markov.hpp"
#include "toral/span_chain.hpp"

namespace fs = std::filesystem;
using namespace toral;
using Rational = boost::multiprecision::cpp_rational;

namespace {

const IntMatrix kCat{{2, 1}, {1, 1}};
const IntMatrix kBlock{{2, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 2, 1}, {0, 0, 1, 1}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("threw: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_s <= 0 || s < limit_s;
  const bool pass = r.pass && in_time;
  failures += !pass;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.2f s", s);
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << r.detail << "; " << timing
            << (in_time ? "" : ", over the time limit") << ")" << std::endl;
}

TorusPoint random_point(int n, RandomStream& rng) {
  Vec c(n);
  for (auto& x : c) x = rng.uniform();
  return wrap(c);
}

RankKDiskSpec single(const Vec& z, double eps = 0.1) { return RankKDiskSpec({VectorField::constant(z)}, {eps}); }

// Integer C with A B = B C, checked exactly, or false when none exists.
bool exact_invariance(const IntMatrix& a, const InvariantSubgroup& g) {
  const int n = a.rows();
  const int r = g.rank();
  IntMatrix b(n, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < n; ++i) b(i, j) = g.lattice_basis[j][i];
  const IntMatrix ab = a.pow(g.power) * b;
  // least squares over Q: (B^T B) C = B^T (A B)
  const IntMatrix btb = b.transpose() * b;
  const IntMatrix rhs = b.transpose() * ab;
  std::vector<std::vector<Rational>> m(r, std::vector<Rational>(2 * r));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      m[i][j] = Rational(btb(i, j));
      m[i][r + j] = Rational(rhs(i, j));
    }
  for (int c = 0; c < r; ++c) {
    int p = c;
    while (p < r && m[p][c] == 0) ++p;
    if (p == r) return false;
    std::swap(m[p], m[c]);
    for (int i = 0; i < r; ++i) {
      if (i == c || m[i][c] == 0) continue;
      const Rational f = m[i][c] / m[c][c];
      for (int j = 0; j < 2 * r; ++j) m[i][j] -= f * m[c][j];
    }
  }
  IntMatrix cmat(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      const Rational v = m[i][r + j] / m[i][i];
      if (denominator(v) != 1) return false;
      cmat(i, j) = numerator(v);
    }
  return b * cmat == ab;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: acceptance <toralperturb> <configs dir> <work dir>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path configs = argv[2];
  const fs::path work = argv[3];
  fs::remove_all(work);
  fs::create_directories(work);

  const ToralAutomorphism cat(kCat);
  const SmoothMap cat_map = SmoothMap::automorphism(cat);
  const Vec nu_s = cat.stable_basis().col(0);
  const Vec nu_u = cat.unstable_basis().col(0);

  criterion(1, "span condition, regular case", 1.0, [&] {
    RandomStream rng(101, 0);
    const auto spec = single(Vec{{1.0, 0.0}});
    int hits = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto r = compute_n0(cat_map, spec, random_point(2, rng), 8);
      hits += r.n0 && *r.n0 == 2;
    }
    return Outcome{hits == 1000, std::to_string(hits) + "/1000 points with n0 = 2"};
  });

  criterion(2, "span condition, degenerate case", 5.0, [&] {
    RandomStream rng(102, 0);
    const auto spec = single(nu_u);
    int inf = 0;
    for (int i = 0; i < 1000; ++i) inf += !compute_n0(cat_map, spec, random_point(2, rng), 50).n0.has_value();
    ReachabilityParams p;
    p.k_cap = 50;
    const auto s = estimate_S(cat_map, spec, 32, p, RandomStream(102, 1));
    return Outcome{inf == 1000 && s.flagged_count() == s.cell_count(),
                   std::to_string(inf) + "/1000 points with n0 = INFINITY; " + std::to_string(s.flagged_count()) +
                       "/1024 cells in S"};
  });

  criterion(3, "Vandermonde property", 10.0, [&] {
    RandomStream rng(103, 0);
    int full = 0, deficient = 0, total = 0, agree = 0;
    for (int n : {3, 4}) {
      for (int t = 0; t < 100; ++t) {
        const ToralAutomorphism a(oracle::random_hyperbolic(rng, n));
        const SmoothMap f = SmoothMap::automorphism(a);
        Vec z(n);
        do {
          for (auto& c : z) c = rng.uniform(-1, 1);
          z.normalize();
        } while (eigen_coordinates(a, z).cwiseAbs().minCoeff() <= 1e-3);
        Vec s(a.stable_basis().cols());
        for (auto& c : s) c = rng.uniform(-1, 1);
        const Vec inside = a.stable_basis() * s;

        const Vec cases[2] = {z, inside};
        for (int c = 0; c < 2; ++c) {
          const Vec& v = cases[c];
          const int lib = numerical_rank(span_vectors(f, single(v), random_point(n, rng), n), 1e-9);
          Mat krylov(n, n);
          krylov.col(0) = v;
          for (int j = 1; j < n; ++j) krylov.col(j) = a.real_matrix() * krylov.col(j - 1);
          agree += lib == oracle::svd_rank(krylov);
          if (c == 0) full += lib == n;
          else deficient += lib < n;
        }
        ++total;
      }
    }
    return Outcome{full == total && deficient == total && agree == 2 * total,
                   std::to_string(full) + "/" + std::to_string(total) + " full rank, " + std::to_string(deficient) +
                       "/" + std::to_string(total) + " deficient inside E^s, oracle agreement " +
                       std::to_string(agree) + "/" + std::to_string(2 * total)};
  });

  criterion(4, "Hancock consistency", 5.0, [&] {
    const auto none = invariant_subgroups(cat, 12);
    const ToralAutomorphism block(kBlock);
    const auto groups = invariant_subgroups(block, 1);
    int exact = 0;
    for (const auto& g : groups) exact += exact_invariance(kBlock, g);
    return Outcome{none.empty() && groups.size() >= 2 && exact == static_cast<int>(groups.size()),
                   "cat map: " + std::to_string(none.size()) + " subgroups up to power 12; block: " +
                       std::to_string(groups.size()) + " at power 1, " + std::to_string(exact) +
                       " with integer C, A B = B C"};
  });

  // 5, 6 and 11 share CLI runs
  auto simulate = [&](const std::string& config, const std::string& dir, const std::string& extra) {
    return run_cli(cli, "simulate --config \"" + (configs / config).string() + "\" --out \"" + (work / dir).string() +
                            "\" " + extra);
  };
  auto diagnostics = [&](const std::string& dir) {
    return nlohmann::json::parse(slurp(work / dir / "diagnostics.json"));
  };
  double slope5 = NAN;

  criterion(5, "Lebesgue invariance", 60.0, [&] {
    if (simulate("cat_regular.json", "regular_1", "") != 0) return Outcome{false, "simulate failed"};
    const auto d = diagnostics("regular_1");
    const double tv = d["tv_to_uniform"], slope = d["ac_slope"];
    slope5 = slope;
    const std::string verdict = d["verdict"];
    return Outcome{tv < 0.05 && std::abs(slope) < 0.3 && verdict == "ac",
                   "tv " + std::to_string(tv) + ", ac_slope " + std::to_string(slope) + ", verdict " + verdict};
  });

  criterion(6, "singularity contrast", 60.0, [&] {
    if (simulate("cat_stable.json", "stable_1", "") != 0) return Outcome{false, "simulate failed"};
    const auto d = diagnostics("stable_1");
    const double slope = d["ac_slope"], occ = d["occupancy"];
    const std::string verdict = d["verdict"];
    const bool flagged = slope > 0.5 || occ < 0.9;
    return Outcome{flagged && slope - slope5 > 0.3,
                   "ac_slope " + std::to_string(slope) + ", occupancy " + std::to_string(occ) + ", verdict " +
                       verdict + ", slope gap " + std::to_string(slope - slope5)};
  });

  criterion(7, "openness", 5.0, [&] {
    const SmoothMap f =
        SmoothMap::composed(kCat, {TrigTerm{Eigen::Vector2i(1, 0), Vec{{0.0, 0.02}}, 0.0}});
    const RankKDiskSpec spec(
        {VectorField::trig(Vec{{1.0, 0.2}}, {TrigTerm{Eigen::Vector2i(0, 1), Vec{{0.0, 0.3}}, 0.2}})}, {0.05});
    RandomStream rng(107, 0);
    int bases = 0, ok = 0, tried = 0;
    while (bases < 100 && tried < 10000) {
      ++tried;
      const TorusPoint x = random_point(2, rng);
      const auto r = compute_n0(f, spec, x, 8);
      if (!r.n0 || *r.n0 != 2) continue;
      ++bases;
      for (int k = 0; k < 20; ++k) {
        const double th = rng.uniform(0, 2 * M_PI);
        const auto y = wrap(x.coords() + 1e-3 * Vec{{std::cos(th), std::sin(th)}});
        const auto ry = compute_n0(f, spec, y, 8);
        ok += ry.n0 && *ry.n0 <= 2;
      }
    }
    return Outcome{bases == 100 && ok == 2000,
                   std::to_string(bases) + " base points, " + std::to_string(ok) + "/2000 perturbed with n0 <= 2"};
  });

  criterion(8, "coincidence detection", 5.0, [&] {
    const auto stable = stable_foliation(cat);
    const RandomStream rng(108, 0);
    const bool on = detect_coincidence(VectorField::constant(nu_s), stable, {}, rng).detected;
    const bool off = detect_coincidence(VectorField::constant(Vec{{1.0, 0.0}}), stable, {}, rng).detected;
    const ToralAutomorphism block(kBlock);
    const Vec s2 = nu_s;
    const Vec z{{1.0, 2.0, s2[0], s2[1]}};
    HypothesesParams p;
    p.max_power = 1;
    const auto h = theorem_hypotheses(block, single(z), p, rng);
    const auto leaves = maximal_foliations(block, h.search);
    bool block_hit = false;
    for (std::size_t i = 1; i < h.foliations.size(); ++i)
      if (h.foliations[i].coincides && leaves[i - 1].contains(Vec(Vec::Unit(4, 0)), 1e-9) &&
          leaves[i - 1].contains(Vec(Vec::Unit(4, 1)), 1e-9))
        block_hit = true;
    return Outcome{on && !off && block_hit, std::string("nu_s ") + (on ? "detected" : "missed") + ", (1,0) " +
                                               (off ? "detected" : "clear") + ", block F_G " +
                                               (block_hit ? "detected" : "missed")};
  });

  criterion(9, "genericity probe", 30.0, [&] {
    const auto r = genericity_probe(VectorField::constant(nu_s), cat, GenericityParams{}, RandomStream(109, 0));
    int full = 0;
    for (const auto& t : r.trials) full += t.finite_fraction == 1.0;
    return Outcome{full >= 19, std::to_string(full) + "/20 trials with finite n0 at all 100 points"};
  });

  criterion(10, "rank-k nondegeneracy", 10.0, [&] {
    const RankKDiskSpec spec({VectorField::constant(Vec{{1.0, 0.0}}), VectorField::constant(Vec{{0.0, 1.0}})},
                             {0.1, 0.1});
    RandomStream rng(110, 0);
    int ones = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto r = compute_n0(cat_map, spec, random_point(2, rng), 8);
      ones += r.n0 && *r.n0 == 1;
    }
    const auto e = evolve(PerturbationKernel{cat_map, spec}, ParticleEnsemble::uniform(2, 100000, 110), 1);
    const auto h = histogram_of(e, 8);
    const double expected = static_cast<double>(h.total()) / h.cell_count();
    double chi2 = 0;
    for (auto c : h.counts()) chi2 += (c - expected) * (c - expected) / expected;
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(63.0), chi2));
    return Outcome{ones == 1000 && p > 0.001,
                   std::to_string(ones) + "/1000 points with n0 = 1, 8x8 chi-square p = " + std::to_string(p)};
  });

  criterion(11, "determinism", 0, [&] {
    bool ok = simulate("cat_regular.json", "regular_2", "") == 0;
    ok = simulate("cat_stable.json", "stable_2", "") == 0 && ok;
    ok = simulate("cat_regular.json", "regular_w", "--workers 3") == 0 && ok;
    int same = 0, files = 0;
    for (const auto& [a, b] : {std::pair{"regular_1", "regular_2"}, std::pair{"stable_1", "stable_2"},
                               std::pair{"regular_1", "regular_w"}}) {
      for (const auto& entry : fs::directory_iterator(work / a)) {
        ++files;
        const fs::path other = work / b / entry.path().filename();
        same += fs::exists(other) && slurp(entry.path()) == slurp(other);
      }
    }
    return Outcome{ok && files > 0 && same == files,
                   std::to_string(same) + "/" + std::to_string(files) + " output files byte-identical across runs"};
  });

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}
