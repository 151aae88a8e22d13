#include "toral/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "toral/errors.hpp"
#include "toral/parallel.hpp"

namespace toral {

namespace {

constexpr double kMaxStep = 1e-3;
constexpr double kLeafContainmentTol = 1e-8;

void check_params(const CoincidenceParams& p) {
  if (!(p.L_min > 0.0 && p.L_min <= 0.5)) throw PreconditionError("detect_coincidence: need 0 < L_min <= 0.5");
  if (!(p.w > 0.0 && p.w <= 1e-4)) throw PreconditionError("detect_coincidence: need 0 < w <= 1e-4");
  if (p.seeds < 1) throw PreconditionError("detect_coincidence: need at least one seed");
}

// sup over the arc of the distance from the leaf through x0
double flow_drift(const VectorField& v, const LinearFoliation& f, const Vec& x0, double length) {
  const long steps = static_cast<long>(std::ceil(length / kMaxStep));
  const double h = length / static_cast<double>(steps);
  Vec x = x0;
  double sup = 0.0;
  for (long s = 0; s < steps; ++s) {
    const Vec k1 = v(x);
    const Vec k2 = v(Vec(x + 0.5 * h * k1));
    const Vec k3 = v(Vec(x + 0.5 * h * k2));
    const Vec k4 = v(Vec(x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    sup = std::max(sup, f.orthogonal_component(Vec(x - x0)).norm());
  }
  return sup;
}

TorusPoint uniform_point(int n, RandomStream& rng) {
  Vec c(n);
  for (auto& x : c) x = rng.uniform();
  return wrap(c);
}

std::string subgroup_label(std::size_t index, const InvariantSubgroup& g) {
  return "F_G#" + std::to_string(index + 1) + " (power " + std::to_string(g.power) + ", rank " +
         std::to_string(g.rank()) + ")";
}

bool clears_all(const VectorField& v, const std::vector<LinearFoliation>& foliations, const CoincidenceParams& params,
                const RandomStream& rng, Tolerances tol) {
  for (std::size_t i = 0; i < foliations.size(); ++i)
    if (detect_coincidence(v, foliations[i], params, rng.split(i), tol).detected) return false;
  return true;
}

}  // namespace

CoincidenceReport detect_coincidence(const VectorField& v, const LinearFoliation& f, const CoincidenceParams& params,
                                     const RandomStream& rng, Tolerances tol) {
  check_params(params);
  if (v.dim() != f.ambient_dim()) throw InvalidInput("detect_coincidence: dimension mismatch");
  CoincidenceReport report;
  report.label = f.label();
  report.params = params;

  if (v.is_constant() && params.exact_constant) {
    report.method = "membership";
    const Vec& z = v.base();
    report.min_drift = params.L_min * f.orthogonal_component(z).norm();
    report.detected = f.contains(z, tol.rank);
    if (report.detected) report.witnesses.push_back({wrap(Vec::Zero(v.dim())), params.L_min, report.min_drift});
    return report;
  }

  report.method = "flow";
  RandomStream draw = rng;
  report.min_drift = std::numeric_limits<double>::infinity();
  for (int s = 0; s < params.seeds; ++s) {
    const TorusPoint x = uniform_point(v.dim(), draw);
    const double drift = flow_drift(v, f, x.coords(), params.L_min);
    report.min_drift = std::min(report.min_drift, drift);
    if (drift <= params.w) report.witnesses.push_back({x, params.L_min, drift});
  }
  report.detected = !report.witnesses.empty();
  return report;
}

std::vector<LinearFoliation> maximal_foliations(const ToralAutomorphism& a, const SubgroupSearch& search,
                                                std::vector<std::string>* skipped) {
  std::vector<LinearFoliation> all;
  for (std::size_t i = 0; i < search.subgroups.size(); ++i) {
    const std::string label = subgroup_label(i, search.subgroups[i]);
    try {
      all.push_back(foliation_fg(a, search.subgroups[i], label));
    } catch (const DegenerateFoliation&) {
      if (skipped) skipped->push_back(label + ": degenerate");
    }
  }
  std::vector<LinearFoliation> kept;
  for (std::size_t i = 0; i < all.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < all.size() && !dominated; ++j) {
      if (i == j || !all[j].contains(all[i], kLeafContainmentTol)) continue;
      // equal leaf spaces keep the first occurrence
      dominated = all[j].dim() > all[i].dim() || j < i;
    }
    if (dominated) {
      if (skipped) skipped->push_back(all[i].label() + ": not maximal");
    } else {
      kept.push_back(all[i]);
    }
  }
  return kept;
}

HypothesesReport theorem_hypotheses(const ToralAutomorphism& a, const RankKDiskSpec& spec,
                                    const HypothesesParams& params, const RandomStream& rng, Tolerances tol) {
  if (!a.hyperbolic()) throw PreconditionError("theorem_hypotheses: matrix is not hyperbolic");
  if (spec.dim() != a.dim()) throw InvalidInput("theorem_hypotheses: dimension mismatch");
  HypothesesReport report;
  report.search = search_invariant_subgroups(a, params.max_power);

  std::vector<LinearFoliation> foliations{stable_foliation(a)};
  for (auto& f : maximal_foliations(a, report.search, &report.skipped)) foliations.push_back(std::move(f));

  const RandomStream coincidence_rng = rng.split(0);
  bool any = false;
  for (std::size_t i = 0; i < foliations.size(); ++i) {
    FoliationVerdict verdict;
    verdict.label = foliations[i].label();
    verdict.leaf_dim = foliations[i].dim();
    verdict.coincides = true;
    for (int j = 0; j < spec.rank(); ++j) {
      verdict.fields.push_back(detect_coincidence(spec.fields()[j], foliations[i], params.coincidence,
                                                  coincidence_rng.split(i).split(static_cast<std::uint64_t>(j)), tol));
      verdict.coincides = verdict.coincides && verdict.fields.back().detected;
    }
    any = any || verdict.coincides;
    report.foliations.push_back(std::move(verdict));
  }

  const SmoothMap f = SmoothMap::automorphism(a);
  const int n = a.dim();
  const int k_cap = resolve_k_cap(params.reachability.k_cap, n);
  const TorusPoint origin = wrap(Vec::Zero(n));
  if (const auto r = compute_n0(f, spec, origin, k_cap, tol); r.n0) {
    report.certificate = SpanCertificate{origin, "n0", *r.n0};
  } else if (const auto e = estimate_n(f, spec, origin, params.reachability, rng.split(1), tol); e.n_est) {
    report.certificate = SpanCertificate{origin, "n_est", *e.n_est};
  } else {
    RandomStream draw = rng.split(2);
    for (int p = 0; p < params.certificate_points; ++p) {
      const TorusPoint x = uniform_point(n, draw);
      if (const auto rx = compute_n0(f, spec, x, k_cap, tol); rx.n0) {
        report.certificate = SpanCertificate{x, "n0", *rx.n0};
        break;
      }
    }
  }
  report.satisfied = !any && report.certificate.has_value();
  return report;
}

std::vector<TrigTerm> random_trig_terms(int n, RandomStream& rng) {
  std::vector<TrigTerm> terms;
  std::vector<int> k(n, -2);
  for (;;) {
    // one of each +-kappa pair; the phase covers the other sign
    const auto lead = std::find_if(k.begin(), k.end(), [](int c) { return c != 0; });
    if (lead != k.end() && *lead > 0) {
      TrigTerm t;
      t.freq = Eigen::Map<const Eigen::VectorXi>(k.data(), n);
      t.coeff = Vec(n);
      for (auto& c : t.coeff) c = rng.uniform(-1.0, 1.0);
      t.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      terms.push_back(std::move(t));
    }
    int i = n - 1;
    while (i >= 0 && ++k[i] > 2) k[i--] = -2;
    if (i < 0) break;
  }
  // kappa = 0 gives a constant term
  TrigTerm zero{Eigen::VectorXi::Zero(n), Vec(n), std::numbers::pi / 2};
  for (auto& c : zero.coeff) c = rng.uniform(-1.0, 1.0);
  terms.push_back(std::move(zero));
  double total = 0.0;
  for (const auto& t : terms) total += t.coeff.norm();
  for (auto& t : terms) t.coeff /= total;
  return terms;
}

VectorField perturb_field(const VectorField& v, double delta, RandomStream& rng) {
  auto extra = random_trig_terms(v.dim(), rng);
  Vec base = v.base();
  std::vector<TrigTerm> terms = v.terms();
  for (auto& t : extra) {
    t.coeff *= delta;
    if (t.freq.isZero()) base += t.coeff * std::sin(t.phase);
    else terms.push_back(std::move(t));
  }
  return VectorField::trig(std::move(base), std::move(terms));
}

GenericityReport genericity_probe(const VectorField& v, const ToralAutomorphism& a, const GenericityParams& params,
                                  const RandomStream& rng, int workers, Tolerances tol) {
  if (!(params.delta > 0.0 && params.delta <= 0.1)) throw PreconditionError("genericity_probe: need 0 < delta <= 0.1");
  if (params.trials < 1 || params.sample_points < 1)
    throw PreconditionError("genericity_probe: trials and sample_points must be positive");
  if (!a.hyperbolic()) throw PreconditionError("genericity_probe: matrix is not hyperbolic");
  if (v.dim() != a.dim()) throw InvalidInput("genericity_probe: dimension mismatch");
  check_params(params.coincidence);
  const int n = a.dim();
  const SmoothMap f = SmoothMap::automorphism(a);
  const int k_cap = resolve_k_cap(params.k_cap, n);

  std::vector<LinearFoliation> foliations{stable_foliation(a)};
  for (auto& g : maximal_foliations(a, search_invariant_subgroups(a, params.max_power))) foliations.push_back(g);

  std::vector<TorusPoint> points;
  RandomStream draw = rng.split(0);
  for (int p = 0; p < params.sample_points; ++p) points.push_back(uniform_point(n, draw));

  auto evaluate = [&](const VectorField& field, const RandomStream& coincidence_rng) {
    const RankKDiskSpec spec({field}, {1.0}, tol);
    int finite = 0;
    for (const auto& x : points)
      if (compute_n0(f, spec, x, k_cap, tol).n0) ++finite;
    return GenericityTrial{static_cast<double>(finite) / points.size(),
                           clears_all(field, foliations, params.coincidence, coincidence_rng, tol)};
  };

  GenericityReport report;
  report.params = params;
  report.params.k_cap = k_cap;
  report.baseline = evaluate(v, rng.split(3));
  report.trials.resize(params.trials);
  parallel_for(report.trials.size(), workers, [&](std::size_t t) {
    RandomStream field_rng = rng.split(1).split(t);
    report.trials[t] = evaluate(perturb_field(v, params.delta, field_rng), rng.split(2).split(t));
  });
  int full = 0, clear = 0;
  for (const auto& t : report.trials) {
    full += t.finite_fraction == 1.0;
    clear += t.clear;
  }
  report.full_span_fraction = static_cast<double>(full) / params.trials;
  report.clear_fraction = static_cast<double>(clear) / params.trials;
  return report;
}

}  // namespace toral
