#pragma once

#include <optional>
#include <string>
#include <vector>

#include "toral/automorphism.hpp"
#include "toral/random.hpp"
#include "toral/span_chain.hpp"
#include "toral/vector_field.hpp"

namespace toral {

/// What a negative answer certifies; a numerical detector cannot decide
/// exact open-arc containment.
inline constexpr const char* kCoincidenceQualification = "no coincidence at tube width w over length L";

struct CoincidenceParams {
  double L_min = 0.1;
  double w = 1e-8;
  int seeds = 200;
  /// Constant fields are decided by exact membership in P unless disabled.
  bool exact_constant = true;
};

struct CoincidenceWitness {
  TorusPoint seed;
  double arclength = 0.0;
  /// Largest distance from the starting leaf along the arc.
  double drift = 0.0;
};

struct CoincidenceReport {
  std::string label;
  bool detected = false;
  /// "membership" (constant-field shortcut) or "flow".
  std::string method;
  std::vector<CoincidenceWitness> witnesses;
  CoincidenceParams params;
  /// Smallest sup drift over all seeds (L_min * |P-perp zeta| for the shortcut).
  double min_drift = 0.0;
  std::string qualification = kCoincidenceQualification;
};

/// Flows V for arclength L_min from `seeds` uniform points and records the
/// seeds whose orthogonal displacement from P stays within w. Constant fields
/// short-circuit: detected iff zeta lies in P within tol.rank.
/// Requires 0 < L_min <= 0.5, 0 < w <= 1e-4, seeds >= 1.
CoincidenceReport detect_coincidence(const VectorField& v, const LinearFoliation& f, const CoincidenceParams& params,
                                     const RandomStream& rng, Tolerances tol = {});

struct FoliationVerdict {
  std::string label;
  int leaf_dim = 0;
  /// One report per field of the disk family.
  std::vector<CoincidenceReport> fields;
  /// The family coincides only when every field does.
  bool coincides = false;
};

struct SpanCertificate {
  TorusPoint point;
  /// "n0" or "n_est".
  std::string method;
  int value = 0;
};

struct HypothesesParams {
  int max_power = 12;
  CoincidenceParams coincidence;
  ReachabilityParams reachability;
  /// Random points tried for a certificate after the origin.
  int certificate_points = 64;
};

struct HypothesesReport {
  std::vector<FoliationVerdict> foliations;
  /// F_G whose leaves fill R^n, or that are contained in a larger F_G.
  std::vector<std::string> skipped;
  SubgroupSearch search;
  /// A point of T^n \ S, when one was found.
  std::optional<SpanCertificate> certificate;
  bool satisfied = false;
};

/// Checks the disk family against the stable foliation and every F_G of a
/// subset-maximal leaf space, then looks for a point with finite n0 (origin
/// first, then estimate_n there, then random points). Requires A hyperbolic.
HypothesesReport theorem_hypotheses(const ToralAutomorphism& a, const RankKDiskSpec& spec,
                                    const HypothesesParams& params, const RandomStream& rng, Tolerances tol = {});

/// The F_G foliations kept by theorem_hypotheses, with the skipped labels.
std::vector<LinearFoliation> maximal_foliations(const ToralAutomorphism& a, const SubgroupSearch& search,
                                                std::vector<std::string>* skipped = nullptr);

struct GenericityParams {
  double delta = 0.01;
  int trials = 20;
  int sample_points = 100;
  /// 0 selects 4n.
  int k_cap = 0;
  int max_power = 12;
  CoincidenceParams coincidence;
};

struct GenericityTrial {
  double finite_fraction = 0.0;
  bool clear = false;
};

struct GenericityReport {
  GenericityParams params;
  /// The unperturbed field on the same sample points.
  GenericityTrial baseline;
  std::vector<GenericityTrial> trials;
  /// Fraction of trials with finite n0 at every sample point.
  double full_span_fraction = 0.0;
  /// Fraction of trials clearing every coincidence check.
  double clear_fraction = 0.0;
};

/// Random trigonometric field with all frequencies |kappa|_inf <= 2 and
/// coefficient norms summing to 1.
std::vector<TrigTerm> random_trig_terms(int n, RandomStream& rng);

/// Adds delta times a random trigonometric field to the raw field of v.
VectorField perturb_field(const VectorField& v, double delta, RandomStream& rng);

/// Empirical genericity: per trial, V' = perturb_field(V, delta); reports
/// the fraction of sample points with finite n0 under V' and whether V'
/// clears the stable foliation and every maximal F_G. Requires 0 < delta <= 0.1.
GenericityReport genericity_probe(const VectorField& v, const ToralAutomorphism& a, const GenericityParams& params,
                                  const RandomStream& rng, int workers = 1, Tolerances tol = {});

}  // namespace toral
