#include "toral/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "toral/density.hpp"
#include "toral/parallel.hpp"

namespace toral {

namespace {

using nlohmann::json;

// Stream ids per analysis, so subcommands never share draws.
enum StreamId : std::uint64_t { kStreamS = 1, kStreamClosure, kStreamSim, kStreamCoincidence, kStreamHypotheses, kStreamGeneric };

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

int get_int(const json& obj, const char* key, int def, const std::string& where) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

std::int64_t get_int64(const json& obj, const char* key, std::int64_t def, const std::string& where) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

double get_double(const json& obj, const char* key, double def, const std::string& where) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

bool get_bool(const json& obj, const char* key, bool def, const std::string& where) {
  if (!obj.contains(key)) return def;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return v.get<bool>();
}

Vec get_vec(const json& v, int n, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != n)
    throw ConfigError(where + ": expected an array of " + std::to_string(n) + " numbers");
  Vec out(n);
  for (int i = 0; i < n; ++i) {
    if (!v[i].is_number()) throw ConfigError(where + ": expected numbers");
    out[i] = v[i].get<double>();
  }
  if (!out.allFinite()) throw ConfigError(where + ": non-finite value");
  return out;
}

void require_positive(int value, const std::string& what) {
  if (value < 1) throw ConfigError(what + " must be positive");
}

IntMatrix parse_matrix(const json& v) {
  std::string text;
  if (v.is_string()) {
    text = v.get<std::string>();
  } else if (v.is_array()) {
    for (std::size_t r = 0; r < v.size(); ++r) {
      if (!v[r].is_array()) throw ConfigError("matrix: expected a row string or an array of rows");
      if (r) text += ';';
      for (std::size_t c = 0; c < v[r].size(); ++c) {
        if (!v[r][c].is_number_integer()) throw ConfigError("matrix: entries must be integers");
        if (c) text += ',';
        text += std::to_string(v[r][c].get<long long>());
      }
    }
  } else {
    throw ConfigError("matrix: expected a row string or an array of rows");
  }
  try {
    IntMatrix m = IntMatrix::parse(text);
    if (!m.square()) throw ConfigError("matrix: must be square");
    return m;
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("matrix: ") + e.what());
  }
}

TrigTerm parse_term(const json& t, int n, const std::string& where) {
  allow_keys(t, {"freq", "coeff", "phase"}, where);
  if (!t.contains("freq") || !t.contains("coeff")) throw ConfigError(where + ": needs freq and coeff");
  const auto& f = t.at("freq");
  if (!f.is_array() || static_cast<int>(f.size()) != n) throw ConfigError(where + ".freq: expected " + std::to_string(n) + " integers");
  TrigTerm term;
  term.freq.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!f[i].is_number_integer()) throw ConfigError(where + ".freq: expected integers");
    term.freq[i] = f[i].get<int>();
  }
  term.coeff = get_vec(t.at("coeff"), n, where + ".coeff");
  term.phase = get_double(t, "phase", 0.0, where);
  return term;
}

std::vector<TrigTerm> parse_terms(const json& v, int n, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array of terms");
  std::vector<TrigTerm> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_term(v[i], n, where + "[" + std::to_string(i) + "]"));
  return out;
}

VectorField parse_field(const json& f, int n, const IntMatrix& matrix, Tolerances tol, const std::string& where) {
  if (!f.is_object() || !f.contains("type") || !f.at("type").is_string())
    throw ConfigError(where + ": needs a string 'type'");
  const std::string type = f.at("type").get<std::string>();
  try {
    if (type == "constant") {
      allow_keys(f, {"type", "direction"}, where);
      if (!f.contains("direction")) throw ConfigError(where + ": needs 'direction'");
      return VectorField::constant(get_vec(f.at("direction"), n, where + ".direction"));
    }
    if (type == "trig") {
      allow_keys(f, {"type", "base", "terms"}, where);
      if (!f.contains("base")) throw ConfigError(where + ": needs 'base'");
      return VectorField::trig(get_vec(f.at("base"), n, where + ".base"),
                               f.contains("terms") ? parse_terms(f.at("terms"), n, where + ".terms") : std::vector<TrigTerm>{});
    }
    if (type == "eigenvector") {
      allow_keys(f, {"type", "which", "index"}, where);
      const std::string which = f.value("which", std::string("stable"));
      if (which != "stable" && which != "unstable") throw ConfigError(where + ".which: 'stable' or 'unstable'");
      const int index = get_int(f, "index", 0, where);
      const ToralAutomorphism a(matrix, tol);
      const Mat& basis = which == "stable" ? a.stable_basis() : a.unstable_basis();
      if (index < 0 || index >= basis.cols())
        throw ConfigError(where + ".index: E^" + std::string(which == "stable" ? "s" : "u") + " has dimension " +
                          std::to_string(basis.cols()));
      return VectorField::constant(basis.col(index));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const PreconditionError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown field type '" + type + "'");
}

// ---------------------------------------------------------------- output

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json bigint_json(const BigInt& x) {
  if (x >= std::numeric_limits<long long>::min() && x <= std::numeric_limits<long long>::max())
    return static_cast<long long>(x);
  return x.str();
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

json columns_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(vec_json(m.col(j)));
  return out;
}

json intvec_json(const IntVector& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(bigint_json(x));
  return out;
}

json poly_json(const IntPolynomial& p) {
  // highest degree first
  json out = json::array();
  for (int i = p.degree(); i >= 0; --i) out.push_back(bigint_json(p.coeff(i)));
  return out;
}

json matrix_json(const IntMatrix& m) {
  json out = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(bigint_json(m(r, c)));
    out.push_back(row);
  }
  return out;
}

json header_json(const ExperimentConfig& c) {
  return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}}, {"config_hash", c.hash}};
}

OutputFile json_file(std::string name, json body, const ExperimentConfig& c) {
  json out = header_json(c);
  out.update(body);
  return {std::move(name), out.dump(2) + "\n"};
}

std::string csv_header(const ExperimentConfig& c, const std::string& what) {
  return std::string("# ") + kToolName + " " + kToolVersion + " config_hash=" + c.hash + " " + what + "\n";
}

std::string coord_columns(int n) {
  std::string s;
  for (int i = 1; i <= n; ++i) s += ",x" + std::to_string(i);
  return s;
}

std::string coord_values(const TorusPoint& p) {
  std::string s;
  for (int i = 0; i < p.dim(); ++i) s += "," + num(p[i]);
  return s;
}

json coincidence_json(const CoincidenceReport& r) {
  json witnesses = json::array();
  for (const auto& w : r.witnesses)
    witnesses.push_back({{"seed", vec_json(w.seed.coords())}, {"arclength", w.arclength}, {"drift", w.drift}});
  return {{"label", r.label},
          {"detected", r.detected},
          {"method", r.method},
          {"min_drift", r.min_drift},
          {"witness_count", r.witnesses.size()},
          {"witnesses", witnesses},
          {"L_min", r.params.L_min},
          {"w", r.params.w},
          {"seeds", r.params.seeds},
          {"qualification", r.qualification}};
}

json search_json(const SubgroupSearch& s) {
  json groups = json::array();
  for (const auto& g : s.subgroups) {
    json basis = json::array();
    for (const auto& v : g.lattice_basis) basis.push_back(intvec_json(v));
    groups.push_back({{"power", g.power}, {"rank", g.rank()}, {"lattice_basis", basis}});
  }
  return {{"invariant_subgroups", groups},
          {"subgroup_search",
           {{"requested_power", s.requested_power}, {"checked_power", s.checked_power}, {"truncation", s.truncation}}}};
}

json reachability_json(const ReachabilityParams& p) {
  return {{"K", p.K}, {"M", p.M}, {"M_max", p.M_max}, {"k_cap", p.k_cap}};
}

std::vector<LinearFoliation> all_foliations(const ToralAutomorphism& a, int max_power, std::vector<std::string>* skipped) {
  std::vector<LinearFoliation> out{stable_foliation(a)};
  for (auto& f : maximal_foliations(a, search_invariant_subgroups(a, max_power), skipped)) out.push_back(std::move(f));
  return out;
}

// ---------------------------------------------------------------- runners

std::vector<OutputFile> run_analyze(const ExperimentConfig& c) {
  const ToralAutomorphism a(c.matrix, c.tol);
  json body;
  body["dimension"] = a.dim();
  body["matrix"] = matrix_json(c.matrix);
  body["det"] = bigint_json(a.det());
  body["char_poly"] = poly_json(a.characteristic_polynomial());
  body["char_poly_text"] = a.characteristic_polynomial().to_string();
  json factors = json::array();
  for (const auto& [p, m] : group_factors(factor_over_int(a.characteristic_polynomial())))
    factors.push_back({{"factor", poly_json(p)}, {"multiplicity", m}});
  body["factors"] = factors;
  body["irreducible"] = factors.size() == 1 && factors[0]["multiplicity"] == 1;
  json spectrum = json::array();
  for (const auto& z : a.spectrum()) spectrum.push_back({{"re", z.real()}, {"im", z.imag()}, {"modulus", std::abs(z)}});
  body["spectrum"] = spectrum;
  body["hyperbolic"] = a.hyperbolic();
  if (!a.hyperbolic()) {
    body.update(search_json(SubgroupSearch{{}, c.max_power, 0, "not hyperbolic"}));
    return {json_file("analysis.json", body, c)};
  }
  body["stable_dim"] = a.stable_basis().cols();
  body["unstable_dim"] = a.unstable_basis().cols();
  body["stable_basis"] = columns_json(a.stable_basis());
  body["unstable_basis"] = columns_json(a.unstable_basis());
  const SubgroupSearch search = search_invariant_subgroups(a, c.max_power);
  body.update(search_json(search));
  std::vector<std::string> skipped;
  json foliations = json::array();
  foliations.push_back({{"label", "stable"}, {"leaf_dim", a.stable_basis().cols()}, {"leaf_basis", columns_json(a.stable_basis())}});
  for (const auto& f : maximal_foliations(a, search, &skipped))
    foliations.push_back({{"label", f.label()}, {"leaf_dim", f.dim()}, {"leaf_basis", columns_json(f.leaf_basis())}});
  body["foliations"] = foliations;
  body["skipped_foliations"] = skipped;
  return {json_file("analysis.json", body, c)};
}

std::vector<OutputFile> run_n0(const ExperimentConfig& c, int workers) {
  const SmoothMap f = c.map();
  const RankKDiskSpec spec = c.disk();
  const int k_cap = resolve_k_cap(c.k_cap, c.dimension);
  const GridSetEstimate grid = GridSetEstimate::empty(c.dimension, c.grid.resolution);
  std::vector<std::optional<int>> n0(grid.cell_count());
  parallel_for(n0.size(), workers,
               [&](std::size_t cell) { n0[cell] = compute_n0(f, spec, grid.center(cell), k_cap, c.tol).n0; });

  std::string csv = csv_header(c, "n0 grid (-1 = infinity)") + "cell" + coord_columns(c.dimension) + ",n0\n";
  std::map<int, std::size_t> histogram;
  std::size_t finite = 0;
  for (std::size_t cell = 0; cell < n0.size(); ++cell) {
    csv += std::to_string(cell) + coord_values(grid.center(cell)) + "," + std::to_string(encode_count(n0[cell])) + "\n";
    ++histogram[encode_count(n0[cell])];
    finite += n0[cell].has_value();
  }
  json counts = json::object();
  for (const auto& [v, m] : histogram) counts[v == kInfinity ? "inf" : std::to_string(v)] = m;
  json body{{"resolution", c.grid.resolution},
            {"k_cap", k_cap},
            {"cells", n0.size()},
            {"counts", counts},
            {"finite_fraction", static_cast<double>(finite) / n0.size()}};
  return {{"n0_grid.csv", csv}, json_file("n0_summary.json", body, c)};
}

std::string grid_csv(const ExperimentConfig& c, const GridSetEstimate& g, const std::string& what) {
  const bool with_n = !g.n_est.empty();
  std::string csv = csv_header(c, what) + "cell" + coord_columns(g.dim) + (with_n ? ",n_est" : "") + ",in_" + g.kind + "\n";
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    csv += std::to_string(cell) + coord_values(g.center(cell));
    if (with_n) csv += "," + std::to_string(g.n_est[cell]);
    csv += "," + std::to_string(static_cast<int>(g.flagged[cell])) + "\n";
  }
  return csv;
}

json grid_summary(const GridSetEstimate& g) {
  return {{"kind", g.kind},
          {"flagged", g.flagged_count()},
          {"cells", g.cell_count()},
          {"flagged_fraction", static_cast<double>(g.flagged_count()) / g.cell_count()}};
}

std::vector<OutputFile> run_estimate_s(const ExperimentConfig& c, int workers) {
  const SmoothMap f = c.map();
  const RankKDiskSpec spec = c.disk();
  ReachabilityParams params = c.reachability;
  params.k_cap = c.k_cap;
  const GridSetEstimate s =
      estimate_S(f, spec, c.grid.resolution, params, RandomStream(c.seed, kStreamS), workers, c.tol);
  std::vector<OutputFile> files{{"S_grid.csv", grid_csv(c, s, "deficient set S (n_est -1 = infinity)")}};
  json body{{"resolution", c.grid.resolution}, {"reachability", reachability_json(s.params)}, {"S", grid_summary(s)}};
  if (c.grid.core_iterations > 0) {
    const auto core = invariant_core(s, f, c.grid.core_iterations, c.grid.core_samples, workers);
    files.push_back({"S_in_grid.csv", grid_csv(c, core, "invariant core S_in")});
    json summary = grid_summary(core);
    summary["iterations"] = core.iterations;
    body["S_in"] = summary;
  }
  if (c.grid.closure_rounds > 0) {
    const auto closure =
        kernel_closure(s, f, spec, c.grid.closure_rounds, RandomStream(c.seed, kStreamClosure), c.grid.closure_samples, workers);
    files.push_back({"S_prime_grid.csv", grid_csv(c, closure, "kernel closure S_prime")});
    json summary = grid_summary(closure);
    summary["rounds"] = closure.rounds;
    body["S_prime"] = summary;
  }
  files.push_back(json_file("estimate_s.json", body, c));
  return files;
}

std::vector<OutputFile> run_simulate(const ExperimentConfig& c, int workers) {
  const PerturbationKernel kernel{c.map(), c.disk()};
  const TorusPoint x0 = wrap(c.simulation.x0.size() ? c.simulation.x0 : Vec(Vec::Zero(c.dimension)));
  const auto& op = c.simulation.occupation;
  const auto hs = occupation(kernel, x0, op, RandomStream(c.seed, kStreamSim), workers);
  const auto d = diagnose(hs, c.simulation.reference_resolution);

  std::vector<OutputFile> files;
  for (const auto& h : hs) {
    std::string csv = csv_header(c, "occupation histogram r=" + std::to_string(h.resolution())) + "cell" +
                      coord_columns(c.dimension) + ",count\n";
    for (std::size_t cell = 0; cell < h.cell_count(); ++cell)
      csv += std::to_string(cell) + coord_values(wrap(h.cell_center(cell))) + "," + std::to_string(h.counts()[cell]) + "\n";
    files.push_back({"histogram_r" + std::to_string(h.resolution()) + ".csv", csv});
  }
  json sup = json::array();
  for (const auto& [r, v] : d.sup_density) sup.push_back(json::array({r, v}));
  const bool lifted = op.eigen_lift && !op.multi_start && EigenLiftWalker::make(kernel, x0, c.tol).has_value();
  json body{{"tv_to_uniform", d.tv_to_uniform},
            {"occupancy", d.occupancy},
            {"sup_density", sup},
            {"ac_slope", d.ac_slope},
            {"verdict", d.verdict},
            {"reference_resolution", d.reference_resolution},
            {"samples", op.samples},
            {"burn_in", op.burn_in},
            {"multi_start", op.multi_start},
            {"x0", vec_json(x0.coords())},
            {"walker", lifted ? "eigen-lift" : "direct"}};
  if (c.simulation.particles > 0) {
    const auto e = evolve(kernel, ParticleEnsemble::uniform(c.dimension, c.simulation.particles, mix64(c.seed)),
                          c.simulation.steps, workers);
    const auto h = histogram_of(e, c.simulation.reference_resolution);
    body["ensemble"] = {{"particles", c.simulation.particles},
                        {"steps", c.simulation.steps},
                        {"resolution", h.resolution()},
                        {"tv_to_uniform", tv_to_uniform(h)},
                        {"occupancy", occupancy(h)}};
  }
  files.push_back(json_file("diagnostics.json", body, c));
  return files;
}

std::vector<OutputFile> run_detect(const ExperimentConfig& c) {
  const ToralAutomorphism a(c.matrix, c.tol);
  const RankKDiskSpec spec = c.disk();
  std::vector<std::string> skipped;
  const auto foliations = all_foliations(a, c.max_power, &skipped);
  const RandomStream rng(c.seed, kStreamCoincidence);
  json list = json::array();
  for (std::size_t i = 0; i < foliations.size(); ++i) {
    json fields = json::array();
    bool all = true;
    for (int j = 0; j < spec.rank(); ++j) {
      const auto r = detect_coincidence(spec.fields()[j], foliations[i], c.coincidence,
                                        rng.split(i).split(static_cast<std::uint64_t>(j)), c.tol);
      all = all && r.detected;
      fields.push_back(coincidence_json(r));
    }
    list.push_back({{"label", foliations[i].label()}, {"leaf_dim", foliations[i].dim()}, {"family_coincides", all}, {"fields", fields}});
  }
  json body{{"foliations", list}, {"skipped_foliations", skipped}, {"qualification", kCoincidenceQualification}};
  return {json_file("coincidence.json", body, c)};
}

std::vector<OutputFile> run_hypotheses(const ExperimentConfig& c) {
  const ToralAutomorphism a(c.matrix, c.tol);
  HypothesesParams p;
  p.max_power = c.max_power;
  p.coincidence = c.coincidence;
  p.reachability = c.reachability;
  p.reachability.k_cap = c.k_cap;
  const auto r = theorem_hypotheses(a, c.disk(), p, RandomStream(c.seed, kStreamHypotheses), c.tol);
  json list = json::array();
  for (const auto& v : r.foliations) {
    json fields = json::array();
    for (const auto& f : v.fields) fields.push_back(coincidence_json(f));
    list.push_back({{"label", v.label}, {"leaf_dim", v.leaf_dim}, {"coincides", v.coincides}, {"fields", fields}});
  }
  json body{{"foliations", list}, {"skipped_foliations", r.skipped}, {"satisfied", r.satisfied}};
  body.update(search_json(r.search));
  if (r.certificate)
    body["certificate"] = {{"point", vec_json(r.certificate->point.coords())},
                           {"method", r.certificate->method},
                           {"value", r.certificate->value}};
  else
    body["certificate"] = nullptr;
  return {json_file("hypotheses.json", body, c)};
}

std::vector<OutputFile> run_generic(const ExperimentConfig& c, int workers) {
  const ToralAutomorphism a(c.matrix, c.tol);
  if (c.fields.empty()) throw ConfigError("config has no fields");
  GenericityParams p;
  p.delta = c.genericity.delta;
  p.trials = c.genericity.trials;
  p.sample_points = c.genericity.sample_points;
  p.k_cap = c.genericity.k_cap;
  p.max_power = c.max_power;
  p.coincidence = c.coincidence;
  const auto r = genericity_probe(c.fields.front(), a, p, RandomStream(c.seed, kStreamGeneric), workers, c.tol);
  json trials = json::array();
  for (const auto& t : r.trials) trials.push_back({{"finite_fraction", t.finite_fraction}, {"clear", t.clear}});
  json body{{"delta", p.delta},
            {"trials", trials},
            {"sample_points", p.sample_points},
            {"k_cap", r.params.k_cap},
            {"baseline", {{"finite_fraction", r.baseline.finite_fraction}, {"clear", r.baseline.clear}}},
            {"full_span_fraction", r.full_span_fraction},
            {"clear_fraction", r.clear_fraction}};
  return {json_file("genericity.json", body, c)};
}

}  // namespace

SmoothMap ExperimentConfig::map() const { return SmoothMap::composed(matrix, displacement); }

RankKDiskSpec ExperimentConfig::disk() const {
  if (fields.empty()) throw ConfigError("config has no fields");
  try {
    return RankKDiskSpec(fields, epsilons, tol);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

std::string config_hash(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

ExperimentConfig parse_config(const json& j) {
  allow_keys(j, {"dimension", "matrix", "map_displacement", "fields", "epsilons", "seed", "k_cap", "reachability", "grid",
                 "simulation", "coincidence", "genericity", "tolerances", "max_power"},
             "config");
  ExperimentConfig c;
  c.hash = config_hash(j);
  if (!j.contains("matrix")) throw ConfigError("config: 'matrix' is required");
  c.matrix = parse_matrix(j.at("matrix"));
  c.dimension = get_int(j, "dimension", c.matrix.rows(), "config");
  if (c.dimension != c.matrix.rows())
    throw ConfigError("config: dimension " + std::to_string(c.dimension) + " does not match a " +
                      std::to_string(c.matrix.rows()) + "x" + std::to_string(c.matrix.cols()) + " matrix");
  const int n = c.dimension;

  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    allow_keys(t, {"rank", "geo"}, "tolerances");
    c.tol.rank = get_double(t, "rank", c.tol.rank, "tolerances");
    c.tol.geo = get_double(t, "geo", c.tol.geo, "tolerances");
    if (!(c.tol.rank > 0 && c.tol.rank < 1 && c.tol.geo > 0 && c.tol.geo < 1))
      throw ConfigError("tolerances must lie in (0, 1)");
  }
  if (j.contains("seed")) {
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
      throw ConfigError("config.seed: expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.k_cap = get_int(j, "k_cap", 0, "config");
  if (c.k_cap != 0 && c.k_cap < n) throw ConfigError("config.k_cap must be 0 (auto) or at least the dimension");
  c.max_power = get_int(j, "max_power", 12, "config");
  require_positive(c.max_power, "max_power");

  if (j.contains("map_displacement")) c.displacement = parse_terms(j.at("map_displacement"), n, "map_displacement");
  if (j.contains("fields")) {
    const auto& fs = j.at("fields");
    if (!fs.is_array()) throw ConfigError("fields: expected an array");
    for (std::size_t i = 0; i < fs.size(); ++i)
      c.fields.push_back(parse_field(fs[i], n, c.matrix, c.tol, "fields[" + std::to_string(i) + "]"));
  }
  if (j.contains("epsilons")) {
    const auto& es = j.at("epsilons");
    if (!es.is_array()) throw ConfigError("epsilons: expected an array");
    for (const auto& e : es) {
      if (!e.is_number() || !(e.get<double>() > 0) || !std::isfinite(e.get<double>()))
        throw ConfigError("epsilons: all entries must be positive numbers");
      c.epsilons.push_back(e.get<double>());
    }
  }
  if (c.epsilons.size() != c.fields.size())
    throw ConfigError("epsilons: " + std::to_string(c.epsilons.size()) + " entries for " +
                      std::to_string(c.fields.size()) + " fields");
  if (static_cast<int>(c.fields.size()) > n) throw ConfigError("fields: more fields than dimensions");

  if (j.contains("reachability")) {
    const auto& r = j.at("reachability");
    allow_keys(r, {"K", "M", "M_max"}, "reachability");
    c.reachability.K = get_int(r, "K", c.reachability.K, "reachability");
    c.reachability.M = get_int(r, "M", c.reachability.M, "reachability");
    c.reachability.M_max = get_int(r, "M_max", c.reachability.M_max, "reachability");
    if (c.reachability.K < 0) throw ConfigError("reachability.K must be non-negative");
    require_positive(c.reachability.M, "reachability.M");
    require_positive(c.reachability.M_max, "reachability.M_max");
  }
  c.reachability.k_cap = c.k_cap;

  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    allow_keys(g, {"resolution", "core_iterations", "core_samples", "closure_rounds", "closure_samples"}, "grid");
    c.grid.resolution = get_int(g, "resolution", c.grid.resolution, "grid");
    c.grid.core_iterations = get_int(g, "core_iterations", 0, "grid");
    c.grid.core_samples = get_int(g, "core_samples", 0, "grid");
    c.grid.closure_rounds = get_int(g, "closure_rounds", 0, "grid");
    c.grid.closure_samples = get_int(g, "closure_samples", c.grid.closure_samples, "grid");
    if (c.grid.core_iterations < 0 || c.grid.core_samples < 0 || c.grid.closure_rounds < 0)
      throw ConfigError("grid: iteration counts must be non-negative");
    require_positive(c.grid.closure_samples, "grid.closure_samples");
  }
  require_positive(c.grid.resolution, "grid.resolution");

  if (j.contains("simulation")) {
    const auto& s = j.at("simulation");
    allow_keys(s, {"burn_in", "samples", "resolutions", "reference_resolution", "particles", "steps", "multi_start",
                   "starts", "eigen_lift", "x0"},
               "simulation");
    auto& op = c.simulation.occupation;
    op.burn_in = get_int(s, "burn_in", op.burn_in, "simulation");
    op.samples = get_int64(s, "samples", op.samples, "simulation");
    op.multi_start = get_bool(s, "multi_start", op.multi_start, "simulation");
    op.starts = get_int(s, "starts", op.starts, "simulation");
    op.eigen_lift = get_bool(s, "eigen_lift", op.eigen_lift, "simulation");
    if (s.contains("resolutions")) {
      const auto& rs = s.at("resolutions");
      if (!rs.is_array() || rs.empty()) throw ConfigError("simulation.resolutions: expected a non-empty array");
      op.resolutions.clear();
      for (const auto& r : rs) {
        if (!r.is_number_integer() || r.get<int>() < 1)
          throw ConfigError("simulation.resolutions: expected positive integers");
        op.resolutions.push_back(r.get<int>());
      }
    }
    c.simulation.reference_resolution = get_int(s, "reference_resolution", 32, "simulation");
    c.simulation.particles = get_int(s, "particles", 0, "simulation");
    c.simulation.steps = get_int(s, "steps", 1, "simulation");
    if (s.contains("x0")) c.simulation.x0 = get_vec(s.at("x0"), n, "simulation.x0");
    if (op.burn_in < 0 || c.simulation.particles < 0) throw ConfigError("simulation: counts must be non-negative");
    require_positive(op.starts, "simulation.starts");
    require_positive(c.simulation.steps, "simulation.steps");
  }

  if (j.contains("coincidence")) {
    const auto& k = j.at("coincidence");
    allow_keys(k, {"L_min", "w", "seeds"}, "coincidence");
    c.coincidence.L_min = get_double(k, "L_min", c.coincidence.L_min, "coincidence");
    c.coincidence.w = get_double(k, "w", c.coincidence.w, "coincidence");
    c.coincidence.seeds = get_int(k, "seeds", c.coincidence.seeds, "coincidence");
  }

  if (j.contains("genericity")) {
    const auto& g = j.at("genericity");
    allow_keys(g, {"delta", "trials", "sample_points", "k_cap"}, "genericity");
    c.genericity.delta = get_double(g, "delta", c.genericity.delta, "genericity");
    c.genericity.trials = get_int(g, "trials", c.genericity.trials, "genericity");
    c.genericity.sample_points = get_int(g, "sample_points", c.genericity.sample_points, "genericity");
    c.genericity.k_cap = get_int(g, "k_cap", 0, "genericity");
  }
  return c;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"analyze-matrix",     "n0",
                                              "estimate-s",         "simulate",
                                              "detect-coincidence", "check-hypotheses",
                                              "perturb-generic"};
  return names;
}

std::vector<OutputFile> run_subcommand(const std::string& name, const ExperimentConfig& config, int workers) {
  if (name == "analyze-matrix") return run_analyze(config);
  if (name == "n0") return run_n0(config, workers);
  if (name == "estimate-s") return run_estimate_s(config, workers);
  if (name == "simulate") return run_simulate(config, workers);
  if (name == "detect-coincidence") return run_detect(config);
  if (name == "check-hypotheses") return run_hypotheses(config);
  if (name == "perturb-generic") return run_generic(config, workers);
  throw std::invalid_argument("unknown subcommand '" + name + "'");
}

}  // namespace toral
