#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "toral/coincidence.hpp"
#include "toral/density.hpp"
#include "toral/experiment.hpp"
#include "toral/markov.hpp"
#include "toral/span_chain.hpp"

namespace py = pybind11;
using namespace toral;

namespace {

py::object big(const BigInt& x) { return py::module_::import("builtins").attr("int")(x.str()); }

IntMatrix to_matrix(const py::object& m) {
  if (py::isinstance<py::str>(m)) return IntMatrix::parse(m.cast<std::string>());
  std::ostringstream text;
  bool first_row = true;
  for (const auto& row : m) {
    if (!first_row) text << ';';
    first_row = false;
    bool first = true;
    for (const auto& x : row) {
      if (!first) text << ',';
      first = false;
      text << py::str(x).cast<std::string>();
    }
  }
  return IntMatrix::parse(text.str());
}

py::list poly_list(const IntPolynomial& p) {
  py::list out;
  for (int i = p.degree(); i >= 0; --i) out.append(big(p.coeff(i)));
  return out;
}

IntPolynomial to_poly(const std::vector<long long>& descending) {
  std::vector<BigInt> asc(descending.rbegin(), descending.rend());
  return IntPolynomial(asc);
}

py::object count(const std::optional<int>& n) { return n ? py::object(py::int_(*n)) : py::object(py::none()); }

TrigTerm make_term(const Eigen::VectorXi& freq, const Vec& coeff, double phase) { return {freq, coeff, phase}; }

py::dict coincidence_dict(const CoincidenceReport& r) {
  py::list witnesses;
  for (const auto& w : r.witnesses)
    witnesses.append(py::dict(py::arg("seed") = w.seed.coords(), py::arg("arclength") = w.arclength,
                              py::arg("drift") = w.drift));
  return py::dict(py::arg("label") = r.label, py::arg("detected") = r.detected, py::arg("method") = r.method,
                  py::arg("min_drift") = r.min_drift, py::arg("witnesses") = witnesses,
                  py::arg("L_min") = r.params.L_min, py::arg("w") = r.params.w, py::arg("seeds") = r.params.seeds,
                  py::arg("qualification") = r.qualification);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rank-k random perturbations of hyperbolic toral automorphisms";
  m.attr("__version__") = kToolVersion;

  auto invalid = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", invalid.ptr());

  py::class_<Tolerances>(m, "Tolerances")
      .def(py::init([](double rank, double geo) { return Tolerances{rank, geo}; }), py::arg("rank") = 1e-9,
           py::arg("geo") = 1e-10)
      .def_readwrite("rank", &Tolerances::rank)
      .def_readwrite("geo", &Tolerances::geo);

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t, std::uint64_t, std::uint32_t>(), py::arg("seed"), py::arg("stream") = 0,
           py::arg("substream") = 0)
      .def("uniform", py::overload_cast<>(&RandomStream::uniform))
      .def("uniform", py::overload_cast<double, double>(&RandomStream::uniform), py::arg("a"), py::arg("b"))
      .def("next_u32", &RandomStream::next_u32)
      .def("split", &RandomStream::split, py::arg("child"));

  m.def("wrap", [](const Vec& v) { return wrap(v).coords(); }, py::arg("x"), "Reduce coordinates into [0, 1).");
  m.def(
      "torus_distance", [](const Vec& a, const Vec& b) { return torus_distance(wrap(a), wrap(b)); }, py::arg("a"),
      py::arg("b"));

  // ---- algebra
  py::class_<ToralAutomorphism>(m, "ToralAutomorphism")
      .def(py::init([](const py::object& matrix) { return ToralAutomorphism(to_matrix(matrix)); }), py::arg("matrix"),
           "From a row string like \"2,1;1,1\" or a list of integer rows.")
      .def_property_readonly("dim", &ToralAutomorphism::dim)
      .def_property_readonly("matrix", [](const ToralAutomorphism& a) { return a.real_matrix(); })
      .def_property_readonly("det", [](const ToralAutomorphism& a) { return big(a.det()); })
      .def_property_readonly("char_poly", [](const ToralAutomorphism& a) { return poly_list(a.characteristic_polynomial()); },
                             "Coefficients, highest degree first.")
      .def_property_readonly("spectrum", &ToralAutomorphism::spectrum)
      .def_property_readonly("hyperbolic", &ToralAutomorphism::hyperbolic)
      .def_property_readonly("stable_basis", &ToralAutomorphism::stable_basis)
      .def_property_readonly("unstable_basis", &ToralAutomorphism::unstable_basis);

  m.def(
      "factor_over_int",
      [](const std::vector<long long>& descending) {
        py::list out;
        for (const auto& f : factor_over_int(to_poly(descending))) out.append(poly_list(f));
        return out;
      },
      py::arg("coefficients"), "Irreducible factors over Z, coefficients highest degree first.");
  m.def(
      "invariant_subgroups",
      [](const ToralAutomorphism& a, int max_power) {
        py::list out;
        for (const auto& g : invariant_subgroups(a, max_power)) {
          py::list basis;
          for (const auto& v : g.lattice_basis) {
            py::list col;
            for (const auto& x : v) col.append(big(x));
            basis.append(col);
          }
          out.append(py::dict(py::arg("power") = g.power, py::arg("lattice_basis") = basis));
        }
        return out;
      },
      py::arg("a"), py::arg("max_power") = 12);

  py::class_<LinearFoliation>(m, "LinearFoliation")
      .def(py::init<const Mat&, std::string>(), py::arg("spanning"), py::arg("label") = "P")
      .def_property_readonly("leaf_basis", &LinearFoliation::leaf_basis)
      .def_property_readonly("label", &LinearFoliation::label)
      .def_property_readonly("dim", &LinearFoliation::dim);
  m.def("stable_foliation", &stable_foliation, py::arg("a"));

  // ---- fields and maps
  py::class_<TrigTerm>(m, "TrigTerm")
      .def(py::init(&make_term), py::arg("freq"), py::arg("coeff"), py::arg("phase") = 0.0)
      .def_readonly("freq", &TrigTerm::freq)
      .def_readonly("coeff", &TrigTerm::coeff)
      .def_readonly("phase", &TrigTerm::phase);

  py::class_<VectorField>(m, "VectorField")
      .def_static("constant", &VectorField::constant, py::arg("direction"))
      .def_static("trig", &VectorField::trig, py::arg("base"), py::arg("terms") = std::vector<TrigTerm>{})
      .def_property_readonly("dim", &VectorField::dim)
      .def_property_readonly("is_constant", &VectorField::is_constant)
      .def("__call__", [](const VectorField& v, const Vec& x) { return v(x); }, py::arg("x"))
      .def("jacobian", &VectorField::jacobian, py::arg("x"));

  py::class_<SmoothMap>(m, "SmoothMap")
      .def_static("automorphism", [](const py::object& matrix) { return SmoothMap::automorphism(to_matrix(matrix)); },
                  py::arg("matrix"))
      .def_static(
          "composed",
          [](const py::object& matrix, std::vector<TrigTerm> d) { return SmoothMap::composed(to_matrix(matrix), std::move(d)); },
          py::arg("matrix"), py::arg("displacement"))
      .def_property_readonly("dim", &SmoothMap::dim)
      .def("__call__", [](const SmoothMap& f, const Vec& x) { return f(wrap(x)).coords(); }, py::arg("x"))
      .def("jacobian", py::overload_cast<const Vec&>(&SmoothMap::jacobian, py::const_), py::arg("x"));

  py::class_<RankKDiskSpec>(m, "RankKDiskSpec")
      .def(py::init<std::vector<VectorField>, std::vector<double>, Tolerances>(), py::arg("fields"),
           py::arg("epsilons"), py::arg("tol") = Tolerances{})
      .def_property_readonly("rank", &RankKDiskSpec::rank)
      .def_property_readonly("dim", &RankKDiskSpec::dim);

  m.def("flow", [](const VectorField& v, const Vec& x, double t) { return flow(v, wrap(x), t).coords(); },
        py::arg("v"), py::arg("x"), py::arg("t"));
  m.def(
      "sample_disk", [](const RankKDiskSpec& s, const Vec& x, RandomStream& rng) { return sample_disk(s, wrap(x), rng).coords(); },
      py::arg("spec"), py::arg("x"), py::arg("rng"));

  // ---- span chain
  m.def("span_vectors", [](const SmoothMap& f, const RankKDiskSpec& s, const Vec& x, int l) { return span_vectors(f, s, wrap(x), l); },
        py::arg("f"), py::arg("spec"), py::arg("x"), py::arg("l"));
  m.def(
      "compute_n0",
      [](const SmoothMap& f, const RankKDiskSpec& s, const Vec& x, int k_cap) {
        return count(compute_n0(f, s, wrap(x), k_cap).n0);
      },
      py::arg("f"), py::arg("spec"), py::arg("x"), py::arg("k_cap"), "n0 at x, or None when no l <= k_cap spans.");
  m.def(
      "estimate_n",
      [](const SmoothMap& f, const RankKDiskSpec& s, const Vec& x, int K, int M, int M_max, int k_cap, std::uint64_t seed) {
        return count(estimate_n(f, s, wrap(x), {K, M, M_max, k_cap}, RandomStream(seed, 0)).n_est);
      },
      py::arg("f"), py::arg("spec"), py::arg("x"), py::arg("K") = 3, py::arg("M") = 4, py::arg("M_max") = 32,
      py::arg("k_cap") = 0, py::arg("seed") = 0);
  m.def(
      "estimate_S",
      [](const SmoothMap& f, const RankKDiskSpec& s, int resolution, int k_cap, std::uint64_t seed, int workers) {
        const auto g = estimate_S(f, s, resolution, {3, 4, 32, k_cap}, RandomStream(seed, 1), workers);
        return py::make_tuple(py::array(py::cast(g.flagged)), py::array(py::cast(g.n_est)));
      },
      py::arg("f"), py::arg("spec"), py::arg("resolution"), py::arg("k_cap") = 0, py::arg("seed") = 0,
      py::arg("workers") = 1, "(flagged, n_est) per cell, row-major; n_est -1 means infinity.");

  // ---- simulation and diagnostics
  py::class_<GridHistogram>(m, "GridHistogram")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("resolution"))
      .def_property_readonly("dim", &GridHistogram::dim)
      .def_property_readonly("resolution", &GridHistogram::resolution)
      .def_property_readonly("total", &GridHistogram::total)
      .def_property_readonly("counts", [](const GridHistogram& h) { return py::array(py::cast(h.counts())); })
      .def("add", [](GridHistogram& h, const Vec& x) { h.add(wrap(x)); }, py::arg("x"))
      .def("coarsen", &GridHistogram::coarsen, py::arg("factor"));
  m.def("tv_to_uniform", &tv_to_uniform, py::arg("h"));
  m.def("occupancy", &occupancy, py::arg("h"));
  m.def("ac_slope", &ac_slope, py::arg("histograms"));
  m.def(
      "diagnose",
      [](const std::vector<GridHistogram>& hs, int reference) {
        const auto d = diagnose(hs, reference);
        return py::dict(py::arg("tv_to_uniform") = d.tv_to_uniform, py::arg("occupancy") = d.occupancy,
                        py::arg("sup_density") = d.sup_density, py::arg("ac_slope") = d.ac_slope,
                        py::arg("verdict") = d.verdict, py::arg("reference_resolution") = d.reference_resolution);
      },
      py::arg("histograms"), py::arg("reference_resolution") = 32);
  m.def(
      "step",
      [](const SmoothMap& f, const RankKDiskSpec& s, const Vec& x, RandomStream& rng) {
        return step(PerturbationKernel{f, s}, wrap(x), rng).coords();
      },
      py::arg("f"), py::arg("spec"), py::arg("x"), py::arg("rng"));
  m.def(
      "evolve",
      [](const SmoothMap& f, const RankKDiskSpec& s, int particles, int steps, std::uint64_t seed, int workers) {
        const auto e = evolve(PerturbationKernel{f, s}, ParticleEnsemble::uniform(f.dim(), particles, seed), steps, workers);
        Mat out(particles, f.dim());
        for (int p = 0; p < particles; ++p) out.row(p) = e.particles[p].coords().transpose();
        return out;
      },
      py::arg("f"), py::arg("spec"), py::arg("particles"), py::arg("steps"), py::arg("seed") = 0,
      py::arg("workers") = 1, "Uniform particles after `steps` kernel steps, one row each.");
  m.def(
      "occupation",
      [](const SmoothMap& f, const RankKDiskSpec& s, const Vec& x0, int burn_in, std::int64_t samples,
         std::vector<int> resolutions, std::uint64_t seed, bool multi_start, int starts, bool eigen_lift, int workers) {
        OccupationParams p{burn_in, samples, std::move(resolutions), multi_start, starts, eigen_lift};
        py::gil_scoped_release release;
        return occupation(PerturbationKernel{f, s}, wrap(x0), p, RandomStream(seed, 3), workers);
      },
      py::arg("f"), py::arg("spec"), py::arg("x0"), py::arg("burn_in") = 1000, py::arg("samples") = 1000000,
      py::arg("resolutions") = std::vector<int>{8, 16, 32, 64}, py::arg("seed") = 0, py::arg("multi_start") = false,
      py::arg("starts") = 64, py::arg("eigen_lift") = true, py::arg("workers") = 1);

  // ---- coincidence
  m.def(
      "detect_coincidence",
      [](const VectorField& v, const LinearFoliation& f, double L_min, double w, int seeds, std::uint64_t seed) {
        return coincidence_dict(detect_coincidence(v, f, {L_min, w, seeds, true}, RandomStream(seed, 4)));
      },
      py::arg("v"), py::arg("foliation"), py::arg("L_min") = 0.1, py::arg("w") = 1e-8, py::arg("seeds") = 200,
      py::arg("seed") = 0);
  m.def(
      "theorem_hypotheses",
      [](const ToralAutomorphism& a, const RankKDiskSpec& s, int max_power, int seeds, std::uint64_t seed) {
        HypothesesParams p;
        p.max_power = max_power;
        p.coincidence.seeds = seeds;
        const auto r = theorem_hypotheses(a, s, p, RandomStream(seed, 5));
        py::list foliations;
        for (const auto& v : r.foliations) {
          py::list fields;
          for (const auto& f : v.fields) fields.append(coincidence_dict(f));
          foliations.append(py::dict(py::arg("label") = v.label, py::arg("leaf_dim") = v.leaf_dim,
                                     py::arg("coincides") = v.coincides, py::arg("fields") = fields));
        }
        py::object cert = py::none();
        if (r.certificate)
          cert = py::dict(py::arg("point") = r.certificate->point.coords(), py::arg("method") = r.certificate->method,
                          py::arg("value") = r.certificate->value);
        return py::dict(py::arg("satisfied") = r.satisfied, py::arg("foliations") = foliations,
                        py::arg("skipped") = r.skipped, py::arg("certificate") = cert);
      },
      py::arg("a"), py::arg("spec"), py::arg("max_power") = 12, py::arg("seeds") = 200, py::arg("seed") = 0);
  m.def(
      "genericity_probe",
      [](const VectorField& v, const ToralAutomorphism& a, double delta, int trials, int sample_points, int k_cap,
         std::uint64_t seed, int workers) {
        GenericityParams p;
        p.delta = delta;
        p.trials = trials;
        p.sample_points = sample_points;
        p.k_cap = k_cap;
        const auto r = genericity_probe(v, a, p, RandomStream(seed, 6), workers);
        std::vector<double> fractions;
        std::vector<bool> clear;
        for (const auto& t : r.trials) {
          fractions.push_back(t.finite_fraction);
          clear.push_back(t.clear);
        }
        return py::dict(py::arg("finite_fractions") = fractions, py::arg("clear") = clear,
                        py::arg("baseline_finite_fraction") = r.baseline.finite_fraction,
                        py::arg("baseline_clear") = r.baseline.clear,
                        py::arg("full_span_fraction") = r.full_span_fraction,
                        py::arg("clear_fraction") = r.clear_fraction);
      },
      py::arg("v"), py::arg("a"), py::arg("delta") = 0.01, py::arg("trials") = 20, py::arg("sample_points") = 100,
      py::arg("k_cap") = 0, py::arg("seed") = 0, py::arg("workers") = 1);

  // ---- experiment runner
  m.attr("SUBCOMMANDS") = subcommand_names();
  m.def(
      "run_subcommand",
      [](const std::string& name, const std::string& config_json, int workers) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
          throw ConfigError(e.what());
        }
        const auto config = parse_config(j);
        std::vector<OutputFile> files;
        {
          py::gil_scoped_release release;
          files = run_subcommand(name, config, workers);
        }
        py::dict out;
        for (const auto& f : files) out[py::str(f.name)] = f.content;
        return out;
      },
      py::arg("name"), py::arg("config_json"), py::arg("workers") = 1,
      "Run a CLI subcommand in memory; returns {file name: content}.");
}
