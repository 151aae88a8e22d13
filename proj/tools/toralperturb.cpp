// toralperturb: run one analysis from a JSON config and write its files.
//
// Exit codes: 0 success, 1 usage, 2 config error, 3 precondition failure,
// 4 anything else.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "toral/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string matrix;
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

fs::path output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) return env;
  return "out";
}

int run(const std::string& name, const Options& o) {
  nlohmann::json j;
  if (!o.config.empty()) j = toral::read_config_file(o.config);
  if (!o.matrix.empty()) j["matrix"] = o.matrix;
  if (o.seed) j["seed"] = *o.seed;
  const auto config = toral::parse_config(j);
  const auto files = toral::run_subcommand(name, config, o.workers);

  const fs::path dir = output_dir(o);
  fs::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    out << f.content;
    if (!out) throw std::runtime_error("cannot write " + (dir / f.name).string());
    std::cout << (dir / f.name).string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-k random perturbations of hyperbolic toral automorphisms", "toralperturb"};
  app.set_version_flag("--version", toral::kToolVersion);
  app.require_subcommand(1);

  Options opts;
  const char* blurbs[] = {"spectra, factorization, invariant subgroups and foliations of the matrix",
                          "n0 at every cell center of the grid",
                          "deficient set S on the grid, with optional core and closure",
                          "occupation histograms and density diagnostics",
                          "tangential coincidence of each field with the linear foliations",
                          "check the no-coincidence hypotheses and find a point outside S",
                          "genericity probe under random trigonometric perturbations"};
  std::size_t i = 0;
  for (const auto& name : toral::subcommand_names()) {
    auto* sub = app.add_subcommand(name, blurbs[i++]);
    sub->add_option("--config", opts.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "output directory (default $OUTPUT_DIR, else ./out)");
    sub->add_option("--workers", opts.workers, "worker threads; results do not depend on it")
        ->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { opts.seed = s; },
                                            "override the config seed");
    if (name == "analyze-matrix") sub->add_option("--matrix", opts.matrix, "matrix rows, e.g. \"2,1;1,1\"");
  }

  if (argc > 1 && argv[1][0] != '-') {
    const auto& names = toral::subcommand_names();
    if (std::find(names.begin(), names.end(), argv[1]) == names.end()) {
      std::cerr << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
      return 1;
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (opts.config.empty() && !(name == "analyze-matrix" && !opts.matrix.empty())) {
    std::cerr << "error: " << name << " needs --config\n\n" << app.get_subcommands().front()->help();
    return 1;
  }
  try {
    return run(name, opts);
  } catch (const toral::InvalidInput& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const toral::PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
