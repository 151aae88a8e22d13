#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "toral/coincidence.hpp"
#include "toral/errors.hpp"
#include "toral/markov.hpp"
#include "toral/span_chain.hpp"

namespace toral {

inline constexpr const char* kToolName = "toralperturb";
inline constexpr const char* kToolVersion = "0.1.0";

/// A config file that cannot be turned into an experiment.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct GridConfig {
  int resolution = 32;
  int core_iterations = 0;
  int core_samples = 0;  ///< 0 picks the Lipschitz-based default
  int closure_rounds = 0;
  int closure_samples = 16;
};

struct SimulationConfig {
  OccupationParams occupation;
  int reference_resolution = 32;
  /// Starting point; empty means the origin.
  Vec x0;
  /// When positive, also evolve this many uniform particles for `steps`.
  int particles = 0;
  int steps = 1;
};

struct GenericityConfig {
  double delta = 0.01;
  int trials = 20;
  int sample_points = 100;
  int k_cap = 0;
};

struct ExperimentConfig {
  int dimension = 0;
  IntMatrix matrix;
  std::vector<TrigTerm> displacement;
  std::vector<VectorField> fields;
  std::vector<double> epsilons;
  std::uint64_t seed = 0;
  int k_cap = 0;
  ReachabilityParams reachability;
  GridConfig grid;
  SimulationConfig simulation;
  CoincidenceParams coincidence;
  GenericityConfig genericity;
  Tolerances tol;
  int max_power = 12;
  /// FNV-1a of the canonical (sorted-key, compact) JSON of the input.
  std::string hash;

  SmoothMap map() const;
  /// Throws ConfigError when the config has no fields.
  RankKDiskSpec disk() const;
};

/// 16 hex digits of the 64-bit FNV-1a hash of j.dump().
std::string config_hash(const nlohmann::json& j);

/// Validates and resolves a config. Unknown keys, shape mismatches and bad
/// values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json read_config_file(const std::filesystem::path& path);

struct OutputFile {
  std::string name;
  std::string content;
};

const std::vector<std::string>& subcommand_names();

/// Runs one analysis and returns its output files without touching disk.
/// Throws std::invalid_argument for an unknown subcommand.
std::vector<OutputFile> run_subcommand(const std::string& name, const ExperimentConfig& config, int workers = 1);

}  // namespace toral
