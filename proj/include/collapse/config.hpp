#pragma once

#include "collapse/dist_core.hpp"
#include "collapse/rng.hpp"
#include "collapse/schedules.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace collapse {

enum class OutputFormat { csv, json, svg };

std::string_view to_string(OutputFormat format);
std::optional<OutputFormat> parse_output_format(std::string_view name);

/// How p^(0) is built.
struct InitialSpec {
  enum class Kind {
    explicit_probs, // `probs`
    two_level,      // s tokens, support s_tilde, sum of squares s0
    dirichlet,      // flat Dirichlet over s tokens, drawn from `seed`
  };
  Kind kind = Kind::two_level;
  std::vector<double> probs;
  std::int64_t s = 0;
  std::int64_t s_tilde = 0;
  double s0 = 0.0;
  std::uint64_t seed = 0;
};

struct BoundsSpec {
  /// Target deviation for the synthetic budget.
  std::optional<double> eps;
  /// Monte Carlo draws for E[lambda_1] in the general deviation bound; 0 skips it.
  int lambda_draws = 0;
};

struct OutputSpec {
  std::filesystem::path directory = "out";
  std::vector<OutputFormat> formats{OutputFormat::csv};
  /// Prefix of the run id and output file names; [A-Za-z0-9_.-]+.
  std::string name = "run";
  /// Keep per-replicate traces (needed for trace panels in the SVG).
  bool traces = false;
};

struct ExperimentConfig {
  Schedule schedule;
  InitialSpec initial;
  int max_generations = 1;
  int replicates = 1;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  BoundsSpec bounds;
  OutputSpec output;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Reads a YAML config. Unknown keys, wrong types and missing fields are
/// errors carrying the file name and line.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(std::string_view text, std::string_view source = "<config>");

/// Fully resolved config as YAML with a fixed key order. Parsing it back
/// yields the same config.
std::string canonical_config(const ExperimentConfig& cfg);

/// FNV-1a 64 as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// The part of canonical_config that determines results: no thread count,
/// output directory or formats.
std::string hashed_config_text(const ExperimentConfig& cfg);

/// FNV-1a 64 of hashed_config_text, as 16 hex digits. Output and thread
/// settings do not change results and are excluded.
std::string config_hash(const ExperimentConfig& cfg);

/// Heavy atom a at token 0 and s_tilde - 1 atoms of (1 - a)/(s_tilde - 1),
/// with a = [1 + sqrt(k((k + 1) S0 - 1))]/(k + 1), k = s_tilde - 1, the larger
/// root of a^2 + (1 - a)^2/k = S0. Tokens s_tilde .. s - 1 get zero.
/// Throws InfeasibleTarget unless 1/s_tilde <= S0 < 1 and s_tilde <= s.
ProbVec two_level_profile(std::int64_t s, std::int64_t s_tilde, double s0);

/// Builds p^(0). Only the Dirichlet generator consumes rng.
ProbVec make_initial_distribution(const InitialSpec& spec, RandomStream& rng);

/// Same, with the Dirichlet stream derived from spec.seed.
ProbVec make_initial_distribution(const InitialSpec& spec);

} // namespace collapse
