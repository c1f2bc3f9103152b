#pragma once

#include "collapse/dist_core.hpp"
#include "collapse/rng.hpp"
#include "collapse/schedules.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace collapse {

/// Which L1 deviations a trajectory records. Unrecorded series hold NaN.
struct L1Targets {
  bool gen0 = true; // ||p^(m) - p^(0)||_1
  bool gen1 = true; // ||p^(m) - p^(1)||_1
};

struct ChainConfig {
  ProbVec p0;
  Schedule schedule;
  int max_generations = 1;
  L1Targets record_l1;
  std::uint64_t seed = 0;
  /// Keep the per-generation count vectors in the trajectory.
  bool record_counts = true;

  void check() const;
};

/// One realized chain. Series are indexed by generation m - 1.
struct Trajectory {
  std::vector<std::vector<Count>> counts;
  std::vector<double> sigma;
  std::vector<double> sup;
  std::vector<double> l1_to_gen0;
  std::vector<double> l1_to_gen1;
  /// First generation whose model is a Dirac mass.
  std::optional<int> collapse_time;
  /// Token carrying the mass at collapse_time.
  std::optional<Token> absorbed_token;

  int generations() const noexcept { return static_cast<int>(sigma.size()); }
};

/// Multinomial(n, p) draw as n categorical trials by inverse CDF. Counts-backed
/// vectors are sampled on exact integer thresholds.
std::vector<Count> sample_counts(const ProbVec& p, Count n, RandomStream& rng);

/// Trains generation m from history = [p^(0), ..., p^(m-1)]. Entries the
/// schedule does not draw from may be empty placeholders. Index 0 draws
/// fresh samples from p^(0) unless the schedule reuses the realized corpus
/// (fixed_corpus_counts), which partially synthetic adds verbatim and the
/// fixed-corpus randomly-sampled mode resamples from.
ProbVec next_generation(std::span<const ProbVec> history, std::span<const Count> fixed_corpus_counts,
                        const Schedule& sched, int m, RandomStream& rng);

Trajectory run_chain(const ChainConfig& cfg, std::uint64_t replicate_id);

struct EnsembleOptions {
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Keep per-replicate sigma and L1 series (for plotting replicate traces).
  bool keep_traces = false;
  /// Accumulate the ensemble mean of p^(m) entrywise.
  bool track_mean_distribution = false;
};

struct EnsembleSummary {
  int replicates = 0;
  int generations = 0;
  std::size_t alphabet = 0;

  // Per generation; standard errors are NaN when replicates < 2.
  std::vector<double> sigma_mean, sigma_se;
  std::vector<double> sup_mean, sup_se;
  std::vector<double> l1_gen0_mean, l1_gen0_se;
  std::vector<double> l1_gen1_mean, l1_gen1_se;
  /// Fraction of replicates with collapse_time <= m.
  std::vector<double> rho;

  std::map<int, std::int64_t> collapse_histogram;
  std::int64_t collapsed = 0;
  std::int64_t uncollapsed = 0;
  /// Mean collapse time over collapsed replicates; NaN when none collapsed.
  double collapse_time_mean = 0.0;
  /// Fraction of all replicates absorbed at each token; sums to the
  /// collapsed fraction.
  std::vector<double> absorbed_frequency;

  // Only with track_mean_distribution: [m - 1][token].
  std::vector<std::vector<double>> mean_distribution;
  std::vector<std::vector<double>> mean_distribution_se;

  // Only with keep_traces: [replicate][m - 1].
  std::vector<std::vector<double>> sigma_traces;
  std::vector<std::vector<double>> l1_gen1_traces;
  std::vector<std::optional<int>> collapse_times;
};

/// Runs replicates 0 .. R-1 with streams derived from (cfg.seed, replicate).
/// The reduction walks replicates in index order, so the summary is
/// bit-identical for any thread count.
EnsembleSummary run_ensemble(const ChainConfig& cfg, int replicates, const EnsembleOptions& options = {});

struct CollapseStatistics {
  double mean_time = 0.0;
  double mean_time_se = 0.0;
  std::map<int, std::int64_t> histogram;
  std::vector<double> absorbed_frequency;
  std::int64_t collapsed = 0;
  std::int64_t uncollapsed = 0;
};

/// Collapse-time statistics over collapsed replicates only; uncollapsed
/// replicates are counted, never imputed. Throws NoCollapsedReplicates.
CollapseStatistics collapse_statistics(const EnsembleSummary& summary);

struct LambdaEstimate {
  double mean = 0.0;
  double se = 0.0;
  /// Fraction of draws whose partition statistics were computed exactly.
  double exact_fraction = 0.0;
};

/// Monte Carlo estimate of E[max_A p1(A) p1(A^c)] where p1 is the empirical
/// distribution of corpus_size draws from p0.
LambdaEstimate estimate_expected_lambda1(const ProbVec& p0, Count corpus_size, int draws, std::uint64_t seed);

} // namespace collapse
