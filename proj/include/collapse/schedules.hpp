#pragma once

#include "collapse/dist_core.hpp"
#include "collapse/rng.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace collapse {

enum class ScheduleKind { fully_synthetic, partially_synthetic, most_recent, randomly_sampled };

/// Meaning of model index 0 in the randomly-sampled scenario.
enum class RealDataMode {
  fresh,        // new i.i.d. draws from the true distribution
  fixed_corpus, // resampling from the realized generation-1 training corpus
};

std::string_view to_string(ScheduleKind kind);
std::string_view to_string(RealDataMode mode);
std::optional<ScheduleKind> parse_schedule_kind(std::string_view name);
std::optional<RealDataMode> parse_real_data_mode(std::string_view name);

/// Sample-count plan: how many samples generation m draws from each earlier
/// model t < m.
struct Schedule {
  ScheduleKind kind = ScheduleKind::fully_synthetic;
  Count n = 1;        // per-generation synthetic budget
  Count real_n = 0;   // real corpus size N (partially synthetic)
  Count window = 1;   // K (most recent)
  RealDataMode real_data_mode = RealDataMode::fresh;

  static Schedule fully_synthetic(Count n);
  static Schedule partially_synthetic(Count real_n, Count n);
  static Schedule most_recent(Count n, Count window);
  static Schedule randomly_sampled(Count n, RealDataMode mode = RealDataMode::fresh);

  /// Throws InvalidSchedule when a required field is out of range.
  void check() const;
};

/// Samples per model inside the most-recent window: floor(n / K), but at
/// least one so that windows wider than the budget still train.
Count most_recent_per_model(const Schedule& sched);

/// n^(m)_t for t = 0 .. m-1. Only randomly_sampled consumes rng.
std::vector<Count> counts_for(const Schedule& sched, int m, RandomStream& rng);

/// Total training samples of generation m; never consumes randomness.
Count total_samples(const Schedule& sched, int m);

/// Size of the real corpus drawn from the true distribution to train
/// generation 1: N for partially synthetic, n otherwise.
Count first_generation_size(const Schedule& sched);

/// Whether index 0 contributions reuse the realized generation-1 corpus
/// instead of fresh draws from the true distribution.
bool reuses_corpus(const Schedule& sched);

} // namespace collapse
