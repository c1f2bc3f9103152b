#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace collapse {

using Count = std::int64_t;
using Token = std::size_t;

/// Absolute tolerance on the sum of a real-valued probability vector.
inline constexpr double kSumTolerance = 1e-12;
/// Real-valued entries at or below this are treated as outside the support.
inline constexpr double kSupportEpsilon = 1e-15;

/// A probability distribution over s tokens.
///
/// Either real-valued (validated, never renormalized) or backed by integer
/// counts, in which case probs[i] == counts[i] / total exactly as computed in
/// floating point. Immutable after construction.
class ProbVec {
public:
  ProbVec() = default;

  /// Validates raw probabilities. Throws EmptyVector, NegativeEntry or
  /// SumNotOne; never renormalizes.
  static ProbVec from_probs(std::vector<double> raw);

  /// Empirical frequency of the given counts. The total must be positive.
  static ProbVec from_counts(std::vector<Count> counts);

  static ProbVec dirac(std::size_t size, Token token);
  static ProbVec uniform(std::size_t size);

  std::size_t size() const noexcept { return probs_.size(); }
  bool empty() const noexcept { return probs_.empty(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  bool has_counts() const noexcept { return !counts_.empty(); }
  std::span<const Count> counts() const noexcept { return counts_; }
  Count total() const noexcept { return total_; }

private:
  std::vector<double> probs_;
  std::vector<Count> counts_;
  Count total_ = 0;
};

/// Same as ProbVec::from_probs.
ProbVec validate(std::vector<double> raw);

/// Sum of squared probabilities.
double sigma(const ProbVec& p);

struct SupNorm {
  double value = 0.0;
  Token argmax = 0; // lowest index attaining the maximum
};

SupNorm sup_norm(const ProbVec& p);

/// Sum of absolute differences; twice the total variation distance.
double l1_dist(const ProbVec& p, const ProbVec& q);

std::size_t support_size(const ProbVec& p);

/// Whether the distribution is a Dirac mass. Decided on integer counts
/// when present.
bool is_dirac(const ProbVec& p);

struct PartitionStats {
  double pi = 0.0;         // max over subsets A of min(p(A), 1 - p(A))
  double lambda_max = 0.0; // max over subsets A of p(A) p(A^c)
  bool exact = false;
};

/// Largest support size for which partition_stats enumerates all subsets.
inline constexpr std::size_t kExhaustivePartitionLimit = 24;

/// Largest count total for which counts-backed vectors use the exact
/// subset-sum search.
inline constexpr Count kSubsetSumTotalLimit = 10'000'000;

/// Exact when the support has at most kExhaustivePartitionLimit tokens, or
/// when the vector is counts-backed with total <= kSubsetSumTotalLimit;
/// otherwise falls back to the differencing heuristic, whose values are
/// lower bounds on both statistics.
PartitionStats partition_stats(const ProbVec& p);

/// Exhaustive search over all subsets of the support. Throws OutOfRange when
/// the support exceeds kExhaustivePartitionLimit.
PartitionStats partition_stats_exhaustive(const ProbVec& p);

/// Exact search over reachable integer subset totals of a counts-backed
/// vector; O(support * total / 64).
PartitionStats partition_stats_subset_sum(const ProbVec& p);

/// Karmarkar-Karp largest differencing. Always exact = false.
PartitionStats partition_stats_heuristic(const ProbVec& p);

} // namespace collapse
