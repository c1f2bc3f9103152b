#include "collapse/dist_core.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace collapse {

ProbVec ProbVec::from_probs(std::vector<double> raw) {
  if (raw.empty()) {
    throw Error(Errc::empty_vector, "probability vector has no entries");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0) || raw[i] > 1.0) {
      std::ostringstream msg;
      msg << "entry " << i << " = " << raw[i] << " is outside [0, 1]";
      throw Error(Errc::negative_entry, msg.str());
    }
    sum += raw[i];
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "entries sum to " << sum;
    throw Error(Errc::sum_not_one, msg.str());
  }
  ProbVec p;
  p.probs_ = std::move(raw);
  return p;
}

ProbVec ProbVec::from_counts(std::vector<Count> counts) {
  if (counts.empty()) {
    throw Error(Errc::empty_vector, "count vector has no entries");
  }
  Count total = 0;
  for (Count c : counts) {
    if (c < 0) {
      throw Error(Errc::negative_entry, "negative count");
    }
    total += c;
  }
  if (total == 0) {
    throw Error(Errc::empty_training_set, "counts sum to zero");
  }
  ProbVec p;
  p.probs_.resize(counts.size());
  const auto denom = static_cast<double>(total);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p.probs_[i] = static_cast<double>(counts[i]) / denom;
  }
  p.counts_ = std::move(counts);
  p.total_ = total;
  return p;
}

ProbVec ProbVec::dirac(std::size_t size, Token token) {
  if (token >= size) {
    throw Error(Errc::out_of_range, "Dirac token outside the alphabet");
  }
  std::vector<double> probs(size, 0.0);
  probs[token] = 1.0;
  return from_probs(std::move(probs));
}

ProbVec ProbVec::uniform(std::size_t size) {
  if (size == 0) {
    throw Error(Errc::empty_vector, "uniform distribution over zero tokens");
  }
  // Built from unit counts so the entries sum to one exactly as rationals.
  return from_counts(std::vector<Count>(size, 1));
}

ProbVec validate(std::vector<double> raw) { return ProbVec::from_probs(std::move(raw)); }

double sigma(const ProbVec& p) {
  if (p.has_counts()) {
    // Exact integer numerator; no overflow for totals below 3e9.
    Count num = 0;
    for (Count c : p.counts()) num += c * c;
    const auto t = static_cast<double>(p.total());
    return static_cast<double>(num) / (t * t);
  }
  double acc = 0.0;
  for (double x : p.probs()) acc += x * x;
  return acc;
}

SupNorm sup_norm(const ProbVec& p) {
  SupNorm out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > out.value) {
      out.value = p[i];
      out.argmax = i;
    }
  }
  return out;
}

double l1_dist(const ProbVec& p, const ProbVec& q) {
  if (p.size() != q.size()) {
    throw Error(Errc::dimension_mismatch, "l1_dist on vectors of different length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return acc;
}

std::size_t support_size(const ProbVec& p) {
  if (p.has_counts()) {
    return static_cast<std::size_t>(
        std::count_if(p.counts().begin(), p.counts().end(), [](Count c) { return c > 0; }));
  }
  return static_cast<std::size_t>(
      std::count_if(p.probs().begin(), p.probs().end(), [](double x) { return x > kSupportEpsilon; }));
}

bool is_dirac(const ProbVec& p) {
  if (p.has_counts()) {
    return *std::max_element(p.counts().begin(), p.counts().end()) == p.total();
  }
  return sup_norm(p).value == 1.0;
}

namespace {

std::vector<double> support_masses(const ProbVec& p) {
  std::vector<double> masses;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p.has_counts() ? p.counts()[i] > 0 : p[i] > kSupportEpsilon) masses.push_back(p[i]);
  }
  return masses;
}

PartitionStats from_best_mass(double mass, bool exact) {
  PartitionStats out;
  out.pi = std::min(mass, 1.0 - mass);
  out.lambda_max = mass * (1.0 - mass);
  out.exact = exact;
  return out;
}

// Exact on integer totals: both statistics depend only on min(best, total - best).
PartitionStats from_best_count(Count best, Count total) {
  const Count low = std::min(best, total - best);
  const auto t = static_cast<double>(total);
  PartitionStats out;
  out.pi = static_cast<double>(low) / t;
  out.lambda_max = static_cast<double>(low) * static_cast<double>(total - low) / (t * t);
  out.exact = true;
  return out;
}

template <typename T>
T best_subset_sum(const std::vector<T>& masses, T total) {
  // Subset sums by Gray code: one addition or subtraction per subset. Finds
  // the achievable mass closest to total / 2.
  const std::size_t k = masses.size();
  auto balance = [total](T x) { return std::min(x, total - x); };
  T current = 0;
  T best = 0;
  const std::uint32_t subsets = std::uint32_t{1} << k;
  std::uint32_t previous_gray = 0;
  for (std::uint32_t i = 1; i < subsets; ++i) {
    const std::uint32_t gray = i ^ (i >> 1);
    const std::uint32_t flipped = gray ^ previous_gray;
    const auto bit = static_cast<std::size_t>(__builtin_ctz(flipped));
    current += (gray & flipped) ? masses[bit] : -masses[bit];
    previous_gray = gray;
    if (balance(current) > balance(best)) best = current;
  }
  return best;
}

} // namespace

PartitionStats partition_stats_exhaustive(const ProbVec& p) {
  if (support_size(p) > kExhaustivePartitionLimit) {
    throw Error(Errc::out_of_range, "support too large for exhaustive subset search");
  }
  if (p.has_counts()) {
    std::vector<Count> counts;
    for (Count c : p.counts()) {
      if (c > 0) counts.push_back(c);
    }
    return from_best_count(best_subset_sum<Count>(counts, p.total()), p.total());
  }
  const double best = best_subset_sum<double>(support_masses(p), 1.0);
  return from_best_mass(std::clamp(best, 0.0, 1.0), true);
}

PartitionStats partition_stats_heuristic(const ProbVec& p) {
  std::priority_queue<double> heap;
  for (double m : support_masses(p)) heap.push(m);
  while (heap.size() > 1) {
    const double a = heap.top();
    heap.pop();
    const double b = heap.top();
    heap.pop();
    heap.push(a - b);
  }
  const double difference = heap.empty() ? 1.0 : std::clamp(heap.top(), 0.0, 1.0);
  // The two sides of the final partition carry (1 -+ difference) / 2.
  return from_best_mass((1.0 - difference) / 2.0, false);
}

PartitionStats partition_stats_subset_sum(const ProbVec& p) {
  if (!p.has_counts()) {
    throw Error(Errc::out_of_range, "subset-sum partition search needs a counts-backed vector");
  }
  // Reachable subset totals as a bitset over [0, total].
  const auto total = static_cast<std::size_t>(p.total());
  std::vector<std::uint64_t> reach(total / 64 + 1, 0);
  reach[0] = 1;
  for (Count c : p.counts()) {
    if (c == 0) continue;
    const auto shift = static_cast<std::size_t>(c);
    const std::size_t words = shift / 64;
    const std::size_t bits = shift % 64;
    for (std::size_t i = reach.size(); i-- > words;) {
      std::uint64_t moved = reach[i - words] << bits;
      if (bits != 0 && i - words >= 1) moved |= reach[i - words - 1] >> (64 - bits);
      reach[i] |= moved;
    }
  }
  for (std::size_t below = total / 2 + 1; below-- > 0;) {
    if ((reach[below / 64] >> (below % 64)) & 1U) {
      return from_best_count(static_cast<Count>(below), p.total());
    }
  }
  return from_best_count(0, p.total());
}

PartitionStats partition_stats(const ProbVec& p) {
  if (support_size(p) <= kExhaustivePartitionLimit) return partition_stats_exhaustive(p);
  if (p.has_counts() && p.total() <= kSubsetSumTotalLimit) return partition_stats_subset_sum(p);
  return partition_stats_heuristic(p);
}

} // namespace collapse
