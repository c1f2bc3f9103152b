#include "collapse/simulate.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace collapse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<Token> single_support_token(const ProbVec& p) {
  std::optional<Token> found;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool positive = p.has_counts() ? p.counts()[i] > 0 : p[i] > 0.0;
    if (!positive) continue;
    if (found) return std::nullopt;
    found = i;
  }
  return found;
}

} // namespace

std::vector<Count> sample_counts(const ProbVec& p, Count n, RandomStream& rng) {
  std::vector<Count> out(p.size(), 0);
  if (n <= 0 || p.empty()) return out;

  if (auto token = single_support_token(p)) {
    out[*token] = n;
    return out;
  }

  if (p.has_counts()) {
    std::vector<Count> cumulative(p.size());
    std::partial_sum(p.counts().begin(), p.counts().end(), cumulative.begin());
    const auto total = static_cast<std::uint64_t>(p.total());
    for (Count i = 0; i < n; ++i) {
      const auto r = static_cast<Count>(rng.below(total));
      const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
      ++out[static_cast<std::size_t>(it - cumulative.begin())];
    }
    return out;
  }

  std::vector<double> cumulative(p.size());
  std::partial_sum(p.probs().begin(), p.probs().end(), cumulative.begin());
  // Rounding can leave the last cumulative value just under one; draws past
  // it go to the last token with positive mass.
  std::size_t last_positive = p.size() - 1;
  while (last_positive > 0 && p[last_positive] <= 0.0) --last_positive;
  for (Count i = 0; i < n; ++i) {
    const double u = rng.uniform();
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    if (idx >= p.size()) idx = last_positive;
    ++out[idx];
  }
  return out;
}

ProbVec next_generation(std::span<const ProbVec> history, std::span<const Count> fixed_corpus_counts,
                        const Schedule& sched, int m, RandomStream& rng) {
  if (m < 1 || history.size() != static_cast<std::size_t>(m)) {
    throw Error(Errc::invalid_generation, "history must hold exactly m models");
  }
  const std::size_t alphabet = history[0].size();
  const auto plan = counts_for(sched, m, rng);
  std::vector<Count> pooled(alphabet, 0);
  auto add = [&pooled](std::span<const Count> part) {
    for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += part[i];
  };

  for (std::size_t t = 0; t < plan.size(); ++t) {
    if (plan[t] == 0) continue;
    if (t == 0 && m >= 2 && reuses_corpus(sched)) {
      if (fixed_corpus_counts.size() != alphabet) {
        throw Error(Errc::dimension_mismatch, "schedule reuses the corpus but no corpus counts were given");
      }
      if (sched.kind == ScheduleKind::partially_synthetic) {
        add(fixed_corpus_counts);
      } else {
        const auto corpus = ProbVec::from_counts({fixed_corpus_counts.begin(), fixed_corpus_counts.end()});
        add(sample_counts(corpus, plan[t], rng));
      }
      continue;
    }
    const ProbVec& source = history[t];
    if (source.size() != alphabet) {
      throw Error(Errc::dimension_mismatch, "model " + std::to_string(t) + " is not available in the history");
    }
    add(sample_counts(source, plan[t], rng));
  }

  if (std::accumulate(pooled.begin(), pooled.end(), Count{0}) == 0) {
    throw Error(Errc::empty_training_set, "generation " + std::to_string(m) + " has no training samples");
  }
  return ProbVec::from_counts(std::move(pooled));
}

void ChainConfig::check() const {
  if (p0.empty()) throw Error(Errc::empty_vector, "chain has no initial distribution");
  if (max_generations < 1) throw Error(Errc::validation_error, "max_generations must be >= 1");
  schedule.check();
}

namespace {

/// ||p - q||_1 for two counts-backed vectors, on integers.
double l1_counts(std::span<const Count> a, Count total_a, std::span<const Count> b, Count total_b) {
  // |a_i / A - b_i / B| = |a_i B - b_i A| / (A B); products stay below 2^63
  // for totals up to ~3e9.
  Count num = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Count d = a[i] * total_b - b[i] * total_a;
    num += d < 0 ? -d : d;
  }
  return static_cast<double>(num) / (static_cast<double>(total_a) * static_cast<double>(total_b));
}

/// Generations back the schedule can still draw from.
std::size_t retention(const Schedule& sched) {
  switch (sched.kind) {
    case ScheduleKind::fully_synthetic:
    case ScheduleKind::partially_synthetic:
      return 1;
    case ScheduleKind::most_recent:
      return static_cast<std::size_t>(sched.window);
    case ScheduleKind::randomly_sampled:
      return std::numeric_limits<std::size_t>::max();
  }
  return 1;
}

} // namespace

Trajectory run_chain(const ChainConfig& cfg, std::uint64_t replicate_id) {
  cfg.check();
  const auto& sched = cfg.schedule;
  const auto generations = static_cast<std::size_t>(cfg.max_generations);
  RandomStream rng = derive_stream(cfg.seed, replicate_id);

  Trajectory traj;
  traj.sigma.reserve(generations);
  traj.sup.reserve(generations);
  traj.l1_to_gen0.reserve(generations);
  traj.l1_to_gen1.reserve(generations);
  if (cfg.record_counts) traj.counts.reserve(generations);

  std::vector<ProbVec> history;
  history.reserve(std::min<std::size_t>(generations + 1, 4096));
  history.push_back(cfg.p0);
  history.push_back(ProbVec::from_counts(sample_counts(cfg.p0, first_generation_size(sched), rng)));
  const ProbVec gen1 = history.back();
  const std::vector<Count> corpus = reuses_corpus(sched)
                                        ? std::vector<Count>(gen1.counts().begin(), gen1.counts().end())
                                        : std::vector<Count>{};

  auto record = [&](const ProbVec& p, int m) {
    const auto counts = p.counts();
    const auto max_it = std::max_element(counts.begin(), counts.end());
    traj.sigma.push_back(sigma(p));
    traj.sup.push_back(static_cast<double>(*max_it) / static_cast<double>(p.total()));
    traj.l1_to_gen0.push_back(cfg.record_l1.gen0 ? l1_dist(p, cfg.p0) : kNaN);
    traj.l1_to_gen1.push_back(cfg.record_l1.gen1 ? l1_counts(counts, p.total(), gen1.counts(), gen1.total()) : kNaN);
    if (cfg.record_counts) traj.counts.emplace_back(counts.begin(), counts.end());
    if (!traj.collapse_time && *max_it == p.total()) {
      traj.collapse_time = m;
      traj.absorbed_token = static_cast<Token>(max_it - counts.begin());
    }
  };

  record(gen1, 1);
  const std::size_t keep = retention(sched);
  for (int m = 2; m <= cfg.max_generations; ++m) {
    if (sched.kind == ScheduleKind::fully_synthetic && traj.collapse_time) {
      // Absorbed: every later generation is the same Dirac.
      while (traj.generations() < cfg.max_generations) {
        traj.sigma.push_back(traj.sigma.back());
        traj.sup.push_back(traj.sup.back());
        traj.l1_to_gen0.push_back(traj.l1_to_gen0.back());
        traj.l1_to_gen1.push_back(traj.l1_to_gen1.back());
        if (cfg.record_counts) traj.counts.push_back(traj.counts.back());
      }
      break;
    }
    ProbVec next = next_generation(history, corpus, sched, m, rng);
    record(next, m);
    history.push_back(std::move(next));
    // Release models the schedule can no longer draw from; p^(0) stays.
    if (keep < history.size() - 1) {
      const std::size_t stale = history.size() - keep - 1;
      if (stale >= 1) history[stale] = ProbVec{};
    }
  }
  return traj;
}

namespace {

/// Welford accumulator; fed in a fixed order so results are reproducible.
struct Moments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }
  double value() const { return count > 0 ? mean : kNaN; }
  double standard_error() const {
    if (count < 2) return kNaN;
    return std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count));
  }
};

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  workers.reserve(used);
  for (unsigned w = 0; w < used; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

} // namespace

EnsembleSummary run_ensemble(const ChainConfig& cfg, int replicates, const EnsembleOptions& options) {
  if (replicates < 1) throw Error(Errc::validation_error, "replicates must be >= 1");
  cfg.check();

  ChainConfig chain = cfg;
  chain.record_counts = options.track_mean_distribution;

  const auto generations = static_cast<std::size_t>(cfg.max_generations);
  const std::size_t alphabet = cfg.p0.size();
  const unsigned threads = options.threads != 0 ? options.threads : std::max(1U, std::thread::hardware_concurrency());

  std::vector<Moments> sigma(generations), sup(generations), l1_gen0(generations), l1_gen1(generations);
  std::vector<std::vector<Moments>> mean_p;
  if (options.track_mean_distribution) mean_p.assign(generations, std::vector<Moments>(alphabet));

  EnsembleSummary out;
  out.replicates = replicates;
  out.generations = cfg.max_generations;
  out.alphabet = alphabet;
  out.absorbed_frequency.assign(alphabet, 0.0);
  std::vector<std::int64_t> absorbed(alphabet, 0);
  Moments collapse_time;

  // Blocks bound the memory held by finished-but-unreduced trajectories.
  const std::size_t per_trajectory = generations * (options.track_mean_distribution ? alphabet + 4 : 4);
  const std::size_t block = std::clamp<std::size_t>((std::size_t{1} << 24) / std::max<std::size_t>(per_trajectory, 1),
                                                    std::size_t{threads}, std::size_t{4096});

  const auto total = static_cast<std::size_t>(replicates);
  std::vector<Trajectory> buffer;
  for (std::size_t start = 0; start < total; start += block) {
    const std::size_t size = std::min(block, total - start);
    buffer.assign(size, Trajectory{});
    parallel_for(size, threads, [&](std::size_t i) { buffer[i] = run_chain(chain, start + i); });

    for (auto& traj : buffer) {
      for (std::size_t g = 0; g < generations; ++g) {
        sigma[g].add(traj.sigma[g]);
        sup[g].add(traj.sup[g]);
        l1_gen0[g].add(traj.l1_to_gen0[g]);
        l1_gen1[g].add(traj.l1_to_gen1[g]);
        if (options.track_mean_distribution) {
          const auto& counts = traj.counts[g];
          const auto t = static_cast<double>(std::accumulate(counts.begin(), counts.end(), Count{0}));
          for (std::size_t i = 0; i < alphabet; ++i) mean_p[g][i].add(static_cast<double>(counts[i]) / t);
        }
      }
      if (traj.collapse_time) {
        ++out.collapsed;
        ++out.collapse_histogram[*traj.collapse_time];
        ++absorbed[*traj.absorbed_token];
        collapse_time.add(static_cast<double>(*traj.collapse_time));
      } else {
        ++out.uncollapsed;
      }
      if (options.keep_traces) {
        out.sigma_traces.push_back(std::move(traj.sigma));
        out.l1_gen1_traces.push_back(std::move(traj.l1_to_gen1));
        out.collapse_times.push_back(traj.collapse_time);
      }
    }
  }

  auto unpack = [generations](const std::vector<Moments>& acc, std::vector<double>& mean, std::vector<double>& se) {
    mean.resize(generations);
    se.resize(generations);
    for (std::size_t g = 0; g < generations; ++g) {
      mean[g] = acc[g].value();
      se[g] = acc[g].standard_error();
    }
  };
  unpack(sigma, out.sigma_mean, out.sigma_se);
  unpack(sup, out.sup_mean, out.sup_se);
  unpack(l1_gen0, out.l1_gen0_mean, out.l1_gen0_se);
  unpack(l1_gen1, out.l1_gen1_mean, out.l1_gen1_se);

  out.rho.assign(generations, 0.0);
  std::int64_t running = 0;
  auto hist = out.collapse_histogram.begin();
  for (std::size_t g = 0; g < generations; ++g) {
    while (hist != out.collapse_histogram.end() && hist->first <= static_cast<int>(g + 1)) {
      running += hist->second;
      ++hist;
    }
    out.rho[g] = static_cast<double>(running) / static_cast<double>(replicates);
  }

  out.collapse_time_mean = collapse_time.value();
  for (std::size_t i = 0; i < alphabet; ++i) {
    out.absorbed_frequency[i] = static_cast<double>(absorbed[i]) / static_cast<double>(replicates);
  }

  if (options.track_mean_distribution) {
    out.mean_distribution.assign(generations, std::vector<double>(alphabet));
    out.mean_distribution_se.assign(generations, std::vector<double>(alphabet));
    for (std::size_t g = 0; g < generations; ++g) {
      for (std::size_t i = 0; i < alphabet; ++i) {
        out.mean_distribution[g][i] = mean_p[g][i].value();
        out.mean_distribution_se[g][i] = mean_p[g][i].standard_error();
      }
    }
  }
  return out;
}

CollapseStatistics collapse_statistics(const EnsembleSummary& summary) {
  if (summary.collapsed == 0) {
    throw Error(Errc::no_collapsed_replicates,
                "none of " + std::to_string(summary.replicates) + " replicates collapsed");
  }
  CollapseStatistics out;
  out.histogram = summary.collapse_histogram;
  out.absorbed_frequency = summary.absorbed_frequency;
  out.collapsed = summary.collapsed;
  out.uncollapsed = summary.uncollapsed;

  Moments times;
  for (const auto& [t, count] : summary.collapse_histogram) {
    for (std::int64_t k = 0; k < count; ++k) times.add(static_cast<double>(t));
  }
  out.mean_time = times.value();
  out.mean_time_se = times.standard_error();
  return out;
}

LambdaEstimate estimate_expected_lambda1(const ProbVec& p0, Count corpus_size, int draws, std::uint64_t seed) {
  if (draws < 1 || corpus_size < 1) throw Error(Errc::validation_error, "need draws >= 1 and corpus_size >= 1");
  Moments lambda;
  int exact = 0;
  for (int d = 0; d < draws; ++d) {
    RandomStream rng = derive_stream(seed, static_cast<std::uint64_t>(d));
    const auto p1 = ProbVec::from_counts(sample_counts(p0, corpus_size, rng));
    const auto stats = partition_stats(p1);
    lambda.add(stats.lambda_max);
    exact += stats.exact ? 1 : 0;
  }
  LambdaEstimate out;
  out.mean = lambda.value();
  out.se = draws > 1 ? lambda.standard_error() : 0.0;
  out.exact_fraction = static_cast<double>(exact) / static_cast<double>(draws);
  return out;
}

} // namespace collapse
