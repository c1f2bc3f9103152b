#include "collapse/schedules.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <string>

namespace collapse {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::fully_synthetic: return "fully_synthetic";
    case ScheduleKind::partially_synthetic: return "partially_synthetic";
    case ScheduleKind::most_recent: return "most_recent";
    case ScheduleKind::randomly_sampled: return "randomly_sampled";
  }
  return "unknown";
}

std::string_view to_string(RealDataMode mode) {
  return mode == RealDataMode::fresh ? "fresh" : "fixed_corpus";
}

std::optional<ScheduleKind> parse_schedule_kind(std::string_view name) {
  for (auto kind : {ScheduleKind::fully_synthetic, ScheduleKind::partially_synthetic,
                    ScheduleKind::most_recent, ScheduleKind::randomly_sampled}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::optional<RealDataMode> parse_real_data_mode(std::string_view name) {
  if (name == "fresh") return RealDataMode::fresh;
  if (name == "fixed_corpus") return RealDataMode::fixed_corpus;
  return std::nullopt;
}

Schedule Schedule::fully_synthetic(Count n) {
  Schedule s;
  s.kind = ScheduleKind::fully_synthetic;
  s.n = n;
  s.check();
  return s;
}

Schedule Schedule::partially_synthetic(Count real_n, Count n) {
  Schedule s;
  s.kind = ScheduleKind::partially_synthetic;
  s.n = n;
  s.real_n = real_n;
  s.check();
  return s;
}

Schedule Schedule::most_recent(Count n, Count window) {
  Schedule s;
  s.kind = ScheduleKind::most_recent;
  s.n = n;
  s.window = window;
  s.check();
  return s;
}

Schedule Schedule::randomly_sampled(Count n, RealDataMode mode) {
  Schedule s;
  s.kind = ScheduleKind::randomly_sampled;
  s.n = n;
  s.real_data_mode = mode;
  s.check();
  return s;
}

void Schedule::check() const {
  if (n < 1) throw Error(Errc::invalid_schedule, "n must be at least 1");
  if (kind == ScheduleKind::partially_synthetic && real_n < 1) {
    throw Error(Errc::invalid_schedule, "partially_synthetic requires N >= 1");
  }
  if (kind == ScheduleKind::most_recent && window < 1) {
    throw Error(Errc::invalid_schedule, "most_recent requires K >= 1");
  }
}

Count most_recent_per_model(const Schedule& sched) { return std::max<Count>(1, sched.n / sched.window); }

namespace {

void require_generation(int m) {
  if (m < 1) throw Error(Errc::invalid_generation, "generation index must be >= 1, got " + std::to_string(m));
}

} // namespace

std::vector<Count> counts_for(const Schedule& sched, int m, RandomStream& rng) {
  require_generation(m);
  std::vector<Count> out(static_cast<std::size_t>(m), 0);
  const auto last = static_cast<std::size_t>(m - 1);
  switch (sched.kind) {
    case ScheduleKind::fully_synthetic:
      out[last] = sched.n;
      break;
    case ScheduleKind::partially_synthetic:
      out[0] = sched.real_n;
      if (m >= 2) out[last] = sched.n;
      break;
    case ScheduleKind::most_recent: {
      const Count first = std::max<Count>(0, m - sched.window);
      const Count per_model = most_recent_per_model(sched);
      for (auto t = static_cast<std::size_t>(first); t <= last; ++t) out[t] = per_model;
      break;
    }
    case ScheduleKind::randomly_sampled:
      for (Count i = 0; i < sched.n; ++i) ++out[rng.below(static_cast<std::uint64_t>(m))];
      break;
  }
  return out;
}

Count total_samples(const Schedule& sched, int m) {
  require_generation(m);
  switch (sched.kind) {
    case ScheduleKind::fully_synthetic:
    case ScheduleKind::randomly_sampled:
      return sched.n;
    case ScheduleKind::partially_synthetic:
      return m == 1 ? sched.real_n : sched.real_n + sched.n;
    case ScheduleKind::most_recent:
      return std::min<Count>(m, sched.window) * most_recent_per_model(sched);
  }
  return 0;
}

Count first_generation_size(const Schedule& sched) {
  return sched.kind == ScheduleKind::partially_synthetic ? sched.real_n : sched.n;
}

bool reuses_corpus(const Schedule& sched) {
  return sched.kind == ScheduleKind::partially_synthetic ||
         (sched.kind == ScheduleKind::randomly_sampled && sched.real_data_mode == RealDataMode::fixed_corpus);
}

} // namespace collapse
