#include "collapse/analytics.hpp"

#include "collapse/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace collapse::analytics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

void require(bool ok, const char* what) {
  if (!ok) throw Error(Errc::out_of_range, what);
}

void require_s0(double s0) { require(s0 > 0.0 && s0 <= 1.0, "S0 must lie in (0, 1]"); }

CappedValue cap(double raw, double lo, double hi) {
  CappedValue out;
  out.raw = raw;
  out.value = std::clamp(raw, lo, hi);
  out.vacuous = !(raw >= lo && raw <= hi);
  if (std::isnan(raw)) out.value = hi;
  return out;
}

double survival_factor(std::int64_t n, int m) {
  return std::pow(1.0 - 1.0 / static_cast<double>(n), static_cast<double>(m));
}

} // namespace

double s_m_fully(double s0, std::int64_t n, int m) {
  require_s0(s0);
  require(n >= 1, "n must be >= 1");
  require(m >= 0, "m must be >= 0");
  return 1.0 - survival_factor(n, m) * (1.0 - s0);
}

RhoBounds rho_bounds(double s0, std::int64_t n, std::int64_t support, int m) {
  require_s0(s0);
  require(n >= 2, "rho bounds need n >= 2");
  require(support >= 2, "rho bounds need a support of at least two tokens");
  require(m >= 0, "m must be >= 0");
  const double q = survival_factor(n, m);
  const double spread = 1.0 - s0;
  RhoBounds out;
  out.lower = cap(1.0 - static_cast<double>(n) * spread * q, 0.0, 1.0);
  out.upper = cap(1.0 - spread / (1.0 - 1.0 / static_cast<double>(support)) * q, 0.0, 1.0);
  return out;
}

TimeBounds expected_t_bounds(double s0, std::int64_t n, std::int64_t support) {
  require_s0(s0);
  require(n >= 1, "n must be >= 1");
  if (s0 == 1.0) return {1.0, 1.0};
  require(support >= 2, "a non-degenerate start needs a support of at least two tokens");
  const double spread = 1.0 - s0;
  const auto nd = static_cast<double>(n);
  TimeBounds out;
  out.lower = 1.0 + spread * (nd - 1.0) / (1.0 - 1.0 / static_cast<double>(support));
  out.upper = 1.0 + spread * nd * (nd - 1.0);
  return out;
}

ProbVec prop1_limit_law(const ProbVec& p0) { return p0; }

double partial_alpha(std::int64_t real_n, std::int64_t n) {
  require(real_n >= 1 && n >= 1, "N and n must be >= 1");
  return static_cast<double>(n) / static_cast<double>(real_n + n);
}

double partial_beta(std::int64_t real_n, std::int64_t n) {
  const double a = partial_alpha(real_n, n);
  const double inv_n = 1.0 / static_cast<double>(real_n);
  return a * ((1.0 + inv_n) * a - inv_n);
}

double s_m_partial(double s0, std::int64_t real_n, std::int64_t n, int generation) {
  require_s0(s0);
  require(real_n >= 2, "N must be >= 2");
  require(n >= 1, "n must be >= 1");
  require(generation >= 1, "generation must be >= 1");
  const double a = partial_alpha(real_n, n);
  const double b = partial_beta(real_n, n);
  const double inv_n = 1.0 / static_cast<double>(real_n);
  const double bk = std::pow(b, static_cast<double>(generation - 1));
  const double denom = 1.0 + (1.0 + inv_n) * a;
  const double noise = inv_n * (1.0 + 2.0 * a - (1.0 - inv_n) * a * bk) / denom;
  const double signal = (1.0 - inv_n) * s0 * (1.0 + a + a * bk * inv_n) / denom;
  return noise + signal;
}

std::string_view to_string(GnBranch branch) {
  switch (branch) {
    case GnBranch::exponential: return "exponential";
    case GnBranch::power: return "power";
    case GnBranch::subsets: return "subsets";
  }
  return "unknown";
}

double g_n_exponential_threshold(std::int64_t n) { return kC0 * static_cast<double>(n) / kE + 2.0; }
double g_n_power_threshold(std::int64_t n) { return kC0 * static_cast<double>(n) / 4.0 + 2.0; }

double g_n_branch_formula(GnBranch branch, double s, std::int64_t n) {
  const double c0n = kC0 * static_cast<double>(n);
  switch (branch) {
    case GnBranch::exponential:
      return kC1 * s * std::exp(c0n / (2.0 * kE));
    case GnBranch::power:
      return kC1 * s * std::pow(c0n / s, s / 2.0);
    case GnBranch::subsets:
      return std::exp2(std::min(s, 4096.0)) - 2.0;
  }
  return kInf;
}

GnValue g_n(std::int64_t s, std::int64_t n) {
  require(s >= 2, "s must be >= 2");
  require(n >= 1, "n must be >= 1");
  const auto sd = static_cast<double>(s);
  GnValue out;
  if (sd >= g_n_exponential_threshold(n)) {
    out.branch = GnBranch::exponential;
  } else if (sd >= g_n_power_threshold(n)) {
    out.branch = GnBranch::power;
  } else {
    out.branch = GnBranch::subsets;
  }
  out.value = g_n_branch_formula(out.branch, sd, n);
  if (!std::isfinite(out.value)) out.value = kInf;
  return out;
}

double phi(double x) {
  require(x >= 0.0 && x <= 0.5, "phi is defined on [0, 1/2]");
  if (x == 0.0) return kInf;
  // With u = 1 - 2x: log((1 - x)/x) = 2 atanh(u), so phi = 2 atanh(u) / u.
  const double u = 1.0 - 2.0 * x;
  if (std::abs(x - 0.5) < 1e-6) return 2.0 + 2.0 * u * u / 3.0;
  return 2.0 * std::atanh(u) / u;
}

CappedValue concentration_tail(double pi_p, std::int64_t n, std::int64_t s, double eps) {
  require(pi_p >= 0.0 && pi_p <= 0.5, "pi_p must lie in [0, 1/2]");
  require(eps > 0.0, "eps must be positive");
  const double g = g_n(s, n).value;
  const double decay = std::exp(-static_cast<double>(n) * phi(pi_p) * eps * eps / 4.0);
  const double raw = decay == 0.0 ? 0.0 : decay * g;
  return cap(raw, 0.0, 1.0);
}

CappedValue deviation_bound(std::int64_t real_n, std::int64_t n, std::int64_t s) {
  require(real_n >= 1, "N must be >= 1");
  const double g = g_n(s, n).value;
  const double raw = std::sqrt(kPi * static_cast<double>(n) / 2.0) * g / static_cast<double>(real_n);
  return cap(raw, 0.0, 2.0);
}

GeneralDeviationBound deviation_bound_general(std::int64_t real_n, std::int64_t n, std::int64_t s,
                                              double expected_lambda1) {
  require(real_n >= 1, "N must be >= 1");
  require(expected_lambda1 >= 0.0 && expected_lambda1 <= 0.25, "E[lambda_1] must lie in [0, 1/4]");
  const double g = g_n(s, n).value;
  const double ratio = static_cast<double>(real_n) / static_cast<double>(real_n + n);
  GeneralDeviationBound out;
  out.zeta = 0.5 - (0.5 - 2.0 * expected_lambda1) * ratio * ratio;
  const double raw = std::sqrt(static_cast<double>(n) * kPi / phi(out.zeta)) * g / static_cast<double>(real_n);
  out.bound = cap(raw, 0.0, 2.0);
  return out;
}

SyntheticBudget max_synthetic_n(std::int64_t s, std::int64_t real_n, double eps) {
  require(s >= 3, "s must be >= 3");
  require(real_n >= 1, "N must be >= 1");
  require(eps > 0.0, "eps must be positive");
  const double argument = std::sqrt(2.0) * kPi * static_cast<double>(real_n) * eps / (6.0 * kE * static_cast<double>(s));
  SyntheticBudget out;
  if (argument <= 1.0) {
    out.non_positive = true;
    out.log_term = std::log(argument);
    return out;
  }
  out.log_term = std::log(argument);
  const double arm = std::min(static_cast<double>(s - 2), out.log_term);
  out.n = static_cast<std::int64_t>(std::floor(2.0 * kPi * std::exp(-2.0) * arm));
  out.regime_violation = !(g_n_exponential_threshold(out.n) <= static_cast<double>(s));
  return out;
}

BoundsReport bounds_report(const BoundsInputs& in) {
  require(in.first_generation >= 1 && in.last_generation >= in.first_generation, "invalid generation range");
  BoundsReport out;
  out.inputs = in;
  for (int g = in.first_generation; g <= in.last_generation; ++g) out.generations.push_back(g);

  const bool partial = in.kind == ScheduleKind::partially_synthetic;
  if (in.kind == ScheduleKind::fully_synthetic) {
    for (int g : out.generations) out.s_m_values.push_back(s_m_fully(in.s0, in.n, g));
    if (in.n >= 2 && in.support >= 2) {
      for (int g : out.generations) out.rho.push_back(rho_bounds(in.s0, in.n, in.support, g));
    }
    out.t_bounds = expected_t_bounds(in.s0, in.n, in.support);
  } else if (partial && in.real_n && *in.real_n >= 2) {
    for (int g : out.generations) out.s_m_values.push_back(s_m_partial(in.s0, *in.real_n, in.n, g));
  }

  if (in.s >= 2) out.g_n = g_n(in.s, in.n);
  if (partial && in.real_n) {
    out.deviation = deviation_bound(*in.real_n, in.n, in.s);
    if (in.eps && in.s >= 3) out.max_n = max_synthetic_n(in.s, *in.real_n, *in.eps);
    if (in.expected_lambda1) out.general = deviation_bound_general(*in.real_n, in.n, in.s, *in.expected_lambda1);
  }
  return out;
}

} // namespace collapse::analytics
