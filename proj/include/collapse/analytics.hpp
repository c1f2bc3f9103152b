#pragma once

#include "collapse/dist_core.hpp"
#include "collapse/schedules.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

// Closed-form predictions and bounds for recursive training of a categorical
// next-token model. All functions are pure; arguments outside their domain
// throw Error(Errc::out_of_range).
namespace collapse::analytics {

/// e^3 / (2 pi)
inline constexpr double kC0 = 3.1967124859800955;
/// 6 e / pi^(3/2)
inline constexpr double kC1 = 2.9290104641885737;

/// A value compared against a natural cap (1 for probabilities, 2 for L1
/// distances). `vacuous` is set when the raw value had to be clamped.
struct CappedValue {
  double raw = 0.0;
  double value = 0.0;
  bool vacuous = false;
};

// ---------------------------------------------------------------------------
// Fully synthetic

/// Expected sum of squared probabilities after m generations:
/// 1 - (1 - 1/n)^m (1 - S0).
double s_m_fully(double s0, std::int64_t n, int m);

struct RhoBounds {
  CappedValue lower;
  CappedValue upper;
};

/// Bounds on the probability that generation m is a Dirac mass:
///   1 - n (1 - S0)(1 - 1/n)^m  <=  rho_m  <=  1 - (1 - S0)/(1 - 1/s~) (1 - 1/n)^m
/// both clamped to [0, 1].
RhoBounds rho_bounds(double s0, std::int64_t n, std::int64_t support, int m);

struct TimeBounds {
  double lower = 1.0;
  double upper = 1.0;
};

/// Bounds on the expected collapse time T:
///   1 + (1 - S0)(n - 1)/(1 - 1/s~)  <=  E[T]  <=  1 + (1 - S0) n (n - 1)
TimeBounds expected_t_bounds(double s0, std::int64_t n, std::int64_t support);

/// Limit law of the absorbing token: P(lim p^(m) = delta_i) = p0_i.
ProbVec prop1_limit_law(const ProbVec& p0);

// ---------------------------------------------------------------------------
// Partially synthetic

/// alpha = n / (N + n)
double partial_alpha(std::int64_t real_n, std::int64_t n);
/// beta = alpha ((1 + 1/N) alpha - 1/N)
double partial_beta(std::int64_t real_n, std::int64_t n);

/// E[sigma_g] for generation g >= 1 of the partially synthetic chain, with
/// S0 the sum of squares of the true distribution.
///
/// The closed form is stated for S_{k+1} in terms of beta^k; this function
/// takes the generation g directly and evaluates it at k = g - 1:
///
///   S_{k+1} = (1/N)[1 + 2a - (1 - 1/N) a b^k] / D
///           + (1 - 1/N) S0 [1 + a + a b^k / N] / D,   D = 1 + (1 + 1/N) a.
///
/// At g = 1 (k = 0) it reduces to 1/N + (1 - 1/N) S0.
double s_m_partial(double s0, std::int64_t real_n, std::int64_t n, int generation);

// ---------------------------------------------------------------------------
// Concentration of empirical distributions

enum class GnBranch {
  exponential, // C1 s e^(C0 n / (2e)),      C0 n / e + 2 <= s
  power,       // C1 s (C0 n / s)^(s / 2),   C0 n / 4 + 2 <= s < C0 n / e + 2
  subsets,     // 2^s - 2,                   s < C0 n / 4 + 2
};

std::string_view to_string(GnBranch branch);

struct GnValue {
  double value = 0.0; // +inf when not representable
  GnBranch branch = GnBranch::subsets;
};

/// Combinatorial factor of the L1 concentration bound for an empirical
/// distribution of n samples over s tokens.
GnValue g_n(std::int64_t s, std::int64_t n);

/// The three branch formulas at a real-valued s, ignoring the regime test.
double g_n_branch_formula(GnBranch branch, double s, std::int64_t n);

/// Regime boundaries: C0 n / e + 2 and C0 n / 4 + 2.
double g_n_exponential_threshold(std::int64_t n);
double g_n_power_threshold(std::int64_t n);

/// phi(x) = log((1 - x) / x) / (1 - 2x) on [0, 1/2], extended by continuity
/// with phi(1/2) = 2. phi(0) = +inf. Strictly decreasing, >= 2.
double phi(double x);

/// Bound on P(||p_hat - p||_1 >= eps) for n samples:
/// min(1, exp(-n phi(pi_p) eps^2 / 4) G_n(s)).
CappedValue concentration_tail(double pi_p, std::int64_t n, std::int64_t s, double eps);

/// Bound on E||p^(m) - p^(1)||_1 for m >= 2 in the partially synthetic chain:
/// (1/N) sqrt(pi n / 2) G_n(s). `value` is capped at 2.
CappedValue deviation_bound(std::int64_t real_n, std::int64_t n, std::int64_t s);

struct GeneralDeviationBound {
  double zeta = 0.5;
  CappedValue bound;
};

/// Sharper deviation bound using E[lambda_1] = E[max_A p1(A) p1(A^c)]:
///   zeta  = 1/2 - (1/2 - 2 E[lambda_1]) (N / (N + n))^2
///   bound = (1/N) sqrt(n pi / phi(zeta)) G_n(s)
GeneralDeviationBound deviation_bound_general(std::int64_t real_n, std::int64_t n, std::int64_t s,
                                              double expected_lambda1);

struct SyntheticBudget {
  std::int64_t n = 0;
  /// The log argument sqrt(2) pi N eps / (6 e s) is <= 1, so no positive
  /// synthetic budget is guaranteed; n is 0.
  bool non_positive = false;
  /// The returned n lies outside the exponential G_n regime the budget
  /// formula assumes (C0 n / e + 2 <= s).
  bool regime_violation = false;
  double log_term = 0.0;
};

/// Largest n with E||p^(m) - p^(1)||_1 < eps guaranteed in the exponential
/// regime: floor(2 pi e^-2 min(s - 2, log(sqrt(2) pi N eps / (6 e s)))).
SyntheticBudget max_synthetic_n(std::int64_t s, std::int64_t real_n, double eps);

// ---------------------------------------------------------------------------
// Report

struct BoundsInputs {
  ScheduleKind kind = ScheduleKind::fully_synthetic;
  double s0 = 0.0;
  std::int64_t n = 1;
  std::optional<std::int64_t> real_n; // N, partially synthetic
  std::int64_t s = 2;
  std::int64_t support = 2;
  int first_generation = 1;
  int last_generation = 1;
  std::optional<double> eps;
  std::optional<double> expected_lambda1;
};

struct BoundsReport {
  BoundsInputs inputs;
  std::vector<int> generations;
  /// Closed-form S_m; fully and partially synthetic only.
  std::vector<double> s_m_values;
  /// Fully synthetic only.
  std::vector<RhoBounds> rho;
  std::optional<TimeBounds> t_bounds;
  GnValue g_n;
  std::optional<CappedValue> deviation;
  std::optional<SyntheticBudget> max_n;
  std::optional<GeneralDeviationBound> general;
};

BoundsReport bounds_report(const BoundsInputs& inputs);

} // namespace collapse::analytics
