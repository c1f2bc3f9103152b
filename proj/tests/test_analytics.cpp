#include "collapse/analytics.hpp"
#include "collapse/error.hpp"
#include "collapse/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace collapse;
using namespace collapse::analytics;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::io_error;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("constants") {
  CHECK(kC0 == doctest::Approx(std::exp(3.0) / (2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(kC1 == doctest::Approx(6.0 * std::numbers::e / std::pow(std::numbers::pi, 1.5)).epsilon(1e-15));
}

TEST_CASE("s_m_fully examples") {
  CHECK(s_m_fully(1.0, 7, 5) == 1.0);
  CHECK(s_m_fully(1.0, 7, 0) == 1.0);
  for (int m : {1, 2, 10}) CHECK(s_m_fully(0.3, 1, m) == 1.0);
  CHECK(s_m_fully(0.1, 10, 1) == doctest::Approx(0.19).epsilon(1e-14));
  CHECK(s_m_fully(0.25, 4, 0) == 0.25);
  CHECK(code_of([] { s_m_fully(0.5, 0, 1); }) == Errc::out_of_range);
  CHECK(code_of([] { s_m_fully(0.5, 3, -1); }) == Errc::out_of_range);
  CHECK(code_of([] { s_m_fully(1.5, 3, 1); }) == Errc::out_of_range);
}

TEST_CASE("property: S_m = 1/n + (1 - 1/n) S_(m-1)") {
  RandomStream rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const double s0 = 0.01 + 0.99 * rng.uniform();
    const auto n = static_cast<std::int64_t>(1 + rng.below(1000));
    const int m = 1 + static_cast<int>(rng.below(500));
    const double nn = static_cast<double>(n);
    const double expected = 1.0 / nn + (1.0 - 1.0 / nn) * s_m_fully(s0, n, m - 1);
    CHECK(rel(s_m_fully(s0, n, m), expected) <= 1e-12);
  }
}

TEST_CASE("s_m_fully matches the exact two-token chain") {
  for (int n : {2, 3, 5, 8}) {
    const double p = 0.3;
    const double s0 = p * p + (1 - p) * (1 - p);
    const auto exact = oracle::two_token_fully(n, p, 40);
    for (int m = 1; m <= 40; ++m) CHECK(rel(s_m_fully(s0, n, m), exact.s_m[m - 1]) <= 1e-12);
  }
}

TEST_CASE("rho_bounds") {
  const RhoBounds zero = rho_bounds(0.1, 100, 52, 0);
  CHECK(zero.lower.value == 0.0);
  CHECK(zero.lower.raw < 0.0);
  CHECK(zero.lower.vacuous);

  const RhoBounds late = rho_bounds(0.1, 100, 52, 20000);
  CHECK(late.lower.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(late.upper.value == doctest::Approx(1.0).epsilon(1e-9));

  for (int m : {1, 10, 100, 500, 2000}) {
    const RhoBounds b = rho_bounds(0.1, 100, 52, m);
    CHECK(b.lower.value <= b.upper.value);
    CHECK(b.lower.value >= 0.0);
    CHECK(b.upper.value <= 1.0);
  }

  // Two tokens: s~ = 2 and the exact chain sits between the bounds.
  for (int n : {2, 4, 7}) {
    const double p = 0.35;
    const double s0 = p * p + (1 - p) * (1 - p);
    const auto exact = oracle::two_token_fully(n, p, 60);
    for (int m = 1; m <= 60; ++m) {
      const RhoBounds b = rho_bounds(s0, n, 2, m);
      CHECK(b.lower.value <= exact.rho_m[m - 1] + 1e-12);
      CHECK(exact.rho_m[m - 1] <= b.upper.value + 1e-12);
    }
  }
  CHECK(code_of([] { rho_bounds(0.1, 1, 52, 3); }) == Errc::out_of_range);
  CHECK(code_of([] { rho_bounds(0.1, 10, 1, 3); }) == Errc::out_of_range);
}

TEST_CASE("expected_t_bounds") {
  const TimeBounds a = expected_t_bounds(1.0, 50, 10);
  CHECK(a.lower == 1.0);
  CHECK(a.upper == 1.0);
  const TimeBounds b = expected_t_bounds(0.4, 1, 10);
  CHECK(b.lower == 1.0);
  CHECK(b.upper == 1.0);
  const TimeBounds c = expected_t_bounds(0.1, 100, 52);
  // 1 + 0.9 * 99 / (51/52)
  CHECK(c.lower == doctest::Approx(1.0 + 0.9 * 99.0 * 52.0 / 51.0).epsilon(1e-14));
  CHECK(c.lower == doctest::Approx(91.85).epsilon(1e-4));
  CHECK(c.upper == doctest::Approx(8911.0).epsilon(1e-14));
}

TEST_CASE("prop1_limit_law") {
  const ProbVec p = validate({0.5, 0.3, 0.2});
  const ProbVec law = prop1_limit_law(p);
  for (std::size_t i = 0; i < 3; ++i) CHECK(law[i] == p[i]);
  CHECK(is_dirac(prop1_limit_law(ProbVec::dirac(4, 1))));
}

TEST_CASE("partial constants") {
  CHECK(partial_alpha(100, 10) == doctest::Approx(1.0 / 11.0).epsilon(1e-15));
  // (1/11) ((101/100)(1/11) - 1/100)
  CHECK(partial_beta(100, 10) == doctest::Approx((1.0 / 11.0) * (1.01 / 11.0 - 0.01)).epsilon(1e-14));
  CHECK(partial_beta(100, 10) == doctest::Approx(0.00744).epsilon(1e-3));
}

TEST_CASE("s_m_partial") {
  CHECK(s_m_partial(0.1, 100, 10, 1) == doctest::Approx(0.01 + 0.99 * 0.1).epsilon(1e-14));
  const double limit = s_m_partial(0.1, 1000000, 1, 30);
  CHECK(limit == doctest::Approx(1e-6 + (1 - 1e-6) * 0.1).epsilon(1e-5));

  for (auto [real_n, n] : {std::pair{6, 2}, {10, 5}, {4, 12}, {20, 3}}) {
    const double p = 0.3;
    const double s0 = p * p + (1 - p) * (1 - p);
    const auto exact = oracle::two_token_partial_s_m(real_n, n, p, 25);
    for (int g = 1; g <= 25; ++g) CHECK(rel(s_m_partial(s0, real_n, n, g), exact[g - 1]) <= 1e-10);
  }
  CHECK(code_of([] { s_m_partial(0.1, 1, 10, 2); }) == Errc::out_of_range);
  CHECK(code_of([] { s_m_partial(0.1, 100, 10, 0); }) == Errc::out_of_range);
}

TEST_CASE("g_n examples") {
  const GnValue a = g_n(2, 10);
  CHECK(a.branch == GnBranch::subsets);
  CHECK(a.value == 2.0);

  const GnValue b = g_n(600, 5);
  CHECK(b.branch == GnBranch::exponential);
  CHECK(b.value == doctest::Approx(kC1 * 600.0 * std::exp(kC0 * 5.0 / (2.0 * std::numbers::e))).epsilon(1e-14));
  CHECK(b.value == doctest::Approx(3.3e4).epsilon(0.01));

  CHECK(g_n(12, 10).branch == GnBranch::power);
  CHECK(g_n(14, 10).branch == GnBranch::exponential);
  CHECK(std::isinf(g_n(5000, 2000).value));
  CHECK(g_n_exponential_threshold(10) == doctest::Approx(kC0 * 10.0 / std::numbers::e + 2.0));
  CHECK(g_n_power_threshold(10) == doctest::Approx(kC0 * 10.0 / 4.0 + 2.0));
  CHECK(to_string(GnBranch::power) == "power");
}

TEST_CASE("g_n branch boundaries") {
  // The exponential and power formulas coincide at s = C0 n / e, two below
  // the stated regime boundary.
  for (std::int64_t n : {1, 5, 10, 40}) {
    const double s = kC0 * static_cast<double>(n) / std::numbers::e;
    CHECK(rel(g_n_branch_formula(GnBranch::power, s, n), g_n_branch_formula(GnBranch::exponential, s, n)) <= 1e-9);
  }

  // At the stated boundaries the formulas jump; the gaps are frozen here.
  const double s1 = g_n_exponential_threshold(5);
  CHECK(g_n_branch_formula(GnBranch::exponential, s1, 5) == doctest::Approx(436.60).epsilon(1e-4));
  CHECK(g_n_branch_formula(GnBranch::power, s1, 5) == doctest::Approx(374.46).epsilon(1e-4));
  const double s2 = g_n_power_threshold(5);
  CHECK(rel(g_n_branch_formula(GnBranch::power, s2, 5) / g_n_branch_formula(GnBranch::subsets, s2, 5),
            kC1 * s2 * std::pow(kC0 * 5.0 / s2, s2 / 2.0) / (std::exp2(s2) - 2.0)) <= 1e-12);
  CHECK(g_n_branch_formula(GnBranch::power, s2, 5) > g_n_branch_formula(GnBranch::subsets, s2, 5));
}

TEST_CASE("phi") {
  CHECK(phi(0.5) == 2.0);
  CHECK(phi(0.25) == doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-14));
  CHECK(std::isinf(phi(0.0)));
  CHECK(code_of([] { phi(-0.1); }) == Errc::out_of_range);
  CHECK(code_of([] { phi(0.6); }) == Errc::out_of_range);

  double previous = phi(1e-12);
  for (int i = 1; i <= 10000; ++i) {
    const double x = 0.5 * i / 10000.0;
    const double v = phi(x);
    CHECK(v >= 2.0);
    CHECK(v <= previous);
    previous = v;
  }
  for (double d : {1e-3, 1e-5, 1e-6, 5e-7, 1e-8, 1e-12}) {
    CHECK(std::abs(phi(0.5 - d) - 2.0) <= 8.0 / 3.0 * d * d + 1e-9);
  }
}

TEST_CASE("concentration_tail") {
  const double eps = 0.5;
  const CappedValue b = concentration_tail(0.5, 100, 2, eps);
  CHECK(b.value == doctest::Approx(2.0 * std::exp(-12.5)).epsilon(1e-12));
  CHECK_FALSE(b.vacuous);

  // ||p_hat - p||_1 = 2 |X/n - 1/2| for two fair tokens.
  const double exact = oracle::fair_binomial_two_sided_tail(100, 100 * eps / 2.0);
  CHECK(exact <= b.value);

  std::mt19937_64 gen(8);
  std::binomial_distribution<int> bin(100, 0.5);
  int hits = 0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    if (2.0 * std::abs(bin(gen) / 100.0 - 0.5) >= eps) ++hits;
  }
  CHECK(static_cast<double>(hits) / draws <= b.value);

  CHECK(concentration_tail(0.5, 100, 600, 1e-9).value == 1.0);
  CHECK(concentration_tail(0.5, 100, 600, 1e-9).vacuous);
  CHECK(concentration_tail(0.5, 200, 3, 0.3).value > concentration_tail(0.1, 200, 3, 0.3).value);
  CHECK(concentration_tail(0.0, 200, 3, 0.3).value == 0.0);
  CHECK(code_of([] { concentration_tail(0.5, 10, 3, 0.0); }) == Errc::out_of_range);
}

TEST_CASE("deviation_bound") {
  const CappedValue a = deviation_bound(1000000, 5, 600);
  CHECK(a.value == doctest::Approx(0.093).epsilon(0.01));
  CHECK(a.value == doctest::Approx(1e-6 * std::sqrt(std::numbers::pi * 5 / 2.0) * g_n(600, 5).value).epsilon(1e-14));
  CHECK_FALSE(a.vacuous);

  const CappedValue v = deviation_bound(100, 1000, 600);
  CHECK(v.vacuous);
  CHECK(v.value == 2.0);
  CHECK(v.raw > 2.0);

  double previous = 2.0;
  for (std::int64_t real_n = 1000; real_n <= 1000000000; real_n *= 10) {
    const double x = deviation_bound(real_n, 5, 600).value;
    CHECK(x <= previous);
    previous = x;
  }
  CHECK(previous < 1e-4);
}

TEST_CASE("deviation_bound_general") {
  using Case = std::array<std::int64_t, 3>;
  for (auto [real_n, n, s] : {Case{1000000, 5, 600}, Case{100, 10, 600}, Case{5000, 3, 40}, Case{50, 2, 2}}) {
    const auto g = deviation_bound_general(real_n, n, s, 0.25);
    CHECK(g.zeta == 0.5);
    CHECK(rel(g.bound.raw, deviation_bound(real_n, n, s).raw) <= 1e-12);
  }
  const auto dirac = deviation_bound_general(100, 10, 600, 0.0);
  CHECK(dirac.zeta == doctest::Approx(0.5 - 0.5 * std::pow(100.0 / 110.0, 2)).epsilon(1e-14));
  CHECK(dirac.bound.raw < deviation_bound(100, 10, 600).raw);

  double previous = deviation_bound_general(1000, 10, 600, 0.0).bound.raw;
  for (double lambda : {0.05, 0.1, 0.2, 0.25}) {
    const double x = deviation_bound_general(1000, 10, 600, lambda).bound.raw;
    CHECK(x > previous);
    previous = x;
  }
  CHECK(code_of([] { deviation_bound_general(100, 10, 600, 0.3); }) == Errc::out_of_range);
}

TEST_CASE("max_synthetic_n") {
  const SyntheticBudget b = max_synthetic_n(600, 1000000000, 0.1);
  CHECK(b.n == 9);
  CHECK_FALSE(b.non_positive);
  CHECK_FALSE(b.regime_violation);
  CHECK(deviation_bound(1000000000, b.n, 600).value <= 0.1);

  const SyntheticBudget z = max_synthetic_n(600, 100, 0.1);
  CHECK(z.n == 0);
  CHECK(z.non_positive);

  std::int64_t previous = 0;
  for (std::int64_t real_n = 1000; real_n <= 1000000000000; real_n *= 10) {
    const auto x = max_synthetic_n(600, real_n, 0.1);
    CHECK(x.n >= previous);
    previous = x.n;
  }
  // min(s - 2, ...) caps the budget for a small vocabulary.
  const SyntheticBudget small = max_synthetic_n(10, 1000000000000, 0.1);
  CHECK(small.n == static_cast<std::int64_t>(std::floor(8.0 * 2.0 * std::numbers::pi * std::exp(-2.0))));
  CHECK(small.n == 6);
  CHECK_FALSE(small.regime_violation);
  CHECK(max_synthetic_n(3, 1000000000000, 0.1).n == 0);
  CHECK(code_of([] { max_synthetic_n(2, 1000, 0.1); }) == Errc::out_of_range);
}

TEST_CASE("bounds_report") {
  BoundsInputs in;
  in.kind = ScheduleKind::fully_synthetic;
  in.s0 = 0.1;
  in.n = 100;
  in.s = 600;
  in.support = 52;
  in.first_generation = 1;
  in.last_generation = 10;
  const BoundsReport r = bounds_report(in);
  CHECK(r.generations.size() == 10);
  CHECK(r.s_m_values.size() == 10);
  CHECK(r.rho.size() == 10);
  REQUIRE(r.t_bounds);
  CHECK(r.t_bounds->upper == 8911.0);
  CHECK_FALSE(r.deviation);

  in.kind = ScheduleKind::partially_synthetic;
  in.real_n = 100;
  in.n = 10;
  in.eps = 0.1;
  in.expected_lambda1 = 0.2;
  const BoundsReport p = bounds_report(in);
  CHECK(p.rho.empty());
  CHECK(p.s_m_values[0] == doctest::Approx(s_m_partial(0.1, 100, 10, 1)));
  CHECK(p.deviation);
  CHECK(p.max_n);
  CHECK(p.general);
}
