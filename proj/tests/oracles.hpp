#pragma once

// Reference computations used only by the tests. Each one is written from the
// model definition directly and shares no code with the library.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

/// log C(n, k)
inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// P(Bin(n, p) = k), exact at the endpoints p = 0 and p = 1.
inline double binomial_pmf(int n, int k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

/// Two-token fully synthetic chain: the state is the count j in {0..n} of
/// token 0; generation 1 is Bin(n, p), and j -> Bin(n, j / n) afterwards.
struct TwoTokenChain {
  std::vector<double> s_m;   // E[sigma_m], m = 1..M
  std::vector<double> rho_m; // P(T <= m)
};

inline TwoTokenChain two_token_fully(int n, double p, int generations) {
  std::vector<std::vector<long double>> step(n + 1, std::vector<long double>(n + 1));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) step[i][j] = binomial_pmf(n, j, static_cast<double>(i) / n);
  }
  std::vector<long double> dist(n + 1);
  for (int j = 0; j <= n; ++j) dist[j] = binomial_pmf(n, j, p);
  TwoTokenChain out;
  for (int m = 1; m <= generations; ++m) {
    if (m > 1) {
      std::vector<long double> next(n + 1, 0.0L);
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) next[j] += dist[i] * step[i][j];
      }
      dist = next;
    }
    long double s = 0.0L;
    for (int j = 0; j <= n; ++j) {
      const long double x = static_cast<long double>(j) / n;
      s += dist[j] * (x * x + (1 - x) * (1 - x));
    }
    out.s_m.push_back(static_cast<double>(s));
    out.rho_m.push_back(static_cast<double>(dist[0] + dist[n]));
  }
  return out;
}

/// Two-token partially synthetic chain, enumerated exactly: corpus count
/// c ~ Bin(N, p) fixed forever, generation 1 is c / N, and generation m >= 2
/// is (c + k) / (N + n) with k ~ Bin(n, previous model's token-0 mass).
inline std::vector<double> two_token_partial_s_m(int real_n, int n, double p, int generations) {
  std::vector<double> s(generations, 0.0);
  for (int c = 0; c <= real_n; ++c) {
    const double wc = binomial_pmf(real_n, c, p);
    if (wc == 0.0) continue;
    const double q1 = static_cast<double>(c) / real_n;
    s[0] += wc * (q1 * q1 + (1 - q1) * (1 - q1));
    // Distribution over k for the current generation; the model mass is a
    // function of k only once m >= 2.
    std::vector<double> dist(n + 1);
    for (int k = 0; k <= n; ++k) dist[k] = binomial_pmf(n, k, q1);
    for (int m = 2; m <= generations; ++m) {
      if (m > 2) {
        std::vector<double> next(n + 1, 0.0);
        for (int k = 0; k <= n; ++k) {
          const double q = static_cast<double>(c + k) / (real_n + n);
          for (int j = 0; j <= n; ++j) next[j] += dist[k] * binomial_pmf(n, j, q);
        }
        dist = next;
      }
      double acc = 0.0;
      for (int k = 0; k <= n; ++k) {
        const double q = static_cast<double>(c + k) / (real_n + n);
        acc += dist[k] * (q * q + (1 - q) * (1 - q));
      }
      s[m - 1] += wc * acc;
    }
  }
  return s;
}

/// max over subsets A of min(p(A), 1 - p(A)) and of p(A)(1 - p(A)), by
/// recursion over include/exclude decisions.
struct Partition {
  double pi = 0.0;
  double lambda = 0.0;
};

inline void partition_walk(const std::vector<double>& p, std::size_t i, long double mass, Partition& best) {
  if (i == p.size()) {
    const double a = static_cast<double>(mass);
    best.pi = std::fmax(best.pi, std::fmin(a, 1.0 - a));
    best.lambda = std::fmax(best.lambda, a * (1.0 - a));
    return;
  }
  partition_walk(p, i + 1, mass, best);
  partition_walk(p, i + 1, mass + p[i], best);
}

inline Partition partition_brute_force(const std::vector<double>& p) {
  Partition best;
  partition_walk(p, 0, 0.0L, best);
  return best;
}

/// P(|X - n/2| >= t) for X ~ Bin(n, 1/2).
inline double fair_binomial_two_sided_tail(int n, double t) {
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    if (std::abs(k - n / 2.0) >= t) acc += binomial_pmf(n, k, 0.5);
  }
  return acc;
}

/// Shannon entropy in nats.
inline double entropy(const std::vector<double>& q) {
  double h = 0.0;
  for (double x : q) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

} // namespace oracle
