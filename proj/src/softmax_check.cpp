#include "collapse/softmax_check.hpp"

#include "collapse/error.hpp"
#include "collapse/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace collapse::softmax {

namespace {

void check_shape(const WeightMatrix& w, const TokenDataset& data) {
  if (w.rows != data.contexts() || w.cols != data.tokens() || w.data.size() != w.rows * w.cols) {
    throw Error(Errc::shape_mismatch, "weights are " + std::to_string(w.rows) + "x" + std::to_string(w.cols) +
                                          ", dataset is " + std::to_string(data.contexts()) + "x" +
                                          std::to_string(data.tokens()));
  }
  for (double v : w.data) {
    if (!std::isfinite(v)) throw Error(Errc::out_of_range, "weight matrix has a non-finite entry");
  }
}

void require_samples(const TokenDataset& data) {
  if (data.total() == 0) throw Error(Errc::empty_context, "dataset has no samples");
}

double log_sum_exp(const double* row, std::size_t n) {
  const double top = *std::max_element(row, row + n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += std::exp(row[k] - top);
  return top + std::log(acc);
}

} // namespace

TokenDataset TokenDataset::from_pairs(std::size_t contexts, std::size_t tokens,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<Count> counts(contexts * tokens, 0);
  for (const auto& [j, k] : pairs) {
    if (j >= contexts || k >= tokens) {
      throw Error(Errc::out_of_range, "pair (" + std::to_string(j) + ", " + std::to_string(k) + ") out of range");
    }
    ++counts[j * tokens + k];
  }
  return from_counts(contexts, tokens, std::move(counts));
}

TokenDataset TokenDataset::from_counts(std::size_t contexts, std::size_t tokens, std::vector<Count> counts) {
  if (contexts == 0 || tokens == 0) throw Error(Errc::shape_mismatch, "dataset needs at least one context and token");
  if (counts.size() != contexts * tokens) {
    throw Error(Errc::shape_mismatch, "expected " + std::to_string(contexts * tokens) + " counts, got " +
                                          std::to_string(counts.size()));
  }
  TokenDataset out;
  out.c_ = contexts;
  out.s_ = tokens;
  for (Count v : counts) {
    if (v < 0) throw Error(Errc::negative_entry, "negative count");
    out.total_ += v;
  }
  out.counts_ = std::move(counts);
  return out;
}

Count TokenDataset::context_size(std::size_t j) const {
  Count acc = 0;
  for (std::size_t k = 0; k < s_; ++k) acc += count(j, k);
  return acc;
}

Matrix empirical_conditional(const TokenDataset& data) {
  Matrix out(data.contexts(), data.tokens());
  for (std::size_t j = 0; j < data.contexts(); ++j) {
    const Count size = data.context_size(j);
    if (size == 0) throw Error(Errc::empty_context, "context " + std::to_string(j) + " has no samples");
    for (std::size_t k = 0; k < data.tokens(); ++k) {
      out(j, k) = static_cast<double>(data.count(j, k)) / static_cast<double>(size);
    }
  }
  return out;
}

Matrix softmax_rows(const WeightMatrix& w) {
  Matrix out(w.rows, w.cols);
  for (std::size_t j = 0; j < w.rows; ++j) {
    const double* row = &w.data[j * w.cols];
    const double lse = log_sum_exp(row, w.cols);
    for (std::size_t k = 0; k < w.cols; ++k) out(j, k) = std::exp(row[k] - lse);
  }
  return out;
}

double ce_loss(const WeightMatrix& w, const TokenDataset& data) {
  check_shape(w, data);
  require_samples(data);
  double acc = 0.0;
  for (std::size_t j = 0; j < data.contexts(); ++j) {
    const double* row = &w.data[j * w.cols];
    const double lse = log_sum_exp(row, w.cols);
    for (std::size_t k = 0; k < data.tokens(); ++k) {
      const Count c = data.count(j, k);
      if (c != 0) acc += static_cast<double>(c) * (lse - row[k]);
    }
  }
  return std::max(0.0, acc / static_cast<double>(data.total()));
}

Matrix ce_gradient(const WeightMatrix& w, const TokenDataset& data) {
  check_shape(w, data);
  require_samples(data);
  const Matrix sm = softmax_rows(w);
  const auto m = static_cast<double>(data.total());
  Matrix g(w.rows, w.cols);
  for (std::size_t j = 0; j < data.contexts(); ++j) {
    const auto size = static_cast<double>(data.context_size(j));
    for (std::size_t k = 0; k < data.tokens(); ++k) {
      g(j, k) = (size * sm(j, k) - static_cast<double>(data.count(j, k))) / m;
    }
  }
  return g;
}

Matrix finite_difference_gradient(const WeightMatrix& w, const TokenDataset& data, double step) {
  check_shape(w, data);
  Matrix g(w.rows, w.cols);
  WeightMatrix probe = w;
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double saved = probe.data[i];
    probe.data[i] = saved + step;
    const double up = ce_loss(probe, data);
    probe.data[i] = saved - step;
    const double down = ce_loss(probe, data);
    probe.data[i] = saved;
    g.data[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double max_abs(const Matrix& m) {
  double out = 0.0;
  for (double v : m.data) out = std::max(out, std::abs(v));
  return out;
}

double relative_error(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw Error(Errc::shape_mismatch, "matrices differ in shape");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) diff = std::max(diff, std::abs(a.data[i] - b.data[i]));
  const double scale = max_abs(b);
  return scale > 0.0 ? diff / scale : diff;
}

double max_row_l1_gap(const WeightMatrix& w, const TokenDataset& data) {
  check_shape(w, data);
  const Matrix sm = softmax_rows(w);
  double gap = 0.0;
  for (std::size_t j = 0; j < data.contexts(); ++j) {
    const Count size = data.context_size(j);
    if (size == 0) continue;
    double row = 0.0;
    for (std::size_t k = 0; k < data.tokens(); ++k) {
      row += std::abs(sm(j, k) - static_cast<double>(data.count(j, k)) / static_cast<double>(size));
    }
    gap = std::max(gap, row);
  }
  return gap;
}

TrainResult train_softmax(const TokenDataset& data, double learning_rate, int max_iters, double tol,
                          WeightMatrix start) {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::out_of_range, "learning rate must be positive");
  }
  if (max_iters < 0) throw Error(Errc::out_of_range, "max_iters must be >= 0");
  TrainResult out;
  out.w = start.data.empty() ? WeightMatrix(data.contexts(), data.tokens()) : std::move(start);
  Matrix g = ce_gradient(out.w, data);
  out.grad_norm = max_abs(g);
  while (out.grad_norm >= tol && out.iterations < max_iters) {
    for (std::size_t i = 0; i < g.data.size(); ++i) out.w.data[i] -= learning_rate * g.data[i];
    ++out.iterations;
    g = ce_gradient(out.w, data);
    out.grad_norm = max_abs(g);
  }
  out.converged = out.grad_norm < tol;
  return out;
}

WeightMatrix require_converged(const TrainResult& result, double tol) {
  if (!(result.grad_norm < tol)) {
    throw Error(Errc::non_convergence, "gradient norm " + std::to_string(result.grad_norm) + " after " +
                                           std::to_string(result.iterations) + " iterations");
  }
  return result.w;
}

TokenDataset random_positive_dataset(std::size_t contexts, std::size_t tokens, Count max_count, std::uint64_t seed) {
  if (max_count < 1) throw Error(Errc::out_of_range, "max_count must be >= 1");
  RandomStream rng = derive_stream(seed, 0);
  std::vector<Count> counts(contexts * tokens);
  for (auto& c : counts) c = 1 + static_cast<Count>(rng.below(static_cast<std::uint64_t>(max_count)));
  return TokenDataset::from_counts(contexts, tokens, std::move(counts));
}

CheckReport run_check(const TokenDataset& data, std::uint64_t seed, double learning_rate, int max_iters, double tol) {
  CheckReport report;
  report.contexts = data.contexts();
  report.tokens = data.tokens();

  const TrainResult fit = train_softmax(data, learning_rate, max_iters, tol);
  report.iterations = fit.iterations;
  report.converged = fit.converged;
  report.grad_norm = fit.grad_norm;
  report.row_l1_gap = max_row_l1_gap(fit.w, data);

  RandomStream rng = derive_stream(seed, 1);
  WeightMatrix probe(data.contexts(), data.tokens());
  for (auto& v : probe.data) v = 2.0 * rng.uniform() - 1.0;
  report.fd_relative_error = relative_error(finite_difference_gradient(probe, data), ce_gradient(probe, data));

  report.pass = report.row_l1_gap < kRowGapTolerance && report.fd_relative_error < kFiniteDifferenceTolerance;
  return report;
}

} // namespace collapse::softmax
