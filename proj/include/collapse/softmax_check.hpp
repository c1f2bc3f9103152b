#pragma once

#include "collapse/dist_core.hpp"

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

// Cross-entropy training of a next-token model with one-hot context
// embeddings, used to check that its stationary points are the empirical
// conditional frequencies.
namespace collapse::softmax {

/// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Logits per (context, token).
using WeightMatrix = Matrix;

/// c contexts, s tokens, stored as a c x s count matrix.
class TokenDataset {
public:
  /// Throws OutOfRange for indices outside [0, c) x [0, s).
  static TokenDataset from_pairs(std::size_t contexts, std::size_t tokens,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
  /// Row-major counts; throws ShapeMismatch or NegativeEntry.
  static TokenDataset from_counts(std::size_t contexts, std::size_t tokens, std::vector<Count> counts);

  std::size_t contexts() const noexcept { return c_; }
  std::size_t tokens() const noexcept { return s_; }
  Count count(std::size_t j, std::size_t k) const { return counts_[j * s_ + k]; }
  Count context_size(std::size_t j) const;
  Count total() const noexcept { return total_; }

private:
  std::size_t c_ = 0;
  std::size_t s_ = 0;
  std::vector<Count> counts_;
  Count total_ = 0;
};

/// Row j = count(j, .) / |C_j|. Throws EmptyContext if any context is unseen.
Matrix empirical_conditional(const TokenDataset& data);

/// Row-wise softmax of the logits.
Matrix softmax_rows(const WeightMatrix& w);

/// -(1/M) sum_l log softmax(W x_l)[y_l]. Throws ShapeMismatch, or
/// EmptyContext for a dataset without samples.
double ce_loss(const WeightMatrix& w, const TokenDataset& data);

/// dL/dW[j][k] = (|C_j| softmax(W)[j][k] - count(j, k)) / M.
Matrix ce_gradient(const WeightMatrix& w, const TokenDataset& data);

/// Central differences of ce_loss with the given step.
Matrix finite_difference_gradient(const WeightMatrix& w, const TokenDataset& data, double step = 1e-6);

double max_abs(const Matrix& m);

/// ||a - b||_inf / ||b||_inf (absolute when b is zero).
double relative_error(const Matrix& a, const Matrix& b);

/// Largest row-wise L1 distance between the model softmax and the empirical
/// conditional over contexts that have samples.
double max_row_l1_gap(const WeightMatrix& w, const TokenDataset& data);

struct TrainResult {
  WeightMatrix w;
  int iterations = 0;
  double grad_norm = 0.0; // infinity norm at the returned weights
  bool converged = false;
};

/// Full-batch gradient descent from `start` (zeros when empty) until the
/// gradient infinity norm drops below tol or max_iters steps were taken.
TrainResult train_softmax(const TokenDataset& data, double learning_rate, int max_iters, double tol,
                          WeightMatrix start = {});

/// Returns the weights, or throws NonConvergence with the final gradient norm.
WeightMatrix require_converged(const TrainResult& result, double tol);

struct CheckReport {
  std::size_t contexts = 0;
  std::size_t tokens = 0;
  int iterations = 0;
  bool converged = false;
  double grad_norm = 0.0;
  double row_l1_gap = 0.0;
  double fd_relative_error = 0.0;
  bool pass = false;
};

inline constexpr double kRowGapTolerance = 1e-4;
inline constexpr double kFiniteDifferenceTolerance = 1e-5;

/// Random dataset with every count in [1, max_count], drawn from seed.
TokenDataset random_positive_dataset(std::size_t contexts, std::size_t tokens, Count max_count, std::uint64_t seed);

/// Trains on the dataset and checks the softmax rows against the empirical
/// conditional, and the analytic gradient against finite differences at a
/// random weight matrix.
CheckReport run_check(const TokenDataset& data, std::uint64_t seed, double learning_rate = 1.0,
                      int max_iters = 200000, double tol = 1e-8);

} // namespace collapse::softmax
