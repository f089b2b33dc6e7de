#pragma once

#include <utility>
#include <vector>

#include "lrf/dataset.hpp"
#include "lrf/model.hpp"
#include "lrf/parallel.hpp"
#include "lrf/training.hpp"

namespace lrf {

/// Mean squared error over images, pixels and channels, times 100.
double mse_x100(const std::vector<ImageBuffer>& predicted, const std::vector<ImageBuffer>& targets);

/// mse_x100 of the model's unclamped predictions on the given pairs.
double evaluate_mse_x100(const SparseRowModel& model, const std::vector<ImagePair>& pairs);

std::vector<double> linspace(double lo, double hi, int count);
std::vector<double> logspace(double lo_exp, double hi_exp, int count);

/// Candidate regularizer values for one solver.
struct CvGrid {
  SolverKind solver = SolverKind::Masked;
  std::vector<double> values;

  /// Nonempty, positive and strictly increasing.
  void validate() const;

  /// mr / ridge: 10 values from 0.1 to 10 inclusive. lasso: 100 log-spaced
  /// values from 1e-3 to 1e2. omp: every integer from 1 to the number of
  /// training examples, or to min(N, r^2 + 1) when `comparable_omp` is set.
  /// OMP values never exceed input_dim + 1.
  static CvGrid defaults(SolverKind solver, std::size_t train_examples, std::size_t input_dim,
                         int taps_per_side = 3, bool comparable_omp = false);
};

struct CvResult {
  double best_lambda = 0.0;
  std::vector<std::pair<double, double>> scores;  // (lambda, validation mse_x100)
  SparseRowModel model;                           // refit on train + val at best_lambda
};

/// Fits on `train` for every grid value, scores on `val`, picks the lowest
/// score (ties resolved towards the smaller value), then refits on
/// train + val.
CvResult cross_validate(const std::vector<ImagePair>& train, const std::vector<ImagePair>& val,
                        const TrainSpec& spec, const CvGrid& grid, const Executor& exec = Executor{});

/// count_nonzeros(a) / count_nonzeros(b).
double sparsity_ratio(const SparseRowModel& a, const SparseRowModel& b, double tolerance);

struct RfSweepEntry {
  int taps_per_side = 0;
  double best_lambda = 0.0;
  double val_mse_x100 = 0.0;
};

/// Masked-regression validation score per receptive-field size, each with
/// its own lambda chosen from `grid`.
std::vector<RfSweepEntry> rf_sweep(const std::vector<ImagePair>& train, const std::vector<ImagePair>& val,
                                   TrainSpec spec, const std::vector<int>& taps, const CvGrid& grid,
                                   const Executor& exec = Executor{});

}  // namespace lrf
