#pragma once

#include <vector>

#include "lrf/dataset.hpp"
#include "lrf/model.hpp"
#include "lrf/parallel.hpp"
#include "lrf/solvers.hpp"

namespace lrf {

/// Everything needed to turn image pairs into a model, except the
/// regularizer value.
struct TrainSpec {
  SolverKind solver = SolverKind::Masked;
  ChannelStrategy strategy = ChannelStrategy::Grayscale;
  int taps_per_side = 3;  // masked regression only
  int dilation = 1;       // masked regression only
  LassoOptions lasso;
  std::size_t ridge_cap = kDefaultRidgeCap;
};

/// Fits one mapping per design set. `lambda` is lambda_M, lambda_2 or
/// lambda_1 depending on the solver, and the integer support bound for OMP.
/// Masked models record the receptive-field geometry; the global baselines
/// record a full-coverage geometry.
SparseRowModel fit_model(const std::vector<DesignSet>& designs, const TrainSpec& spec, double lambda,
                         const Executor& exec = Executor{});

SparseRowModel fit_model(const std::vector<ImagePair>& pairs, const TrainSpec& spec, double lambda,
                         const Executor& exec = Executor{});

}  // namespace lrf
