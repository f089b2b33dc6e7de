#include "lrf/evaluation.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lrf/error.hpp"

namespace lrf {

double mse_x100(const std::vector<ImageBuffer>& predicted, const std::vector<ImageBuffer>& targets) {
  if (predicted.empty()) throw DataError("mse needs at least one image");
  if (predicted.size() != targets.size())
    throw DataError("mse: " + std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(targets.size()) + " targets");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (!predicted[i].same_shape(targets[i])) throw DataError("mse: shape mismatch at image " + std::to_string(i));
    for (std::size_t p = 0; p < predicted[i].data.size(); ++p) {
      const double e = predicted[i].data[p] - targets[i].data[p];
      sum += e * e;
    }
    count += predicted[i].data.size();
  }
  return 100.0 * sum / double(count);
}

double evaluate_mse_x100(const SparseRowModel& model, const std::vector<ImagePair>& pairs) {
  std::vector<ImageBuffer> predicted, targets;
  predicted.reserve(pairs.size());
  targets.reserve(pairs.size());
  for (const auto& p : pairs) {
    predicted.push_back(synthesize_raw(model, p.input));
    targets.push_back(p.target);
  }
  return mse_x100(predicted, targets);
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw UsageError("linspace needs at least one point");
  if (count == 1) return {lo};
  std::vector<double> v(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) v[std::size_t(i)] = lo + (hi - lo) * double(i) / double(count - 1);
  v.back() = hi;
  return v;
}

std::vector<double> logspace(double lo_exp, double hi_exp, int count) {
  auto v = linspace(lo_exp, hi_exp, count);
  for (auto& x : v) x = std::pow(10.0, x);
  return v;
}

void CvGrid::validate() const {
  if (values.empty()) throw UsageError("cross-validation grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0)) throw UsageError("grid values must be positive");
    if (i > 0 && !(values[i] > values[i - 1])) throw UsageError("grid values must be strictly increasing");
    if (solver == SolverKind::Omp && std::floor(values[i]) != values[i])
      throw UsageError("OMP grid values must be integers");
  }
}

CvGrid CvGrid::defaults(SolverKind solver, std::size_t train_examples, std::size_t input_dim, int taps_per_side,
                        bool comparable_omp) {
  CvGrid g;
  g.solver = solver;
  switch (solver) {
    case SolverKind::Masked:
    case SolverKind::Ridge:
      g.values = linspace(0.1, 10.0, 10);
      break;
    case SolverKind::Lasso:
      g.values = logspace(-3.0, 2.0, 100);
      break;
    case SolverKind::Omp: {
      std::size_t hi = std::max<std::size_t>(1, train_examples);
      if (comparable_omp) hi = std::min(hi, std::size_t(taps_per_side) * std::size_t(taps_per_side) + 1);
      hi = std::min(hi, input_dim + 1);
      for (std::size_t v = 1; v <= hi; ++v) g.values.push_back(double(v));
      break;
    }
  }
  return g;
}

CvResult cross_validate(const std::vector<ImagePair>& train, const std::vector<ImagePair>& val,
                        const TrainSpec& spec, const CvGrid& grid, const Executor& exec) {
  grid.validate();
  if (grid.solver != spec.solver) throw UsageError("grid solver does not match the training solver");
  if (train.empty()) throw DataError("cross-validation needs a nonempty training set");
  if (val.empty()) throw DataError("cross-validation needs a nonempty validation set");

  const auto designs = build_design_set(train, spec.strategy);
  CvResult out;
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : grid.values) {
    const auto model = fit_model(designs, spec, lambda, exec);
    const double score = evaluate_mse_x100(model, val);
    out.scores.emplace_back(lambda, score);
    if (score < best) {
      best = score;
      out.best_lambda = lambda;
    }
  }
  if (!std::isfinite(best)) throw NumericError("every grid value produced a non-finite validation score");

  std::vector<ImagePair> combined = train;
  combined.insert(combined.end(), val.begin(), val.end());
  out.model = fit_model(combined, spec, out.best_lambda, exec);
  return out;
}

double sparsity_ratio(const SparseRowModel& a, const SparseRowModel& b, double tolerance) {
  const auto den = count_nonzeros(b, tolerance);
  if (den == 0) throw NumericError("sparsity ratio: the second model has no nonzeros");
  return double(count_nonzeros(a, tolerance)) / double(den);
}

std::vector<RfSweepEntry> rf_sweep(const std::vector<ImagePair>& train, const std::vector<ImagePair>& val,
                                   TrainSpec spec, const std::vector<int>& taps, const CvGrid& grid,
                                   const Executor& exec) {
  spec.solver = SolverKind::Masked;
  grid.validate();
  const auto designs = build_design_set(train, spec.strategy);
  std::vector<RfSweepEntry> out;
  for (int r : taps) {
    spec.taps_per_side = r;
    RfSweepEntry e{r, 0.0, std::numeric_limits<double>::infinity()};
    for (double lambda : grid.values) {
      const double score = evaluate_mse_x100(fit_model(designs, spec, lambda, exec), val);
      if (score < e.val_mse_x100) {
        e.val_mse_x100 = score;
        e.best_lambda = lambda;
      }
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace lrf
