#include "lrf/training.hpp"

#include <cmath>
#include <string>

#include "lrf/error.hpp"

namespace lrf {

SparseRowModel fit_model(const std::vector<DesignSet>& designs, const TrainSpec& spec, double lambda,
                         const Executor& exec) {
  if (designs.empty()) throw DataError("no design sets to fit");
  const auto& d0 = designs.front();
  SparseRowModel model;
  model.strategy = d0.strategy;
  model.solver = spec.solver;
  model.lambda = lambda;
  if (designs.size() != SparseRowModel::mappings_for(model.strategy))
    throw DataError("strategy " + std::string(to_string(model.strategy)) + " expects " +
                    std::to_string(SparseRowModel::mappings_for(model.strategy)) + " design set(s)");

  if (spec.solver == SolverKind::Masked) {
    model.geometry = RfGeometry{d0.in_height, d0.in_width, d0.out_height, d0.out_width, spec.taps_per_side,
                                spec.dilation};
    const Topology topology(model.geometry);
    for (const auto& d : designs) model.mappings.push_back(solve_masked(d, topology, lambda, exec));
    return model;
  }

  model.geometry = RfGeometry::full_coverage(d0.in_height, d0.in_width, d0.out_height, d0.out_width);
  for (const auto& d : designs) {
    switch (spec.solver) {
      case SolverKind::Ridge:
        model.mappings.push_back(ridge_mapping(solve_ridge(d, lambda, spec.ridge_cap)));
        break;
      case SolverKind::Lasso:
        model.mappings.push_back(lasso_mapping(d, lambda, spec.lasso, exec));
        break;
      case SolverKind::Omp: {
        if (lambda < 1 || std::floor(lambda) != lambda)
          throw UsageError("OMP needs a positive integer support bound, got " + std::to_string(lambda));
        model.mappings.push_back(omp_mapping(d, int(lambda), exec));
        break;
      }
      case SolverKind::Masked:
        break;
    }
  }
  return model;
}

SparseRowModel fit_model(const std::vector<ImagePair>& pairs, const TrainSpec& spec, double lambda,
                         const Executor& exec) {
  return fit_model(build_design_set(pairs, spec.strategy), spec, lambda, exec);
}

}  // namespace lrf
