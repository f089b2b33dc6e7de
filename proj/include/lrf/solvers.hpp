#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "lrf/dataset.hpp"
#include "lrf/model.hpp"
#include "lrf/parallel.hpp"
#include "lrf/topology.hpp"

namespace lrf {

/// Regularizers for the four solvers.
struct Hyperparams {
  double lambda_m = 1.0;  // masked regression, > 0
  double lambda_2 = 1.0;  // ridge, > 0
  double lambda_1 = 0.0;  // LASSO, >= 0
  int lambda_0 = 1;       // OMP support bound, 1 <= lambda_0 <= D + 1

  void validate(std::size_t input_dim) const;
};

// ---------------------------------------------------------------------------
// Masked regression
// ---------------------------------------------------------------------------

/// Closed-form masked ridge regression. For each output pixel k the weights
/// over S_k = rows[k] plus the bias solve
///   (X_S^T X_S + lambda I) w = X_S^T t_k,
/// where X_S holds the columns of X in S_k and a column of ones. The bias is
/// regularized like any other weight. Rows are independent and are solved
/// in parallel on `exec`.
Mapping solve_masked(const DesignSet& design, const Topology& topology, double lambda_m,
                     const Executor& exec = Executor{});

/// Masked least-squares objective evaluated on a dense K x (D+1) weight
/// matrix (bias in the last column); weights outside the mask are ignored.
double masked_objective(const Eigen::MatrixXd& W, const DesignSet& design, const Topology& topology,
                        double lambda_m);

/// Gradient of masked_objective, flattened row by row into K*(D+1) entries.
/// Entries outside the mask are zero.
Eigen::VectorXd masked_gradient(const Eigen::MatrixXd& W, const DesignSet& design, const Topology& topology,
                                double lambda_m);

/// Second derivative with respect to weights (i, j) and (l, m); column
/// index D denotes the bias. Zero whenever i != l.
double hessian_entry(std::size_t i, std::size_t j, std::size_t l, std::size_t m, const DesignSet& design,
                     const Topology& topology, double lambda_m);

/// The diagonal Hessian block of output pixel k restricted to its masked
/// weights, ordered as topology.row(k) followed by the bias.
Eigen::MatrixXd hessian_block(std::size_t k, const DesignSet& design, const Topology& topology, double lambda_m);

// ---------------------------------------------------------------------------
// Dense ridge regression
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultRidgeCap = std::size_t(1) << 26;

/// Returns the K x (D+1) minimizer of
///   1/2 ||X_a W^T - T||^2 + lambda/2 ||W||^2
/// with X_a = [X, 1]. Refuses problems whose (D+1) x K weight matrix or
/// (D+1)^2 normal matrix exceeds `max_entries`.
Eigen::MatrixXd solve_ridge(const DesignSet& design, double lambda_2, std::size_t max_entries = kDefaultRidgeCap);

Mapping ridge_mapping(const Eigen::MatrixXd& W);

// ---------------------------------------------------------------------------
// Per-row sparse baselines
// ---------------------------------------------------------------------------

struct LassoOptions {
  double tolerance = 1e-7;  // stop when the largest coordinate update falls below this
  int max_sweeps = 10000;
};

/// Cyclic coordinate descent on 1/2 ||X w + b - t||^2 + lambda ||w||_1 with
/// an unpenalized bias b. Column norms are computed once and reused for
/// every target.
class LassoProblem {
 public:
  explicit LassoProblem(const Eigen::MatrixXd& X);

  struct Result {
    Eigen::VectorXd coef;  // D weights followed by the bias
    int sweeps = 0;
    bool converged = false;
  };

  Result solve(const Eigen::VectorXd& t, double lambda_1, const LassoOptions& options = {}) const;

 private:
  const Eigen::MatrixXd& X_;
  Eigen::VectorXd col_sq_;
};

Eigen::VectorXd solve_lasso_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, double lambda_1,
                                const LassoOptions& options = {});

/// Orthogonal matching pursuit over the columns of [X, 1]. Columns are
/// scaled to unit norm once for atom selection; the active set is refit by
/// least squares on the original columns after every selection.
class OmpProblem {
 public:
  explicit OmpProblem(const Eigen::MatrixXd& X);

  /// Returns D+1 coefficients (bias last) with at most lambda_0 nonzeros.
  Eigen::VectorXd solve(const Eigen::VectorXd& t, int lambda_0) const;

 private:
  Eigen::MatrixXd augmented_;
  Eigen::MatrixXd normalized_;
  std::vector<bool> usable_;
};

Eigen::VectorXd solve_omp_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, int lambda_0);

/// Row-parallel LASSO / OMP over every output pixel of a design set.
Mapping lasso_mapping(const DesignSet& design, double lambda_1, const LassoOptions& options = {},
                      const Executor& exec = Executor{});
Mapping omp_mapping(const DesignSet& design, int lambda_0, const Executor& exec = Executor{});

/// Keeps coefficients with |c| > 0, bias taken from the last entry.
SparseRow sparse_row_from(const Eigen::VectorXd& coef);

}  // namespace lrf
