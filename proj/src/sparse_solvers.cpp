#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lrf/error.hpp"
#include "lrf/solvers.hpp"

namespace lrf {
namespace {

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

// Exact solve on the support and signs found by coordinate descent. Kept
// only when the result satisfies the optimality conditions, which removes
// the residual error left by the stopping rule.
bool polish_on_support(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, double lambda, Eigen::Ref<Eigen::VectorXd> w,
                       double& bias) {
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (w(j) != 0.0) active.push_back(j);
  if (active.empty()) return false;

  const Eigen::RowVectorXd means = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - means;
  const Eigen::VectorXd tc = t.array() - t.mean();
  const auto A = Eigen::Index(active.size());
  Eigen::MatrixXd XA(X.rows(), A);
  Eigen::VectorXd sign(A);
  for (Eigen::Index a = 0; a < A; ++a) {
    XA.col(a) = Xc.col(active[std::size_t(a)]);
    sign(a) = w(active[std::size_t(a)]) > 0 ? 1.0 : -1.0;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(XA.transpose() * XA);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd wA = llt.solve(XA.transpose() * tc - lambda * sign);
  if (!wA.allFinite()) return false;
  for (Eigen::Index a = 0; a < A; ++a)
    if (wA(a) * sign(a) <= 0.0) return false;

  const Eigen::VectorXd r = tc - XA * wA;
  const double slack = 1e-9 * std::max(1.0, lambda);
  Eigen::VectorXd next = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index a = 0; a < A; ++a) next(active[std::size_t(a)]) = wA(a);
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (next(j) == 0.0 && std::abs(Xc.col(j).dot(r)) > lambda + slack) return false;

  w = next;
  bias = t.mean() - means.dot(next);
  return true;
}

void require_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& t) {
  if (!X.allFinite()) throw NumericError("design matrix contains non-finite values");
  if (!t.allFinite()) throw NumericError("target vector contains non-finite values");
}

}  // namespace

LassoProblem::LassoProblem(const Eigen::MatrixXd& X) : X_(X), col_sq_(X.colwise().squaredNorm().transpose()) {
  if (!X.allFinite()) throw NumericError("design matrix contains non-finite values");
}

LassoProblem::Result LassoProblem::solve(const Eigen::VectorXd& t, double lambda_1,
                                         const LassoOptions& options) const {
  if (!(lambda_1 >= 0)) throw UsageError("lambda_1 must be >= 0");
  if (t.size() != X_.rows()) throw DataError("target length does not match the design matrix");
  if (!t.allFinite()) throw NumericError("target vector contains non-finite values");
  const Eigen::Index N = X_.rows();
  const Eigen::Index D = X_.cols();

  Result out;
  out.coef = Eigen::VectorXd::Zero(D + 1);
  auto w = out.coef.head(D);
  double bias = t.mean();
  Eigen::VectorXd r = t.array() - bias;

  for (out.sweeps = 1; out.sweeps <= options.max_sweeps; ++out.sweeps) {
    // Bias first: it is unpenalized, so its update is the residual mean.
    const double db = r.sum() / double(N);
    bias += db;
    r.array() -= db;
    double max_delta = std::abs(db);
    for (Eigen::Index j = 0; j < D; ++j) {
      if (col_sq_(j) == 0.0) continue;
      const double rho = X_.col(j).dot(r) + col_sq_(j) * w(j);
      const double next = soft_threshold(rho, lambda_1) / col_sq_(j);
      const double delta = next - w(j);
      if (delta != 0.0) {
        r.noalias() -= delta * X_.col(j);
        w(j) = next;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.sweeps = std::min(out.sweeps, options.max_sweeps);
  polish_on_support(X_, t, lambda_1, w, bias);
  out.coef(D) = bias;
  return out;
}

Eigen::VectorXd solve_lasso_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, double lambda_1,
                                const LassoOptions& options) {
  require_finite(X, t);
  return LassoProblem(X).solve(t, lambda_1, options).coef;
}

OmpProblem::OmpProblem(const Eigen::MatrixXd& X) {
  if (!X.allFinite()) throw NumericError("design matrix contains non-finite values");
  augmented_.resize(X.rows(), X.cols() + 1);
  augmented_.leftCols(X.cols()) = X;
  augmented_.col(X.cols()).setOnes();
  normalized_ = augmented_;
  usable_.assign(std::size_t(augmented_.cols()), false);
  for (Eigen::Index j = 0; j < augmented_.cols(); ++j) {
    const double norm = augmented_.col(j).norm();
    if (norm > 0) {
      normalized_.col(j) /= norm;
      usable_[std::size_t(j)] = true;
    }
  }
}

Eigen::VectorXd OmpProblem::solve(const Eigen::VectorXd& t, int lambda_0) const {
  const Eigen::Index P = augmented_.cols();
  if (lambda_0 < 1 || lambda_0 > P)
    throw UsageError("lambda_0 must lie in [1, " + std::to_string(P) + "], got " + std::to_string(lambda_0));
  if (t.size() != augmented_.rows()) throw DataError("target length does not match the design matrix");
  if (!t.allFinite()) throw NumericError("target vector contains non-finite values");

  Eigen::VectorXd coef = Eigen::VectorXd::Zero(P);
  std::vector<Eigen::Index> support;
  std::vector<bool> chosen(std::size_t(P), false);
  Eigen::VectorXd r = t;
  const double stop = 1e-14 * std::max(1.0, t.norm());

  while (Eigen::Index(support.size()) < lambda_0) {
    if (r.norm() <= stop) break;
    const Eigen::VectorXd corr = normalized_.transpose() * r;
    Eigen::Index best = -1;
    double best_abs = 0.0;
    for (Eigen::Index j = 0; j < P; ++j) {
      if (chosen[std::size_t(j)] || !usable_[std::size_t(j)]) continue;
      const double a = std::abs(corr(j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0 || best_abs <= stop) break;
    support.push_back(best);
    chosen[std::size_t(best)] = true;

    Eigen::MatrixXd As(augmented_.rows(), Eigen::Index(support.size()));
    for (std::size_t a = 0; a < support.size(); ++a) As.col(Eigen::Index(a)) = augmented_.col(support[a]);
    const Eigen::VectorXd fit = As.colPivHouseholderQr().solve(t);
    r = t - As * fit;
    coef.setZero();
    for (std::size_t a = 0; a < support.size(); ++a) coef(support[a]) = fit(Eigen::Index(a));
  }
  return coef;
}

Eigen::VectorXd solve_omp_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& t, int lambda_0) {
  require_finite(X, t);
  return OmpProblem(X).solve(t, lambda_0);
}

SparseRow sparse_row_from(const Eigen::VectorXd& coef) {
  SparseRow row;
  const Eigen::Index D = coef.size() - 1;
  for (Eigen::Index j = 0; j < D; ++j) {
    if (coef(j) != 0.0) {
      row.indices.push_back(std::uint32_t(j));
      row.weights.push_back(coef(j));
    }
  }
  row.bias = coef(D);
  return row;
}

Mapping lasso_mapping(const DesignSet& design, double lambda_1, const LassoOptions& options,
                      const Executor& exec) {
  const LassoProblem problem(design.X);
  Mapping mapping(std::size_t(design.T.cols()));
  exec.for_each_index(mapping.size(), [&](std::size_t k) {
    mapping[k] = sparse_row_from(problem.solve(design.T.col(Eigen::Index(k)), lambda_1, options).coef);
  });
  return mapping;
}

Mapping omp_mapping(const DesignSet& design, int lambda_0, const Executor& exec) {
  const OmpProblem problem(design.X);
  Mapping mapping(std::size_t(design.T.cols()));
  exec.for_each_index(mapping.size(), [&](std::size_t k) {
    mapping[k] = sparse_row_from(problem.solve(design.T.col(Eigen::Index(k)), lambda_0));
  });
  return mapping;
}

}  // namespace lrf
