#include "lrf/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrf/error.hpp"

namespace lrf {

void Hyperparams::validate(std::size_t input_dim) const {
  if (!(lambda_m > 0)) throw UsageError("lambda_m must be > 0");
  if (!(lambda_2 > 0)) throw UsageError("lambda_2 must be > 0");
  if (!(lambda_1 >= 0)) throw UsageError("lambda_1 must be >= 0");
  if (lambda_0 < 1 || std::size_t(lambda_0) > input_dim + 1)
    throw UsageError("lambda_0 must lie in [1, " + std::to_string(input_dim + 1) + "]");
}

namespace {

void check_geometry(const DesignSet& design, const Topology& topology) {
  const auto& g = topology.geometry();
  if (std::size_t(design.input_dim()) != g.input_size() || std::size_t(design.output_dim()) != g.output_size() ||
      design.in_height != g.in_height || design.in_width != g.in_width || design.out_height != g.out_height ||
      design.out_width != g.out_width) {
    throw DataError("design set (" + std::to_string(design.in_height) + "x" + std::to_string(design.in_width) +
                    " -> " + std::to_string(design.out_height) + "x" + std::to_string(design.out_width) +
                    ") does not match the topology geometry (" + std::to_string(g.in_height) + "x" +
                    std::to_string(g.in_width) + " -> " + std::to_string(g.out_height) + "x" +
                    std::to_string(g.out_width) + ")");
  }
  if (design.T.rows() != design.X.rows()) throw DataError("design and response row counts differ");
}

bool in_mask(const Topology& topology, std::size_t k, std::size_t j) {
  if (j == topology.geometry().input_size()) return true;  // bias column
  const auto& r = topology.row(k);
  return std::binary_search(r.begin(), r.end(), std::uint32_t(j));
}

Eigen::MatrixXd mask_matrix(const Topology& topology) {
  const auto K = Eigen::Index(topology.row_count());
  const auto D = Eigen::Index(topology.geometry().input_size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(K, D + 1);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (auto j : topology.row(std::size_t(k))) M(k, j) = 1.0;
    M(k, D) = 1.0;
  }
  return M;
}

Eigen::MatrixXd augmented(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Xa(X.rows(), X.cols() + 1);
  Xa.leftCols(X.cols()) = X;
  Xa.col(X.cols()).setOnes();
  return Xa;
}

}  // namespace

Mapping solve_masked(const DesignSet& design, const Topology& topology, double lambda_m, const Executor& exec) {
  if (!(lambda_m > 0)) throw UsageError("masked regression needs lambda > 0");
  check_geometry(design, topology);
  const Eigen::MatrixXd& X = design.X;
  const Eigen::MatrixXd& T = design.T;
  const Eigen::Index N = X.rows();

  Mapping mapping(topology.row_count());
  exec.for_each_index(topology.row_count(), [&](std::size_t k) {
    const auto& idx = topology.row(k);
    const auto n = Eigen::Index(idx.size()) + 1;
    Eigen::MatrixXd Xs(N, n);
    for (Eigen::Index a = 0; a + 1 < n; ++a) Xs.col(a) = X.col(idx[std::size_t(a)]);
    Xs.col(n - 1).setOnes();

    Eigen::MatrixXd G = Xs.transpose() * Xs;
    G.diagonal().array() += lambda_m;
    const Eigen::VectorXd rhs = Xs.transpose() * T.col(Eigen::Index(k));

    const Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
      throw NumericError("reduced system for output pixel " + std::to_string(k) + " is not positive definite");
    const Eigen::VectorXd w = llt.solve(rhs);
    if (!w.allFinite()) throw NumericError("non-finite solution for output pixel " + std::to_string(k));

    auto& row = mapping[k];
    row.indices = idx;
    row.weights.assign(w.data(), w.data() + (n - 1));
    row.bias = w(n - 1);
  });
  return mapping;
}

double masked_objective(const Eigen::MatrixXd& W, const DesignSet& design, const Topology& topology,
                        double lambda_m) {
  check_geometry(design, topology);
  const Eigen::MatrixXd Wm = W.cwiseProduct(mask_matrix(topology));
  const Eigen::MatrixXd E = augmented(design.X) * Wm.transpose() - design.T;
  return 0.5 * E.squaredNorm() + 0.5 * lambda_m * Wm.squaredNorm();
}

Eigen::VectorXd masked_gradient(const Eigen::MatrixXd& W, const DesignSet& design, const Topology& topology,
                                double lambda_m) {
  check_geometry(design, topology);
  const Eigen::MatrixXd M = mask_matrix(topology);
  if (W.rows() != M.rows() || W.cols() != M.cols()) throw DataError("weight matrix has the wrong shape");
  const Eigen::MatrixXd Xa = augmented(design.X);
  const Eigen::MatrixXd Wm = W.cwiseProduct(M);
  const Eigen::MatrixXd E = Xa * Wm.transpose() - design.T;  // N x K residuals
  const Eigen::MatrixXd G = (E.transpose() * Xa).cwiseProduct(M) + lambda_m * Wm;
  // Row-major flattening: entry (k, j) lands at k*(D+1) + j.
  Eigen::VectorXd flat(G.size());
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), G.rows(),
                                                                                      G.cols()) = G;
  return flat;
}

double hessian_entry(std::size_t i, std::size_t j, std::size_t l, std::size_t m, const DesignSet& design,
                     const Topology& topology, double lambda_m) {
  check_geometry(design, topology);
  const std::size_t D = topology.geometry().input_size();
  if (i >= topology.row_count() || l >= topology.row_count() || j > D || m > D)
    throw UsageError("Hessian index out of range");
  if (i != l) return 0.0;
  const double mij = in_mask(topology, i, j) ? 1.0 : 0.0;
  const double mlm = in_mask(topology, l, m) ? 1.0 : 0.0;
  auto column = [&](std::size_t c) -> Eigen::VectorXd {
    return c == D ? Eigen::VectorXd::Ones(design.X.rows()) : Eigen::VectorXd(design.X.col(Eigen::Index(c)));
  };
  if (j != m) return mij * mlm * column(j).dot(column(m));
  return mij * mij * column(j).squaredNorm() + lambda_m * mij;
}

Eigen::MatrixXd hessian_block(std::size_t k, const DesignSet& design, const Topology& topology, double lambda_m) {
  check_geometry(design, topology);
  if (k >= topology.row_count()) throw UsageError("output pixel out of range");
  const auto& idx = topology.row(k);
  const auto n = Eigen::Index(idx.size()) + 1;
  Eigen::MatrixXd Xs(design.X.rows(), n);
  for (Eigen::Index a = 0; a + 1 < n; ++a) Xs.col(a) = design.X.col(idx[std::size_t(a)]);
  Xs.col(n - 1).setOnes();
  Eigen::MatrixXd H = Xs.transpose() * Xs;
  H.diagonal().array() += lambda_m;
  return H;
}

Eigen::MatrixXd solve_ridge(const DesignSet& design, double lambda_2, std::size_t max_entries) {
  if (!(lambda_2 > 0)) throw UsageError("ridge regression needs lambda > 0");
  if (design.T.rows() != design.X.rows()) throw DataError("design and response row counts differ");
  const auto D1 = std::size_t(design.X.cols()) + 1;
  const auto K = std::size_t(design.T.cols());
  if (D1 * K > max_entries || D1 * D1 > max_entries)
    throw UsageError("ridge regression needs a " + std::to_string(D1) + "x" + std::to_string(K) +
                     " weight matrix and a " + std::to_string(D1) + "x" + std::to_string(D1) +
                     " normal matrix, above the cap of " + std::to_string(max_entries) + " entries");
  const Eigen::MatrixXd Xa = augmented(design.X);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(Eigen::Index(D1), Eigen::Index(D1));
  A.selfadjointView<Eigen::Lower>().rankUpdate(Xa.transpose());
  A.diagonal().array() += lambda_2;
  const Eigen::LLT<Eigen::MatrixXd> llt(A.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw NumericError("ridge normal matrix is not positive definite");
  const Eigen::MatrixXd B = Xa.transpose() * design.T;
  return llt.solve(B).transpose();
}

Mapping ridge_mapping(const Eigen::MatrixXd& W) {
  const Eigen::Index D = W.cols() - 1;
  Mapping mapping(std::size_t(W.rows()));
  for (Eigen::Index k = 0; k < W.rows(); ++k) {
    auto& r = mapping[std::size_t(k)];
    r.indices.resize(std::size_t(D));
    r.weights.resize(std::size_t(D));
    for (Eigen::Index j = 0; j < D; ++j) {
      r.indices[std::size_t(j)] = std::uint32_t(j);
      r.weights[std::size_t(j)] = W(k, j);
    }
    r.bias = W(k, D);
  }
  return mapping;
}

}  // namespace lrf
