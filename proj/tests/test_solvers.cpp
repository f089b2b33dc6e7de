#include <gtest/gtest.h>

#include <random>

#include "lrf/error.hpp"
#include "lrf/solvers.hpp"
#include "lrf/training.hpp"
#include "test_support.hpp"

using namespace lrf;
using lrf::testing::random_design;

namespace {

SparseRowModel as_model(const Topology& topo, Mapping mapping) {
  SparseRowModel m;
  m.geometry = topo.geometry();
  m.mappings.push_back(std::move(mapping));
  return m;
}

// Independent least-squares route: minimize ||A c - b||^2 + lambda ||c||^2
// through a QR factorization of the stacked system [A; sqrt(lambda) I].
Eigen::MatrixXd stacked_ridge(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double lambda) {
  Eigen::MatrixXd S(A.rows() + A.cols(), A.cols());
  S << A, std::sqrt(lambda) * Eigen::MatrixXd::Identity(A.cols(), A.cols());
  Eigen::MatrixXd R(B.rows() + A.cols(), B.cols());
  R << B, Eigen::MatrixXd::Zero(A.cols(), B.cols());
  return S.colPivHouseholderQr().solve(R);
}

Eigen::MatrixXd with_ones(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Xa(X.rows(), X.cols() + 1);
  Xa << X, Eigen::VectorXd::Ones(X.rows());
  return Xa;
}

}  // namespace

TEST(MaskedRegression, FullCoverageEqualsRidge) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_design(5, 12, rng);
    const Topology topo(RfGeometry::full_coverage(5, 5, 5, 5));
    const Eigen::MatrixXd masked = dense_weights(as_model(topo, solve_masked(d, topo, 1.0)));
    const Eigen::MatrixXd ridge = solve_ridge(d, 1.0);
    EXPECT_LT((masked - ridge).norm() / ridge.norm(), 1e-8);
  }
}

// Gradient and Hessian written out with explicit loops over the full
// K(D+1) parameter vector: H w = -grad E(0).
TEST(MaskedRegression, MatchesFullNewtonStep) {
  std::mt19937_64 rng(22);
  const auto d = random_design(3, 4, rng);
  const Topology topo(RfGeometry::square(3, 3, 3));
  const double lambda = 0.7;
  const Eigen::MatrixXi M = lrf::testing::naive_mask(topo.geometry());
  const int K = 9, D = 9, P = D + 1, N = 4;
  auto mask = [&](int k, int j) { return j == D ? 1.0 : double(M(k, j)); };
  auto x = [&](int n, int j) { return j == D ? 1.0 : d.X(n, j); };

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(K * P, K * P);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(K * P);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < P; ++j) {
      for (int n = 0; n < N; ++n) g(i * P + j) += -d.T(n, i) * mask(i, j) * x(n, j);
      for (int m = 0; m < P; ++m) {
        double v = 0;
        for (int n = 0; n < N; ++n) v += x(n, j) * x(n, m);
        H(i * P + j, i * P + m) = j == m ? mask(i, j) * mask(i, j) * v + lambda * mask(i, j)
                                         : mask(i, j) * mask(i, m) * v;
      }
    }
  const Eigen::VectorXd w = H.fullPivLu().solve(-g);
  const Eigen::MatrixXd W = dense_weights(as_model(topo, solve_masked(d, topo, lambda)));
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < P; ++j) EXPECT_NEAR(W(i, j), w(i * P + j), 1e-8);
}

TEST(MaskedRegression, IdentityTaskRecoversIdentity) {
  std::mt19937_64 rng(23);
  DesignSet d = random_design(4, 6, rng);
  d.T = d.X;
  const Topology topo(RfGeometry::square(4, 4, 1));
  const auto model = as_model(topo, solve_masked(d, topo, 1e-8));
  for (const auto& r : model.mappings[0]) {
    ASSERT_EQ(r.weights.size(), 1u);
    EXPECT_NEAR(r.weights[0], 1.0, 1e-5);
    EXPECT_NEAR(r.bias, 0.0, 1e-5);
  }
  const auto img = lrf::testing::random_image(4, 4, 1, rng);
  const auto y = synthesize_raw(model, img);
  for (std::size_t p = 0; p < y.data.size(); ++p) EXPECT_NEAR(y.data[p], img.data[p], 1e-4);
}

TEST(MaskedRegression, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(24);
  const auto d = random_design(4, 5, rng);
  const Topology topo(RfGeometry::square(4, 4, 3));
  const Eigen::MatrixXi M = lrf::testing::naive_mask(topo.geometry());
  const double lambda = 0.3, h = 1e-5;
  for (int point = 0; point < 3; ++point) {
    const Eigen::MatrixXd W = lrf::testing::gaussian_matrix(16, 17, rng);
    const Eigen::VectorXd g = masked_gradient(W, d, topo, lambda);
    Eigen::VectorXd fd = Eigen::VectorXd::Zero(g.size());
    for (int k = 0; k < 16; ++k)
      for (int j = 0; j < 17; ++j) {
        if (j < 16 && M(k, j) == 0) continue;
        Eigen::MatrixXd Wp = W, Wm = W;
        Wp(k, j) += h;
        Wm(k, j) -= h;
        fd(k * 17 + j) = (masked_objective(Wp, d, topo, lambda) - masked_objective(Wm, d, topo, lambda)) / (2 * h);
      }
    EXPECT_LT((g - fd).norm() / g.norm(), 1e-5);
    // Off-mask entries are structurally zero.
    for (int k = 0; k < 16; ++k)
      for (int j = 0; j < 16; ++j)
        if (M(k, j) == 0) EXPECT_EQ(g(k * 17 + j), 0.0);
  }
}

TEST(MaskedRegression, GradientVanishesAtSolution) {
  std::mt19937_64 rng(25);
  const auto d = random_design(6, 10, rng);
  const Topology topo(RfGeometry::square(6, 6, 3));
  const auto W = dense_weights(as_model(topo, solve_masked(d, topo, 0.5)));
  EXPECT_LT(masked_gradient(W, d, topo, 0.5).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(MaskedRegression, HessianStructure) {
  std::mt19937_64 rng(26);
  const auto d = random_design(3, 4, rng);
  const Topology topo(RfGeometry::square(3, 3, 3));
  const double lambda = 0.4;
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t l = 0; l < 9; ++l)
      for (std::size_t j = 0; j <= 9; ++j)
        for (std::size_t m = 0; m <= 9; ++m)
          if (i != l) ASSERT_EQ(hessian_entry(i, j, l, m, d, topo, lambda), 0.0);

  const Topology corner(RfGeometry::square(3, 3, 1));
  const auto H = hessian_block(4, d, corner, lambda);
  ASSERT_EQ(H.rows(), 2);
  EXPECT_NEAR(H(0, 0), d.X.col(4).squaredNorm() + lambda, 1e-12);
  EXPECT_NEAR(H(0, 1), d.X.col(4).sum(), 1e-12);
  EXPECT_NEAR(H(1, 1), 4 + lambda, 1e-12);
  EXPECT_NEAR(hessian_entry(4, 4, 4, 9, d, corner, lambda), d.X.col(4).sum(), 1e-12);
  EXPECT_EQ(hessian_entry(4, 3, 4, 4, d, corner, lambda), 0.0);
}

TEST(MaskedRegression, PerturbationNeverImprovesObjective) {
  std::mt19937_64 rng(27);
  const auto d = random_design(5, 8, rng);
  const Topology topo(RfGeometry::square(5, 5, 3));
  const double lambda = 0.8;
  const auto W = dense_weights(as_model(topo, solve_masked(d, topo, lambda)));
  const double best = masked_objective(W, d, topo, lambda);
  for (std::size_t k = 0; k < topo.row_count(); ++k) {
    std::vector<Eigen::Index> cols(topo.row(k).begin(), topo.row(k).end());
    cols.push_back(25);
    for (auto j : cols)
      for (double delta : {1e-3, -1e-3}) {
        Eigen::MatrixXd P = W;
        P(Eigen::Index(k), j) += delta;
        EXPECT_GE(masked_objective(P, d, topo, lambda), best);
      }
  }
}

TEST(MaskedRegression, NormShrinksWithLambda) {
  std::mt19937_64 rng(28);
  const auto d = random_design(6, 9, rng);
  const Topology topo(RfGeometry::square(6, 6, 5));
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
    const double norm = dense_weights(as_model(topo, solve_masked(d, topo, lambda))).norm();
    EXPECT_LE(norm, prev);
    prev = norm;
  }
}

TEST(MaskedRegression, WeightsStayInsideMask) {
  std::mt19937_64 rng(29);
  const auto d = random_design(7, 9, rng);
  const Topology topo(RfGeometry::square(7, 7, 3, 2));
  const auto model = as_model(topo, solve_masked(d, topo, 1.0));
  const Eigen::MatrixXd W = dense_weights(model);
  const Eigen::MatrixXi M = lrf::testing::naive_mask(topo.geometry());
  for (Eigen::Index k = 0; k < M.rows(); ++k)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (!M(k, j)) EXPECT_EQ(W(k, j), 0.0);
  EXPECT_EQ(model.parameter_count(), total_parameters(topo));
}

TEST(MaskedRegression, ParallelSolveIsBitIdentical) {
  std::mt19937_64 rng(30);
  const auto d = random_design(12, 20, rng);
  const Topology topo(RfGeometry::square(12, 12, 5));
  const auto serial = solve_masked(d, topo, 0.3, Executor(1));
  const auto parallel = solve_masked(d, topo, 0.3, Executor(8));
  EXPECT_EQ(serial, parallel);
}

TEST(MaskedRegression, Errors) {
  std::mt19937_64 rng(31);
  const auto d = random_design(4, 5, rng);
  EXPECT_THROW(solve_masked(d, Topology(RfGeometry::square(5, 5, 3)), 1.0), DataError);
  EXPECT_THROW(solve_masked(d, Topology(RfGeometry::square(4, 4, 3)), 0.0), UsageError);
  EXPECT_THROW(solve_masked(d, Topology(RfGeometry{4, 4, 5, 5, 3, 1}), 1.0), DataError);
}

TEST(Ridge, HugeLambdaShrinksToZero) {
  std::mt19937_64 rng(40);
  DesignSet d = random_design(3, 10, rng);
  d.X.rowwise() -= d.X.colwise().mean();
  d.T.rowwise() -= d.T.colwise().mean();
  EXPECT_LT(solve_ridge(d, 1e12).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ridge, ExactLineFit) {
  DesignSet d;
  d.X = Eigen::MatrixXd{{1.0}, {2.0}};
  d.T = Eigen::MatrixXd{{2.0}, {4.0}};
  const auto W = solve_ridge(d, 1e-9);
  EXPECT_NEAR(W(0, 0), 2.0, 1e-6);
  EXPECT_NEAR(W(0, 1), 0.0, 1e-6);
}

TEST(Ridge, MatchesStackedLeastSquares) {
  std::mt19937_64 rng(41);
  const auto d = random_design(6, 30, rng);
  const double lambda = 0.25;
  const Eigen::MatrixXd oracle = stacked_ridge(with_ones(d.X), d.T, lambda).transpose();
  const Eigen::MatrixXd W = solve_ridge(d, lambda);
  EXPECT_LT((W - oracle).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ridge, SizeCap) {
  std::mt19937_64 rng(42);
  const auto d = random_design(8, 4, rng);
  try {
    solve_ridge(d, 1.0, 1000);
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("cap of 1000"), std::string::npos);
  }
  EXPECT_THROW(solve_ridge(d, 0.0), UsageError);
}

TEST(Lasso, ZeroPenaltyIsLeastSquares) {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(10, 5, rng);
    const Eigen::VectorXd t = lrf::testing::gaussian_matrix(10, 1, rng);
    const Eigen::VectorXd ls = with_ones(X).colPivHouseholderQr().solve(t);
    EXPECT_LT((solve_lasso_row(X, t, 0.0) - ls).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Lasso, LargePenaltyZeroesAllWeights) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(12, 6, rng);
    const Eigen::VectorXd t = lrf::testing::gaussian_matrix(12, 1, rng);
    const Eigen::VectorXd centered = t.array() - t.mean();
    const double threshold = (X.transpose() * centered).lpNorm<Eigen::Infinity>();
    const Eigen::VectorXd at = solve_lasso_row(X, t, threshold * (1.0 + 1e-9));
    EXPECT_TRUE(at.head(6).isZero(0.0));
    EXPECT_NEAR(at(6), t.mean(), 1e-12);
    // Just below the threshold one weight becomes active.
    EXPECT_GT(solve_lasso_row(X, t, 0.99 * threshold).head(6).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Lasso, SatisfiesKkt) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(10, 5, rng);
    const Eigen::VectorXd t = lrf::testing::gaussian_matrix(10, 1, rng);
    const double lambda = 0.5 + trial * 0.1;
    const Eigen::VectorXd c = solve_lasso_row(X, t, lambda);
    const Eigen::VectorXd r = t - X * c.head(5) - Eigen::VectorXd::Constant(10, c(5));
    EXPECT_NEAR(r.sum(), 0.0, 1e-5);
    for (int j = 0; j < 5; ++j) {
      const double corr = X.col(j).dot(r);
      if (c(j) == 0.0)
        EXPECT_LE(std::abs(corr), lambda + 1e-5);
      else
        EXPECT_NEAR(corr, lambda * (c(j) > 0 ? 1.0 : -1.0), 1e-5);
    }
  }
}

TEST(Lasso, SparsityGrowsWithPenalty) {
  std::mt19937_64 rng(53);
  const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(30, 12, rng);
  const Eigen::VectorXd t = lrf::testing::gaussian_matrix(30, 1, rng);
  const LassoProblem problem(X);
  int prev_zeros = -1;
  for (double lambda : {0.001, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0}) {
    const auto res = problem.solve(t, lambda);
    EXPECT_TRUE(res.converged);
    const int zeros = int((res.coef.head(12).array() == 0.0).count());
    EXPECT_GE(zeros, prev_zeros);
    prev_zeros = zeros;
  }
}

TEST(Lasso, RejectsNonFinite) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 2);
  Eigen::VectorXd t = Eigen::VectorXd::Ones(3);
  t(1) = std::nan("");
  EXPECT_THROW(solve_lasso_row(X, t, 0.1), NumericError);
  X(0, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LassoProblem{X}, NumericError);
}

TEST(Omp, FullSupportReachesLeastSquaresResidual) {
  std::mt19937_64 rng(60);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(10, 5, rng);
    const Eigen::VectorXd t = lrf::testing::gaussian_matrix(10, 1, rng);
    const Eigen::MatrixXd Xa = with_ones(X);
    const double ls_res = (t - Xa * Xa.colPivHouseholderQr().solve(t)).norm();
    const double omp_res = (t - Xa * solve_omp_row(X, t, 6)).norm();
    EXPECT_NEAR(omp_res, ls_res, 1e-8);
  }
}

TEST(Omp, SingleAtomMatchesExhaustiveSearch) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(15, 8, rng);
    const Eigen::VectorXd t = lrf::testing::gaussian_matrix(15, 1, rng);
    const Eigen::MatrixXd Xa = with_ones(X);
    Eigen::Index best = 0;
    double best_res = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < Xa.cols(); ++j) {
      const double c = Xa.col(j).dot(t) / Xa.col(j).squaredNorm();
      const double res = (t - c * Xa.col(j)).squaredNorm();
      if (res < best_res) {
        best_res = res;
        best = j;
      }
    }
    const Eigen::VectorXd c = solve_omp_row(X, t, 1);
    ASSERT_EQ((c.array() != 0.0).count(), 1);
    EXPECT_NE(c(best), 0.0);
    EXPECT_NEAR((t - Xa * c).squaredNorm(), best_res, 1e-10);
  }
}

TEST(Omp, RecoversPlantedTwoSparseTarget) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(40, 8, rng);
    const Eigen::VectorXd t = 3.0 * X.col(2) - X.col(5);
    const Eigen::VectorXd c = solve_omp_row(X, t, 2);
    EXPECT_NEAR(c(2), 3.0, 1e-10);
    EXPECT_NEAR(c(5), -1.0, 1e-10);
    EXPECT_EQ((c.array() != 0.0).count(), 2);
    EXPECT_LT((t - with_ones(X) * c).norm(), 1e-10);
  }
}

TEST(Omp, SupportNeverExceedsBound) {
  std::mt19937_64 rng(63);
  const Eigen::MatrixXd X = lrf::testing::gaussian_matrix(20, 10, rng);
  const OmpProblem problem(X);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd t = lrf::testing::gaussian_matrix(20, 1, rng);
    for (int l0 = 1; l0 <= 11; ++l0) EXPECT_LE((problem.solve(t, l0).array() != 0.0).count(), l0);
  }
  EXPECT_THROW(problem.solve(Eigen::VectorXd::Ones(20), 0), UsageError);
  EXPECT_THROW(problem.solve(Eigen::VectorXd::Ones(20), 12), UsageError);
}

TEST(Omp, ZeroColumnsAreNeverSelected) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(4, 3);
  X.col(1) << 1, 2, 3, 4;
  const Eigen::VectorXd t = 2.0 * X.col(1);
  const Eigen::VectorXd c = solve_omp_row(X, t, 4);
  EXPECT_EQ(c(0), 0.0);
  EXPECT_EQ(c(2), 0.0);
  EXPECT_NEAR(c(1), 2.0, 1e-12);
}

TEST(Hyperparams, Validation) {
  Hyperparams h;
  EXPECT_NO_THROW(h.validate(9));
  h.lambda_0 = 11;
  EXPECT_THROW(h.validate(9), UsageError);
  h.lambda_0 = 10;
  EXPECT_NO_THROW(h.validate(9));
  h.lambda_m = 0;
  EXPECT_THROW(h.validate(9), UsageError);
}

TEST(FitModel, BaselinesUseFullCoverageGeometry) {
  std::mt19937_64 rng(70);
  std::vector<ImagePair> pairs;
  for (int i = 0; i < 12; ++i)
    pairs.push_back({lrf::testing::random_image(4, 4, 1, rng), lrf::testing::random_image(4, 4, 1, rng), "", ""});
  TrainSpec spec;
  for (auto solver : {SolverKind::Ridge, SolverKind::Lasso, SolverKind::Omp}) {
    spec.solver = solver;
    const auto model = fit_model(pairs, spec, solver == SolverKind::Omp ? 3.0 : 0.1);
    EXPECT_NO_THROW(model.validate());
    EXPECT_EQ(model.geometry.taps_per_side, 7);
    EXPECT_EQ(model.solver, solver);
  }
  spec.solver = SolverKind::Omp;
  EXPECT_THROW(fit_model(pairs, spec, 2.5), UsageError);
}
