#include "support.hpp"

#include "capfactor/error.hpp"
#include "capfactor/pca.hpp"

using namespace capfactor;

TEST_CASE("full-rank reconstruction equals the centered input") {
  const Matrix v = testing::gaussian_matrix(6, 80, 1);
  const PcaSolution sol = fit_pca(v, 6);
  const Matrix centered = v.colwise() - v.rowwise().mean();
  CHECK((reconstruct_centered(sol, 6) - centered).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(sol.variance_shares.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("component scores are uncorrelated") {
  const Matrix v = testing::gaussian_matrix(5, 200, 2);
  const PcaSolution sol = fit_pca(v, 5);
  const Matrix cov = sol.scores * sol.scores.transpose() / 199.0;
  const double scale = cov.diagonal().maxCoeff();
  Matrix off = cov;
  off.diagonal().setZero();
  CHECK(off.cwiseAbs().maxCoeff() < 1e-8 * scale);
  for (int c = 0; c < 5; ++c) CHECK(cov(c, c) == doctest::Approx(sol.eigenvalues[c]).epsilon(1e-9));
}

TEST_CASE("rank-one matrix puts all variance on the first component") {
  const Matrix base = testing::gaussian_matrix(1, 50, 3);
  Matrix v(4, 50);
  for (int i = 0; i < 4; ++i) v.row(i) = base.row(0) * (i + 1.0);
  const PcaSolution sol = fit_pca(v, 2);
  CHECK(sol.variance_shares[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sol.null_components == std::vector<int>{1});
}

TEST_CASE("projecting the training matrix reproduces the scores exactly") {
  const Matrix v = testing::gaussian_matrix(5, 60, 4);
  const PcaSolution sol = fit_pca(v, 3);
  CHECK(component_scores(sol, v) == sol.scores);
}

TEST_CASE("projection of the mean is zero and of mean + w1 is e1") {
  const Matrix v = testing::gaussian_matrix(5, 60, 5);
  const PcaSolution sol = fit_pca(v, 3);
  const Matrix at_mean = component_scores(sol, sol.means);
  CHECK(at_mean.cwiseAbs().maxCoeff() < 1e-12);
  const Matrix e1 = component_scores(sol, sol.means + sol.weights.col(0));
  CHECK(e1(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(e1(1, 0)) < 1e-12);
  CHECK(std::abs(e1(2, 0)) < 1e-12);
}

TEST_CASE("weights are orthonormal and the largest weight is positive") {
  const Matrix v = testing::gaussian_matrix(6, 100, 6);
  const PcaSolution sol = fit_pca(v, 4);
  CHECK((sol.weights.transpose() * sol.weights).isIdentity(1e-12));
  for (int c = 0; c < 4; ++c) {
    Eigen::Index at = 0;
    sol.weights.col(c).cwiseAbs().maxCoeff(&at);
    CHECK(sol.weights(at, c) > 0.0);
  }
}

TEST_CASE("standardized PCA is invariant to row scaling") {
  const Matrix v = testing::gaussian_matrix(4, 90, 7);
  const Matrix w = Vector{{1.0, 10.0, 0.1, 3.0}}.asDiagonal() * v;
  const PcaSolution a = fit_pca(v, 2, {true});
  const PcaSolution b = fit_pca(w, 2, {true});
  CHECK(a.variance_shares.isApprox(b.variance_shares, 1e-10));
  CHECK((a.scores - b.scores).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("fit_pca validates k") {
  const Matrix v = testing::gaussian_matrix(3, 20, 8);
  CHECK_THROWS_AS(fit_pca(v, 0), DataError);
  CHECK_THROWS_AS(fit_pca(v, 4), DataError);
}
