#include "support.hpp"

#include <algorithm>
#include <numeric>

#include "capfactor/descriptives.hpp"
#include "capfactor/error.hpp"
#include "capfactor/synthetic.hpp"

using namespace capfactor;

namespace {

// O(n^2) average ranks, independent of the library implementation.
Vector naive_ranks(const Vector& x) {
  Vector r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (x[j] == x[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

double pearson(const Vector& a, const Vector& b) {
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  return ca.dot(cb) / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

}  // namespace

TEST_CASE("average ranks share tied positions") {
  const Vector r = average_ranks(Vector{{1, 2, 2, 3, 5, 5, 5}});
  const Vector want{{1, 2.5, 2.5, 4, 6, 6, 6}};
  CHECK(r.isApprox(want));
}

TEST_CASE("spearman of a monotone pair is +1 and of x, -x is -1") {
  Matrix v(3, 8);
  for (int j = 0; j < 8; ++j) {
    v(0, j) = j * 0.1;
    v(1, j) = std::exp(j);
    v(2, j) = -j * 0.1;
  }
  const CorrMatrix c = spearman_matrix(v);
  CHECK(c.values(0, 1) == doctest::Approx(1.0));
  CHECK(c.values(0, 2) == doctest::Approx(-1.0));
  CHECK(c.values.diagonal().isOnes());
}

TEST_CASE("spearman matches a reference value") {
  Matrix v(2, 6);
  v << 1, 2, 3, 4, 5, 6, 2, 1, 4, 3, 6, 5;
  CHECK(spearman_matrix(v).values(0, 1) == doctest::Approx(0.8285714285714287).epsilon(1e-12));
}

TEST_CASE("spearman equals pearson of naive ranks, ties included") {
  Matrix v = testing::gaussian_matrix(4, 60, 21);
  v.row(2) = v.row(2).array().round();  // many ties
  const CorrMatrix c = spearman_matrix(v);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double want = pearson(naive_ranks(v.row(a).transpose()), naive_ranks(v.row(b).transpose()));
      CHECK(c.values(a, b) == doctest::Approx(want).epsilon(1e-12));
    }
  double sum = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) sum += c.values(a, b);
  CHECK(c.mean_offdiag == doctest::Approx(sum / 6.0));
}

TEST_CASE("spearman is invariant to monotone transforms of each row") {
  const Matrix v = testing::gaussian_matrix(3, 40, 4);
  Matrix w = v;
  w.row(0) = v.row(0).array().exp();
  w.row(1) = v.row(1).array().pow(3) * 5.0 + 2.0;
  const Matrix a = spearman_matrix(v).values;
  const Matrix b = spearman_matrix(w).values;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("constant row is rejected") {
  Matrix v = testing::gaussian_matrix(2, 10, 1);
  v.row(1).setConstant(0.3);
  CHECK_THROWS_AS(spearman_matrix(v), DataError);
  CHECK_THROWS_AS(pearson_rows(v), DataError);
}

TEST_CASE("descending eigenvalues of a diagonal matrix") {
  const Matrix d = Vector{{1.0, 3.0, 2.0}}.asDiagonal();
  const Vector e = descending_eigenvalues(d);
  CHECK(e.isApprox(Vector{{3.0, 2.0, 1.0}}));
}

TEST_CASE("mean-criterion simulated eigenvalues sum to p") {
  const Matrix v = testing::gaussian_matrix(7, 150, 2);
  const ParallelResult pa = parallel_analysis(v, 20, RetentionCriterion::mean_eigenvalue(), 5);
  CHECK(pa.simulated_eigenvalues.sum() == doctest::Approx(7.0).epsilon(1e-10));
  CHECK(pa.real_eigenvalues.sum() == doctest::Approx(7.0).epsilon(1e-10));
  for (Eigen::Index r = 1; r < 7; ++r) CHECK(pa.simulated_eigenvalues[r] <= pa.simulated_eigenvalues[r - 1]);
}

TEST_CASE("parallel analysis is deterministic in the seed") {
  const Matrix v = testing::gaussian_matrix(6, 120, 8);
  const auto a = parallel_analysis(v, 15, RetentionCriterion::at_percentile(95), 3);
  const auto b = parallel_analysis(v, 15, RetentionCriterion::at_percentile(95), 3);
  const auto c = parallel_analysis(v, 15, RetentionCriterion::at_percentile(95), 4);
  CHECK(a.simulated_eigenvalues == b.simulated_eigenvalues);
  CHECK(a.retained == b.retained);
  CHECK(a.simulated_eigenvalues != c.simulated_eigenvalues);
}

TEST_CASE("percentile criterion is at least the mean criterion at rank one") {
  const Matrix v = testing::gaussian_matrix(6, 120, 9);
  const auto mean = parallel_analysis(v, 50, RetentionCriterion::mean_eigenvalue(), 1);
  const auto p95 = parallel_analysis(v, 50, RetentionCriterion::at_percentile(95), 1);
  CHECK(p95.simulated_eigenvalues[0] >= mean.simulated_eigenvalues[0]);
  CHECK(p95.retained <= mean.retained);
}

TEST_CASE("planted three-factor structure retains three") {
  const Matrix l = simple_structure(19, 3, 0.7);
  const Matrix v = generate_factor_data(l, Matrix::Identity(3, 3), Vector::Constant(19, 0.51), 1000, 17);
  const auto pa = parallel_analysis(v, 100, RetentionCriterion::mean_eigenvalue(), 17);
  CHECK(pa.retained == 3);
}

TEST_CASE("retention stops at the first rank that fails") {
  // a single strong factor followed by noise
  const Matrix l = simple_structure(8, 1, 0.8);
  const Matrix v = generate_factor_data(l, Matrix::Identity(1, 1), Vector::Constant(8, 0.36), 500, 4);
  const auto pa = parallel_analysis(v, 40, RetentionCriterion::mean_eigenvalue(), 4);
  CHECK(pa.retained == 1);
  CHECK(pa.real_eigenvalues[0] > pa.simulated_eigenvalues[0]);
  CHECK(pa.real_eigenvalues[1] <= pa.simulated_eigenvalues[1]);
}

TEST_CASE("parallel analysis validates its arguments") {
  const Matrix v = testing::gaussian_matrix(4, 30, 1);
  CHECK_THROWS_AS(parallel_analysis(v, 0), DataError);
  CHECK_THROWS_AS(parallel_analysis(v, 10, RetentionCriterion::at_percentile(120)), DataError);
}
