#include "capfactor/descriptives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "capfactor/error.hpp"
#include "capfactor/random.hpp"

namespace capfactor {

Vector average_ranks(const Eigen::Ref<const Vector>& x) {
  const auto n = x.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });
  Vector ranks(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && x[order[static_cast<std::size_t>(j + 1)]] == x[order[static_cast<std::size_t>(i)]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index t = i; t <= j; ++t) ranks[order[static_cast<std::size_t>(t)]] = r;
    i = j + 1;
  }
  return ranks;
}

Matrix pearson_rows(const Matrix& values) {
  if (values.cols() < 2) throw DataError("correlation needs at least 2 observations");
  Matrix centered = values.colwise() - values.rowwise().mean();
  Vector norms = centered.rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i)
    if (!(norms[i] > 0.0)) throw DataError("missing correlation: row " + std::to_string(i) + " is constant");
  centered = norms.cwiseInverse().asDiagonal() * centered;
  Matrix corr = centered * centered.transpose();
  for (Eigen::Index i = 0; i < corr.rows(); ++i) corr(i, i) = 1.0;
  return 0.5 * (corr + corr.transpose());
}

double mean_offdiag(const Matrix& corr) {
  const auto p = corr.rows();
  if (p < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = i + 1; j < p; ++j) sum += corr(i, j);
  return sum / (0.5 * static_cast<double>(p * (p - 1)));
}

CorrMatrix spearman_matrix(const Matrix& values, std::vector<std::string> labels) {
  if (values.cols() < 2) throw DataError("Spearman correlation needs m >= 2");
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(values.rows()))
    throw DataError("label count does not match row count");
  Matrix ranks(values.rows(), values.cols());
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const Vector row = values.row(i).transpose();
    ranks.row(i) = average_ranks(row).transpose();
  }
  CorrMatrix out;
  try {
    out.values = pearson_rows(ranks);
  } catch (const DataError&) {
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if ((values.row(i).array() == values(i, 0)).all())
        throw DataError("missing correlation: constant row '" +
                        (labels.empty() ? std::to_string(i) : labels[static_cast<std::size_t>(i)]) + "'");
    throw;
  }
  out.labels = std::move(labels);
  out.mean_offdiag = mean_offdiag(out.values);
  return out;
}

std::string RetentionCriterion::describe() const {
  if (kind == Kind::mean) return "mean";
  std::ostringstream out;
  out << "percentile(" << percentile << ")";
  return out.str();
}

Vector descending_eigenvalues(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return solver.eigenvalues().reverse();
}

namespace {

double quantile_type7(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

ParallelResult parallel_analysis(const Matrix& values, int n_sims, RetentionCriterion criterion,
                                 std::uint64_t seed) {
  if (n_sims < 1) throw DataError("parallel analysis needs n_sims >= 1");
  if (criterion.kind == RetentionCriterion::Kind::percentile &&
      !(criterion.percentile > 0.0 && criterion.percentile < 100.0))
    throw DataError("percentile criterion must lie in (0, 100)");
  const auto p = values.rows();
  const auto m = values.cols();

  ParallelResult out;
  out.n_sims = n_sims;
  out.seed = seed;
  out.criterion = criterion;
  if (p > m) out.warnings.push_back("p > m: correlation matrix is rank-deficient");
  out.real_eigenvalues = descending_eigenvalues(pearson_rows(values));

  std::vector<std::vector<double>> sims(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(n_sims)));
  Matrix noise(p, m);
  for (int s = 0; s < n_sims; ++s) {
    auto rng = substream(seed, static_cast<std::uint64_t>(s));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < p; ++i) noise(i, j) = normal(rng);
    const Vector eig = descending_eigenvalues(pearson_rows(noise));
    for (Eigen::Index r = 0; r < p; ++r) sims[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)] = eig[r];
  }

  out.simulated_eigenvalues.resize(p);
  for (Eigen::Index r = 0; r < p; ++r) {
    const auto& draws = sims[static_cast<std::size_t>(r)];
    out.simulated_eigenvalues[r] =
        criterion.kind == RetentionCriterion::Kind::mean
            ? std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(n_sims)
            : quantile_type7(draws, criterion.percentile / 100.0);
  }
  while (out.retained < p && out.real_eigenvalues[out.retained] > out.simulated_eigenvalues[out.retained])
    ++out.retained;
  return out;
}

}  // namespace capfactor
