#include "capfactor/pca.hpp"

#include <cmath>

#include "capfactor/error.hpp"

namespace capfactor {

PcaSolution fit_pca(const Matrix& values, int k, const PcaOptions& opts) {
  const auto p = values.rows();
  const auto m = values.cols();
  if (k < 1 || k > p) throw DataError("PCA needs 1 <= k <= p");
  if (m < 2) throw DataError("PCA needs at least 2 columns");

  PcaSolution sol;
  sol.means = values.rowwise().mean();
  Matrix centered = values.colwise() - sol.means;
  sol.scales = Vector::Ones(p);
  if (opts.standardize) {
    sol.scales = (centered.rowwise().squaredNorm() / static_cast<double>(m - 1)).cwiseSqrt();
    for (Eigen::Index i = 0; i < p; ++i)
      if (!(sol.scales[i] > 0.0)) throw DataError("cannot standardize a constant row");
    centered = sol.scales.cwiseInverse().asDiagonal() * centered;
  }

  const Matrix cov = centered * centered.transpose() / static_cast<double>(m - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");

  sol.eigenvalues = es.eigenvalues().reverse();
  Matrix vectors = es.eigenvectors().rowwise().reverse();
  const double scale = std::max(sol.eigenvalues.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index c = 0; c < p; ++c) {
    if (sol.eigenvalues[c] < 0.0) sol.eigenvalues[c] = 0.0;
    Eigen::Index arg = 0;
    vectors.col(c).cwiseAbs().maxCoeff(&arg);
    if (vectors(arg, c) < 0.0) vectors.col(c) *= -1.0;
  }
  const double total = sol.eigenvalues.sum();
  sol.variance_shares = total > 0.0 ? Vector(sol.eigenvalues / total) : Vector::Zero(p);
  for (int c = 0; c < k; ++c)
    if (sol.eigenvalues[c] <= 1e-12 * scale) sol.null_components.push_back(c);

  sol.weights = vectors.leftCols(k);
  sol.scores = sol.weights.transpose() * centered;
  return sol;
}

Matrix component_scores(const PcaSolution& sol, const Matrix& new_values) {
  if (new_values.rows() != sol.weights.rows()) throw DataError("dimension mismatch: PCA rows differ from fit");
  const Matrix centered = sol.scales.cwiseInverse().asDiagonal() * (new_values.colwise() - sol.means);
  return sol.weights.transpose() * centered;
}

Matrix reconstruct_centered(const PcaSolution& sol, int k) {
  if (k < 0 || k > sol.weights.cols()) throw DataError("reconstruction rank exceeds fitted components");
  return sol.weights.leftCols(k) * sol.scores.topRows(k);
}

}  // namespace capfactor
