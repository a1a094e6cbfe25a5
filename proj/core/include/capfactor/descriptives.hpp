#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capfactor/types.hpp"

namespace capfactor {

struct CorrMatrix {
  std::vector<std::string> labels;
  Matrix values;  // p x p
  double mean_offdiag = 0.0;
};

/// Average ranks (1-based); ties share the mean of their positions.
Vector average_ranks(const Eigen::Ref<const Vector>& x);

/// Pairwise Spearman correlation between rows of `values` (p x m).
/// Throws DataError if any row is constant.
CorrMatrix spearman_matrix(const Matrix& values, std::vector<std::string> labels = {});

/// Pearson correlation between rows. Throws DataError on a constant row.
Matrix pearson_rows(const Matrix& values);

/// Mean of the strictly upper triangle.
double mean_offdiag(const Matrix& corr);

struct RetentionCriterion {
  enum class Kind { mean, percentile } kind = Kind::mean;
  double percentile = 95.0;  // used when kind == percentile

  static RetentionCriterion mean_eigenvalue() { return {}; }
  static RetentionCriterion at_percentile(double q) { return {Kind::percentile, q}; }
  std::string describe() const;
};

struct ParallelResult {
  Vector real_eigenvalues;       // descending
  Vector simulated_eigenvalues;  // criterion aggregate per rank
  int retained = 0;
  int n_sims = 0;
  std::uint64_t seed = 0;
  RetentionCriterion criterion;
  std::vector<std::string> warnings;
};

/// Descending eigenvalues of a symmetric matrix.
Vector descending_eigenvalues(const Matrix& symmetric);

/// Horn's parallel analysis on the Pearson correlation of the rows of
/// `values`. Simulation s draws from substream(seed, s).
ParallelResult parallel_analysis(const Matrix& values, int n_sims = 100,
                                 RetentionCriterion criterion = {}, std::uint64_t seed = 42);

}  // namespace capfactor
