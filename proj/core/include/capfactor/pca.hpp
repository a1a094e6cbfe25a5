#pragma once

#include <vector>

#include "capfactor/types.hpp"

namespace capfactor {

struct PcaOptions {
  /// Divide each row by its standard deviation after centering.
  bool standardize = false;
};

struct PcaSolution {
  Matrix weights;           // p x k, orthonormal columns
  Matrix scores;            // k x m
  Vector eigenvalues;       // p, descending
  Vector variance_shares;   // p, sums to 1
  Vector means;             // p row means used for centering
  Vector scales;            // p row divisors (ones unless standardized)
  std::vector<int> null_components;  // indices < k with zero eigenvalue
};

/// PCA of the row variables across columns (models). Sign convention: the
/// largest-magnitude weight of each component is positive.
PcaSolution fit_pca(const Matrix& values, int k, const PcaOptions& opts = {});

/// Projects centered (and scaled) columns of `new_values` onto the weights.
Matrix component_scores(const PcaSolution& sol, const Matrix& new_values);

/// Inverse of component_scores restricted to the first `k` components,
/// returned on the centered (and scaled) scale.
Matrix reconstruct_centered(const PcaSolution& sol, int k);

}  // namespace capfactor
