#pragma once

#include "capfactor/types.hpp"

namespace capfactor {

/// Ordinary least squares y ~ intercept + X (rows of `predictors` are
/// observations).
struct OlsFit {
  double intercept = 0.0;
  Vector coefficients;

  Vector predict(const Matrix& predictors) const;
};

OlsFit fit_ols(const Matrix& predictors, const Vector& y);

double mean_squared_error(const Vector& predicted, const Vector& observed);

}  // namespace capfactor
