#include "capfactor/ols.hpp"

#include "capfactor/error.hpp"

namespace capfactor {

Vector OlsFit::predict(const Matrix& predictors) const {
  return (predictors * coefficients).array() + intercept;
}

OlsFit fit_ols(const Matrix& predictors, const Vector& y) {
  const auto n = predictors.rows();
  if (y.size() != n) throw DataError("OLS: predictor and response lengths differ");
  if (n <= predictors.cols()) throw DataError("OLS: more coefficients than observations");
  Matrix design(n, predictors.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(predictors.cols()) = predictors;
  const Eigen::ColPivHouseholderQR<Matrix> qr(design);
  const Vector beta = qr.solve(y);
  if (!beta.allFinite()) throw NumericalError("OLS solve produced non-finite coefficients");
  OlsFit fit;
  fit.intercept = beta[0];
  fit.coefficients = beta.tail(predictors.cols());
  return fit;
}

double mean_squared_error(const Vector& predicted, const Vector& observed) {
  if (predicted.size() != observed.size() || observed.size() == 0)
    throw DataError("MSE: length mismatch or empty input");
  return (predicted - observed).squaredNorm() / static_cast<double>(observed.size());
}

}  // namespace capfactor
