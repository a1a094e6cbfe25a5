#include "oblimin.hpp"

#include <cmath>

namespace capfactor::detail {

namespace {

struct CriterionValue {
  double f;
  Matrix gradient;  // d f / d loadings
};

CriterionValue oblimin_criterion(const Matrix& lambda, double gamma) {
  const auto p = lambda.rows();
  const auto k = lambda.cols();
  Matrix sq = lambda.cwiseProduct(lambda);
  if (gamma != 0.0) sq = (Matrix::Identity(p, p) - Matrix::Constant(p, p, gamma / static_cast<double>(p))) * sq;
  const Matrix off = Matrix::Ones(k, k) - Matrix::Identity(k, k);
  const Matrix sq_off = sq * off;
  return {lambda.cwiseProduct(lambda).cwiseProduct(sq_off).sum() / 4.0, lambda.cwiseProduct(sq_off)};
}

}  // namespace

ObliqueRotation oblimin_rotate(const Matrix& unrotated, double gamma, double tol, int max_iter) {
  const auto k = unrotated.cols();
  ObliqueRotation out;
  out.transform = Matrix::Identity(k, k);
  out.loadings = unrotated;
  if (k < 2) {
    out.phi = Matrix::Identity(k, k);
    out.converged = true;
    return out;
  }

  auto rotated = [&](const Matrix& t) -> Matrix { return unrotated * t.transpose().inverse(); };
  CriterionValue crit = oblimin_criterion(out.loadings, gamma);
  Matrix grad = -(out.loadings.transpose() * crit.gradient * out.transform.inverse()).transpose();
  double step = 1.0;

  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Matrix projected =
        grad - out.transform * (out.transform.cwiseProduct(grad).colwise().sum()).asDiagonal();
    const double s = projected.norm();
    if (s < tol) {
      out.converged = true;
      break;
    }
    step *= 2.0;
    Matrix t_new;
    Matrix l_new;
    CriterionValue c_new;
    for (int half = 0; half <= 10; ++half) {
      Matrix x = out.transform - step * projected;
      const Eigen::RowVectorXd norms = x.colwise().norm();
      t_new = x * norms.cwiseInverse().asDiagonal();
      l_new = rotated(t_new);
      c_new = oblimin_criterion(l_new, gamma);
      if (crit.f - c_new.f > 0.5 * s * s * step) break;
      step *= 0.5;
    }
    out.transform = t_new;
    out.loadings = l_new;
    crit = c_new;
    grad = -(out.loadings.transpose() * crit.gradient * out.transform.inverse()).transpose();
  }
  out.phi = out.transform.transpose() * out.transform;
  return out;
}

}  // namespace capfactor::detail
