#include "support.hpp"

#include "lbfgs.hpp"
#include "oblimin.hpp"

using namespace capfactor;

TEST_CASE("L-BFGS minimizes the Rosenbrock function") {
  const detail::Objective f = [](const Vector& x, Vector& g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  const auto r = detail::minimize_lbfgs(f, Vector{{-1.2, 1.0}});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("oblimin keeps the common part and unit factor variances") {
  Matrix a(6, 2);
  a << 0.8, 0.1, 0.7, 0.2, 0.75, 0.05, 0.1, 0.7, 0.2, 0.8, 0.05, 0.6;
  const double th = 0.6;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Matrix mixed = a * rot;
  const auto r = detail::oblimin_rotate(mixed, 0.0);
  CHECK(r.converged);
  CHECK(r.phi.diagonal().isOnes(1e-10));
  const Matrix common = r.loadings * r.phi * r.loadings.transpose();
  CHECK((common - mixed * mixed.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  // recovered pattern is closer to simple structure than the mixed input
  auto complexity = [](const Matrix& l) {
    return (l.col(0).array().square() * l.col(1).array().square()).sum();
  };
  CHECK(complexity(r.loadings) < complexity(mixed));
}
