#pragma once

#include "capfactor/types.hpp"

namespace capfactor::detail {

struct ObliqueRotation {
  Matrix loadings;   // A (T')^{-1}
  Matrix phi;        // T'T
  Matrix transform;  // T, unit-length columns
  int iterations = 0;
  bool converged = false;
};

/// Gradient-projection oblique rotation under the oblimin family;
/// gamma = 0 is quartimin.
ObliqueRotation oblimin_rotate(const Matrix& unrotated, double gamma = 0.0, double tol = 1e-6,
                               int max_iter = 1000);

}  // namespace capfactor::detail
