#pragma once

#include <functional>

#include "capfactor/types.hpp"

namespace capfactor::detail {

/// Returns f(x) and writes the gradient. A non-finite value marks x as
/// infeasible; the line search then backs off.
using Objective = std::function<double(const Vector& x, Vector& grad)>;

struct LbfgsOptions {
  int max_iter = 5000;
  int history = 12;
  double gtol = 1e-9;   // max |g_i|
  double ftol = 1e-15;  // relative f change, must hold for `stall_limit` steps
  int stall_limit = 5;
};

struct LbfgsResult {
  Vector x;
  double f = 0.0;
  Vector grad;
  int iterations = 0;
  bool converged = false;
};

LbfgsResult minimize_lbfgs(const Objective& fn, Vector x0, const LbfgsOptions& opts = {});

}  // namespace capfactor::detail
