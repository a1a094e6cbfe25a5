#include "lbfgs.hpp"

#include <cmath>
#include <deque>

#include "capfactor/error.hpp"

namespace capfactor::detail {

LbfgsResult minimize_lbfgs(const Objective& fn, Vector x0, const LbfgsOptions& opts) {
  LbfgsResult res;
  res.x = std::move(x0);
  res.grad.resize(res.x.size());
  res.f = fn(res.x, res.grad);
  if (!std::isfinite(res.f)) throw NumericalError("objective is not finite at the starting point");

  std::deque<Vector> s_hist;
  std::deque<Vector> y_hist;
  std::deque<double> rho_hist;
  Vector g_new(res.x.size());
  int stall = 0;

  for (int it = 0; it < opts.max_iter; ++it) {
    res.iterations = it + 1;
    if (res.grad.lpNorm<Eigen::Infinity>() < opts.gtol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion.
    Vector d = -res.grad;
    const std::size_t h = s_hist.size();
    std::vector<double> alpha(h);
    for (std::size_t i = h; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(d);
      d -= alpha[i] * y_hist[i];
    }
    if (h > 0) d *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < h; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(d);
      d += (alpha[i] - beta) * s_hist[i];
    }

    double slope = res.grad.dot(d);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      d = -res.grad;
      slope = -res.grad.squaredNorm();
    }

    double step = h == 0 ? std::min(1.0, 1.0 / std::max(1e-12, res.grad.lpNorm<Eigen::Infinity>())) : 1.0;
    Vector x_new;
    double f_new = 0.0;
    bool found = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * d;
      f_new = fn(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
        found = true;
        break;
      }
      step *= 0.5;
    }
    if (!found) {
      if (h == 0) break;  // steepest descent failed too: numerically stationary
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    Vector s = x_new - res.x;
    Vector y = g_new - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    const double rel = std::abs(res.f - f_new) / std::max({std::abs(res.f), std::abs(f_new), 1.0});
    res.x = std::move(x_new);
    res.f = f_new;
    res.grad = g_new;
    stall = rel < opts.ftol ? stall + 1 : 0;
    if (stall >= opts.stall_limit) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged && res.grad.lpNorm<Eigen::Infinity>() < opts.gtol) res.converged = true;
  return res;
}

}  // namespace capfactor::detail
