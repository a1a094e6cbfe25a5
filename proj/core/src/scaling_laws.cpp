#include "capfactor/scaling_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capfactor/error.hpp"

namespace capfactor {

namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double median(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double sse_at(std::span<const double> y, std::span<const double> x, const ItemParams& p) {
  double s = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double r = y[j] - predict_item(p, x[j]);
    s += r * r;
  }
  return s;
}

}  // namespace

double predict_item(const ItemParams& params, double log_n) {
  return params.c + (1.0 - params.c) * logistic(params.alpha * (log_n - params.beta));
}

ItemFit fit_item_curve(std::span<const double> scores, std::span<const double> log_n, double c,
                       const CurveFitOptions& opts) {
  const std::size_t m = scores.size();
  if (log_n.size() != m) throw DataError("scores and log_n lengths differ");
  if (m < 3) throw DataError("curve fit needs at least 3 observations");
  if (!(c >= 0.0 && c < 1.0)) throw DataError("guessing rate must lie in [0,1)");
  const auto [xmin_it, xmax_it] = std::minmax_element(log_n.begin(), log_n.end());
  const double xmin = *xmin_it;
  const double xmax = *xmax_it;
  if (!(xmax > xmin)) throw DataError("log_n is constant; curve is not identified");

  double mean_y = 0.0;
  for (double v : scores) mean_y += v;
  mean_y /= static_cast<double>(m);
  double ss_tot = 0.0;
  for (double v : scores) ss_tot += (v - mean_y) * (v - mean_y);

  const double beta_lo = xmin - opts.beta_margin;
  const double beta_hi = xmax + opts.beta_margin;
  auto clamp_params = [&](ItemParams p) {
    p.alpha = std::clamp(p.alpha, opts.alpha_min, opts.alpha_max);
    p.beta = std::clamp(p.beta, beta_lo, beta_hi);
    return p;
  };

  ItemFit fit;
  fit.params = clamp_params(ItemParams{1.0, median({log_n.begin(), log_n.end()}), c});

  // Constant scores carry no slope information.
  const double scale = std::max(1.0, std::abs(mean_y));
  if (ss_tot <= 1e-24 * scale * scale * static_cast<double>(m)) {
    fit.params.alpha = opts.alpha_min;
    fit.degenerate = true;
  } else {
    double sse = sse_at(scores, log_n, fit.params);
    double lambda = 1e-3;
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
      fit.iterations = it + 1;
      // J'J and J'r for r = y - f, with df/dalpha and df/dbeta.
      double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
      const ItemParams& p = fit.params;
      for (std::size_t j = 0; j < m; ++j) {
        const double s = logistic(p.alpha * (log_n[j] - p.beta));
        const double dsz = (1.0 - c) * s * (1.0 - s);
        const double d_alpha = dsz * (log_n[j] - p.beta);
        const double d_beta = -dsz * p.alpha;
        const double r = scores[j] - (c + (1.0 - c) * s);
        a11 += d_alpha * d_alpha;
        a12 += d_alpha * d_beta;
        a22 += d_beta * d_beta;
        g1 += d_alpha * r;
        g2 += d_beta * r;
      }
      if (std::abs(g1) + std::abs(g2) <= 1e-300) {
        converged = true;
        break;
      }

      bool accepted = false;
      while (lambda < 1e16) {
        const double b11 = a11 + lambda * std::max(a11, 1e-300);
        const double b22 = a22 + lambda * std::max(a22, 1e-300);
        const double det = b11 * b22 - a12 * a12;
        if (!(det > 0.0) || !std::isfinite(det)) {
          lambda *= 10.0;
          continue;
        }
        const ItemParams trial = clamp_params(
            ItemParams{p.alpha + (b22 * g1 - a12 * g2) / det, p.beta + (b11 * g2 - a12 * g1) / det, c});
        const double trial_sse = sse_at(scores, log_n, trial);
        if (std::isfinite(trial_sse) && trial_sse <= sse) {
          const double rel = (sse - trial_sse) / std::max(sse, 1e-300);
          fit.params = trial;
          sse = trial_sse;
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          if (rel < opts.rel_tol) converged = true;
          break;
        }
        lambda *= 10.0;
      }
      // No descent direction left at any damping: stationary point.
      if (!accepted) converged = true;
      if (converged) break;
    }
    if (!converged) throw NumericalError("3PL curve fit did not converge within max iterations");
    fit.degenerate = fit.params.alpha <= opts.alpha_min;
  }

  fit.residuals.resize(static_cast<Eigen::Index>(m));
  double ss_res = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double r = scores[j] - predict_item(fit.params, log_n[j]);
    fit.residuals[static_cast<Eigen::Index>(j)] = r;
    ss_res += r * r;
  }
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 0.0;
  return fit;
}

ItemFit fit_item_curve(const Vector& scores, const Vector& log_n, double c, const CurveFitOptions& opts) {
  return fit_item_curve(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                        std::span<const double>(log_n.data(), static_cast<std::size_t>(log_n.size())), c, opts);
}

std::vector<ItemFit> fit_all_items(const Dataset& ds, const CurveFitOptions& opts) {
  const Vector log_n = ds.log_params();
  std::vector<ItemFit> fits;
  fits.reserve(ds.p());
  for (std::size_t i = 0; i < ds.p(); ++i) {
    const Vector row = ds.scores.row(static_cast<Eigen::Index>(i)).transpose();
    fits.push_back(fit_item_curve(row, log_n, ds.subtasks[i].chance_rate, opts));
  }
  return fits;
}

Matrix compute_residuals(const Dataset& ds, const std::vector<ItemFit>& fits) {
  if (fits.size() != ds.p()) throw DataError("dimension mismatch: one curve fit per subtask required");
  const Vector log_n = ds.log_params();
  Matrix out(ds.scores.rows(), ds.scores.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = ds.scores(i, j) - predict_item(fits[static_cast<std::size_t>(i)].params, log_n[j]);
  return out;
}

double logit_transform_cell(double score, const ItemParams& params, double epsilon, bool* clipped) {
  const double span = 1.0 - params.c;
  const double lo = params.c + epsilon * span;
  const double hi = 1.0 - epsilon * span;
  const double x = std::clamp(score, lo, hi);
  if (clipped) *clipped = x != score;
  return params.beta + std::log((x - params.c) / (1.0 - x)) / params.alpha;
}

TransformedMatrix logit_transform(const Matrix& scores, const std::vector<ItemParams>& params, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw DataError("epsilon must lie in (0, 0.5)");
  if (params.size() != static_cast<std::size_t>(scores.rows()))
    throw DataError("dimension mismatch: one item curve per row required");
  for (const auto& p : params) {
    if (!(p.alpha > 0.0)) throw NumericalError("logit transform requires alpha > 0");
    if (!(p.c >= 0.0 && p.c < 1.0)) throw DataError("guessing rate must lie in [0,1)");
  }
  TransformedMatrix tm;
  tm.item_params = params;
  tm.values.resize(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const auto& p = params[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      bool clipped = false;
      tm.values(i, j) = logit_transform_cell(scores(i, j), p, epsilon, &clipped);
      tm.clip_count += clipped ? 1 : 0;
    }
  }
  return tm;
}

TransformedMatrix logit_transform(const Dataset& ds, const std::vector<ItemFit>& fits, double epsilon) {
  if (fits.size() != ds.p()) throw DataError("dimension mismatch: one curve fit per subtask required");
  std::vector<ItemParams> params;
  params.reserve(fits.size());
  for (const auto& f : fits) params.push_back(f.params);
  return logit_transform(ds.scores, params, epsilon);
}

Matrix inverse_transform(const TransformedMatrix& tm) {
  if (tm.item_params.size() != static_cast<std::size_t>(tm.values.rows()))
    throw DataError("dimension mismatch: one item curve per row required");
  Matrix out(tm.values.rows(), tm.values.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const auto& p = tm.item_params[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = predict_item(p, tm.values(i, j));
  }
  return out;
}

double LogisticTrend::operator()(double x) const {
  return lower + (upper - lower) * logistic(slope * (x - midpoint));
}

namespace {

struct Profiled {
  double sse;
  double lower;
  double upper;
};

/// Best asymptotes for fixed (slope, midpoint) by linear least squares.
Profiled profile_asymptotes(const Vector& x, const Vector& y, double slope, double mid) {
  const auto n = static_cast<double>(x.size());
  double s = 0.0, ss = 0.0, sy = 0.0, sgy = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double g = logistic(slope * (x[j] - mid));
    s += g;
    ss += g * g;
    sy += y[j];
    sgy += g * y[j];
  }
  // y = a + b g
  const double det = n * ss - s * s;
  double a = sy / n;
  double b = 0.0;
  if (det > 1e-12 * n * n) {
    b = (n * sgy - s * sy) / det;
    a = (sy - b * s) / n;
  }
  double sse = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double r = y[j] - a - b * logistic(slope * (x[j] - mid));
    sse += r * r;
  }
  return {sse, a, a + b};
}

}  // namespace

LogisticTrend fit_logistic_trend(const Vector& x, const Vector& y) {
  if (x.size() != y.size() || x.size() < 4) throw DataError("logistic trend needs >= 4 paired observations");
  const double xmin = x.minCoeff();
  const double xmax = x.maxCoeff();
  if (!(xmax > xmin)) throw DataError("logistic trend needs a non-constant predictor");
  const double width = xmax - xmin;

  double best_slope = 1.0, best_mid = 0.5 * (xmin + xmax);
  double best = std::numeric_limits<double>::infinity();
  for (int si = 0; si < 25; ++si) {
    const double mag = 0.1 / width * std::pow(10.0, 3.0 * si / 24.0) * 4.0;
    for (int mi = 0; mi <= 20; ++mi) {
      const double mid = xmin + width * (-0.25 + 1.5 * mi / 20.0);
      const double sse = profile_asymptotes(x, y, mag, mid).sse;
      if (sse < best) {
        best = sse;
        best_slope = mag;
        best_mid = mid;
      }
    }
  }

  // Refine (slope, midpoint) with finite-difference Gauss-Newton steps.
  double lambda = 1e-3;
  for (int it = 0; it < 200; ++it) {
    const double hs = 1e-6 * std::max(std::abs(best_slope), 1e-3);
    const double hm = 1e-6 * std::max(width, 1.0);
    const auto n = x.size();
    Eigen::MatrixX2d jac(n, 2);
    Vector r0(n);
    auto residuals = [&](double slope, double mid) {
      const Profiled pr = profile_asymptotes(x, y, slope, mid);
      Vector r(n);
      for (Eigen::Index j = 0; j < n; ++j)
        r[j] = y[j] - pr.lower - (pr.upper - pr.lower) * logistic(slope * (x[j] - mid));
      return r;
    };
    r0 = residuals(best_slope, best_mid);
    jac.col(0) = (residuals(best_slope + hs, best_mid) - r0) / hs;
    jac.col(1) = (residuals(best_slope, best_mid + hm) - r0) / hm;
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r0;
    bool accepted = false;
    while (lambda < 1e12) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() *= 1.0 + lambda;
      const Eigen::Vector2d step = -damped.ldlt().solve(jtr);
      const double slope = best_slope + step[0];
      const double mid = best_mid + step[1];
      const double sse = profile_asymptotes(x, y, slope, mid).sse;
      if (std::isfinite(sse) && sse < best) {
        const double rel = (best - sse) / std::max(best, 1e-300);
        best = sse;
        best_slope = slope;
        best_mid = mid;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = rel > 1e-12;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }

  const Profiled pr = profile_asymptotes(x, y, best_slope, best_mid);
  LogisticTrend out;
  out.lower = pr.lower;
  out.upper = pr.upper;
  out.slope = best_slope;
  out.midpoint = best_mid;
  const double mean = y.mean();
  const double ss_tot = (y.array() - mean).square().sum();
  out.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - pr.sse / ss_tot, 0.0, 1.0) : 0.0;
  return out;
}

}  // namespace capfactor
