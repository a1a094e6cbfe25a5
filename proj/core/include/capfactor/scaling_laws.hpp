#pragma once

#include <span>
#include <vector>

#include "capfactor/score_data.hpp"
#include "capfactor/types.hpp"

namespace capfactor {

/// Three-parameter logistic curve against ln(parameter count).
struct ItemParams {
  double alpha = 1.0;  // discrimination, per unit ln(params)
  double beta = 0.0;   // difficulty, in ln(params) units
  double c = 0.0;      // guessing rate, fixed at the chance rate
};

struct ItemFit {
  ItemParams params;
  double r_squared = 0.0;
  Vector residuals;  // observed - predicted, one per model
  int iterations = 0;
  /// Scores were constant (or nearly so); alpha sits at its lower bound.
  bool degenerate = false;
};

struct CurveFitOptions {
  double alpha_min = 1e-3;
  double alpha_max = 50.0;
  double beta_margin = 10.0;  // beta in [min(log_n) - margin, max(log_n) + margin]
  double rel_tol = 1e-10;     // relative SSE change
  int max_iter = 200;
};

/// c + (1 - c) / (1 + exp(-alpha (log_n - beta)))
double predict_item(const ItemParams& params, double log_n);

/// Least-squares fit of (alpha, beta) with c held fixed.
/// Throws DataError when m < 3 or log_n is constant, NumericalError on
/// non-convergence.
ItemFit fit_item_curve(std::span<const double> scores, std::span<const double> log_n, double c,
                       const CurveFitOptions& opts = {});
ItemFit fit_item_curve(const Vector& scores, const Vector& log_n, double c,
                       const CurveFitOptions& opts = {});

/// Fits one curve per subtask row, c fixed at each subtask's chance rate.
std::vector<ItemFit> fit_all_items(const Dataset& ds, const CurveFitOptions& opts = {});

/// residual(i, j) = B(i, j) - predict_item(fit_i, ln n_j)
Matrix compute_residuals(const Dataset& ds, const std::vector<ItemFit>& fits);

struct TransformedMatrix {
  Matrix values;                       // B'
  std::vector<ItemParams> item_params;  // row-aligned
  int clip_count = 0;
};

/// Clips each cell into [c + eps (1 - c), 1 - eps (1 - c)] then applies
/// beta + ln((x - c) / (1 - x)) / alpha.
TransformedMatrix logit_transform(const Matrix& scores, const std::vector<ItemParams>& params,
                                  double epsilon = 1e-3);
TransformedMatrix logit_transform(const Dataset& ds, const std::vector<ItemFit>& fits,
                                  double epsilon = 1e-3);

double logit_transform_cell(double score, const ItemParams& params, double epsilon, bool* clipped = nullptr);

/// Cellwise c + (1 - c) / (1 + exp(-alpha (B' - beta))).
Matrix inverse_transform(const TransformedMatrix& tm);

/// y ~ lower + (upper - lower) / (1 + exp(-slope (x - midpoint))). Used to
/// summarize how strongly a capability score tracks ln(params).
struct LogisticTrend {
  double lower = 0.0;
  double upper = 1.0;
  double slope = 1.0;
  double midpoint = 0.0;
  double r_squared = 0.0;

  double operator()(double x) const;
};

/// Least squares with the two asymptotes profiled out; a coarse grid over
/// (slope, midpoint) seeds a damped Gauss-Newton refinement.
LogisticTrend fit_logistic_trend(const Vector& x, const Vector& y);

}  // namespace capfactor
