#pragma once

#include <optional>
#include <string>
#include <vector>

#include "capfactor/types.hpp"

namespace capfactor {

enum class ModelKind { pure, structured };
enum class DataKind { raw, transformed };

std::string to_string(ModelKind kind);
std::string to_string(DataKind kind);

/// How d (estimated parameter count) is tallied.
///  published:  k p + p + C(k,2)  (+k when structured)
///  identified: k p + p - C(k,2)  (+k when structured), i.e. after removing
///              the rotational indeterminacy of exploratory factor analysis
enum class ParamCounting { published, identified };

std::string to_string(ParamCounting counting);

int count_params(int p, int k, bool structured, ParamCounting counting = ParamCounting::published);

struct FactorOptions {
  DataKind data_kind = DataKind::raw;
  ParamCounting counting = ParamCounting::published;
  double heywood_bound = 1e-4;  // lower bound on standardized uniquenesses
  double oblimin_gamma = 0.0;
  bool rotate = true;
  int max_iter = 5000;
  double gtol = 1e-9;
};

/// Exploratory or structured (MIMIC) factor solution. Loadings and
/// uniquenesses are in the units of the input rows.
struct FactorSolution {
  Matrix loadings;      // p x k pattern coefficients (rotated, descending variance share)
  Vector uniquenesses;  // p, strictly positive
  /// Phi for pure fits; residual capability covariance Psi for structured fits.
  Matrix factor_cov;
  std::optional<Vector> structural_weights;     // w, per unit ln(params)
  std::optional<Vector> structural_weight_se;   // observed-information diagonal
  double loglik = 0.0;
  int n_params = 0;
  ModelKind model_kind = ModelKind::pure;
  DataKind data_kind = DataKind::raw;
  ParamCounting counting = ParamCounting::published;

  // Sample moments the fit was computed from.
  int sample_size = 0;
  Vector means;           // row means
  Vector sds;             // row standard deviations (ML)
  double covariate_mean = 0.0;
  double covariate_var = 0.0;

  int iterations = 0;
  bool converged = false;
  bool rotation_converged = true;
  std::vector<int> heywood_rows;  // rows whose uniqueness hit the lower bound

  int p() const { return static_cast<int>(loadings.rows()); }
  int k() const { return static_cast<int>(loadings.cols()); }

  /// Covariance of the capabilities: Phi (pure) or w w' var(ln n) + Psi.
  Matrix total_factor_cov() const;
  /// Model-implied covariance. Structured fits append ln(params) as the
  /// last variable, with its variance fixed at the sample value.
  Matrix implied_covariance() const;
  /// Loadings divided by the row standard deviations.
  Matrix standardized_loadings() const;
};

struct FitIndices {
  double chi_square = 0.0;
  int df = 0;
  double cfi = 1.0;
  double rmsea = 0.0;
  double srmr = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double baseline_chi_square = 0.0;
  int baseline_df = 0;
};

struct CapabilityScores {
  Matrix values;  // k x m, columns in input model order
  std::string method = "regression";
};

/// ML (divide-by-m) covariance of the rows of `values`.
Matrix sample_covariance(const Matrix& values);
/// Covariance of [values; log_n'] with the covariate as the last variable.
Matrix joint_sample_covariance(const Matrix& values, const Vector& log_n);

/// Maximum-likelihood exploratory factor analysis of the row variables.
FactorSolution fit_efa(const Matrix& values, int k, const FactorOptions& opts = {});

/// Structured capabilities model: capabilities = w ln(n) + residual, loaded
/// onto the rows through L. Fitted as a MIMIC model with ln(n) exogenous;
/// the reported log-likelihood is conditional on ln(n).
FactorSolution fit_structured(const Matrix& values, const Vector& log_n, int k,
                              const FactorOptions& opts = {});

/// `sample_cov` must be sample_covariance (pure) or joint_sample_covariance
/// (structured) of the data the solution was fitted on.
FitIndices compute_fit_indices(const FactorSolution& sol, const Matrix& sample_cov, int m);

/// Share of the summed squared standardized loadings carried by each factor,
/// descending.
Vector variance_explained(const FactorSolution& sol);

/// Regression-method scores. Structured fits require `log_n` and return the
/// conditional expectation of the capabilities given scores and size.
CapabilityScores capability_scores(const FactorSolution& sol, const Matrix& values,
                                   const std::optional<Vector>& log_n = std::nullopt);

/// Tucker congruence coefficient between two loading columns.
double tucker_congruence(const Vector& a, const Vector& b);

/// Greedy one-to-one matching of estimated to true factors by absolute
/// congruence. Returns |congruence| per true factor.
std::vector<double> matched_congruences(const Matrix& estimated, const Matrix& truth);

}  // namespace capfactor
