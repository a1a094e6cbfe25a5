#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "capfactor/factor_models.hpp"
#include "capfactor/scaling_laws.hpp"
#include "capfactor/score_data.hpp"

namespace capfactor {

struct ExperimentOptions {
  double epsilon = 1e-3;   // logit clipping
  double fraction = 0.8;   // bottom share used for training in Experiment B
  bool standardize_pca = false;
  ParamCounting counting = ParamCounting::published;
  CurveFitOptions curve;
};

/// One row of the four-model comparison. Equation ids: 13 raw/pure,
/// 14 raw/structured, 15 transformed/pure, 16 transformed/structured.
struct ExperimentARow {
  int equation_id = 13;
  bool structured = false;
  bool logistic = false;
  std::optional<FitIndices> fit;
  std::optional<FactorSolution> solution;
  std::string error;  // non-empty when the fit failed
};

struct ExperimentATable {
  int k = 5;
  std::vector<ExperimentARow> rows;
  std::vector<ItemFit> item_fits;
  int clip_count = 0;

  /// AIC of the structured model is lower than the pure one within the
  /// same data kind. Empty when either fit failed.
  std::optional<bool> structured_wins_aic(DataKind kind) const;
  std::optional<bool> structured_wins_bic(DataKind kind) const;
  const ExperimentARow& row(bool structured, bool logistic) const;
};

ExperimentATable run_experiment_a(const Dataset& ds, int k, const ExperimentOptions& opts = {});

struct TrainTestSplit {
  std::vector<int> train;  // column indices, ascending score order
  std::vector<int> test;
};

/// Train on the floor(fraction m) lowest held-out scores; ties go to the
/// lexicographically smaller model id.
TrainTestSplit split_bottom_train(const Vector& held_scores, const std::vector<std::string>& model_ids,
                                  double fraction = 0.8);

struct MethodErrors {
  double sc = 0.0;
  double osl = 0.0;
  double size = 0.0;
};

struct FoldReport {
  std::string held_out;
  MethodErrors mse_train;
  MethodErrors mse_test;
  // Regression coefficients (intercept first) per method.
  Vector sc_coefficients;
  Vector osl_coefficients;
  Vector size_coefficients;
  ItemParams held_item;  // fitted on the training split only
  double pca_first_share = 0.0;
  Vector sc_variance_shares;
  std::string error;  // non-empty when the fold failed
};

struct ExperimentBReport {
  int k = 5;
  double fraction = 0.8;
  std::vector<FoldReport> folds;
  MethodErrors average_train;  // unweighted over successful folds
  MethodErrors average_test;
  int sc_beats_osl_train = 0;
  int sc_beats_osl_test = 0;
  int successful_folds = 0;
  /// Two-sided paired t-test p-values (SC vs OSL) across folds.
  double p_value_train = 1.0;
  double p_value_test = 1.0;
  std::vector<std::string> warnings;
};

ExperimentBReport run_experiment_b(const Dataset& ds, int k, const ExperimentOptions& opts = {});

/// Two-sided paired t-test p-value for mean(a - b) == 0.
double paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace capfactor
