#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "capfactor/descriptives.hpp"
#include "capfactor/experiments.hpp"
#include "capfactor/factor_models.hpp"
#include "capfactor/pca.hpp"
#include "capfactor/scaling_laws.hpp"
#include "capfactor/score_data.hpp"

namespace capfactor {

/// Rectangular table emitted as CSV or as a JSON array of row objects.
/// Empty cells are written as "" in CSV and null in JSON.
struct Table {
  using Cell = std::variant<std::monostate, double, long long, bool, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::string to_csv() const;
  std::string to_json() const;
};

Table item_fit_table(const Dataset& ds, const std::vector<ItemFit>& fits);
/// rank, real_eig, sim_eig
Table scree_table(const ParallelResult& pa);
Table correlation_table(const CorrMatrix& corr);
/// One row per subtask: loadings, uniqueness.
Table loadings_table(const FactorSolution& sol, const std::vector<std::string>& labels);
/// model_id followed by one column per factor or component.
Table scores_table(const Matrix& scores, const std::vector<std::string>& model_ids, const std::string& prefix);
Table pca_weights_table(const PcaSolution& sol, const std::vector<std::string>& labels);
/// Eq, Str, Log, chi2, df, CFI, RMSEA, SRMR, AIC, BIC, error
Table experiment_a_table(const ExperimentATable& table);
/// One row per held-out subtask and an Average row.
Table experiment_b_table(const ExperimentBReport& report);
/// Per fold and method: intercept followed by slopes.
Table experiment_b_coefficients(const ExperimentBReport& report);

std::string factor_solution_json(const FactorSolution& sol, const std::vector<std::string>& labels,
                                 const std::optional<FitIndices>& fit = std::nullopt);
std::string parallel_json(const ParallelResult& pa);
std::string experiment_b_json(const ExperimentBReport& report);
std::string pca_json(const PcaSolution& sol, const std::vector<std::string>& labels);

}  // namespace capfactor
