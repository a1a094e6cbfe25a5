#include "capfactor/reports.hpp"

#include <cmath>
#include <sstream>

#include "capfactor/error.hpp"
#include "csv.hpp"
#include "json.hpp"

namespace capfactor {

using nlohmann::ordered_json;

namespace {

std::string cell_to_csv(const Table::Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "";
        else if constexpr (std::is_same_v<T, double>) return detail::format_double(v);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else return detail::csv_escape(v);
      },
      cell);
}

ordered_json cell_to_json(const Table::Cell& cell) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
        else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else return v;
      },
      cell);
}

// nan/inf are not representable in JSON
ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json vec(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v[i]));
  return out;
}

ordered_json mat(const Matrix& a) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) out.push_back(vec(a.row(i).transpose()));
  return out;
}

ordered_json fit_json(const FitIndices& f) {
  return {{"chi_square", num(f.chi_square)}, {"df", f.df},          {"cfi", num(f.cfi)},
          {"rmsea", num(f.rmsea)},           {"srmr", num(f.srmr)}, {"aic", num(f.aic)},
          {"bic", num(f.bic)},               {"baseline_chi_square", num(f.baseline_chi_square)},
          {"baseline_df", f.baseline_df}};
}

ordered_json errors_json(const MethodErrors& e) {
  return {{"SC", num(e.sc)}, {"OSL", num(e.osl)}, {"Size", num(e.size)}};
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

std::string factor_name(int f) { return "F" + std::to_string(f + 1); }

}  // namespace

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw Error("table row has " + std::to_string(row.size()) + " cells, expected " +
                                                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

std::string Table::to_csv() const {
  std::ostringstream out;
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << detail::csv_escape(columns[c]);
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << cell_to_csv(row[c]);
    out << '\n';
  }
  return out.str();
}

std::string Table::to_json() const {
  ordered_json out = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json obj = ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns[c]] = cell_to_json(row[c]);
    out.push_back(std::move(obj));
  }
  return dump(out);
}

Table item_fit_table(const Dataset& ds, const std::vector<ItemFit>& fits) {
  Table t{{"subtask", "alpha", "beta", "c", "r2", "iterations", "degenerate"}, {}};
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const auto& f = fits[i];
    t.add_row({ds.subtasks[i].name, f.params.alpha, f.params.beta, f.params.c, f.r_squared,
               static_cast<long long>(f.iterations), f.degenerate});
  }
  return t;
}

Table scree_table(const ParallelResult& pa) {
  Table t{{"rank", "real_eig", "sim_eig"}, {}};
  for (Eigen::Index r = 0; r < pa.real_eigenvalues.size(); ++r)
    t.add_row({static_cast<long long>(r + 1), pa.real_eigenvalues[r], pa.simulated_eigenvalues[r]});
  return t;
}

Table correlation_table(const CorrMatrix& corr) {
  Table t;
  t.columns.push_back("subtask");
  for (const auto& l : corr.labels) t.columns.push_back(l);
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    std::vector<Table::Cell> row{corr.labels[static_cast<std::size_t>(i)]};
    for (Eigen::Index j = 0; j < corr.values.cols(); ++j) row.emplace_back(corr.values(i, j));
    t.add_row(std::move(row));
  }
  return t;
}

Table loadings_table(const FactorSolution& sol, const std::vector<std::string>& labels) {
  Table t;
  t.columns.push_back("subtask");
  for (int f = 0; f < sol.k(); ++f) t.columns.push_back(factor_name(f));
  t.columns.push_back("uniqueness");
  for (int i = 0; i < sol.p(); ++i) {
    std::vector<Table::Cell> row{labels.at(static_cast<std::size_t>(i))};
    for (int f = 0; f < sol.k(); ++f) row.emplace_back(sol.loadings(i, f));
    row.emplace_back(sol.uniquenesses[i]);
    t.add_row(std::move(row));
  }
  return t;
}

Table scores_table(const Matrix& scores, const std::vector<std::string>& model_ids, const std::string& prefix) {
  Table t;
  t.columns.push_back("model_id");
  for (Eigen::Index f = 0; f < scores.rows(); ++f) t.columns.push_back(prefix + std::to_string(f + 1));
  for (Eigen::Index j = 0; j < scores.cols(); ++j) {
    std::vector<Table::Cell> row{model_ids.at(static_cast<std::size_t>(j))};
    for (Eigen::Index f = 0; f < scores.rows(); ++f) row.emplace_back(scores(f, j));
    t.add_row(std::move(row));
  }
  return t;
}

Table pca_weights_table(const PcaSolution& sol, const std::vector<std::string>& labels) {
  Table t;
  t.columns.push_back("subtask");
  for (Eigen::Index c = 0; c < sol.weights.cols(); ++c) t.columns.push_back("PC" + std::to_string(c + 1));
  for (Eigen::Index i = 0; i < sol.weights.rows(); ++i) {
    std::vector<Table::Cell> row{labels.at(static_cast<std::size_t>(i))};
    for (Eigen::Index c = 0; c < sol.weights.cols(); ++c) row.emplace_back(sol.weights(i, c));
    t.add_row(std::move(row));
  }
  return t;
}

Table experiment_a_table(const ExperimentATable& table) {
  Table t{{"Eq", "Str", "Log", "chi2", "df", "CFI", "RMSEA", "SRMR", "AIC", "BIC", "error"}, {}};
  for (const auto& r : table.rows) {
    std::vector<Table::Cell> row{static_cast<long long>(r.equation_id), r.structured, r.logistic};
    if (r.fit) {
      const auto& f = *r.fit;
      row.insert(row.end(), {f.chi_square, static_cast<long long>(f.df), f.cfi, f.rmsea, f.srmr, f.aic, f.bic});
    } else {
      row.insert(row.end(), 7, std::monostate{});
    }
    row.emplace_back(r.error);
    t.add_row(std::move(row));
  }
  return t;
}

Table experiment_b_table(const ExperimentBReport& report) {
  Table t{{"held_out", "train_SC", "train_OSL", "train_Size", "test_SC", "test_OSL", "test_Size", "error"}, {}};
  for (const auto& f : report.folds) {
    if (!f.error.empty()) {
      std::vector<Table::Cell> row{f.held_out};
      row.insert(row.end(), 6, std::monostate{});
      row.emplace_back(f.error);
      t.add_row(std::move(row));
      continue;
    }
    t.add_row({f.held_out, f.mse_train.sc, f.mse_train.osl, f.mse_train.size, f.mse_test.sc, f.mse_test.osl,
               f.mse_test.size, std::string()});
  }
  const auto& a = report.average_train;
  const auto& b = report.average_test;
  t.add_row({std::string("Average"), a.sc, a.osl, a.size, b.sc, b.osl, b.size, std::string()});
  return t;
}

Table experiment_b_coefficients(const ExperimentBReport& report) {
  Table t{{"held_out", "method", "term", "estimate"}, {}};
  const auto emit = [&t](const std::string& fold, const char* method, const Vector& coef, const char* prefix) {
    for (Eigen::Index i = 0; i < coef.size(); ++i) {
      const std::string term = i == 0 ? "intercept" : std::string(prefix) + std::to_string(i);
      t.add_row({fold, std::string(method), term, coef[i]});
    }
  };
  for (const auto& f : report.folds) {
    if (!f.error.empty()) continue;
    emit(f.held_out, "SC", f.sc_coefficients, "F");
    emit(f.held_out, "OSL", f.osl_coefficients, "PC");
    emit(f.held_out, "Size", f.size_coefficients, "log_n");
  }
  return t;
}

std::string factor_solution_json(const FactorSolution& sol, const std::vector<std::string>& labels,
                                 const std::optional<FitIndices>& fit) {
  ordered_json j;
  j["model_kind"] = to_string(sol.model_kind);
  j["data_kind"] = to_string(sol.data_kind);
  j["param_counting"] = to_string(sol.counting);
  j["k"] = sol.k();
  j["sample_size"] = sol.sample_size;
  j["n_params"] = sol.n_params;
  j["loglik"] = num(sol.loglik);
  j["converged"] = sol.converged;
  j["rotation_converged"] = sol.rotation_converged;
  j["iterations"] = sol.iterations;
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < sol.p(); ++i) {
    rows.push_back({{"subtask", labels.at(static_cast<std::size_t>(i))},
                    {"loadings", vec(sol.loadings.row(i).transpose())},
                    {"uniqueness", num(sol.uniquenesses[i])}});
  }
  j["indicators"] = std::move(rows);
  j["factor_cov"] = mat(sol.factor_cov);
  j["variance_shares"] = vec(variance_explained(sol));
  if (sol.structural_weights) {
    j["structural_weights"] = vec(*sol.structural_weights);
    if (sol.structural_weight_se) j["structural_weight_se"] = vec(*sol.structural_weight_se);
  }
  ordered_json heywood = ordered_json::array();
  for (int r : sol.heywood_rows) heywood.push_back(labels.at(static_cast<std::size_t>(r)));
  j["heywood"] = std::move(heywood);
  if (fit) j["fit"] = fit_json(*fit);
  return dump(j);
}

std::string parallel_json(const ParallelResult& pa) {
  ordered_json j;
  j["criterion"] = pa.criterion.describe();
  j["n_sims"] = pa.n_sims;
  j["seed"] = pa.seed;
  j["retained"] = pa.retained;
  j["real_eigenvalues"] = vec(pa.real_eigenvalues);
  j["simulated_eigenvalues"] = vec(pa.simulated_eigenvalues);
  j["warnings"] = pa.warnings;
  return dump(j);
}

std::string experiment_b_json(const ExperimentBReport& report) {
  ordered_json j;
  j["k"] = report.k;
  j["fraction"] = report.fraction;
  j["successful_folds"] = report.successful_folds;
  ordered_json folds = ordered_json::array();
  for (const auto& f : report.folds) {
    ordered_json fj;
    fj["held_out"] = f.held_out;
    if (!f.error.empty()) {
      fj["error"] = f.error;
    } else {
      fj["mse_train"] = errors_json(f.mse_train);
      fj["mse_test"] = errors_json(f.mse_test);
      fj["held_item"] = {{"alpha", num(f.held_item.alpha)}, {"beta", num(f.held_item.beta)}, {"c", num(f.held_item.c)}};
      fj["coefficients"] = {{"SC", vec(f.sc_coefficients)},
                            {"OSL", vec(f.osl_coefficients)},
                            {"Size", vec(f.size_coefficients)}};
      fj["pca_first_share"] = num(f.pca_first_share);
      fj["sc_variance_shares"] = vec(f.sc_variance_shares);
    }
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["average"] = {{"mse_train", errors_json(report.average_train)}, {"mse_test", errors_json(report.average_test)}};
  j["sc_beats_osl"] = {{"train", report.sc_beats_osl_train}, {"test", report.sc_beats_osl_test}};
  j["paired_t_p_value"] = {{"train", num(report.p_value_train)}, {"test", num(report.p_value_test)}};
  j["warnings"] = report.warnings;
  return dump(j);
}

std::string pca_json(const PcaSolution& sol, const std::vector<std::string>& labels) {
  ordered_json j;
  j["labels"] = labels;
  j["eigenvalues"] = vec(sol.eigenvalues);
  j["variance_shares"] = vec(sol.variance_shares);
  j["means"] = vec(sol.means);
  j["scales"] = vec(sol.scales);
  j["weights"] = mat(sol.weights);
  j["null_components"] = sol.null_components;
  return dump(j);
}

}  // namespace capfactor
