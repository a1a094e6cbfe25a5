#include "capfactor/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "capfactor/error.hpp"
#include "capfactor/ols.hpp"
#include "capfactor/pca.hpp"

namespace capfactor {

const ExperimentARow& ExperimentATable::row(bool structured, bool logistic) const {
  for (const auto& r : rows)
    if (r.structured == structured && r.logistic == logistic) return r;
  throw Error("experiment A table is incomplete");
}

std::optional<bool> ExperimentATable::structured_wins_aic(DataKind kind) const {
  const bool logistic = kind == DataKind::transformed;
  const auto& pure = row(false, logistic);
  const auto& str = row(true, logistic);
  if (!pure.fit || !str.fit) return std::nullopt;
  return str.fit->aic < pure.fit->aic;
}

std::optional<bool> ExperimentATable::structured_wins_bic(DataKind kind) const {
  const bool logistic = kind == DataKind::transformed;
  const auto& pure = row(false, logistic);
  const auto& str = row(true, logistic);
  if (!pure.fit || !str.fit) return std::nullopt;
  return str.fit->bic < pure.fit->bic;
}

ExperimentATable run_experiment_a(const Dataset& ds, int k, const ExperimentOptions& opts) {
  validate(ds);
  ExperimentATable table;
  table.k = k;
  table.item_fits = fit_all_items(ds, opts.curve);
  const TransformedMatrix tm = logit_transform(ds, table.item_fits, opts.epsilon);
  table.clip_count = tm.clip_count;
  const Vector log_n = ds.log_params();
  const int m = static_cast<int>(ds.m());

  struct Spec {
    int eq;
    bool structured;
    bool logistic;
  };
  for (const Spec spec : {Spec{13, false, false}, Spec{14, true, false}, Spec{15, false, true}, Spec{16, true, true}}) {
    ExperimentARow row;
    row.equation_id = spec.eq;
    row.structured = spec.structured;
    row.logistic = spec.logistic;
    const Matrix& values = spec.logistic ? tm.values : ds.scores;
    FactorOptions fo;
    fo.data_kind = spec.logistic ? DataKind::transformed : DataKind::raw;
    fo.counting = opts.counting;
    try {
      if (spec.structured) {
        row.solution = fit_structured(values, log_n, k, fo);
        row.fit = compute_fit_indices(*row.solution, joint_sample_covariance(values, log_n), m);
      } else {
        row.solution = fit_efa(values, k, fo);
        row.fit = compute_fit_indices(*row.solution, sample_covariance(values), m);
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

TrainTestSplit split_bottom_train(const Vector& held_scores, const std::vector<std::string>& model_ids,
                                  double fraction) {
  const auto m = held_scores.size();
  if (!(fraction > 0.0 && fraction < 1.0)) throw DataError("training fraction must lie in (0,1)");
  if (static_cast<std::size_t>(m) != model_ids.size()) throw DataError("score and model id counts differ");
  if (m < 5) throw DataError("too few models to split (m < 5)");
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (held_scores[a] != held_scores[b]) return held_scores[a] < held_scores[b];
    return model_ids[static_cast<std::size_t>(a)] < model_ids[static_cast<std::size_t>(b)];
  });
  const auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(m)));
  if (n_train < 1 || n_train >= static_cast<std::size_t>(m)) throw DataError("split leaves an empty train or test set");
  TrainTestSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

double paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("paired test needs equal-length samples");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) return mean == 0.0 ? 1.0 : 0.0;
  const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
  boost::math::students_t dist(static_cast<double>(n - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

namespace {

Matrix take_columns(const Matrix& m, const std::vector<int>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = m.col(cols[c]);
  return out;
}

Vector take(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out[static_cast<Eigen::Index>(c)] = v[idx[c]];
  return out;
}

Matrix drop_row(const Matrix& m, Eigen::Index row) {
  Matrix out(m.rows() - 1, m.cols());
  out.topRows(row) = m.topRows(row);
  out.bottomRows(m.rows() - row - 1) = m.bottomRows(m.rows() - row - 1);
  return out;
}

Vector with_intercept(const OlsFit& fit) {
  Vector v(fit.coefficients.size() + 1);
  v[0] = fit.intercept;
  v.tail(fit.coefficients.size()) = fit.coefficients;
  return v;
}

/// Fits y on the predictors over the training columns; returns (train, test)
/// MSE and the coefficients. Predictors are k x m.
std::pair<double, double> regress(const Matrix& predictors, const Vector& y, const TrainTestSplit& split,
                                  Vector& coefficients) {
  const Matrix xt = take_columns(predictors, split.train).transpose();
  const OlsFit fit = fit_ols(xt, take(y, split.train));
  coefficients = with_intercept(fit);
  const double train = mean_squared_error(fit.predict(xt), take(y, split.train));
  const Matrix xs = take_columns(predictors, split.test).transpose();
  const double test = mean_squared_error(fit.predict(xs), take(y, split.test));
  return {train, test};
}

}  // namespace

ExperimentBReport run_experiment_b(const Dataset& ds, int k, const ExperimentOptions& opts) {
  validate(ds);
  if (ds.p() < 3) throw DataError("experiment B needs at least 3 subtasks");
  if (k < 1 || k >= static_cast<int>(ds.p()) - 1)
    throw DataError("experiment B needs 1 <= k < p - 1 (k = " + std::to_string(k) + ")");
  ExperimentBReport report;
  report.k = k;
  report.fraction = opts.fraction;

  const Vector log_n = ds.log_params();
  const std::vector<ItemFit> fits = fit_all_items(ds, opts.curve);
  const TransformedMatrix transformed = logit_transform(ds, fits, opts.epsilon);
  std::vector<std::string> ids;
  for (const auto& mr : ds.models) ids.push_back(mr.model_id);

  std::vector<double> sc_train, osl_train, sc_test, osl_test;
  for (std::size_t held = 0; held < ds.p(); ++held) {
    FoldReport fold;
    fold.held_out = ds.subtasks[held].name;
    const auto hrow = static_cast<Eigen::Index>(held);
    try {
      const Vector held_raw = ds.scores.row(hrow).transpose();
      const TrainTestSplit split = split_bottom_train(held_raw, ids, opts.fraction);

      // Place the held-out row on the transformed scale with a curve fitted
      // to the training models only.
      const ItemFit held_fit = fit_item_curve(take(held_raw, split.train), take(log_n, split.train),
                                              ds.subtasks[held].chance_rate, opts.curve);
      fold.held_item = held_fit.params;
      Vector held_t(held_raw.size());
      for (Eigen::Index j = 0; j < held_raw.size(); ++j)
        held_t[j] = logit_transform_cell(held_raw[j], held_fit.params, opts.epsilon);

      const Matrix rest_t = drop_row(transformed.values, hrow);
      const Matrix rest_raw = drop_row(ds.scores, hrow);

      FactorOptions fo;
      fo.data_kind = DataKind::transformed;
      fo.counting = opts.counting;
      const FactorSolution sc = fit_structured(rest_t, log_n, k, fo);
      fold.sc_variance_shares = variance_explained(sc);
      const Matrix sc_scores = capability_scores(sc, rest_t, log_n).values;
      std::tie(fold.mse_train.sc, fold.mse_test.sc) = regress(sc_scores, held_t, split, fold.sc_coefficients);

      PcaOptions po;
      po.standardize = opts.standardize_pca;
      const PcaSolution pca = fit_pca(rest_raw, k, po);
      fold.pca_first_share = pca.variance_shares[0];
      std::tie(fold.mse_train.osl, fold.mse_test.osl) = regress(pca.scores, held_t, split, fold.osl_coefficients);

      std::tie(fold.mse_train.size, fold.mse_test.size) =
          regress(Matrix(log_n.transpose()), held_t, split, fold.size_coefficients);

      sc_train.push_back(fold.mse_train.sc);
      osl_train.push_back(fold.mse_train.osl);
      sc_test.push_back(fold.mse_test.sc);
      osl_test.push_back(fold.mse_test.osl);
      report.average_train.sc += fold.mse_train.sc;
      report.average_train.osl += fold.mse_train.osl;
      report.average_train.size += fold.mse_train.size;
      report.average_test.sc += fold.mse_test.sc;
      report.average_test.osl += fold.mse_test.osl;
      report.average_test.size += fold.mse_test.size;
      report.sc_beats_osl_train += fold.mse_train.sc < fold.mse_train.osl ? 1 : 0;
      report.sc_beats_osl_test += fold.mse_test.sc < fold.mse_test.osl ? 1 : 0;
      ++report.successful_folds;
    } catch (const Error& e) {
      fold.error = e.what();
      report.warnings.push_back("fold '" + fold.held_out + "' failed and is excluded from averages: " + e.what());
    }
    report.folds.push_back(std::move(fold));
  }

  if (report.successful_folds == 0) throw NumericalError("every experiment B fold failed");
  const double n = report.successful_folds;
  for (MethodErrors* avg : {&report.average_train, &report.average_test}) {
    avg->sc /= n;
    avg->osl /= n;
    avg->size /= n;
  }
  report.p_value_train = paired_t_test(sc_train, osl_train);
  report.p_value_test = paired_t_test(sc_test, osl_test);
  return report;
}

}  // namespace capfactor
