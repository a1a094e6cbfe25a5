#include "capfactor/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "capfactor/error.hpp"
#include "capfactor/random.hpp"

namespace capfactor {

namespace {

constexpr std::uint64_t kItemStream = 0;

// Option and question counts of the 19 recombined BBH subtasks, cycled for
// other p.
constexpr int kOptionCycle[] = {2, 2, 6, 3, 2, 11, 2, 7, 6, 2, 19, 5, 2, 2, 4, 7, 18, 6, 2};
constexpr int kQuestionCycle[] = {250, 187, 250, 250, 250, 250, 250, 750, 250, 250,
                                  250, 146, 178, 250, 250, 750, 250, 250, 250};

std::string padded(const char* prefix, int i, int width) {
  std::string digits = std::to_string(i);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.p < 1 || cfg.m < 1 || cfg.k < 1) throw DataError("synthetic config: p, m, k must be >= 1");
  auto need = [](bool ok, const char* what) {
    if (!ok) throw DataError(std::string("synthetic config: ") + what);
  };
  need(cfg.true_loadings.rows() == cfg.p && cfg.true_loadings.cols() == cfg.k, "true_loadings must be p x k");
  need(cfg.true_weights.size() == cfg.k, "true_weights must have k entries");
  need(cfg.capability_intercepts.size() == cfg.k, "capability_intercepts must have k entries");
  need(cfg.capability_noise_sd.size() == cfg.k, "capability_noise_sd must have k entries");
  need(cfg.question_counts.size() == cfg.p, "question_counts must have p entries");
  need(cfg.option_counts.size() == cfg.p, "option_counts must have p entries");
  need(cfg.unique_noise_sd.size() == cfg.p, "unique_noise_sd must have p entries");
  need((cfg.capability_noise_sd.array() >= 0.0).all() && (cfg.unique_noise_sd.array() >= 0.0).all(),
       "noise sds must be >= 0");
  need((cfg.question_counts.array() >= 1).all(), "question counts must be >= 1");
  need((cfg.option_counts.array() >= 2).all(), "option counts must be >= 2");
  need(cfg.log_n_range.first < cfg.log_n_range.second, "log_n_range needs lo < hi");
  need(cfg.alpha_range.first > 0.0 && cfg.alpha_range.first <= cfg.alpha_range.second, "bad alpha_range");
  need(cfg.beta_range.first <= cfg.beta_range.second, "bad beta_range");
  if (cfg.alphas) need(cfg.alphas->size() == cfg.p && (cfg.alphas->array() > 0.0).all(), "alphas must be p positive values");
  if (cfg.betas) need(cfg.betas->size() == cfg.p, "betas must have p entries");
}

SynthConfig make_default_config(int p, int m, int k, std::uint64_t seed) {
  if (p < 1 || m < 1 || k < 1) throw DataError("synthetic config: p, m, k must be >= 1");
  SynthConfig cfg;
  cfg.p = p;
  cfg.m = m;
  cfg.k = k;
  cfg.seed = seed;

  // Each row loads mainly on factor (i mod k); the rest of its unit row sum
  // spreads evenly over the other factors.
  cfg.true_loadings.resize(p, k);
  auto rng = substream(seed, 0xC0FFEEULL);
  std::uniform_real_distribution<double> primary(0.6, 0.9);
  for (int i = 0; i < p; ++i) {
    const double main = k == 1 ? 1.0 : primary(rng);
    for (int f = 0; f < k; ++f)
      cfg.true_loadings(i, f) = f == i % k ? main : (1.0 - main) / static_cast<double>(k - 1);
  }
  cfg.true_weights = Vector::Ones(k);
  cfg.capability_intercepts = Vector::Zero(k);
  cfg.capability_noise_sd = Vector::Constant(k, 2.5);
  cfg.unique_noise_sd = Vector::Constant(p, 0.5);
  cfg.question_counts.resize(p);
  cfg.option_counts.resize(p);
  for (int i = 0; i < p; ++i) {
    cfg.question_counts[i] = kQuestionCycle[i % 19];
    cfg.option_counts[i] = kOptionCycle[i % 19];
  }
  return cfg;
}

Population generate_population(const SynthConfig& cfg) {
  validate(cfg);
  const int p = cfg.p;
  const int m = cfg.m;
  const int k = cfg.k;

  Population pop;
  GroundTruth& gt = pop.truth;
  gt.loadings = cfg.true_loadings;
  gt.weights = cfg.true_weights;

  {
    auto rng = substream(cfg.seed, kItemStream);
    std::uniform_real_distribution<double> ua(cfg.alpha_range.first, cfg.alpha_range.second);
    std::uniform_real_distribution<double> ub(cfg.beta_range.first, cfg.beta_range.second);
    for (int i = 0; i < p; ++i) {
      ItemParams ip;
      const double a = ua(rng);
      const double b = ub(rng);
      ip.alpha = cfg.alphas ? (*cfg.alphas)[i] : a;
      ip.beta = cfg.betas ? (*cfg.betas)[i] : b;
      ip.c = 1.0 / cfg.option_counts[i];
      gt.items.push_back(ip);
    }
  }

  gt.log_n.resize(m);
  gt.capabilities.resize(k, m);
  gt.propensity.resize(p, m);
  gt.expected_accuracy.resize(p, m);
  Matrix scores(p, m);
  std::uniform_real_distribution<double> ulog(cfg.log_n_range.first, cfg.log_n_range.second);
  for (int j = 0; j < m; ++j) {
    auto rng = substream(cfg.seed, static_cast<std::uint64_t>(j) + 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double x = ulog(rng);
    gt.log_n[j] = x;
    for (int f = 0; f < k; ++f)
      gt.capabilities(f, j) = cfg.true_weights[f] * x + cfg.capability_intercepts[f] +
                              cfg.capability_noise_sd[f] * normal(rng);
    for (int i = 0; i < p; ++i) {
      const double eta = cfg.true_loadings.row(i).dot(gt.capabilities.col(j)) + cfg.unique_noise_sd[i] * normal(rng);
      gt.propensity(i, j) = eta;
      const double prob = predict_item(gt.items[static_cast<std::size_t>(i)], eta);
      gt.expected_accuracy(i, j) = prob;
      std::binomial_distribution<int> binom(cfg.question_counts[i], prob);
      scores(i, j) = static_cast<double>(binom(rng)) / cfg.question_counts[i];
    }
  }

  Dataset& ds = pop.dataset;
  const int width = p >= 100 ? 3 : 2;
  for (int i = 0; i < p; ++i)
    ds.subtasks.push_back(make_subtask(padded("task_", i + 1, width), cfg.question_counts[i], cfg.option_counts[i]));
  const int mwidth = std::max(5, static_cast<int>(std::to_string(m).size()));
  for (int j = 0; j < m; ++j) ds.models.push_back(make_model(padded("model_", j + 1, mwidth), std::exp(gt.log_n[j])));
  ds.scores = std::move(scores);
  validate(ds);
  return pop;
}

Matrix generate_factor_data(const Matrix& loadings, const Matrix& factor_cov, const Vector& uniquenesses, int m,
                            std::uint64_t seed) {
  const auto p = loadings.rows();
  const auto k = loadings.cols();
  if (factor_cov.rows() != k || factor_cov.cols() != k) throw DataError("factor_cov must be k x k");
  if (uniquenesses.size() != p) throw DataError("uniquenesses must have one entry per row");
  if ((uniquenesses.array() < 0.0).any()) throw DataError("uniquenesses must be non-negative");
  if (m < 1) throw DataError("m must be positive");
  Eigen::LLT<Matrix> llt(factor_cov);
  if (llt.info() != Eigen::Success) throw DataError("factor_cov must be positive definite");
  const Matrix chol = llt.matrixL();
  const Vector unique_sd = uniquenesses.cwiseSqrt();
  Matrix out(p, m);
  Vector z(k);
  for (int j = 0; j < m; ++j) {
    auto rng = substream(seed, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index f = 0; f < k; ++f) z[f] = normal(rng);
    const Vector f = chol * z;
    for (Eigen::Index i = 0; i < p; ++i) out(i, j) = loadings.row(i).dot(f) + unique_sd[i] * normal(rng);
  }
  return out;
}

Matrix simple_structure(int p, int k, double primary) {
  if (p < 1 || k < 1) throw DataError("p and k must be positive");
  Matrix l = Matrix::Zero(p, k);
  for (int i = 0; i < p; ++i) l(i, i % k) = primary;
  return l;
}

namespace {

using nlohmann::json;

json to_json_matrix(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class V>
json to_json_vector(const V& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from(const json& j, const char* key) {
  if (!j.is_array()) throw DataError(std::string("synthetic config: '") + key + "' must be a list");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

std::pair<double, double> pair_from(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 2) throw DataError(std::string("synthetic config: '") + key + "' must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

SynthConfig parse_synth_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed synthetic config: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("malformed synthetic config: expected an object");
  try {
    const int p = doc.value("p", 19);
    const int m = doc.value("m", 1000);
    const int k = doc.value("k", 3);
    const auto seed = doc.value("seed", std::uint64_t{42});
    SynthConfig cfg = make_default_config(p, m, k, seed);
    if (doc.contains("true_loadings")) {
      const auto& rows = doc["true_loadings"];
      cfg.true_loadings.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != static_cast<std::size_t>(cfg.true_loadings.cols()))
          throw DataError("synthetic config: ragged true_loadings");
        for (std::size_t f = 0; f < rows[i].size(); ++f)
          cfg.true_loadings(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = rows[i][f].get<double>();
      }
    }
    if (doc.contains("true_weights")) cfg.true_weights = vector_from(doc["true_weights"], "true_weights");
    if (doc.contains("capability_intercepts"))
      cfg.capability_intercepts = vector_from(doc["capability_intercepts"], "capability_intercepts");
    if (doc.contains("capability_noise_sd"))
      cfg.capability_noise_sd = vector_from(doc["capability_noise_sd"], "capability_noise_sd");
    if (doc.contains("unique_noise_sd")) cfg.unique_noise_sd = vector_from(doc["unique_noise_sd"], "unique_noise_sd");
    if (doc.contains("question_counts")) cfg.question_counts = vector_from(doc["question_counts"], "question_counts").cast<int>();
    if (doc.contains("option_counts")) cfg.option_counts = vector_from(doc["option_counts"], "option_counts").cast<int>();
    if (doc.contains("log_n_range")) cfg.log_n_range = pair_from(doc["log_n_range"], "log_n_range");
    if (doc.contains("alpha_range")) cfg.alpha_range = pair_from(doc["alpha_range"], "alpha_range");
    if (doc.contains("beta_range")) cfg.beta_range = pair_from(doc["beta_range"], "beta_range");
    if (doc.contains("alphas")) cfg.alphas = vector_from(doc["alphas"], "alphas");
    if (doc.contains("betas")) cfg.betas = vector_from(doc["betas"], "betas");
    validate(cfg);
    return cfg;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed synthetic config: ") + e.what());
  }
}

std::string synth_config_to_json(const SynthConfig& cfg) {
  json doc;
  doc["p"] = cfg.p;
  doc["m"] = cfg.m;
  doc["k"] = cfg.k;
  doc["seed"] = cfg.seed;
  doc["true_loadings"] = to_json_matrix(cfg.true_loadings);
  doc["true_weights"] = to_json_vector(cfg.true_weights);
  doc["capability_intercepts"] = to_json_vector(cfg.capability_intercepts);
  doc["capability_noise_sd"] = to_json_vector(cfg.capability_noise_sd);
  doc["unique_noise_sd"] = to_json_vector(cfg.unique_noise_sd);
  doc["question_counts"] = to_json_vector(cfg.question_counts);
  doc["option_counts"] = to_json_vector(cfg.option_counts);
  doc["log_n_range"] = {cfg.log_n_range.first, cfg.log_n_range.second};
  doc["alpha_range"] = {cfg.alpha_range.first, cfg.alpha_range.second};
  doc["beta_range"] = {cfg.beta_range.first, cfg.beta_range.second};
  if (cfg.alphas) doc["alphas"] = to_json_vector(*cfg.alphas);
  if (cfg.betas) doc["betas"] = to_json_vector(*cfg.betas);
  return doc.dump(2);
}

std::string ground_truth_to_json(const Population& pop) {
  const GroundTruth& gt = pop.truth;
  json doc;
  json items = json::array();
  for (std::size_t i = 0; i < gt.items.size(); ++i)
    items.push_back({{"subtask", pop.dataset.subtasks[i].name},
                     {"alpha", gt.items[i].alpha},
                     {"beta", gt.items[i].beta},
                     {"c", gt.items[i].c}});
  doc["items"] = std::move(items);
  doc["loadings"] = to_json_matrix(gt.loadings);
  doc["weights"] = to_json_vector(gt.weights);
  json models = json::array();
  for (std::size_t j = 0; j < pop.dataset.models.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    models.push_back({{"model_id", pop.dataset.models[j].model_id},
                      {"log_n", gt.log_n[jj]},
                      {"capabilities", to_json_vector(Vector(gt.capabilities.col(jj)))}});
  }
  doc["models"] = std::move(models);
  return doc.dump(2);
}

}  // namespace capfactor
