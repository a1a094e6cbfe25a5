#include "capfactor/score_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "capfactor/error.hpp"
#include "csv.hpp"

namespace capfactor {

namespace {

using detail::CsvRow;

bool is_missing_token(const std::string& raw) {
  std::string s = detail::trim(raw);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s.empty() || s == "nan" || s == "null";
}

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line + 1);
}

void expect_header(const std::vector<CsvRow>& rows, const std::vector<std::string>& want,
                   const std::filesystem::path& path) {
  if (rows.empty()) throw DataError("malformed file (empty): " + path.string());
  const CsvRow& header = rows.front();
  bool ok = header.size() == want.size();
  for (std::size_t i = 0; ok && i < want.size(); ++i) ok = detail::trim(header[i]) == want[i];
  if (!ok) {
    std::string expected;
    for (const auto& w : want) expected += (expected.empty() ? "" : ",") + w;
    throw DataError("malformed file (expected header '" + expected + "'): " + path.string());
  }
}

std::vector<SubtaskMeta> read_subtasks(const std::filesystem::path& path) {
  const auto rows = detail::read_csv(path);
  expect_header(rows, {"name", "question_count", "option_count"}, path);
  std::vector<SubtaskMeta> out;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 3) throw DataError("malformed file (field count): " + where(path, r));
    int q = 0;
    int opts = 0;
    if (!detail::parse_int(detail::trim(row[1]), q) || !detail::parse_int(detail::trim(row[2]), opts))
      throw DataError("malformed file (integer expected): " + where(path, r));
    std::string name = detail::trim(row[0]);
    if (!seen.insert(name).second) throw DataError("duplicate subtask '" + name + "'");
    out.push_back(make_subtask(std::move(name), q, opts));
  }
  return out;
}

std::vector<ModelRecord> read_models(const std::filesystem::path& path) {
  const auto rows = detail::read_csv(path);
  expect_header(rows, {"model_id", "param_count"}, path);
  std::vector<ModelRecord> out;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 2) throw DataError("malformed file (field count): " + where(path, r));
    double n = 0.0;
    if (!detail::parse_double(detail::trim(row[1]), n))
      throw DataError("malformed file (number expected): " + where(path, r));
    std::string id = detail::trim(row[0]);
    if (!seen.insert(id).second) throw DataError("duplicate model id '" + id + "'");
    out.push_back(make_model(std::move(id), n));
  }
  return out;
}

}  // namespace

SubtaskMeta make_subtask(std::string name, int question_count, int option_count) {
  if (name.empty()) throw DataError("subtask name is empty");
  if (question_count < 1) throw DataError("question_count must be >= 1 for '" + name + "'");
  if (option_count < 2) throw DataError("option_count must be >= 2 for '" + name + "'");
  return SubtaskMeta{std::move(name), question_count, option_count, 1.0 / option_count};
}

ModelRecord make_model(std::string model_id, double param_count) {
  if (model_id.empty()) throw DataError("model id is empty");
  if (!(param_count > 0.0) || !std::isfinite(param_count))
    throw DataError("non-positive parameter count for '" + model_id + "'");
  const double log_n = std::log(param_count);
  return ModelRecord{std::move(model_id), param_count, log_n};
}

Vector Dataset::log_params() const {
  Vector out(static_cast<Eigen::Index>(models.size()));
  for (std::size_t j = 0; j < models.size(); ++j) out[static_cast<Eigen::Index>(j)] = models[j].log_param;
  return out;
}

std::optional<std::size_t> Dataset::subtask_index(const std::string& name) const {
  for (std::size_t i = 0; i < subtasks.size(); ++i)
    if (subtasks[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> Dataset::model_index(const std::string& model_id) const {
  for (std::size_t j = 0; j < models.size(); ++j)
    if (models[j].model_id == model_id) return j;
  return std::nullopt;
}

void validate(const Dataset& ds) {
  if (ds.scores.rows() != static_cast<Eigen::Index>(ds.p()) ||
      ds.scores.cols() != static_cast<Eigen::Index>(ds.m()))
    throw DataError("score matrix shape does not match subtask/model lists");
  std::unordered_set<std::string> names;
  for (const auto& s : ds.subtasks) {
    if (!names.insert(s.name).second) throw DataError("duplicate subtask '" + s.name + "'");
    if (s.question_count < 1) throw DataError("question_count must be >= 1 for '" + s.name + "'");
    if (!(s.chance_rate > 0.0 && s.chance_rate < 1.0))
      throw DataError("chance rate outside (0,1) for '" + s.name + "'");
  }
  std::unordered_set<std::string> ids;
  for (const auto& mr : ds.models) {
    if (!ids.insert(mr.model_id).second) throw DataError("duplicate model id '" + mr.model_id + "'");
    if (!(mr.param_count > 0.0)) throw DataError("non-positive parameter count for '" + mr.model_id + "'");
  }
  for (Eigen::Index i = 0; i < ds.scores.rows(); ++i)
    for (Eigen::Index j = 0; j < ds.scores.cols(); ++j) {
      const double v = ds.scores(i, j);
      if (std::isnan(v)) throw DataError("missing cell in validated dataset");
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("score outside [0,1]");
    }
}

DropResult drop_incomplete(const RawDataset& raw) {
  const auto m = raw.scores.cols();
  std::vector<Eigen::Index> keep;
  DropResult out;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (raw.scores.col(j).array().isNaN().any()) {
      out.removed_models.push_back(raw.models[static_cast<std::size_t>(j)].model_id);
    } else {
      keep.push_back(j);
    }
  }
  if (keep.empty()) throw DataError("empty dataset: every model has a missing score");

  out.dataset.subtasks = raw.subtasks;
  out.dataset.scores.resize(raw.scores.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.dataset.models.push_back(raw.models[static_cast<std::size_t>(keep[c])]);
    out.dataset.scores.col(static_cast<Eigen::Index>(c)) = raw.scores.col(keep[c]);
  }
  validate(out.dataset);
  return out;
}

RawDataset load_raw_dataset(const std::filesystem::path& scores_csv,
                            const std::filesystem::path& models_csv,
                            const std::filesystem::path& subtasks_csv) {
  RawDataset raw;
  raw.subtasks = read_subtasks(subtasks_csv);
  raw.models = read_models(models_csv);
  if (raw.subtasks.empty()) throw DataError("no subtasks in " + subtasks_csv.string());

  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < raw.subtasks.size(); ++i) row_of[raw.subtasks[i].name] = static_cast<Eigen::Index>(i);
  std::unordered_map<std::string, Eigen::Index> col_of;
  for (std::size_t j = 0; j < raw.models.size(); ++j) col_of[raw.models[j].model_id] = static_cast<Eigen::Index>(j);

  const auto rows = detail::read_csv(scores_csv);
  if (rows.empty() || detail::trim(rows.front().front()) != "model_id")
    throw DataError("malformed file (expected header starting with 'model_id'): " + scores_csv.string());

  const CsvRow& header = rows.front();
  std::vector<Eigen::Index> target_row(header.size(), -1);
  std::unordered_set<std::string> header_seen;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string name = detail::trim(header[c]);
    auto it = row_of.find(name);
    if (it == row_of.end()) throw DataError("scores column '" + name + "' is not listed in " + subtasks_csv.string());
    if (!header_seen.insert(name).second) throw DataError("duplicate scores column '" + name + "'");
    target_row[c] = it->second;
  }
  if (header_seen.size() != raw.subtasks.size())
    throw DataError("scores file is missing columns for some subtasks in " + subtasks_csv.string());

  raw.scores = Matrix::Constant(static_cast<Eigen::Index>(raw.subtasks.size()),
                                static_cast<Eigen::Index>(raw.models.size()),
                                std::numeric_limits<double>::quiet_NaN());
  std::unordered_set<std::string> seen_models;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) throw DataError("malformed file (field count): " + where(scores_csv, r));
    const std::string id = detail::trim(row[0]);
    auto it = col_of.find(id);
    if (it == col_of.end()) throw DataError("unknown model id '" + id + "' at " + where(scores_csv, r));
    if (!seen_models.insert(id).second) throw DataError("duplicate model id '" + id + "' in scores");
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (is_missing_token(row[c])) continue;
      double v = 0.0;
      if (!detail::parse_double(detail::trim(row[c]), v))
        throw DataError("malformed file (number expected): " + where(scores_csv, r));
      if (!(v >= 0.0 && v <= 1.0))
        throw DataError("score outside [0,1] for '" + id + "' at " + where(scores_csv, r));
      raw.scores(target_row[c], it->second) = v;
    }
  }
  return raw;
}

DropResult load_dataset(const std::filesystem::path& scores_csv,
                        const std::filesystem::path& models_csv,
                        const std::filesystem::path& subtasks_csv) {
  return drop_incomplete(load_raw_dataset(scores_csv, models_csv, subtasks_csv));
}

void save_dataset(const Dataset& ds, const std::filesystem::path& scores_csv,
                  const std::filesystem::path& models_csv,
                  const std::filesystem::path& subtasks_csv) {
  validate(ds);
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError(p.string(), "cannot write file");
    return out;
  };
  {
    auto out = open(subtasks_csv);
    out << "name,question_count,option_count\n";
    for (const auto& s : ds.subtasks)
      out << detail::csv_escape(s.name) << ',' << s.question_count << ',' << s.option_count << '\n';
  }
  {
    auto out = open(models_csv);
    out << "model_id,param_count\n";
    for (const auto& mr : ds.models)
      out << detail::csv_escape(mr.model_id) << ',' << detail::format_double(mr.param_count) << '\n';
  }
  {
    auto out = open(scores_csv);
    out << "model_id";
    for (const auto& s : ds.subtasks) out << ',' << detail::csv_escape(s.name);
    out << '\n';
    for (std::size_t j = 0; j < ds.m(); ++j) {
      out << detail::csv_escape(ds.models[j].model_id);
      for (std::size_t i = 0; i < ds.p(); ++i)
        out << ',' << detail::format_double(ds.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out << '\n';
    }
  }
}

std::vector<MergeRule> parse_merge_spec(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed merge spec: ") + e.what());
  }
  if (!doc.is_array()) throw DataError("malformed merge spec: expected a JSON list");
  std::vector<MergeRule> rules;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("name") || !item.contains("members") ||
        !item["name"].is_string() || !item["members"].is_array())
      throw DataError("malformed merge spec: each entry needs \"name\" and \"members\"");
    MergeRule rule;
    rule.name = item["name"].get<std::string>();
    for (const auto& m : item["members"]) {
      if (!m.is_string()) throw DataError("malformed merge spec: member names must be strings");
      rule.members.push_back(m.get<std::string>());
    }
    if (item.contains("chance_rate")) {
      if (!item["chance_rate"].is_number()) throw DataError("malformed merge spec: chance_rate must be a number");
      rule.chance_rate = item["chance_rate"].get<double>();
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<MergeRule> load_merge_spec(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError(json_path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_merge_spec(buf.str());
}

Dataset recombine_subtasks(const Dataset& ds, const std::vector<MergeRule>& rules) {
  Dataset cur = ds;
  for (const auto& rule : rules) {
    if (rule.members.empty()) throw DataError("empty member list for merged subtask '" + rule.name + "'");

    std::vector<std::size_t> idx;
    std::vector<std::string> absent;
    for (const auto& member : rule.members) {
      if (auto i = cur.subtask_index(member)) {
        idx.push_back(*i);
      } else {
        absent.push_back(member);
      }
    }
    if (idx.empty() && cur.subtask_index(rule.name)) continue;  // already merged
    if (!absent.empty()) throw DataError("unknown member subtask '" + absent.front() + "'");

    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());

    int q_total = 0;
    bool same_options = true;
    RowVector merged = RowVector::Zero(static_cast<Eigen::Index>(cur.m()));
    double chance = 0.0;
    for (std::size_t i : idx) {
      const auto& meta = cur.subtasks[i];
      q_total += meta.question_count;
      same_options = same_options && meta.option_count == cur.subtasks[idx.front()].option_count;
      merged += static_cast<double>(meta.question_count) * cur.scores.row(static_cast<Eigen::Index>(i));
      chance += static_cast<double>(meta.question_count) * meta.chance_rate;
    }
    merged /= static_cast<double>(q_total);
    chance /= static_cast<double>(q_total);

    SubtaskMeta meta;
    meta.name = rule.name;
    meta.question_count = q_total;
    if (rule.chance_rate) {
      if (!(*rule.chance_rate > 0.0 && *rule.chance_rate < 1.0))
        throw DataError("merge spec chance_rate outside (0,1) for '" + rule.name + "'");
      meta.chance_rate = *rule.chance_rate;
      meta.option_count = static_cast<int>(std::lround(1.0 / meta.chance_rate));
    } else if (same_options) {
      meta.option_count = cur.subtasks[idx.front()].option_count;
      meta.chance_rate = cur.subtasks[idx.front()].chance_rate;
    } else {
      meta.chance_rate = chance;
      meta.option_count = static_cast<int>(std::lround(1.0 / chance));
    }
    if (meta.option_count < 2) meta.option_count = 2;

    for (std::size_t i = 0; i < cur.p(); ++i) {
      if (cur.subtasks[i].name == rule.name && std::find(idx.begin(), idx.end(), i) == idx.end())
        throw DataError("merged name '" + rule.name + "' collides with an existing subtask");
    }

    Dataset next;
    next.models = cur.models;
    next.scores.resize(static_cast<Eigen::Index>(cur.p() - idx.size() + 1), static_cast<Eigen::Index>(cur.m()));
    Eigen::Index out_row = 0;
    for (std::size_t i = 0; i < cur.p(); ++i) {
      if (i == idx.front()) {
        next.subtasks.push_back(meta);
        next.scores.row(out_row++) = merged;
      } else if (std::find(idx.begin(), idx.end(), i) == idx.end()) {
        next.subtasks.push_back(cur.subtasks[i]);
        next.scores.row(out_row++) = cur.scores.row(static_cast<Eigen::Index>(i));
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace capfactor
