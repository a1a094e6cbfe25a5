#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "capfactor/types.hpp"

namespace capfactor {

struct SubtaskMeta {
  std::string name;
  int question_count = 1;
  int option_count = 2;
  /// Expected accuracy of uniform guessing. Equals 1/option_count except
  /// for merged subtasks whose members had different option counts.
  double chance_rate = 0.5;
};

/// Builds metadata with chance_rate = 1/option_count. Throws DataError on
/// question_count < 1 or option_count < 2.
SubtaskMeta make_subtask(std::string name, int question_count, int option_count);

struct ModelRecord {
  std::string model_id;
  double param_count = 1.0;
  double log_param = 0.0;  // ln(param_count)
};

ModelRecord make_model(std::string model_id, double param_count);

/// Canonical p x m score matrix. Rows follow `subtasks`, columns follow
/// `models`. Every cell is a finite value in [0, 1].
struct Dataset {
  std::vector<SubtaskMeta> subtasks;
  std::vector<ModelRecord> models;
  Matrix scores;

  std::size_t p() const { return subtasks.size(); }
  std::size_t m() const { return models.size(); }

  Vector log_params() const;
  std::optional<std::size_t> subtask_index(const std::string& name) const;
  std::optional<std::size_t> model_index(const std::string& model_id) const;
};

/// Checks every Dataset invariant; throws DataError describing the first
/// violation.
void validate(const Dataset& ds);

/// Score matrix that may still contain missing cells (stored as NaN).
struct RawDataset {
  std::vector<SubtaskMeta> subtasks;
  std::vector<ModelRecord> models;
  Matrix scores;
};

struct DropResult {
  Dataset dataset;
  std::vector<std::string> removed_models;
};

/// Removes every model column with at least one missing cell. No
/// imputation. Throws DataError("empty dataset") if nothing survives.
DropResult drop_incomplete(const RawDataset& raw);

/// Reads the three CSV inputs without dropping gaps. Column order is the
/// models-file order; row order is the subtasks-file order.
RawDataset load_raw_dataset(const std::filesystem::path& scores_csv,
                            const std::filesystem::path& models_csv,
                            const std::filesystem::path& subtasks_csv);

/// load_raw_dataset followed by drop_incomplete.
DropResult load_dataset(const std::filesystem::path& scores_csv,
                        const std::filesystem::path& models_csv,
                        const std::filesystem::path& subtasks_csv);

/// Writes the dataset back as scores/models/subtasks CSVs. Reals are written
/// in shortest round-trip form, so load(save(ds)) reproduces ds bit-exactly.
void save_dataset(const Dataset& ds, const std::filesystem::path& scores_csv,
                  const std::filesystem::path& models_csv,
                  const std::filesystem::path& subtasks_csv);

struct MergeRule {
  std::string name;
  std::vector<std::string> members;
  std::optional<double> chance_rate;
};

std::vector<MergeRule> load_merge_spec(const std::filesystem::path& json_path);
std::vector<MergeRule> parse_merge_spec(const std::string& json_text);

/// Collapses split subtasks. The merged row is the question-count-weighted
/// mean of its members and takes the position of the first member found.
/// A rule whose name already exists and whose members are all absent is
/// skipped, which makes the operation idempotent.
Dataset recombine_subtasks(const Dataset& ds, const std::vector<MergeRule>& rules);

}  // namespace capfactor
