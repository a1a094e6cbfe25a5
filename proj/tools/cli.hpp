#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "capfactor/descriptives.hpp"
#include "capfactor/factor_models.hpp"
#include "output.hpp"

namespace capfactor::cli {

enum class Command { ingest, describe, fit_scaling, fit_efa, fit_structured, pca, parallel, expa, expb, synth };

std::string to_string(Command c);

/// Which matrix a factor/PCA/parallel command analyses.
enum class DataChoice { raw, transformed, residual };

struct RunConfig {
  Command command = Command::describe;
  std::filesystem::path scores;
  std::filesystem::path models;
  std::filesystem::path subtasks;
  std::optional<std::filesystem::path> merge;
  std::optional<std::filesystem::path> synth_config;
  std::filesystem::path out;
  Format format = Format::both;
  int k = 5;
  double epsilon = 1e-3;
  int n_sims = 100;
  std::uint64_t seed = 42;
  bool seed_given = false;
  double fraction = 0.8;
  RetentionCriterion criterion;
  bool standardize_pca = false;
  DataChoice data = DataChoice::raw;
  ParamCounting counting = ParamCounting::published;
  int synth_p = 19;
  int synth_m = 1000;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMissingInput = 2;

/// Full command-line entry point; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Executes an already parsed configuration.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace capfactor::cli
