#include "cli.hpp"

#include <CLI11.hpp>

#include "capfactor/version.hpp"

#include <map>
#include <ostream>

namespace capfactor::cli {

std::string to_string(Command c) {
  switch (c) {
    case Command::ingest: return "ingest";
    case Command::describe: return "describe";
    case Command::fit_scaling: return "fit-scaling";
    case Command::fit_efa: return "fit-efa";
    case Command::fit_structured: return "fit-structured";
    case Command::pca: return "pca";
    case Command::parallel: return "parallel";
    case Command::expa: return "expa";
    case Command::expb: return "expb";
    case Command::synth: return "synth";
  }
  return "?";
}

namespace {

struct Flags {
  std::string scores, models, subtasks, merge, config, out;
  std::string format = "both";
  std::string criterion = "mean";
  double percentile = 95.0;
  std::string data = "raw";
  std::string counting = "published";
};

void add_dataset_options(CLI::App* sub, Flags& f) {
  sub->add_option("--scores", f.scores, "Wide score CSV (model_id, one column per subtask)")->required();
  sub->add_option("--models", f.models, "Model CSV (model_id, param_count)")->required();
  sub->add_option("--subtasks", f.subtasks, "Subtask CSV (name, question_count, option_count)")->required();
  sub->add_option("--merge", f.merge, "JSON list of subtask merge rules");
}

void add_common_options(CLI::App* sub, Flags& f, RunConfig& cfg) {
  sub->add_option("--out", f.out, "Output directory")->required();
  sub->add_option("--format", f.format, "Table format")->check(CLI::IsMember({"csv", "json", "both"}));
  sub->add_option("--seed", cfg.seed, "Random seed");
}

void add_analysis_options(CLI::App* sub, Flags& f, RunConfig& cfg) {
  sub->add_option("--k", cfg.k, "Number of factors or components")->check(CLI::PositiveNumber);
  sub->add_option("--epsilon", cfg.epsilon, "Clipping margin for the logit transform")
      ->check(CLI::Range(0.0, 0.5));
  sub->add_option("--n-sims", cfg.n_sims, "Parallel-analysis simulations")->check(CLI::PositiveNumber);
  sub->add_option("--fraction", cfg.fraction, "Bottom share used for training in expb")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--criterion", f.criterion, "Parallel-analysis criterion")
      ->check(CLI::IsMember({"mean", "percentile"}));
  sub->add_option("--percentile", f.percentile, "Percentile for --criterion percentile")->check(CLI::Range(0.0, 100.0));
  sub->add_flag("--standardize-pca", cfg.standardize_pca, "Standardize rows before PCA");
  sub->add_option("--data", f.data, "Matrix to analyse")->check(CLI::IsMember({"raw", "transformed", "residual"}));
  sub->add_option("--counting", f.counting, "Free-parameter counting convention")
      ->check(CLI::IsMember({"published", "identified"}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latent capability factor analysis of benchmark scores", "capfactor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  RunConfig cfg;
  Flags f;
  const std::map<std::string, std::pair<Command, std::string>> commands{
      {"ingest", {Command::ingest, "Validate, merge and clean a score dataset"}},
      {"describe", {Command::describe, "Correlations, item fits and parallel analysis"}},
      {"fit-scaling", {Command::fit_scaling, "Per-subtask 3PL fits and the logit-transformed matrix"}},
      {"fit-efa", {Command::fit_efa, "Maximum-likelihood exploratory factor analysis"}},
      {"fit-structured", {Command::fit_structured, "Structured capabilities model with ln(params) covariate"}},
      {"pca", {Command::pca, "Principal components of the score rows"}},
      {"parallel", {Command::parallel, "Horn's parallel analysis"}},
      {"expa", {Command::expa, "Four-model fit comparison"}},
      {"expb", {Command::expb, "Leave-one-subtask-out prediction comparison"}},
      {"synth", {Command::synth, "Generate a synthetic population"}},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, spec] : commands) {
    CLI::App* sub = app.add_subcommand(name, spec.second);
    add_common_options(sub, f, cfg);
    if (spec.first == Command::synth) {
      sub->add_option("--config", f.config, "Synthetic population JSON");
      sub->add_option("--k", cfg.k, "Number of capabilities")->check(CLI::PositiveNumber);
      sub->add_option("--p", cfg.synth_p, "Number of subtasks")->check(CLI::PositiveNumber);
      sub->add_option("--m", cfg.synth_m, "Number of models")->check(CLI::PositiveNumber);
    } else {
      add_dataset_options(sub, f);
      if (spec.first != Command::ingest) add_analysis_options(sub, f, cfg);
    }
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    cfg.command = commands.at(name).first;
    cfg.seed_given = sub->count("--seed") > 0;
  }
  cfg.scores = f.scores;
  cfg.models = f.models;
  cfg.subtasks = f.subtasks;
  if (!f.merge.empty()) cfg.merge = f.merge;
  if (!f.config.empty()) cfg.synth_config = f.config;
  cfg.out = f.out;
  cfg.format = f.format == "csv" ? Format::csv : f.format == "json" ? Format::json : Format::both;
  cfg.criterion = f.criterion == "percentile" ? RetentionCriterion::at_percentile(f.percentile)
                                              : RetentionCriterion::mean_eigenvalue();
  cfg.data = f.data == "transformed" ? DataChoice::transformed
             : f.data == "residual"  ? DataChoice::residual
                                     : DataChoice::raw;
  cfg.counting = f.counting == "identified" ? ParamCounting::identified : ParamCounting::published;
  return execute(cfg, out, err);
}

}  // namespace capfactor::cli
