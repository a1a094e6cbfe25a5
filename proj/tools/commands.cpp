#include <unistd.h>

#include <json.hpp>

#include <cmath>
#include <ostream>

#include "capfactor/descriptives.hpp"
#include "capfactor/error.hpp"
#include "capfactor/experiments.hpp"
#include "capfactor/factor_models.hpp"
#include "capfactor/pca.hpp"
#include "capfactor/plots.hpp"
#include "capfactor/reports.hpp"
#include "capfactor/scaling_laws.hpp"
#include "capfactor/score_data.hpp"
#include "capfactor/synthetic.hpp"
#include "capfactor/version.hpp"
#include "cli.hpp"

namespace capfactor::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string to_string(DataChoice d) {
  switch (d) {
    case DataChoice::raw: return "raw";
    case DataChoice::transformed: return "transformed";
    case DataChoice::residual: return "residual";
  }
  return "?";
}

std::string to_string(Format f) {
  switch (f) {
    case Format::csv: return "csv";
    case Format::json: return "json";
    case Format::both: return "both";
  }
  return "?";
}

struct Run {
  Run(const RunConfig& c) : cfg(c), outputs(c.out, c.format) {}

  const RunConfig& cfg;
  OutputSet outputs;
  ordered_json inputs = ordered_json::array();
  ordered_json summary = ordered_json::object();
  std::vector<std::string> warnings;

  void record_input(const std::string& role, const fs::path& path) {
    const std::string bytes = read_file(path);
    inputs.push_back({{"role", role}, {"path", path.string()}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
};

std::vector<std::string> subtask_names(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& s : ds.subtasks) out.push_back(s.name);
  return out;
}

std::vector<std::string> model_ids(const Dataset& ds) {
  std::vector<std::string> out;
  for (const auto& mr : ds.models) out.push_back(mr.model_id);
  return out;
}

Dataset load_inputs(Run& run) {
  const RunConfig& cfg = run.cfg;
  run.record_input("scores", cfg.scores);
  run.record_input("models", cfg.models);
  run.record_input("subtasks", cfg.subtasks);
  DropResult dr = load_dataset(cfg.scores, cfg.models, cfg.subtasks);
  if (!dr.removed_models.empty())
    run.warnings.push_back("dropped " + std::to_string(dr.removed_models.size()) + " models with missing scores");
  Dataset ds = std::move(dr.dataset);
  if (cfg.merge) {
    run.record_input("merge", *cfg.merge);
    ds = recombine_subtasks(ds, load_merge_spec(*cfg.merge));
  }
  run.summary["p"] = ds.p();
  run.summary["m"] = ds.m();
  run.summary["removed_models"] = dr.removed_models;
  return ds;
}

/// Temporary directory for library calls that write files themselves.
class ScratchDir {
 public:
  ScratchDir() {
    path_ = fs::temp_directory_path() / ("capfactor-" + std::to_string(::getpid()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void add_dataset_files(Run& run, const Dataset& ds) {
  ScratchDir tmp;
  save_dataset(ds, tmp.path() / "scores.csv", tmp.path() / "models.csv", tmp.path() / "subtasks.csv");
  for (const char* name : {"scores.csv", "models.csv", "subtasks.csv"}) run.outputs.add(name, read_file(tmp.path() / name));
}

Table matrix_table(const Matrix& values, const Dataset& ds) {
  Table t;
  t.columns.push_back("model_id");
  for (const auto& s : ds.subtasks) t.columns.push_back(s.name);
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    std::vector<Table::Cell> row{ds.models[static_cast<std::size_t>(j)].model_id};
    for (Eigen::Index i = 0; i < values.rows(); ++i) row.emplace_back(values(i, j));
    t.add_row(std::move(row));
  }
  return t;
}

Matrix analysis_matrix(Run& run, const Dataset& ds) {
  const RunConfig& cfg = run.cfg;
  if (cfg.data == DataChoice::raw) return ds.scores;
  const auto fits = fit_all_items(ds);
  if (cfg.data == DataChoice::residual) return compute_residuals(ds, fits);
  TransformedMatrix tm = logit_transform(ds, fits, cfg.epsilon);
  run.summary["clip_count"] = tm.clip_count;
  return std::move(tm.values);
}

DataKind data_kind(const RunConfig& cfg) {
  if (cfg.data == DataChoice::residual)
    throw DataError("factor models accept --data raw or transformed, not residual");
  return cfg.data == DataChoice::transformed ? DataKind::transformed : DataKind::raw;
}

std::vector<std::string> factor_labels(int k, const char* prefix) {
  std::vector<std::string> out;
  for (int f = 0; f < k; ++f) out.push_back(prefix + std::to_string(f + 1));
  return out;
}

void cmd_ingest(Run& run) {
  const Dataset ds = load_inputs(run);
  add_dataset_files(run, ds);
}

void add_parallel(Run& run, const ParallelResult& pa, const std::string& stem, const std::string& title) {
  run.outputs.add_table(stem, scree_table(pa));
  run.outputs.add(stem + ".svg", scree_svg(pa, title));
  for (const auto& w : pa.warnings) run.warnings.push_back(stem + ": " + w);
}

void cmd_describe(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  const auto names = subtask_names(ds);
  const auto fits = fit_all_items(ds);
  const Matrix resid = compute_residuals(ds, fits);

  const CorrMatrix raw = spearman_matrix(ds.scores, names);
  const CorrMatrix res = spearman_matrix(resid, names);
  run.outputs.add_table("correlation_raw", correlation_table(raw));
  run.outputs.add_table("correlation_residual", correlation_table(res));
  run.outputs.add("heatmap_raw.svg", heatmap_svg(raw.values, names, names, "Spearman correlation, raw scores"));
  run.outputs.add("heatmap_residual.svg",
                  heatmap_svg(res.values, names, names, "Spearman correlation, residuals after 3PL fits"));

  const ParallelResult pa_raw = parallel_analysis(ds.scores, cfg.n_sims, cfg.criterion, cfg.seed);
  const ParallelResult pa_res = parallel_analysis(resid, cfg.n_sims, cfg.criterion, cfg.seed);
  add_parallel(run, pa_raw, "scree_raw", "Parallel analysis, raw scores");
  add_parallel(run, pa_res, "scree_residual", "Parallel analysis, residuals");

  run.outputs.add_table("item_fits", item_fit_table(ds, fits));
  run.outputs.add("item_fits.svg", item_fit_panel_svg(ds, fits));

  run.summary["mean_corr_raw"] = raw.mean_offdiag;
  run.summary["mean_corr_residual"] = res.mean_offdiag;
  run.summary["retained_raw"] = pa_raw.retained;
  run.summary["retained_residual"] = pa_res.retained;
}

void cmd_fit_scaling(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  const auto fits = fit_all_items(ds);
  const TransformedMatrix tm = logit_transform(ds, fits, cfg.epsilon);
  run.outputs.add_table("item_fits", item_fit_table(ds, fits));
  run.outputs.add("item_fits.svg", item_fit_panel_svg(ds, fits));
  run.outputs.add_table("transformed", matrix_table(tm.values, ds));
  run.outputs.add_table("residuals", matrix_table(compute_residuals(ds, fits), ds));
  run.summary["clip_count"] = tm.clip_count;
  int degenerate = 0;
  for (const auto& f : fits) degenerate += f.degenerate ? 1 : 0;
  run.summary["degenerate_fits"] = degenerate;
}

void add_factor_outputs(Run& run, const Dataset& ds, const FactorSolution& sol, const FitIndices& fit,
                        const Matrix& values, const std::optional<Vector>& log_n) {
  const auto names = subtask_names(ds);
  run.outputs.add_json("factor_solution.json", factor_solution_json(sol, names, fit));
  run.outputs.add_table("loadings", loadings_table(sol, names));
  const CapabilityScores scores = capability_scores(sol, values, log_n);
  run.outputs.add_table("factor_scores", scores_table(scores.values, model_ids(ds), "F"));
  run.outputs.add("loadings.svg", heatmap_svg(sol.loadings, names, factor_labels(sol.k(), "F"), "Factor loadings"));
  run.outputs.add("variance_shares.svg",
                  bar_chart_svg(variance_explained(sol), factor_labels(sol.k(), "F"), "Communal variance share"));
  run.outputs.add("factor_scores.svg",
                  capability_scatter_svg(scores.values, ds.log_params(), "Factor scores vs ln(parameters)"));
  if (!sol.converged) run.warnings.push_back("optimizer did not converge");
  if (!sol.rotation_converged) run.warnings.push_back("rotation did not converge");
  if (!sol.heywood_rows.empty())
    run.warnings.push_back(std::to_string(sol.heywood_rows.size()) + " uniquenesses at the lower bound");
  run.summary["fit"] = ordered_json::parse(factor_solution_json(sol, names, fit))["fit"];
}

void cmd_fit_efa(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  FactorOptions opts;
  opts.data_kind = data_kind(cfg);
  opts.counting = cfg.counting;
  const Matrix values = analysis_matrix(run, ds);
  const FactorSolution sol = fit_efa(values, cfg.k, opts);
  const FitIndices fit = compute_fit_indices(sol, sample_covariance(values), static_cast<int>(ds.m()));
  add_factor_outputs(run, ds, sol, fit, values, std::nullopt);
}

void cmd_fit_structured(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  FactorOptions opts;
  opts.data_kind = data_kind(cfg);
  opts.counting = cfg.counting;
  const Matrix values = analysis_matrix(run, ds);
  const Vector log_n = ds.log_params();
  const FactorSolution sol = fit_structured(values, log_n, cfg.k, opts);
  const FitIndices fit =
      compute_fit_indices(sol, joint_sample_covariance(values, log_n), static_cast<int>(ds.m()));
  add_factor_outputs(run, ds, sol, fit, values, log_n);
}

void cmd_pca(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  const Matrix values = analysis_matrix(run, ds);
  const PcaSolution sol = fit_pca(values, cfg.k, PcaOptions{cfg.standardize_pca});
  const auto names = subtask_names(ds);
  run.outputs.add_json("pca.json", pca_json(sol, names));
  run.outputs.add_table("pca_weights", pca_weights_table(sol, names));
  run.outputs.add_table("pca_scores", scores_table(sol.scores, model_ids(ds), "PC"));
  run.outputs.add("variance_shares.svg",
                  bar_chart_svg(sol.variance_shares, factor_labels(static_cast<int>(sol.variance_shares.size()), "PC"),
                                "Variance share by component"));
  if (!sol.null_components.empty()) run.warnings.push_back("some requested components have zero variance");
  run.summary["first_share"] = sol.variance_shares[0];
}

void cmd_parallel(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  const Matrix values = analysis_matrix(run, ds);
  const ParallelResult pa = parallel_analysis(values, cfg.n_sims, cfg.criterion, cfg.seed);
  run.outputs.add_json("parallel.json", parallel_json(pa));
  add_parallel(run, pa, "scree", "Parallel analysis (" + to_string(cfg.data) + ")");
  run.summary["retained"] = pa.retained;
}

ExperimentOptions experiment_options(const RunConfig& cfg) {
  ExperimentOptions opts;
  opts.epsilon = cfg.epsilon;
  opts.fraction = cfg.fraction;
  opts.standardize_pca = cfg.standardize_pca;
  opts.counting = cfg.counting;
  return opts;
}

void cmd_expa(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  const ExperimentATable t = run_experiment_a(ds, cfg.k, experiment_options(cfg));
  const auto names = subtask_names(ds);
  run.outputs.add_table("experiment_a", experiment_a_table(t));
  run.outputs.add_table("item_fits", item_fit_table(ds, t.item_fits));
  for (const auto& row : t.rows) {
    const std::string stem = "solution_eq" + std::to_string(row.equation_id);
    if (row.solution) {
      run.outputs.add_json(stem + ".json", factor_solution_json(*row.solution, names, row.fit));
    } else {
      run.warnings.push_back(stem + ": " + row.error);
    }
  }
  const auto& best = t.row(true, true);
  if (best.solution) {
    const Matrix transformed = logit_transform(ds, t.item_fits, cfg.epsilon).values;
    const CapabilityScores scores = capability_scores(*best.solution, transformed, ds.log_params());
    run.outputs.add("capabilities.svg",
                    capability_scatter_svg(scores.values, ds.log_params(), "Structured capabilities vs ln(parameters)"));
    run.outputs.add("variance_shares.svg", bar_chart_svg(variance_explained(*best.solution),
                                                         factor_labels(cfg.k, "F"), "Communal variance share"));
  }
  const auto opt_bool = [](const std::optional<bool>& b) -> ordered_json {
    if (!b) return nullptr;
    return *b;
  };
  run.summary["clip_count"] = t.clip_count;
  run.summary["structured_wins_aic"] = {{"raw", opt_bool(t.structured_wins_aic(DataKind::raw))},
                                        {"transformed", opt_bool(t.structured_wins_aic(DataKind::transformed))}};
  run.summary["structured_wins_bic"] = {{"raw", opt_bool(t.structured_wins_bic(DataKind::raw))},
                                        {"transformed", opt_bool(t.structured_wins_bic(DataKind::transformed))}};
}

void cmd_expb(Run& run) {
  const RunConfig& cfg = run.cfg;
  const Dataset ds = load_inputs(run);
  const ExperimentBReport r = run_experiment_b(ds, cfg.k, experiment_options(cfg));
  run.outputs.add_table("experiment_b", experiment_b_table(r));
  run.outputs.add_table("experiment_b_coefficients", experiment_b_coefficients(r));
  run.outputs.add_json("experiment_b_report.json", experiment_b_json(r));
  Vector avg(3);
  avg << r.average_test.sc, r.average_test.osl, r.average_test.size;
  run.outputs.add("mse_test.svg", bar_chart_svg(avg, {"SC", "OSL", "Size"}, "Average held-out MSE (test split)"));
  for (const auto& w : r.warnings) run.warnings.push_back(w);
  run.summary["successful_folds"] = r.successful_folds;
  run.summary["sc_beats_osl_test"] = r.sc_beats_osl_test;
}

void cmd_synth(Run& run) {
  const RunConfig& cfg = run.cfg;
  SynthConfig sc;
  if (cfg.synth_config) {
    run.record_input("config", *cfg.synth_config);
    sc = parse_synth_config(read_file(*cfg.synth_config));
    if (cfg.seed_given) sc.seed = cfg.seed;
  } else {
    sc = make_default_config(cfg.synth_p, cfg.synth_m, cfg.k, cfg.seed);
  }
  validate(sc);
  const Population pop = generate_population(sc);
  add_dataset_files(run, pop.dataset);
  run.outputs.add_json("synth_config.json", synth_config_to_json(sc));
  run.outputs.add_json("ground_truth.json", ground_truth_to_json(pop));
  run.summary["p"] = sc.p;
  run.summary["m"] = sc.m;
  run.summary["k"] = sc.k;
  run.summary["seed"] = sc.seed;
}

ordered_json settings_json(const RunConfig& cfg) {
  ordered_json s;
  s["format"] = to_string(cfg.format);
  s["k"] = cfg.k;
  s["epsilon"] = cfg.epsilon;
  s["n_sims"] = cfg.n_sims;
  s["fraction"] = cfg.fraction;
  s["criterion"] = cfg.criterion.describe();
  s["standardize_pca"] = cfg.standardize_pca;
  s["data"] = to_string(cfg.data);
  s["counting"] = to_string(cfg.counting);
  if (cfg.command == Command::synth && !cfg.synth_config) {
    s["p"] = cfg.synth_p;
    s["m"] = cfg.synth_m;
  }
  return s;
}

std::vector<fs::path> required_inputs(const RunConfig& cfg) {
  if (cfg.command == Command::synth) {
    if (cfg.synth_config) return {*cfg.synth_config};
    return {};
  }
  std::vector<fs::path> out{cfg.scores, cfg.models, cfg.subtasks};
  if (cfg.merge) out.push_back(*cfg.merge);
  return out;
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  for (const auto& path : required_inputs(cfg)) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
      err << "error: input file not found: " << path.string() << '\n';
      return kExitMissingInput;
    }
  }

  Run run(cfg);
  try {
    switch (cfg.command) {
      case Command::ingest: cmd_ingest(run); break;
      case Command::describe: cmd_describe(run); break;
      case Command::fit_scaling: cmd_fit_scaling(run); break;
      case Command::fit_efa: cmd_fit_efa(run); break;
      case Command::fit_structured: cmd_fit_structured(run); break;
      case Command::pca: cmd_pca(run); break;
      case Command::parallel: cmd_parallel(run); break;
      case Command::expa: cmd_expa(run); break;
      case Command::expb: cmd_expb(run); break;
      case Command::synth: cmd_synth(run); break;
    }

    ordered_json manifest;
    manifest["tool"] = "capfactor";
    manifest["version"] = kVersion;
    manifest["command"] = to_string(cfg.command);
    manifest["seed"] = cfg.seed;
    manifest["settings"] = settings_json(cfg);
    manifest["inputs"] = run.inputs;
    ordered_json outputs = ordered_json::array();
    for (const auto& [name, content] : run.outputs.files())
      outputs.push_back({{"file", name}, {"sha256", sha256_hex(content)}});
    manifest["outputs"] = std::move(outputs);
    manifest["summary"] = run.summary;
    manifest["warnings"] = run.warnings;
    run.outputs.add_json("manifest.json", manifest.dump(2) + "\n");
    run.outputs.commit();
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  for (const auto& w : run.warnings) err << "warning: " << w << '\n';
  out << to_string(cfg.command) << ": wrote " << run.outputs.files().size() << " files to " << cfg.out.string() << '\n';
  if (!run.summary.empty()) out << run.summary.dump() << '\n';
  return kExitOk;
}

}  // namespace capfactor::cli
