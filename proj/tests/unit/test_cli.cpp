#include "support.hpp"

#include <json.hpp>

#include <sstream>

#include "capfactor/synthetic.hpp"
#include "cli.hpp"

using namespace capfactor;
using testing::read_text;
using testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "capfactor");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> dataset_args(const TempDir& dir) {
  return {"--scores", (dir / "scores.csv").string(), "--models", (dir / "models.csv").string(), "--subtasks",
          (dir / "subtasks.csv").string()};
}

void write_population(const TempDir& dir, int p, int m, int k, std::uint64_t seed) {
  const Population pop = generate_population(make_default_config(p, m, k, seed));
  save_dataset(pop.dataset, dir / "scores.csv", dir / "models.csv", dir / "subtasks.csv");
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("missing input file exits with code 2 and names the path") {
  TempDir dir("cli-missing");
  const std::string missing = (dir / "absent.csv").string();
  const auto r = run_cli({"describe", "--scores", missing, "--models", missing, "--subtasks", missing, "--out",
                          (dir / "out").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find(missing) != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("--out is required") {
  const auto r = run_cli({"synth"});
  CHECK(r.code == 1);
}

TEST_CASE("synth twice with the same seed writes identical files") {
  TempDir dir("cli-synth");
  const auto a = run_cli({"synth", "--seed", "7", "--m", "120", "--k", "2", "--out", (dir / "a").string()});
  const auto b = run_cli({"synth", "--seed", "7", "--m", "120", "--k", "2", "--out", (dir / "b").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  for (const char* f : {"scores.csv", "models.csv", "subtasks.csv", "ground_truth.json", "synth_config.json",
                        "manifest.json"})
    CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
}

TEST_CASE("expb on a three-subtask set writes three folds and an Average row") {
  TempDir dir("cli-expb");
  write_population(dir, 3, 250, 1, 2);
  const auto r = run_cli(concat({"expb", "--k", "1", "--out", (dir / "out").string()}, dataset_args(dir)));
  REQUIRE(r.code == 0);
  const std::string csv = read_text(dir / "out" / "experiment_b.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(csv.find("\nAverage,") != std::string::npos);
  const auto js = nlohmann::json::parse(read_text(dir / "out" / "experiment_b_report.json"));
  CHECK(js["folds"].size() == 3);
}

TEST_CASE("manifest records hashed inputs, seed and settings") {
  TempDir dir("cli-manifest");
  write_population(dir, 4, 150, 1, 3);
  const auto r = run_cli(concat({"pca", "--k", "2", "--seed", "9", "--standardize-pca", "--out", (dir / "out").string()},
                                dataset_args(dir)));
  REQUIRE(r.code == 0);
  const auto m = nlohmann::json::parse(read_text(dir / "out" / "manifest.json"));
  CHECK(m["command"] == "pca");
  CHECK(m["seed"] == 9);
  CHECK(m["settings"]["k"] == 2);
  CHECK(m["settings"]["standardize_pca"] == true);
  REQUIRE(m["inputs"].size() == 3);
  CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
  for (const auto& o : m["outputs"]) CHECK(std::filesystem::exists(dir / "out" / o["file"].get<std::string>()));
}

TEST_CASE("--format selects the table formats") {
  TempDir dir("cli-format");
  write_population(dir, 5, 150, 1, 4);
  REQUIRE(run_cli(concat({"parallel", "--n-sims", "10", "--format", "csv", "--out", (dir / "csv").string()},
                         dataset_args(dir))).code == 0);
  CHECK(std::filesystem::exists(dir / "csv" / "scree.csv"));
  CHECK_FALSE(std::filesystem::exists(dir / "csv" / "scree.json"));
  REQUIRE(run_cli(concat({"parallel", "--n-sims", "10", "--format", "json", "--out", (dir / "json").string()},
                         dataset_args(dir))).code == 0);
  CHECK(std::filesystem::exists(dir / "json" / "scree.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "json" / "scree.csv"));
}

TEST_CASE("describe writes correlations, scree and plots and is repeatable") {
  TempDir dir("cli-describe");
  write_population(dir, 5, 200, 2, 5);
  const auto args = dataset_args(dir);
  REQUIRE(run_cli(concat({"describe", "--n-sims", "20", "--out", (dir / "a").string()}, args)).code == 0);
  REQUIRE(run_cli(concat({"describe", "--n-sims", "20", "--out", (dir / "b").string()}, args)).code == 0);
  for (const char* f : {"correlation_raw.csv", "correlation_residual.json", "scree_raw.csv", "item_fits.json",
                        "heatmap_raw.svg", "item_fits.svg", "manifest.json"}) {
    REQUIRE(std::filesystem::exists(dir / "a" / f));
    CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
  }
  const auto fits = nlohmann::json::parse(read_text(dir / "a" / "item_fits.json"));
  CHECK(fits[0].contains("alpha"));
  CHECK(fits[0].contains("r2"));
}

TEST_CASE("every subcommand runs on a small population") {
  TempDir dir("cli-all");
  write_population(dir, 6, 300, 2, 6);
  const auto args = dataset_args(dir);
  for (const std::string cmd : {"ingest", "fit-scaling", "fit-efa", "fit-structured", "pca", "expa"}) {
    std::vector<std::string> a{cmd, "--out", (dir / cmd).string()};
    if (cmd != "ingest") a.insert(a.end(), {"--k", "2"});
    const auto r = run_cli(concat(a, args));
    CHECK_MESSAGE(r.code == 0, cmd << ": " << r.err);
  }
  CHECK(read_text(dir / "ingest" / "scores.csv") == read_text(dir / "scores.csv"));
  CHECK(std::filesystem::exists(dir / "expa" / "experiment_a.csv"));
  CHECK(std::filesystem::exists(dir / "fit-structured" / "factor_solution.json"));
  const auto r = run_cli(concat({"fit-efa", "--k", "2", "--data", "transformed", "--out", (dir / "t").string()}, args));
  CHECK(r.code == 0);
}

TEST_CASE("analysis errors exit with code 1 and write nothing") {
  TempDir dir("cli-err");
  write_population(dir, 4, 100, 1, 7);
  const auto r = run_cli(concat({"fit-efa", "--k", "4", "--out", (dir / "out").string()}, dataset_args(dir)));
  CHECK(r.code == 1);
  CHECK(r.err.rfind("error:", 0) == 0);
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}
