#include <algorithm>

#include "support.hpp"

#include "capfactor/error.hpp"
#include "capfactor/score_data.hpp"

using namespace capfactor;
using testing::TempDir;
using testing::write_text;

namespace {

struct Files {
  TempDir dir{"data"};
  std::filesystem::path scores = dir / "scores.csv";
  std::filesystem::path models = dir / "models.csv";
  std::filesystem::path subtasks = dir / "subtasks.csv";

  Files(const std::string& s, const std::string& m, const std::string& t) {
    write_text(scores, s);
    write_text(models, m);
    write_text(subtasks, t);
  }
};

const char* kModels = "model_id,param_count\nA,1e9\nB,7e9\n";
const char* kSubtasks = "name,question_count,option_count\nx,250,2\ny,250,4\n";

}  // namespace

TEST_CASE("make_subtask sets the chance rate from the option count") {
  const auto s = make_subtask("boolean", 250, 2);
  CHECK(s.chance_rate == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_subtask("bad", 0, 2), DataError);
  CHECK_THROWS_AS(make_subtask("bad", 10, 1), DataError);
}

TEST_CASE("make_model stores the natural log of the parameter count") {
  const auto m = make_model("m", 7e9);
  CHECK(m.log_param == doctest::Approx(std::log(7e9)));
  CHECK_THROWS_AS(make_model("m", 0.0), DataError);
  CHECK_THROWS_AS(make_model("m", -1.0), DataError);
}

TEST_CASE("minimal well-formed input loads as a 2x2 dataset") {
  Files f("model_id,x,y\nA,0.5,0.5\nB,0.5,0.5\n", kModels, kSubtasks);
  const auto r = load_dataset(f.scores, f.models, f.subtasks);
  CHECK(r.dataset.p() == 2);
  CHECK(r.dataset.m() == 2);
  CHECK(r.removed_models.empty());
  CHECK(r.dataset.scores(0, 0) == 0.5);
}

TEST_CASE("score outside the unit interval is rejected") {
  Files f("model_id,x,y\nA,1.3,0.5\nB,0.5,0.5\n", kModels, kSubtasks);
  try {
    load_dataset(f.scores, f.models, f.subtasks);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("score outside [0,1]") != std::string::npos);
  }
}

TEST_CASE("rows follow the subtasks file and columns the models file") {
  Files f("model_id,y,x\nB,0.1,0.2\nA,0.3,0.4\n", kModels, kSubtasks);
  const auto ds = load_dataset(f.scores, f.models, f.subtasks).dataset;
  CHECK(ds.models[0].model_id == "A");
  CHECK(ds.subtasks[0].name == "x");
  CHECK(ds.scores(0, 0) == 0.4);  // A on x
  CHECK(ds.scores(1, 1) == 0.1);  // B on y
}

TEST_CASE("missing tokens and absent score rows drop the model") {
  Files f("model_id,x,y\nA,0.5,NaN\nB,0.5,0.25\n",
          "model_id,param_count\nA,1e9\nB,7e9\nC,3e9\n", kSubtasks);
  const auto r = load_dataset(f.scores, f.models, f.subtasks);
  CHECK(r.dataset.m() == 1);
  CHECK(r.dataset.models[0].model_id == "B");
  REQUIRE(r.removed_models.size() == 2);
  CHECK(r.removed_models[0] == "A");
  CHECK(r.removed_models[1] == "C");
}

TEST_CASE("drop_incomplete without gaps is the identity") {
  RawDataset raw;
  raw.subtasks = {make_subtask("x", 10, 2)};
  raw.models = {make_model("a", 1e9), make_model("b", 2e9)};
  raw.scores = Matrix{{0.2, 0.7}};
  const auto r = drop_incomplete(raw);
  CHECK(r.removed_models.empty());
  CHECK(r.dataset.scores == raw.scores);
}

TEST_CASE("drop_incomplete with a gap in every model fails") {
  RawDataset raw;
  raw.subtasks = {make_subtask("x", 10, 2)};
  raw.models = {make_model("a", 1e9)};
  raw.scores = Matrix::Constant(1, 1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_WITH_AS(drop_incomplete(raw), doctest::Contains("empty dataset"), DataError);
}

TEST_CASE("malformed files are reported with their path") {
  Files f("model_id,x,y\nA,0.5\n", kModels, kSubtasks);
  CHECK_THROWS_WITH_AS(load_dataset(f.scores, f.models, f.subtasks), doctest::Contains("scores.csv"), DataError);
}

TEST_CASE("duplicate model ids are rejected") {
  Files f("model_id,x,y\nA,0.5,0.5\n", "model_id,param_count\nA,1e9\nA,2e9\n", kSubtasks);
  CHECK_THROWS_AS(load_dataset(f.scores, f.models, f.subtasks), DataError);
}

TEST_CASE("unreadable file raises IoError naming the path") {
  TempDir dir("io");
  try {
    load_dataset(dir / "nope.csv", dir / "models.csv", dir / "subtasks.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.path().find("nope.csv") == std::string::npos);  // subtasks are read first
    CHECK(e.path().find("subtasks.csv") != std::string::npos);
  }
}

TEST_CASE("quoted fields, BOM and CRLF line endings are accepted") {
  Files f("\xEF\xBB\xBFmodel_id,x,y\r\n\"A\",0.5,0.25\r\nB,\"0.75\",0.5\r\n", kModels, kSubtasks);
  const auto ds = load_dataset(f.scores, f.models, f.subtasks).dataset;
  CHECK(ds.m() == 2);
  CHECK(ds.scores(0, 1) == 0.75);
}

TEST_CASE("save then load reproduces the dataset exactly") {
  Matrix s = testing::gaussian_matrix(3, 17, 5).array().abs().min(1.0);
  s(0, 0) = 0.1 + 0.2;  // not representable in a short decimal
  Dataset ds = testing::make_dataset(s);
  ds.subtasks[1] = make_subtask("needs,quoting \"here\"", 99, 7);
  TempDir dir("roundtrip");
  save_dataset(ds, dir / "s.csv", dir / "m.csv", dir / "t.csv");
  const auto back = load_dataset(dir / "s.csv", dir / "m.csv", dir / "t.csv").dataset;
  CHECK(back.scores == ds.scores);
  CHECK(back.subtasks[1].name == ds.subtasks[1].name);
  for (std::size_t j = 0; j < ds.models.size(); ++j) CHECK(back.models[j].param_count == ds.models[j].param_count);
}

TEST_CASE("merging equal-size variants takes the plain mean") {
  Dataset ds = testing::make_dataset(Matrix{{0.9}, {0.6}, {0.3}, {0.5}}, 5);
  ds.subtasks[0].name = "logical_deduction_three";
  ds.subtasks[1].name = "logical_deduction_five";
  ds.subtasks[2].name = "logical_deduction_seven";
  const std::vector<MergeRule> rules{
      {"logical_deduction", {"logical_deduction_three", "logical_deduction_five", "logical_deduction_seven"}, {}}};
  const Dataset merged = recombine_subtasks(ds, rules);
  REQUIRE(merged.p() == 2);
  CHECK(merged.subtasks[0].name == "logical_deduction");
  CHECK(merged.subtasks[0].question_count == 750);
  CHECK(merged.scores(0, 0) == doctest::Approx(0.6));
  CHECK(merged.subtasks[1].name == "s4");
}

TEST_CASE("merging weights by question count") {
  Dataset ds = testing::make_dataset(Matrix{{0.8}, {0.4}});
  ds.subtasks[0] = make_subtask("a", 100, 4);
  ds.subtasks[1] = make_subtask("b", 300, 4);
  const Dataset merged = recombine_subtasks(ds, {{"ab", {"a", "b"}, {}}});
  CHECK(merged.scores(0, 0) == doctest::Approx(0.5));
  CHECK(merged.subtasks[0].chance_rate == doctest::Approx(0.25));
}

TEST_CASE("merging members with different option counts averages the chance rates") {
  Dataset ds = testing::make_dataset(Matrix{{0.8}, {0.4}});
  ds.subtasks[0] = make_subtask("a", 100, 2);
  ds.subtasks[1] = make_subtask("b", 100, 4);
  const Dataset merged = recombine_subtasks(ds, {{"ab", {"a", "b"}, {}}});
  CHECK(merged.subtasks[0].chance_rate == doctest::Approx(0.375));
  const Dataset overridden = recombine_subtasks(ds, {{"ab", {"a", "b"}, 0.3}});
  CHECK(overridden.subtasks[0].chance_rate == doctest::Approx(0.3));
}

TEST_CASE("recombine_subtasks is idempotent") {
  Dataset ds = testing::make_dataset(Matrix{{0.8, 0.1}, {0.4, 0.2}, {0.3, 0.3}});
  const std::vector<MergeRule> rules{{"ab", {"s1", "s2"}, {}}};
  const Dataset once = recombine_subtasks(ds, rules);
  const Dataset twice = recombine_subtasks(once, rules);
  CHECK(twice.p() == once.p());
  CHECK(twice.scores == once.scores);
}

TEST_CASE("merge rule naming an unknown subtask fails") {
  Dataset ds = testing::make_dataset(Matrix{{0.8}, {0.4}});
  CHECK_THROWS_AS(recombine_subtasks(ds, {{"ab", {"s1", "zzz"}, {}}}), DataError);
}

TEST_CASE("merge spec JSON parses names, members and optional chance rate") {
  const auto rules = parse_merge_spec(R"([{"name":"ld","members":["a","b"]},
                                           {"name":"ts","members":["c","d"],"chance_rate":0.2}])");
  REQUIRE(rules.size() == 2);
  CHECK(rules[0].members.size() == 2);
  CHECK(!rules[0].chance_rate);
  CHECK(*rules[1].chance_rate == doctest::Approx(0.2));
  CHECK_THROWS_AS(parse_merge_spec("{"), DataError);
}

TEST_CASE("shipped BBH merge spec collapses 23 subtasks into the 19-row layout") {
  const std::filesystem::path data = CAPFACTOR_DATA_DIR;
  const auto unmerged = data / "bbh_subtasks_unmerged.csv";
  TempDir dir{"bbh"};

  const std::string text = testing::read_text(unmerged);
  std::vector<std::string> names;
  for (std::size_t pos = text.find('\n') + 1; pos < text.size();) {
    const auto end = text.find('\n', pos);
    names.push_back(text.substr(pos, text.find(',', pos) - pos));
    pos = end + 1;
  }
  REQUIRE(names.size() == 23);
  std::string scores = "model_id";
  for (const auto& n : names) scores += "," + n;
  scores += "\nA";
  for (std::size_t i = 0; i < names.size(); ++i) scores += ",0.5";
  scores += "\nB";
  for (std::size_t i = 0; i < names.size(); ++i) scores += ",0.25";
  scores += "\n";
  write_text(dir / "scores.csv", scores);
  write_text(dir / "models.csv", kModels);

  const Dataset ds = load_dataset(dir / "scores.csv", dir / "models.csv", unmerged).dataset;
  const Dataset merged = recombine_subtasks(ds, load_merge_spec(data / "merge_bbh.json"));
  REQUIRE(merged.p() == 19);

  const auto reference = testing::read_text(data / "bbh_subtasks.csv");
  std::vector<std::string> expected;
  for (std::size_t pos = reference.find('\n') + 1; pos < reference.size();) {
    const auto end = reference.find('\n', pos);
    expected.push_back(reference.substr(pos, end - pos));
    pos = end + 1;
  }
  REQUIRE(expected.size() == 19);
  std::vector<std::string> got;
  for (const auto& s : merged.subtasks)
    got.push_back(s.name + "," + std::to_string(s.question_count) + "," + std::to_string(s.option_count));
  std::sort(expected.begin(), expected.end());
  std::sort(got.begin(), got.end());
  CHECK(got == expected);
  for (const auto& s : merged.subtasks)
    if (s.question_count == 750) CHECK(s.chance_rate == doctest::Approx(1.0 / 7.0));
}
