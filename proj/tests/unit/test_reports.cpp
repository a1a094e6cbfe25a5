#include "support.hpp"

#include <json.hpp>

#include "capfactor/plots.hpp"
#include "capfactor/reports.hpp"
#include "capfactor/synthetic.hpp"

using namespace capfactor;

TEST_CASE("tables escape CSV fields and write null for missing JSON cells") {
  Table t{{"name", "value", "flag"}, {}};
  t.add_row({std::string("a,b"), 1.5, true});
  t.add_row({std::string("q\"uote"), std::monostate{}, false});
  CHECK(t.to_csv() == "name,value,flag\n\"a,b\",1.5,true\n\"q\"\"uote\",,false\n");
  const auto js = nlohmann::json::parse(t.to_json());
  REQUIRE(js.size() == 2);
  CHECK(js[0]["name"] == "a,b");
  CHECK(js[1]["value"].is_null());
  CHECK_THROWS(t.add_row({1.0}));
}

TEST_CASE("doubles are written in shortest round-trip form") {
  Table t{{"x"}, {}};
  t.add_row({0.1 + 0.2});
  const std::string csv = t.to_csv();
  CHECK(std::stod(csv.substr(2)) == 0.1 + 0.2);
  t.rows.clear();
  t.add_row({std::nan("")});
  CHECK(nlohmann::json::parse(t.to_json())[0]["x"].is_null());
}

TEST_CASE("experiment tables have the expected layout") {
  const Dataset ds = generate_population(make_default_config(4, 300, 1, 3)).dataset;
  const ExperimentATable a = run_experiment_a(ds, 1);
  const Table ta = experiment_a_table(a);
  CHECK(ta.columns.front() == "Eq");
  CHECK(ta.columns.size() == 11);
  CHECK(ta.rows.size() == 4);

  const ExperimentBReport b = run_experiment_b(ds, 1);
  const Table tb = experiment_b_table(b);
  REQUIRE(tb.rows.size() == 5);
  CHECK(std::get<std::string>(tb.rows.back()[0]) == "Average");
  const auto js = nlohmann::json::parse(experiment_b_json(b));
  CHECK(js["folds"].size() == 4);
  CHECK(experiment_b_coefficients(b).rows.size() == 4 * 6);
}

TEST_CASE("factor solution JSON lists labeled loadings and fit") {
  const Dataset ds = generate_population(make_default_config(5, 300, 1, 4)).dataset;
  const ExperimentATable a = run_experiment_a(ds, 1);
  const auto& row = a.row(true, true);
  std::vector<std::string> names;
  for (const auto& s : ds.subtasks) names.push_back(s.name);
  const auto js = nlohmann::json::parse(factor_solution_json(*row.solution, names, row.fit));
  CHECK(js["indicators"].size() == 5);
  CHECK(js["indicators"][0]["subtask"] == names[0]);
  CHECK(js.contains("structural_weights"));
  CHECK(js["fit"]["df"] == row.fit->df);
}

TEST_CASE("SVG output is a standalone document") {
  const Matrix m{{1.0, -0.5}, {0.2, 0.0}};
  const std::string svg = heatmap_svg(m, {"a<b", "c"}, {"x", "y"}, "t & u");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a&lt;b") != std::string::npos);
  CHECK(svg.find("t &amp; u") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  const std::string bars = bar_chart_svg(Vector{{0.7, 0.3}}, {"F1", "F2"}, "shares");
  CHECK(bars.find("<rect") != std::string::npos);
}
