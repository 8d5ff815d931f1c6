#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "msmwc/cli_support.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace msmwc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("msmwc_cli_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json base_config(const std::string& out_dir) {
  return json{{"environment",
               {{"kind", "gap_stochastic"}, {"d", 2}, {"T", 30}, {"seed", 1}, {"gap", 0.2}}},
              {"learner", {{"algo", "adaptive"}}},
              {"predictor", "last"},
              {"output", out_dir}};
}

std::string write_config(const fs::path& dir, const json& doc) {
  const fs::path p = dir / "config.json";
  std::ofstream f(p);
  f << doc.dump(2);
  return p.string();
}

// cli_run reports over std stderr/stdout; keep the test output clean.
int quiet_run(const std::string& config, const std::string& out = "",
              const std::string& seed = "") {
  std::ostringstream sink_out, sink_err;
  std::streambuf* so = std::cout.rdbuf(sink_out.rdbuf());
  std::streambuf* se = std::cerr.rdbuf(sink_err.rdbuf());
  const int rc = cli_run(config, out, seed);
  std::cout.rdbuf(so);
  std::cerr.rdbuf(se);
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("experiment parsing fills defaults and echoes the document") {
  const json doc = base_config("somewhere");
  const ExperimentConfig cfg = parse_experiment(doc);
  CHECK(cfg.run.env.kind == "gap_stochastic");
  CHECK(cfg.run.env.T == 30);
  CHECK(cfg.run.predictor.name() == "last");
  CHECK(cfg.out_dir == "somewhere");
  REQUIRE(cfg.seeds.size() == 1);
  CHECK(cfg.seeds[0] == 1);  // defaults to the environment seed
  CHECK(cfg.echo == doc);

  json no_pred = doc;
  no_pred.erase("predictor");
  CHECK(parse_experiment(no_pred).run.predictor.name() == "zero");
}

TEST_CASE("strict schema rejects unknown keys and bad values") {
  json doc = base_config("x");
  doc["environment"]["typo_key"] = 1;
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);

  doc = base_config("x");
  doc["surprise"] = true;
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);

  doc = base_config("x");
  doc["environment"]["kind"] = "no_such_kind";
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);

  doc = base_config("x");
  doc["checkpoints"] = json::array({0});
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);

  doc = base_config("x");
  doc["bounds"] = json::array({"made_up_bound"});
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);

  doc = base_config("x");
  doc["learner"]["algo"] = "union3";
  doc["predictor"] = "bcast1";  // broadcast hints only make sense on the simplex
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);

  // grids are the sweep subcommand's job
  doc = base_config("x");
  doc["environment"]["gap"] = json{{"grid", json::array({0.1, 0.2})}};
  CHECK_THROWS_AS(parse_experiment(doc), SchemaError);
}

TEST_CASE("seed overrides accept single values and ranges") {
  const json doc = base_config("x");
  CHECK(parse_experiment(doc, "", "7").seeds == std::vector<std::uint64_t>{7});
  CHECK(parse_experiment(doc, "", "2..4").seeds == std::vector<std::uint64_t>{2, 3, 4});
  CHECK_THROWS_AS(parse_experiment(doc, "", "4..2"), SchemaError);
  CHECK_THROWS_AS(parse_experiment(doc, "", "pancake"), SchemaError);
  CHECK(parse_experiment(doc, "elsewhere", "").out_dir == "elsewhere");
}

TEST_CASE("grid expansion takes the cartesian product and records overrides") {
  json doc = base_config("x");
  doc["environment"]["gap"] = json{{"grid", json::array({0.1, 0.2})}};
  doc["environment"]["seed"] = json{{"grid", json::array({1, 2, 3})}};
  const auto points = expand_grids(doc);
  REQUIRE(points.size() == 6);
  for (const SweepPoint& p : points) {
    CHECK_FALSE(p.doc["environment"]["gap"].is_object());
    CHECK(p.overrides.contains("/environment/gap"));
    CHECK(p.overrides.contains("/environment/seed"));
    // each expanded point is a valid plain config
    CHECK(parse_experiment(p.doc).run.env.T == 30);
  }
  // no grids: one point, no overrides
  const auto plain = expand_grids(base_config("x"));
  REQUIRE(plain.size() == 1);
  CHECK(plain[0].overrides.empty());
}

TEST_CASE("run subcommand writes a trace and summary per seed") {
  const fs::path dir = fresh_dir("run");
  const std::string cfg_path = write_config(dir, base_config((dir / "out").string()));
  REQUIRE(quiet_run(cfg_path) == 0);

  const std::string csv = slurp(dir / "out" / "trace.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "t,learner_loss,comparator_e1_loss,comparator_e2_loss,regret_e1,regret_e2,event");
  // header + one line per round, newline-terminated
  long lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 31);
  CHECK(csv.substr(csv.size() - 1) == "\n");

  const json summary = json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["rounds"] == 30);
  CHECK(summary["seed"] == 1);
  CHECK(summary["config"]["environment"]["seed"] == 1);
  CHECK(summary["final"]["regret"].contains("e1"));
  CHECK(summary["bound_reports"].is_array());
  CHECK_FALSE(summary["bound_reports"].empty());
  for (const json& rep : summary["bound_reports"]) CHECK(rep["holds"] == true);
  fs::remove_all(dir);
}

TEST_CASE("multi-seed runs write suffixed files and override the echoed seed") {
  const fs::path dir = fresh_dir("seeds");
  json doc = base_config((dir / "out").string());
  doc["seeds"] = json::array({3, 4});
  const std::string cfg_path = write_config(dir, doc);
  REQUIRE(quiet_run(cfg_path) == 0);
  CHECK(fs::exists(dir / "out" / "trace_seed3.csv"));
  CHECK(fs::exists(dir / "out" / "trace_seed4.csv"));
  CHECK_FALSE(fs::exists(dir / "out" / "trace.csv"));
  const json s3 = json::parse(slurp(dir / "out" / "summary_seed3.json"));
  const json s4 = json::parse(slurp(dir / "out" / "summary_seed4.json"));
  CHECK(s3["seed"] == 3);
  CHECK(s3["config"]["environment"]["seed"] == 3);  // echo carries the run's seed
  CHECK(s4["seed"] == 4);
  CHECK(s3["final"]["learner_cumulative"] != s4["final"]["learner_cumulative"]);
  fs::remove_all(dir);
}

TEST_CASE("identical configs reproduce traces byte for byte") {
  const fs::path dir = fresh_dir("det");
  const std::string cfg_path = write_config(dir, base_config((dir / "out_a").string()));
  REQUIRE(quiet_run(cfg_path) == 0);
  REQUIRE(quiet_run(cfg_path, (dir / "out_b").string()) == 0);
  const std::string a = slurp(dir / "out_a" / "trace.csv");
  const std::string b = slurp(dir / "out_b" / "trace.csv");
  CHECK(a == b);
  CHECK_FALSE(a.empty());
  fs::remove_all(dir);
}

TEST_CASE("config problems exit with the schema code before writing anything") {
  const fs::path dir = fresh_dir("bad");

  CHECK(quiet_run((dir / "missing.json").string()) == 2);

  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ \"environment\": ";  // truncated document
  CHECK(quiet_run(broken.string()) == 2);

  json doc = base_config((dir / "never").string());
  doc["learner"]["algo"] = "florble";
  CHECK(quiet_run(write_config(dir, doc)) == 2);
  CHECK_FALSE(fs::exists(dir / "never"));
  fs::remove_all(dir);
}

TEST_CASE("csv rendering uses full precision and the trailing event column") {
  RunConfig rc;
  rc.env.kind = "gap_stochastic";
  rc.env.d = 2;
  rc.env.T = 5;
  rc.env.seed = 2;
  rc.learner.algo = "adaptive";
  const RunResult result = run(rc);
  const std::string csv = trace_csv(result);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);  // header
  long rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    // 1 + 2 + 2 value columns + event = 6 commas minimum
    long commas = 0;
    for (char ch : line) commas += ch == ',';
    CHECK(commas == 6);
  }
  CHECK(rows == 5);
  // %.17g round-trips doubles exactly; spot-check one learner loss
  const std::string second_field = csv.substr(csv.find('\n') + 1);
  const auto c1 = second_field.find(',');
  const auto c2 = second_field.find(',', c1 + 1);
  const double parsed = std::stod(second_field.substr(c1 + 1, c2 - c1 - 1));
  CHECK(parsed == result.trace.round(1).learner_loss);
}
