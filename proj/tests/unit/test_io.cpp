#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "polyrad/error.hpp"
#include "polyrad/io.hpp"

namespace {

using namespace polyrad;
namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("polyrad-io-" + name);
  fs::remove_all(dir);
  return dir;
}

io::SweepRecord sample_record() {
  io::SweepRecord r;
  r.index = 7;
  r.n = 2;
  r.m = 2;
  r.s = -1;
  r.q = 5.0;
  r.a = 2.0;
  r.b = 0.1 + 0.2;
  r.cls = "Undetermined";
  r.constant = std::numeric_limits<double>::infinity();
  r.exponent = 0.7726175812968333;
  r.termination = "ReachedRmax";
  r.termination_radius = 1e4;
  r.steps = 1234;
  r.checks = {{"monotone.du_positive", "pass", 1e-300, 3.5}, {"bounds.planar_iterated_log", "n/a", 0.0, 0.0}};
  r.m_inf = 0.015651906657741854;
  r.log_r_w0 = 127.5578376926897;
  r.log_r_death = 128.55783769268973;
  r.mass_converged = true;
  r.error = "quote \" and newline \n";
  return r;
}

TEST(Jsonl, RoundTripIsExact) {
  const auto r = sample_record();
  const std::string line = io::to_jsonl(r);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  EXPECT_EQ(io::sweep_record_from_jsonl(line), r);
}

TEST(Jsonl, NonFiniteValuesSurvive) {
  auto r = sample_record();
  r.constant = -std::numeric_limits<double>::infinity();
  r.exponent = std::numeric_limits<double>::quiet_NaN();
  r.c = std::numeric_limits<double>::denorm_min();
  const auto back = io::sweep_record_from_jsonl(io::to_jsonl(r));
  EXPECT_EQ(back.constant, r.constant);
  EXPECT_TRUE(std::isnan(back.exponent));
  EXPECT_EQ(back.c, r.c);
}

TEST(Jsonl, RoundTripThroughSweepOutputs) {
  SweepPlan plan;
  plan.n = 2;
  plan.m = 2;
  plan.q_values = {2.0, 3.0};
  plan.a_values = {1.0};
  plan.b_values = {0.5, 2.0};
  plan.cfg.r_max = 200.0;
  plan.cfg.dense_output_stride = 1.0;
  std::vector<io::SweepRecord> records;
  for (const auto& c : run_sweep(plan)) records.push_back(io::SweepRecord::from(c));
  const auto dir = scratch("sweep");
  io::write_sweep_outputs(dir, "s", records);
  for (const char* ext : {".jsonl", ".csv", ".dat", "-summary.txt"}) EXPECT_TRUE(fs::exists(dir / ("s" + std::string(ext))));
  EXPECT_EQ(io::read_sweep_jsonl(dir / "s.jsonl"), records);

  const auto first_csv = slurp(dir / "s.csv");
  std::vector<io::SweepRecord> again;
  plan.threads = 2;
  for (const auto& c : run_sweep(plan)) again.push_back(io::SweepRecord::from(c));
  const auto dir2 = scratch("sweep2");
  io::write_sweep_outputs(dir2, "s", again);
  EXPECT_EQ(slurp(dir2 / "s.csv"), first_csv);
  EXPECT_EQ(slurp(dir2 / "s.jsonl"), slurp(dir / "s.jsonl"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST(Jsonl, HeaderIsChecked) {
  const auto dir = scratch("header");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"schema":"polyrad.other","version":1})" << "\n";
  }
  EXPECT_THROW(io::read_sweep_jsonl(dir / "bad.jsonl"), Error);
  {
    std::ofstream out(dir / "future.jsonl");
    out << R"({"schema":"polyrad.sweep","version":99})" << "\n";
  }
  EXPECT_THROW(io::read_sweep_jsonl(dir / "future.jsonl"), Error);
  EXPECT_EQ(io::schema_header("sweep"), R"({"schema":"polyrad.sweep","version":1})");
  fs::remove_all(dir);
}

std::string config_error(const std::string& text) {
  try {
    io::parse_sweep_plan(text, "plan.json");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "no error for " << text;
  return {};
}

TEST(Config, GridForms) {
  const auto plan = io::parse_sweep_plan(R"({
    "problem": {"n": 5, "m": 3},
    "grid": {"q": 8, "a": [1, 2], "b": {"lo": 0.1, "hi": 10, "count": 3, "spacing": "log"},
             "c": {"lo": -1, "hi": 0, "count": 5}}
  })");
  EXPECT_EQ(plan.s, Sign::Plus);
  EXPECT_EQ(plan.q_values, std::vector<double>{8.0});
  EXPECT_EQ(plan.a_values, (std::vector<double>{1.0, 2.0}));
  ASSERT_EQ(plan.b_values.size(), 3u);
  EXPECT_NEAR(plan.b_values[1], 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(plan.c_values[2], -0.5);
  EXPECT_EQ(plan.cells().size(), 30u);
}

TEST(Config, DiagnosticsNameLineAndField) {
  const std::string syntax = config_error("{\n  \"problem\": {\"n\": 2,, \"m\": 2}\n}");
  EXPECT_NE(syntax.find("plan.json:2:"), std::string::npos) << syntax;

  const std::string grid = config_error(R"({"problem": {"n": 2, "m": 2},
    "grid": {"q": 2, "a": 1, "b": {"lo": 2, "hi": 1, "count": 3}}})");
  EXPECT_NE(grid.find("field 'grid.b'"), std::string::npos) << grid;
  EXPECT_NE(grid.find("lo > hi"), std::string::npos) << grid;

  const std::string unknown = config_error(R"({"problem": {"n": 2, "m": 2}, "grid": {"q": 2, "a": 1, "b": 1},
    "integration": {"rmax": 3}})");
  EXPECT_NE(unknown.find("field 'integration.rmax': unknown field"), std::string::npos) << unknown;

  const std::string c2 = config_error(R"({"problem": {"n": 2, "m": 2}, "grid": {"q": 2, "a": 1, "b": 1, "c": 1}})");
  EXPECT_NE(c2.find("grid.c"), std::string::npos) << c2;

  const std::string neg = config_error(R"({"problem": {"n": 2, "m": 2}, "grid": {"q": -2, "a": 1, "b": 1}})");
  EXPECT_NE(neg.find("grid.q"), std::string::npos) << neg;

  const std::string tol = config_error(R"({"problem": {"n": 2, "m": 2}, "grid": {"q": 2, "a": 1, "b": 1},
    "integration": {"rel_tol": 0.5}})");
  EXPECT_NE(tol.find("integration"), std::string::npos) << tol;
}

TEST(Config, CanonicalJsonRoundTrips) {
  const auto plan = io::parse_sweep_plan(
      R"({"name": "x", "problem": {"n": 3, "m": 2}, "grid": {"q": 7, "a": 0.5, "b": [5, 6]},
          "integration": {"r_max": 300}, "classifier": {"band": 0.1}, "threads": 2})");
  const std::string canon = io::to_json(plan);
  EXPECT_EQ(io::to_json(io::parse_sweep_plan(canon)), canon);

  const auto bc = io::parse_bisect_config(
      R"({"problem": {"n": 5, "m": 3, "q": 8}, "origin": {"a": 1, "b": 0.8}, "free": "c", "bracket": [-50, 0]})");
  EXPECT_EQ(bc.free, FreeParam::C);
  EXPECT_EQ(bc.origin.c, 0.0);
  EXPECT_EQ(io::to_json(io::parse_bisect_config(io::to_json(bc))), io::to_json(bc));
  EXPECT_THROW(io::parse_bisect_config(
                   R"({"problem": {"n": 3, "m": 2, "q": 7}, "origin": {"a": 1}, "free": "c", "bracket": [0, 1]})"),
               Error);

  const auto rc = io::parse_represent_config(R"({"q": [8, 11, 13]})");
  EXPECT_EQ(rc.q_values.size(), 3u);
  EXPECT_EQ(io::to_json(io::parse_represent_config(io::to_json(rc))), io::to_json(rc));
  EXPECT_THROW(io::parse_represent_config(R"({"n": 3, "q": 8})"), Error);
}

TEST(Config, BundledConfigsParse) {
  const fs::path dir = POLYRAD_CONFIG_DIR;
  EXPECT_NO_THROW(io::parse_sweep_plan(io::read_file(dir / "sweep-3d-q7.json")));
  const auto planar = io::parse_sweep_plan(io::read_file(dir / "sweep-2d.json"));
  EXPECT_EQ(planar.cells().size(), 27u);
  EXPECT_NO_THROW(io::parse_sweep_plan(io::read_file(dir / "sweep-5d-q8.json")));
  EXPECT_NO_THROW(io::parse_sweep_plan(io::read_file(dir / "sweep-5d-q2.json")));
  EXPECT_NO_THROW(io::parse_bisect_config(io::read_file(dir / "bisect-3d-q7.json")));
  EXPECT_NO_THROW(io::parse_represent_config(io::read_file(dir / "represent.json")));
  EXPECT_THROW(io::read_file(dir / "missing.json"), Error);
}

TEST(RunConfig, OverridesApply) {
  io::RunConfig run;
  run.rel_tol = 1e-9;
  run.r_max = 42.0;
  IntegrationConfig cfg;
  run.apply(cfg);
  EXPECT_EQ(cfg.rel_tol, 1e-9);
  EXPECT_EQ(cfg.r_max, 42.0);
  EXPECT_EQ(cfg.abs_tol, IntegrationConfig{}.abs_tol);
}

TEST(Manifest, RecordsCommandConfigAndSeed) {
  const auto dir = scratch("manifest");
  io::RunConfig run;
  run.command = "sweep x.json";
  run.seed = 99;
  io::write_manifest(dir, run, R"({"name":"x"})");
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m["command"], "sweep x.json");
  EXPECT_EQ(m["seed"], 99);
  EXPECT_EQ(m["config"]["name"], "x");
  EXPECT_TRUE(m.contains("versions"));
  fs::remove_all(dir);
}

TEST(Table, HeaderAndFullPrecision) {
  const auto dir = scratch("table");
  fs::create_directories(dir);
  io::write_table(dir / "t.dat", {"demo"}, {"x", "y"}, {{0.1, 1.0 / 3.0}, {2.0, -1e-300}});
  const std::string text = slurp(dir / "t.dat");
  EXPECT_EQ(text.rfind("# demo\n", 0), 0u);
  EXPECT_NE(text.find("0.33333333333333331"), std::string::npos);
  std::istringstream in(text);
  std::string line;
  double x = 0, y = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') std::istringstream(line) >> x >> y;
  EXPECT_EQ(x, 2.0);
  EXPECT_EQ(y, -1e-300);
  fs::remove_all(dir);
}

TEST(Summary, CountsClassesPerQ) {
  auto a = sample_record(), b = sample_record(), c = sample_record();
  b.cls = "Extinct";
  c.q = 2.0;
  c.cls = "Extinct";
  const std::string s = io::class_summary({a, b, c});
  EXPECT_NE(s.find("Extinct"), std::string::npos);
  EXPECT_LT(s.find("\n2 "), s.find("\n5 "));
}

}  // namespace
