#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "music/cli/commands.hpp"
#include "music/cli/config.hpp"
#include "music/cli/figures.hpp"
#include "music/experiment.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace music;
using namespace music::cli;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scratch directory removed on scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("music_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Copies a config fixture into dir, pointing output_dir inside it.
fs::path stage_config(const std::string& name, const TempDir& dir) {
  std::string text = read_file(fs::path(MUSIC_TEST_CONFIG_DIR) / name);
  json doc = json::parse(text);
  if (doc.contains("run")) doc["run"]["output_dir"] = (dir.path / "out").string();
  std::string dumped = doc.dump(2);
  const std::string token = "@DATA@";
  for (auto pos = dumped.find(token); pos != std::string::npos; pos = dumped.find(token)) {
    dumped.replace(pos, token.size(), MUSIC_TEST_DATA_DIR);
  }
  const fs::path out = dir.path / name;
  std::ofstream(out) << dumped;
  return out;
}

json small_config() {
  return json::parse(read_file(fs::path(MUSIC_TEST_CONFIG_DIR) / "small_quadratic.json"));
}

}  // namespace

TEST_CASE("config parser accepts the documented schema") {
  const auto r = parse_experiment_config(small_config());
  REQUIRE(r.errors.empty());
  const auto& c = *r.config;
  CHECK(c.problem.kind == ProblemKind::Quadratic);
  CHECK(std::get<SyntheticSource>(c.problem.source).m == 5);
  CHECK(c.network.n == 8);
  REQUIRE(c.algorithms.size() == 3);
  CHECK(c.algorithms[1].config.schedule.kind == StepSchedule::Kind::Diminishing);
  CHECK(c.algorithms[1].config.schedule.delta == 0.5);
  CHECK(c.run.iterations == 400);
  CHECK(c.run.target_error == 1e-2);
}

TEST_CASE("config parser lists every problem") {
  const json doc = json::parse(read_file(fs::path(MUSIC_TEST_CONFIG_DIR) / "invalid_many.json"));
  const auto r = parse_experiment_config(doc);
  CHECK_FALSE(r.config.has_value());
  const auto has = [&](const std::string& needle) {
    for (const auto& e : r.errors) {
      if (e.find(needle) != std::string::npos) return true;
    }
    return false;
  };
  CHECK(has("/problem/kind"));
  CHECK(has("/problem/mu"));
  CHECK(has("/problem/source/synthetic/p"));
  CHECK(has("/network/extra: unknown key"));
  CHECK(has("/algorithms/0"));
  CHECK(has("/algorithms/1/kind"));
  CHECK(has("/algorithms/1/schedule/delta"));
  CHECK(has("duplicate"));
  CHECK(has("/run/T"));
  CHECK(r.errors.size() >= 9);
}

TEST_CASE("config parser field-level rejections") {
  SUBCASE("negative count") {
    json d = small_config();
    d["network"]["n"] = -3;
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("unknown top-level key") {
    json d = small_config();
    d["plot"] = true;
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("two sources") {
    json d = small_config();
    d["problem"]["source"]["libsvm"] = json::object();
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("unsafe label") {
    json d = small_config();
    d["algorithms"][0]["label"] = "../escape";
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("reserved label") {
    json d = small_config();
    d["algorithms"][0]["label"] = "summary";
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("other mixing rule") {
    json d = small_config();
    d["network"]["rule"] = "laplacian";
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("logistic libsvm needs labels") {
    json d = small_config();
    d["problem"]["kind"] = "logistic";
    d["problem"]["source"] = json::parse(R"({"libsvm": {"path": "x", "m_per_agent": 2, "seed": 1}})");
    const auto r = parse_experiment_config(d);
    CHECK_FALSE(r.config);
    CHECK(r.errors.size() == 2);
  }
  SUBCASE("empty algorithm list") {
    json d = small_config();
    d["algorithms"] = json::array();
    CHECK_FALSE(parse_experiment_config(d).config);
  }
  SUBCASE("not an object") {
    CHECK_FALSE(parse_experiment_config(json::array()).config);
  }
}

TEST_CASE("validate: ok, missing file, bad JSON") {
  TempDir dir("validate");
  std::ostringstream out, err;
  CHECK(cmd_validate(stage_config("small_quadratic.json", dir).string(), out, err) == kExitOk);
  CHECK(out.str() == "ok\n");

  CHECK(cmd_validate((dir.path / "nope.json").string(), out, err) == kExitIo);

  const fs::path broken = dir.path / "broken.json";
  std::ofstream(broken) << "{\"problem\": ";
  std::ostringstream err2;
  CHECK(cmd_validate(broken.string(), out, err2) == kExitValidation);
  CHECK(err2.str().find("invalid JSON") != std::string::npos);

  std::ostringstream err3;
  CHECK(cmd_validate(stage_config("invalid_many.json", dir).string(), out, err3) ==
        kExitValidation);
  CHECK(err3.str().find("/problem/kind") != std::string::npos);
  CHECK(err3.str().find("/run/T") != std::string::npos);
}

TEST_CASE("validate warns about an exact MUSIC setting outside the stable region") {
  TempDir dir("unstable");
  std::ostringstream out, err;
  CHECK(cmd_validate(stage_config("unstable_exact.json", dir).string(), out, err) == kExitOk);
  CHECK(out.str() == "ok\n");
  CHECK(err.str().find("warning: exact_E6") != std::string::npos);
}

TEST_CASE("validate catches a graph that cannot connect") {
  TempDir dir("graph");
  json d = small_config();
  d["network"]["n"] = 60;
  d["network"]["avg_degree"] = 0.05;
  const fs::path p = dir.path / "cfg.json";
  std::ofstream(p) << d.dump();
  std::ostringstream out, err;
  CHECK(cmd_validate(p.string(), out, err) == kExitValidation);
  CHECK(err.str().find("network") != std::string::npos);
}

TEST_CASE("run writes one trace per algorithm plus a summary") {
  TempDir dir("run");
  std::ostringstream out, err;
  REQUIRE(cmd_run(stage_config("small_quadratic.json", dir).string(), out, err) == kExitOk);
  const fs::path o = dir.path / "out";
  for (const char* label : {"atc", "inexact_E2", "exact_E2"}) {
    std::ifstream in(o / (std::string(label) + ".csv"));
    REQUIRE(in);
    const Trace tr = read_trace_csv(in);
    CHECK(tr.records.size() == 400);
    CHECK(tr.status.kind == TerminalStatus::Kind::MaxIters);
  }
  std::istringstream summary(read_file(o / "summary.csv"));
  std::string line;
  std::getline(summary, line);
  CHECK(line == "label,final_rel_error,rounds_to_target,rate,status");
  int rows = 0;
  while (std::getline(summary, line)) {
    ++rows;
    CHECK(line.find("max_iters") != std::string::npos);
  }
  CHECK(rows == 3);
}

TEST_CASE("run records divergence in the summary and still succeeds") {
  TempDir dir("diverge");
  json d = small_config();
  d["algorithms"] = json::parse(R"([{"label": "hot", "kind": "atc", "E": 1, "beta": 1,
                                     "schedule": {"kind": "constant", "alpha0": 50.0}}])");
  d["run"]["output_dir"] = (dir.path / "out").string();
  const fs::path p = dir.path / "cfg.json";
  std::ofstream(p) << d.dump();
  std::ostringstream out, err;
  CHECK(cmd_run(p.string(), out, err) == kExitOk);
  const std::string summary = read_file(dir.path / "out" / "summary.csv");
  CHECK(summary.find("diverged@") != std::string::npos);
}

TEST_CASE("output directory override from the environment") {
  TempDir dir("env");
  const fs::path target = dir.path / "elsewhere";
  ::setenv(kOutputDirEnv, target.string().c_str(), 1);
  std::ostringstream out, err;
  const int rc = cmd_run(stage_config("small_quadratic.json", dir).string(), out, err);
  ::unsetenv(kOutputDirEnv);
  CHECK(rc == kExitOk);
  CHECK(fs::exists(target / "summary.csv"));
  CHECK_FALSE(fs::exists(dir.path / "out"));
}

TEST_CASE("unwritable output directory is an I/O failure") {
  TempDir dir("unwritable");
  json d = small_config();
  const fs::path blocker = dir.path / "file";
  std::ofstream(blocker) << "x";
  d["run"]["output_dir"] = (blocker / "sub").string();
  const fs::path p = dir.path / "cfg.json";
  std::ofstream(p) << d.dump();
  std::ostringstream out, err;
  CHECK(cmd_run(p.string(), out, err) == kExitIo);
}

TEST_CASE("libsvm-backed logistic run") {
  TempDir dir("libsvm");
  std::ostringstream out, err;
  CHECK(cmd_run(stage_config("logistic_libsvm.json", dir).string(), out, err) == kExitOk);
  CHECK(fs::exists(dir.path / "out" / "exact_E3.csv"));

  // Asking for more samples than the filtered file holds is a config error.
  json d = json::parse(read_file(stage_config("logistic_libsvm.json", dir)));
  d["problem"]["source"]["libsvm"]["m_per_agent"] = 100;
  const fs::path p = dir.path / "big.json";
  std::ofstream(p) << d.dump();
  std::ostringstream err2;
  CHECK(cmd_run(p.string(), out, err2) == kExitValidation);

  d["problem"]["source"]["libsvm"]["path"] = (dir.path / "missing.libsvm").string();
  std::ofstream(p) << d.dump();
  CHECK(cmd_run(p.string(), out, err2) == kExitIo);
}

TEST_CASE("figure recipes") {
  for (auto name : figure_names()) {
    const auto r = figure_recipe(std::string(name));
    REQUIRE(r.has_value());
    CHECK_FALSE(r->config.algorithms.empty());
    for (const auto& a : r->config.algorithms) CHECK(a.config.validate().empty());
  }
  CHECK_FALSE(figure_recipe("fig99").has_value());

  TempDir dir("figures");
  const fs::path p = dir.path / "fig.json";
  std::ofstream(p) << R"({"run": {"figure": "fig99", "output_dir": "x"}})";
  std::ostringstream out, err;
  CHECK(cmd_figures(p.string(), out, err) == kExitValidation);
  CHECK(err.str().find("unknown recipe") != std::string::npos);
}

TEST_CASE("figure overrides shrink a recipe") {
  TempDir dir("figrun");
  json doc = json::parse(R"({
    "run": {"figure": "fig4", "T": 200, "output_dir": ""},
    "network": {"n": 10, "avg_degree": 3, "seed": 1, "rule": "metropolis"}
  })");
  doc["run"]["output_dir"] = (dir.path / "out").string();
  const auto parsed = parse_figure_config(doc);
  REQUIRE(parsed.config.has_value());
  const auto cfg = apply_overrides(*figure_recipe("fig4"), *parsed.config);
  CHECK(cfg.run.iterations == 200);
  CHECK(cfg.network.n == 10);

  const fs::path p = dir.path / "fig.json";
  std::ofstream(p) << doc.dump();
  std::ostringstream out, err;
  CHECK(cmd_figures(p.string(), out, err) == kExitOk);
  CHECK(fs::exists(dir.path / "out" / "exact_diffusion.csv"));
  CHECK(fs::exists(dir.path / "out" / "summary.csv"));
}

TEST_CASE("same config twice gives byte-identical outputs") {
  TempDir dir("determinism");
  json d = small_config();
  const fs::path p = dir.path / "cfg.json";
  std::string first_summary, first_trace;
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path out_dir = dir.path / ("out" + std::to_string(pass));
    d["run"]["output_dir"] = out_dir.string();
    std::ofstream(p) << d.dump();
    std::ostringstream out, err;
    REQUIRE(cmd_run(p.string(), out, err) == kExitOk);
    const std::string summary = read_file(out_dir / "summary.csv");
    const std::string trace = read_file(out_dir / "exact_E2.csv");
    if (pass == 0) {
      first_summary = summary;
      first_trace = trace;
    } else {
      CHECK(summary == first_summary);
      CHECK(trace == first_trace);
    }
  }
}

TEST_CASE("validate accepts exactly the configs run accepts") {
  TempDir dir("completeness");
  std::vector<json> configs;
  configs.push_back(small_config());
  {
    json d = small_config();
    d["network"]["avg_degree"] = 0.05;
    d["network"]["n"] = 60;
    configs.push_back(d);
  }
  {
    json d = small_config();
    d["algorithms"][0]["E"] = 2;
    configs.push_back(d);
  }
  {
    json d = small_config();
    d["run"].erase("T");
    configs.push_back(d);
  }
  {
    json d = json::parse(read_file(stage_config("logistic_libsvm.json", dir)));
    configs.push_back(d);
    d["problem"]["source"]["libsvm"]["m_per_agent"] = 100;
    configs.push_back(d);
    d["problem"]["source"]["libsvm"]["m_per_agent"] = 3;
    d["problem"]["source"]["libsvm"]["label_pos"] = 9;
    d["problem"]["source"]["libsvm"]["label_neg"] = 10;
    configs.push_back(d);
  }
  for (std::size_t k = 0; k < configs.size(); ++k) {
    CAPTURE(k);
    json d = configs[k];
    d["run"]["output_dir"] = (dir.path / ("o" + std::to_string(k))).string();
    const fs::path p = dir.path / ("c" + std::to_string(k) + ".json");
    std::ofstream(p) << d.dump();
    std::ostringstream out, err;
    const int v = cmd_validate(p.string(), out, err);
    const int r = cmd_run(p.string(), out, err);
    CHECK(v == r);
  }
}
