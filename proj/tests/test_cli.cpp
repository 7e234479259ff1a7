#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "tcboost/cli.hpp"
#include "tcboost/engine.hpp"
#include "tcboost/log.hpp"

namespace fs = std::filesystem;
using namespace tcboost;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "tcboost_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int tcb(std::vector<std::string> args) {
  args.insert(args.begin(), "tcboost");
  return cli::run(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

struct QuietLogs {
  QuietLogs() { log::set_level(log::Level::quiet); }
  ~QuietLogs() { log::set_level(log::Level::warn); }
};

}  // namespace

TEST_CASE("gen writes the requested dataset") {
  const auto dir = scratch("gen");
  CHECK(tcb({"gen", "--twonorm", "300", "--seed", "1", "-o", dir.string()}) == 0);
  const auto csv = dir / "twonorm.csv";
  REQUIRE(fs::exists(csv));
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("label") != std::string::npos);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 300);
  CHECK(fs::exists(dir / "run.json"));
  CHECK(tcb({"gen", "--twonorm", "10", "--ringnorm", "10", "-o", dir.string()}) == 1);
}

TEST_CASE("train writes a model, a trace and run.json") {
  const auto dir = scratch("train");
  REQUIRE(tcb({"gen", "--twonorm", "400", "--seed", "2", "-o", dir.string()}) == 0);
  const auto data = (dir / "twonorm.csv").string();
  const auto before = slurp(data);
  const auto out = dir / "out";
  CHECK(tcb({"train", "--data", data, "--formulation", "lpboost", "--C", "1", "--depth", "1",
             "--max-iters", "15", "-o", out.string()}) == 0);
  REQUIRE(fs::exists(out / "model.json"));
  REQUIRE(fs::exists(out / "trace.csv"));
  CHECK(slurp(data) == before);

  const auto model = engine::load_model((out / "model.json").string());
  CHECK(model.formulation == "lp_boost");
  std::ifstream trace(out / "trace.csv");
  std::string header;
  std::getline(trace, header);
  CHECK(header == engine::kTraceHeader);

  const auto run = read_json(out / "run.json");
  CHECK(run.at("command") == "train");
  CHECK(run.at("config").at("formulation") == "lpboost");
  CHECK(run.at("config").at("C") == 1.0);
  CHECK(run.contains("version"));
}

TEST_CASE("a run is reproducible from its run.json") {
  const auto dir = scratch("replay");
  const auto first = dir / "first", second = dir / "second";
  REQUIRE(tcb({"train", "--gen", "twonorm:300", "--gen-seed", "3", "--formulation", "nm_boost",
               "--C", "0.1", "--max-iters", "10", "--seed", "2", "-o", first.string()}) == 0);
  CHECK(tcb({"--config", (first / "run.json").string(), "-o", second.string()}) == 0);
  REQUIRE(fs::exists(second / "model.json"));
  const auto a = read_json(first / "model.json"), b = read_json(second / "model.json");
  CHECK(a.at("weights") == b.at("weights"));
  CHECK(a.at("hypotheses") == b.at("hypotheses"));
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch("override");
  const auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"command": "train", "gen": "twonorm:200", "formulation": "lp_boost",
                            "C": 0.5, "max_iters": 5})";
  const auto out = dir / "out";
  CHECK(tcb({"train", "--config", cfg.string(), "--C", "0.25", "-o", out.string()}) == 0);
  const auto run = read_json(out / "run.json");
  CHECK(run.at("config").at("C") == 0.25);
  CHECK(run.at("config").at("max_iters") == 5);
}

TEST_CASE("validation errors exit with 1") {
  QuietLogs quiet;
  const auto dir = scratch("errors");
  CHECK(tcb({"train", "--gen", "twonorm:100", "--formulation", "unknown", "-o", dir.string()}) ==
        1);
  CHECK(tcb({"train", "--gen", "twonorm:100", "--data", "x.csv", "-o", dir.string()}) == 1);
  CHECK(tcb({"train", "-o", dir.string()}) == 1);
  CHECK(tcb({"train", "--gen", "twonorm:100", "--bogus-flag"}) == 1);
  CHECK(tcb({"train", "--gen", "twonorm:100", "--profile", "fast", "-o", dir.string()}) == 1);
  CHECK(tcb({"margins", "--gen", "twonorm:100", "--model", "/nonexistent.json"}) == 1);
  CHECK(tcb({}) == 1);

  std::ofstream(dir / "file") << "x";
  CHECK(tcb({"gen", "--twonorm", "10", "-o", (dir / "file").string()}) == 1);
}

TEST_CASE("prep, margins, sweep, reweight and report") {
  const auto dir = scratch("pipeline");
  REQUIRE(tcb({"gen", "--ringnorm", "240", "--seed", "4", "-o", dir.string()}) == 0);
  const auto raw = (dir / "ringnorm.csv").string();
  REQUIRE(tcb({"prep", "--data", raw, "--bins", "4", "-o", dir.string()}) == 0);
  const auto binary = dir / "ringnorm_binary.csv";
  REQUIRE(fs::exists(binary));

  const auto model_dir = dir / "model";
  REQUIRE(tcb({"train", "--data", binary.string(), "--formulation", "md_boost", "--C", "5",
               "--max-iters", "8", "-o", model_dir.string()}) == 0);
  CHECK(tcb({"margins", "--data", binary.string(), "--model",
             (model_dir / "model.json").string(), "-o", model_dir.string()}) == 0);
  std::ifstream cdf(model_dir / "margins_cdf.csv");
  std::string header;
  std::getline(cdf, header);
  CHECK(header == "margin,cum_frac");

  const auto sweep_dir = dir / "sweep";
  CHECK(tcb({"sweep", "--data", binary.string(), "--method", "lp_boost", "--method", "adaboost",
             "--grid-count", "2", "--max-iters", "5", "--seeds", "0", "1", "--traces",
             "-o", sweep_dir.string()}) == 0);
  const auto report = read_json(sweep_dir / "report.json");
  CHECK(report.at("rows").size() == 4);
  CHECK(fs::exists(sweep_dir / "report.csv"));
  CHECK(fs::exists(sweep_dir / "traces" / "lp_boost_seed1.csv"));

  const auto rw_dir = dir / "reweight";
  CHECK(tcb({"reweight", "--data", binary.string(), "--pool-size", "10", "--formulations",
             "nm_boost", "-o", rw_dir.string()}) == 0);
  CHECK(read_json(rw_dir / "report.json").at("kind") == "reweight");

  const auto merged = dir / "merged";
  CHECK(tcb({"report", "--inputs", (sweep_dir / "report.json").string(),
             (rw_dir / "report.json").string(), "-o", merged.string()}) == 0);
  CHECK(read_json(merged / "report.json").at("rows").size() == 6);
  CHECK(fs::exists(merged / "summary.csv"));
}

TEST_CASE("the installed binary reports exit codes") {
  const char* exe = std::getenv("TCBOOST_CLI");
  if (!exe) return;
  const auto dir = scratch("binary");
  const std::string quiet = " >/dev/null 2>&1";
  auto code = [&](const std::string& args) {
    const int status = std::system((std::string(exe) + " " + args + quiet).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  CHECK(code("--version") == 0);
  CHECK(code("--help") == 0);
  CHECK(code("gen --twonorm 50 -o " + dir.string()) == 0);
  CHECK(code("train --formulation unknown --gen twonorm:50 -o " + dir.string()) == 1);
}
