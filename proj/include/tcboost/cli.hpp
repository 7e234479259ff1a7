#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tcboost::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a subcommand needs. Read from an optional JSON file first,
/// then overridden by command-line flags.
struct CliConfig {
  std::string command;

  // data source: exactly one of `data` and `gen` for commands that read data
  std::string data;
  std::string gen;  // "twonorm:N" or "ringnorm:N"
  std::uint64_t gen_seed = 0;
  std::string label = "label";
  std::string positive;
  std::vector<std::string> categorical;
  int bins = 4;

  // training
  std::string formulation = "lp_boost";  // or "adaboost"
  double c = 1.0;
  int depth = 1;
  std::string mode = "hard";
  std::string learner = "greedy";
  double epsilon = 1e-6;
  std::optional<int> max_iters;
  std::optional<double> time_limit;
  std::optional<bool> early_stopping;
  double eps_stop = 0.01;
  std::string edge_aggregation = "max";
  bool md_full_a = false;
  std::vector<std::uint64_t> seeds = {0};
  std::string profile = "library";
  std::string output = ".";

  // sweep
  std::vector<std::string> methods;
  std::optional<std::string> grid_kind;
  std::optional<double> grid_lower;
  std::optional<double> grid_upper;
  std::optional<int> grid_count;
  int workers = 1;
  bool traces = false;

  // reweight
  std::vector<std::string> formulations = {"nm_boost"};
  int pool_size = 100;
  double adaboost_lr = 1.0;

  // margins
  std::string model;
  std::string split = "test";

  // report
  std::vector<std::string> inputs;
};

nlohmann::json to_json(const CliConfig& cfg);
/// Fields missing from `j` keep their value in `base`.
CliConfig config_from_json(const nlohmann::json& j, CliConfig base = {});

/// Exit code: 0 success, 1 invalid input or usage, 2 runtime or solver failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace tcboost::cli
