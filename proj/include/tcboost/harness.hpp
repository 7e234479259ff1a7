#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcboost/dataset.hpp"
#include "tcboost/engine.hpp"
#include "tcboost/hypothesis.hpp"
#include "tcboost/master.hpp"

namespace tcboost::harness {

enum class RangeKind { log10_exponent, linear, linear_scaled_by_m };

std::string to_string(RangeKind k);
RangeKind range_kind_from_string(const std::string& s);

struct GridSpec {
  std::string method;
  RangeKind kind = RangeKind::linear;
  double lower = 0.0;
  double upper = 1.0;
  int count = 10;

  void validate() const;
};

/// Default ranges per method; "adaboost" tunes the learning rate.
/// Hard margin has no hyperparameter and gets a single-value grid.
GridSpec default_grid(const std::string& method);

/// `count` values from lower to upper inclusive. For log10_exponent the
/// exponents are evenly spaced; for linear_scaled_by_m the upper end is
/// upper * m.
std::vector<double> grid_values(const GridSpec& spec, std::size_t m);

struct Profile {
  bool early_stopping = true;
  int max_iterations = 100;
  std::optional<double> time_limit_seconds;

  static Profile library();
  /// Early stopping off, 100 iterations, 45-minute cap per run.
  static Profile paper();
};

struct SweepOptions {
  std::string method;  // a formulation name or "adaboost"
  std::string dataset;
  tree::LearnerSpec learner;
  std::optional<GridSpec> grid;  // defaults to default_grid(method)
  std::vector<std::uint64_t> seeds = {0};
  Profile profile = Profile::paper();
  data::SplitSpec fractions;  // seed field ignored
  double epsilon = 1e-6;
  double eps_stop = 0.01;
  master::EdgeAggregation edge_aggregation = master::EdgeAggregation::max;
  int workers = 1;
  bool keep_traces = false;
};

/// One (method, seed, hyperparameter) run.
struct Cell {
  std::string method;
  std::uint64_t seed = 0;
  double hyperparameter = 0.0;
  bool ok = false;
  std::string error;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::size_t nnz = 0;
  int iterations = 0;
  std::string termination;
  double seconds = 0.0;
};

/// The validation winner for one (method, seed).
struct SeedResult {
  std::string method;
  std::string dataset;
  int depth = 1;
  std::uint64_t seed = 0;
  double chosen_hp = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::size_t nnz = 0;
  double seconds = 0.0;
  std::vector<engine::TraceRecord> trace;  // winner only, when requested
};

struct MethodSummary {
  std::string method;
  std::string dataset;
  int depth = 1;
  std::size_t seeds = 0;
  bool complete = true;
  double mean_test_acc = 0.0;
  double std_test_acc = 0.0;
  double mean_nnz = 0.0;
  double median_nnz = 0.0;
  std::vector<double> chosen_hps;
  double seconds = 0.0;
};

struct ExperimentReport {
  std::string kind;  // "sweep" or "reweight"
  std::vector<MethodSummary> summaries;
  std::vector<SeedResult> rows;
  std::vector<Cell> cells;

  /// Appends the contents of `other`.
  void merge(const ExperimentReport& other);
};

ExperimentReport sweep(const data::BinaryDataset& data, const SweepOptions& options);

struct ReweightOptions {
  std::string dataset;
  int depth = 1;
  std::vector<master::Formulation> formulations = {master::Formulation::nm_boost};
  std::vector<std::uint64_t> seeds = {0};
  int pool_size = 100;
  double adaboost_learning_rate = 1.0;
  tree::VotingMode mode = tree::VotingMode::hard;
  data::SplitSpec fractions;
  double eps_stop = 0.01;
  int workers = 1;
};

/// AdaBoost builds a pool per seed; each formulation reweights it once per
/// grid value. The untouched AdaBoost ensemble is reported as "adaboost".
ExperimentReport reweight_experiment(const data::BinaryDataset& data,
                                     const ReweightOptions& options);

/// `with_timing = false` gives the canonical form used for reproducibility checks.
nlohmann::json to_json(const ExperimentReport& report, bool with_timing = true);
ExperimentReport report_from_json(const nlohmann::json& j);

inline constexpr const char* kReportHeader =
    "method,dataset,depth,seed,chosen_hp,val_acc,test_acc,nnz,seconds";
void write_report_csv(const ExperimentReport& report, std::ostream& out);
void write_report_csv(const ExperimentReport& report, const std::string& path);

/// Recompute summaries from rows and cells (deterministic order by method).
std::vector<MethodSummary> summarize(const std::vector<SeedResult>& rows,
                                     const std::vector<Cell>& cells);

}  // namespace tcboost::harness
