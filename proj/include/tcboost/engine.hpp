#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcboost/dataset.hpp"
#include "tcboost/hypothesis.hpp"
#include "tcboost/master.hpp"
#include "tcboost/solver.hpp"

namespace tcboost::engine {

enum class Termination {
  certified,
  iteration_limit,
  time_limit,
  stalled,
  zero_error,           // AdaBoost: a tree fit the data exactly
  weak_learner_failed,  // AdaBoost: three consecutive trees with error >= 0.5
};

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

inline constexpr const char* kAdaBoost = "adaboost";

struct ModelMetadata {
  int iterations = 0;
  Termination termination = Termination::iteration_limit;
  double hyperparameter = 0.0;  // C, or the AdaBoost learning rate
  tree::LearnerSpec learner;
  int master_solves = 0;
  /// Edge and threshold of the last pricing step, both under normalized u.
  double final_edge = 0.0;
  double final_beta = 0.0;
  std::vector<std::string> warnings;
};

struct EnsembleModel {
  std::vector<tree::Hypothesis> hypotheses;
  std::vector<double> weights;
  tree::VotingMode mode = tree::VotingMode::hard;
  std::string formulation;
  ModelMetadata metadata;

  void validate() const;
};

struct TrainConfig {
  master::FormulationParams params;
  tree::LearnerSpec learner;
  double epsilon = 1e-6;
  int max_iterations = 100;
  std::optional<double> time_limit_seconds;
  std::uint64_t seed = 0;
  bool early_stopping = true;
  solver::SolverOptions solver;

  void validate() const;
};

/// Quantities that do not apply are NaN (written as empty CSV fields).
struct TraceRecord {
  int iter = 0;
  double edge = 0.0;
  double beta = 0.0;
  double objective = 0.0;
  std::size_t nnz = 0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  double test_acc = 0.0;
  double seconds = 0.0;
  bool certified = false;
};

/// Optional sets evaluated after every iteration.
struct EvalSets {
  const data::BinaryDataset* validation = nullptr;
  const data::BinaryDataset* test = nullptr;
};

struct TrainResult {
  EnsembleModel model;
  std::vector<TraceRecord> trace;
  /// Normalized sample weights the final pricing step used.
  std::vector<double> final_u;
};

/// Column generation: fit a tree under u, price it against beta, append it,
/// re-solve the master.
TrainResult train(const TrainConfig& config, const data::BinaryDataset& train_data,
                  const EvalSets& eval = {});

/// Solve one master over a fixed pool of hypotheses.
EnsembleModel reweight(const std::vector<tree::Hypothesis>& hypotheses,
                       const data::BinaryDataset& data, const master::FormulationParams& params,
                       const solver::SolverOptions& options = {});

struct AdaBoostConfig {
  int rounds = 100;
  double learning_rate = 1.0;
  tree::LearnerSpec learner;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Binary SAMME.
TrainResult adaboost_train(const AdaBoostConfig& config, const data::BinaryDataset& train_data,
                           const EvalSets& eval = {});

/// sum_j w_j h_j(x_i) for every example.
std::vector<double> decision_values(const EnsembleModel& model, const data::BinaryDataset& data);
/// sign of the decision value, 0 -> +1.
std::vector<int> predict(const EnsembleModel& model, const data::BinaryDataset& data);

nlohmann::json to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const nlohmann::json& j);
void save_model(const EnsembleModel& model, const std::string& path);
EnsembleModel load_model(const std::string& path);

inline constexpr const char* kTraceHeader =
    "iter,edge,beta,objective,nnz,train_acc,val_acc,test_acc,seconds";
void write_trace_csv(const std::vector<TraceRecord>& trace, std::ostream& out);
void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path);

}  // namespace tcboost::engine
