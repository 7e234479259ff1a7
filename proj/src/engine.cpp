#include "tcboost/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include "tcboost/error.hpp"
#include "tcboost/log.hpp"
#include "tcboost/metrics.hpp"

namespace tcboost::engine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TerminationName {
  Termination t;
  const char* name;
};

constexpr TerminationName kTerminationNames[] = {
    {Termination::certified, "certified"},
    {Termination::iteration_limit, "iteration_limit"},
    {Termination::time_limit, "time_limit"},
    {Termination::stalled, "stalled"},
    {Termination::zero_error, "zero_error"},
    {Termination::weak_learner_failed, "weak_learner_failed"},
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Votes of every accepted hypothesis on one evaluation set.
class EvalTracker {
public:
  explicit EvalTracker(const data::BinaryDataset* data) : data_(data) {}

  void add(const tree::Hypothesis& h) {
    if (data_) columns_.push_back(tree::predict_matrix(h, *data_));
  }

  double accuracy(std::span<const double> w) const {
    if (!data_ || data_->size() == 0) return kNaN;
    std::vector<double> scores(data_->size(), 0.0);
    for (std::size_t j = 0; j < columns_.size(); ++j)
      for (std::size_t i = 0; i < scores.size(); ++i) scores[i] += w[j] * columns_[j][i];
    return metrics::accuracy_of_scores(scores, data_->y());
  }

private:
  const data::BinaryDataset* data_;
  std::vector<std::vector<double>> columns_;
};

std::vector<double> uniform(std::size_t m) {
  return std::vector<double>(m, 1.0 / static_cast<double>(m));
}

// Trees need a distribution: drop negative mass and renormalize.
std::vector<double> training_weights(const std::vector<double>& u, bool& warned) {
  std::vector<double> out(u.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = std::max(u[i], 0.0);
    sum += out[i];
  }
  if (!(sum > 0.0)) {
    if (!warned) log::warn("all sample weights are non-positive; training on uniform weights");
    warned = true;
    return uniform(u.size());
  }
  for (double& v : out) v /= sum;
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string to_string(Termination t) {
  for (const auto& n : kTerminationNames)
    if (n.t == t) return n.name;
  return "unknown";
}

Termination termination_from_string(const std::string& s) {
  for (const auto& n : kTerminationNames)
    if (s == n.name) return n.t;
  throw ValidationError("unknown termination reason '" + s + "'");
}

void EnsembleModel::validate() const {
  if (hypotheses.size() != weights.size())
    throw ValidationError("model: hypothesis and weight counts differ");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("model: weights must be >= 0");
  for (std::size_t j = 1; j < hypotheses.size(); ++j)
    if (hypotheses[j].features() != hypotheses[0].features())
      throw ValidationError("model: hypotheses disagree on feature count");
}

void TrainConfig::validate() const {
  params.validate();
  if (max_iterations < 1) throw ValidationError("max_iterations must be >= 1");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be positive");
  if (learner.max_depth < 0) throw ValidationError("depth must be >= 0");
  if (time_limit_seconds && !(*time_limit_seconds > 0.0))
    throw ValidationError("time limit must be positive");
}

void AdaBoostConfig::validate() const {
  if (rounds < 1) throw ValidationError("rounds must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (learner.max_depth < 0) throw ValidationError("depth must be >= 0");
}

TrainResult train(const TrainConfig& config, const data::BinaryDataset& train_data,
                  const EvalSets& eval) {
  config.validate();
  const std::size_t m = train_data.size();
  if (m == 0) throw ValidationError("train: empty training data");
  const auto start = Clock::now();
  const auto& y = train_data.y();
  const bool erlp = config.params.formulation == master::Formulation::erlp_boost;
  const long solve_cap = erlp ? master::erlp_iteration_cap(config.params.eps_stop)
                              : std::numeric_limits<long>::max();

  TrainResult result;
  auto& model = result.model;
  model.mode = config.learner.mode;
  model.formulation = master::to_string(config.params.formulation);
  model.metadata.hyperparameter = config.params.c;
  model.metadata.learner = config.learner;

  master::ColumnMatrix columns(m);
  EvalTracker val(eval.validation), test(eval.test);
  std::vector<double> u = uniform(m);
  const std::vector<double> u0 = uniform(m);
  double beta = 0.0;
  Eigen::VectorXd w;
  bool warned_clip = false;
  Termination termination = Termination::iteration_limit;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    if (config.time_limit_seconds && iter > 1 && seconds_since(start) > *config.time_limit_seconds) {
      termination = Termination::time_limit;
      break;
    }
    const auto tu = training_weights(u, warned_clip);
    tree::Hypothesis h = tree::fit(config.learner, train_data, tu);
    const auto votes = tree::predict_matrix(h, train_data);
    const double edge = master::price(u, votes, y);
    const bool certified = iter > 1 && edge <= beta + config.epsilon;
    model.metadata.final_edge = edge;
    model.metadata.final_beta = beta;
    result.final_u = u;

    if (certified && config.early_stopping) {
      termination = Termination::certified;
      break;
    }
    if (!certified && config.early_stopping && columns.find(votes) >= 0) {
      const std::string msg = "iteration " + std::to_string(iter) +
                              ": new column duplicates an existing one but prices in; stopping";
      log::warn(msg);
      model.metadata.warnings.push_back(msg);
      termination = Termination::stalled;
      break;
    }
    if (model.metadata.master_solves >= solve_cap) {
      termination = Termination::iteration_limit;
      break;
    }

    columns.append(votes);
    model.hypotheses.push_back(std::move(h));
    val.add(model.hypotheses.back());
    test.add(model.hypotheses.back());

    master::MasterSolution s;
    try {
      s = master::solve_master(config.params, {columns, y, config.solver}, u0);
    } catch (const SolverError& e) {
      throw SolverError("iteration " + std::to_string(iter) + ": " + e.what());
    }
    ++model.metadata.master_solves;
    w = s.w;
    const double scale = s.u.cwiseAbs().sum();
    if (scale > 0.0) {
      u = to_std(s.u / scale);
      beta = s.beta / scale;
    } else {
      u = to_std(s.u);
      beta = s.beta;
    }
    model.metadata.iterations = iter;

    const std::vector<double> wv = to_std(w);
    TraceRecord rec;
    rec.iter = iter;
    rec.edge = edge;
    rec.beta = model.metadata.final_beta;
    rec.objective = s.objective;
    rec.nnz = metrics::sparsity(wv);
    const Eigen::VectorXd train_scores = columns.matrix() * w;
    rec.train_acc = metrics::accuracy_of_scores(to_std(train_scores), y);
    rec.val_acc = val.accuracy(wv);
    rec.test_acc = test.accuracy(wv);
    rec.seconds = seconds_since(start);
    rec.certified = iter > 1 && certified;
    result.trace.push_back(rec);
  }

  model.weights = to_std(w);
  model.metadata.termination = termination;
  if (result.final_u.empty()) result.final_u = u;
  return result;
}

EnsembleModel reweight(const std::vector<tree::Hypothesis>& hypotheses,
                       const data::BinaryDataset& data, const master::FormulationParams& params,
                       const solver::SolverOptions& options) {
  if (hypotheses.empty()) throw ValidationError("reweight: no hypotheses");
  if (data.size() == 0) throw ValidationError("reweight: empty data");
  master::ColumnMatrix columns(data.size());
  for (const auto& h : hypotheses) columns.append(tree::predict_matrix(h, data));
  const auto s = master::solve_master(params, {columns, data.y(), options});

  EnsembleModel model;
  model.hypotheses = hypotheses;
  model.weights = to_std(s.w);
  model.mode = hypotheses.front().mode();
  model.formulation = master::to_string(params.formulation);
  model.metadata.iterations = 1;
  model.metadata.master_solves = 1;
  model.metadata.hyperparameter = params.c;
  model.metadata.termination = Termination::iteration_limit;
  return model;
}

TrainResult adaboost_train(const AdaBoostConfig& config, const data::BinaryDataset& train_data,
                           const EvalSets& eval) {
  config.validate();
  const std::size_t m = train_data.size();
  if (m == 0) throw ValidationError("adaboost: empty training data");
  const auto start = Clock::now();
  const auto& y = train_data.y();

  TrainResult result;
  auto& model = result.model;
  model.mode = config.learner.mode;
  model.formulation = kAdaBoost;
  model.metadata.hyperparameter = config.learning_rate;
  model.metadata.learner = config.learner;

  EvalTracker val(eval.validation), test(eval.test);
  std::vector<double> u = uniform(m);
  std::vector<double> train_scores(m, 0.0);
  int rejections = 0;
  Termination termination = Termination::iteration_limit;

  for (int round = 1; round <= config.rounds; ++round) {
    tree::Hypothesis h = tree::fit(config.learner, train_data, u);
    const auto votes = tree::predict_matrix(h, train_data);
    std::vector<char> miss(m);
    double wrong = 0.0, total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      miss[i] = (votes[i] >= 0.0 ? 1 : -1) != y[i];
      total += u[i];
      if (miss[i]) wrong += u[i];
    }
    const double err = wrong / total;
    const double edge = master::price(u, votes, y);
    result.final_u = u;
    model.metadata.final_edge = edge;

    double alpha = 0.0;
    if (err <= 0.0) {
      alpha = 1.0;
      termination = Termination::zero_error;
    } else if (err >= 0.5) {
      ++rejections;
      const std::string msg = "round " + std::to_string(round) + ": weighted error " +
                              std::to_string(err) + " >= 0.5, tree rejected";
      log::warn(msg);
      model.metadata.warnings.push_back(msg);
      if (rejections >= 3) {
        termination = Termination::weak_learner_failed;
        break;
      }
      double sum = 0.0;
      for (double& v : u) sum += (v += 1e-6);
      for (double& v : u) v /= sum;
      continue;
    } else {
      rejections = 0;
      const double e = std::clamp(err, 1e-12, 1.0 - 1e-12);
      alpha = config.learning_rate * std::log((1.0 - e) / e);
      const double boost = std::exp(alpha);
      double sum = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (miss[i]) u[i] *= boost;
        sum += u[i];
      }
      for (double& v : u) v /= sum;
    }

    model.hypotheses.push_back(std::move(h));
    model.weights.push_back(alpha);
    val.add(model.hypotheses.back());
    test.add(model.hypotheses.back());
    for (std::size_t i = 0; i < m; ++i) train_scores[i] += alpha * votes[i];
    model.metadata.iterations = round;

    TraceRecord rec;
    rec.iter = round;
    rec.edge = edge;
    rec.beta = kNaN;
    rec.objective = kNaN;
    rec.nnz = metrics::sparsity(model.weights);
    rec.train_acc = metrics::accuracy_of_scores(train_scores, y);
    rec.val_acc = val.accuracy(model.weights);
    rec.test_acc = test.accuracy(model.weights);
    rec.seconds = seconds_since(start);
    result.trace.push_back(rec);
    if (termination == Termination::zero_error) break;
  }
  model.metadata.termination = termination;
  return result;
}

std::vector<double> decision_values(const EnsembleModel& model, const data::BinaryDataset& data) {
  model.validate();
  if (!model.hypotheses.empty() && model.hypotheses.front().features() != data.features())
    throw ValidationError("predict: model expects " +
                          std::to_string(model.hypotheses.front().features()) +
                          " features, data has " + std::to_string(data.features()));
  std::vector<double> f(data.size(), 0.0);
  for (std::size_t j = 0; j < model.hypotheses.size(); ++j) {
    if (model.weights[j] == 0.0) continue;
    const auto votes = tree::predict_matrix(model.hypotheses[j], data);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += model.weights[j] * votes[i];
  }
  return f;
}

std::vector<int> predict(const EnsembleModel& model, const data::BinaryDataset& data) {
  if (std::none_of(model.weights.begin(), model.weights.end(), [](double w) { return w > 0.0; }))
    log::warn("predict: all ensemble weights are zero; every prediction is +1");
  const auto f = decision_values(model, data);
  std::vector<int> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] >= 0.0 ? 1 : -1;
  return out;
}

nlohmann::json to_json(const EnsembleModel& model) {
  nlohmann::json hyps = nlohmann::json::array();
  for (const auto& h : model.hypotheses) hyps.push_back(tree::to_json(h));
  const auto& md = model.metadata;
  return {{"formulation", model.formulation},
          {"voting_mode", tree::to_string(model.mode)},
          {"weights", model.weights},
          {"hypotheses", hyps},
          {"metadata",
           {{"iterations", md.iterations},
            {"termination", to_string(md.termination)},
            {"hyperparameter", md.hyperparameter},
            {"learner",
             {{"kind", tree::to_string(md.learner.kind)},
              {"max_depth", md.learner.max_depth},
              {"mode", tree::to_string(md.learner.mode)}}},
            {"master_solves", md.master_solves},
            {"final_edge", md.final_edge},
            {"final_beta", md.final_beta},
            {"warnings", md.warnings}}}};
}

EnsembleModel model_from_json(const nlohmann::json& j) {
  try {
    EnsembleModel model;
    model.formulation = j.at("formulation").get<std::string>();
    model.mode = tree::voting_mode_from_string(j.at("voting_mode").get<std::string>());
    model.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& h : j.at("hypotheses")) model.hypotheses.push_back(tree::hypothesis_from_json(h));
    if (j.contains("metadata")) {
      const auto& md = j.at("metadata");
      auto& out = model.metadata;
      out.iterations = md.value("iterations", 0);
      out.termination = termination_from_string(md.value("termination", "iteration_limit"));
      out.hyperparameter = md.value("hyperparameter", 0.0);
      if (md.contains("learner")) {
        const auto& l = md.at("learner");
        out.learner.kind = tree::learner_from_string(l.value("kind", "greedy"));
        out.learner.max_depth = l.value("max_depth", 1);
        out.learner.mode = tree::voting_mode_from_string(l.value("mode", "hard"));
      }
      out.master_solves = md.value("master_solves", 0);
      out.final_edge = md.value("final_edge", 0.0);
      out.final_beta = md.value("final_beta", 0.0);
      out.warnings = md.value("warnings", std::vector<std::string>{});
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: malformed JSON: ") + e.what());
  }
}

void save_model(const EnsembleModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << to_json(model).dump(2) << '\n';
}

EnsembleModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return model_from_json(j);
}

void write_trace_csv(const std::vector<TraceRecord>& trace, std::ostream& out) {
  out.precision(17);
  auto field = [&](double v) {
    out << ',';
    if (!std::isnan(v)) out << v;
  };
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.iter;
    field(r.edge);
    field(r.beta);
    field(r.objective);
    out << ',' << r.nnz;
    field(r.train_acc);
    field(r.val_acc);
    field(r.test_acc);
    field(r.seconds);
    out << '\n';
  }
}

void write_trace_csv(const std::vector<TraceRecord>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  write_trace_csv(trace, out);
}

}  // namespace tcboost::engine
