#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "tcboost/engine.hpp"
#include "tcboost/error.hpp"
#include "tcboost/metrics.hpp"

using namespace tcboost;
using engine::Termination;
using master::Formulation;
using tree::VotingMode;

namespace {

// Feature 0 equals the label; the others are noise.
data::BinaryDataset perfect_feature(std::uint64_t seed, std::size_t m = 40, std::size_t d = 5) {
  const auto noise = oracle::random_binary(seed, m, d);
  std::vector<std::uint8_t> x = noise.x();
  for (std::size_t i = 0; i < m; ++i) x[i] = noise.label(i) > 0 ? 1 : 0;
  return data::BinaryDataset(m, d, std::move(x), noise.y());
}

data::BinaryDataset small_twonorm(std::size_t n, std::uint64_t seed) {
  return data::binarize(data::gen_twonorm(n, seed));
}

double default_c(Formulation f) {
  switch (f) {
    case Formulation::nm_boost: return 0.05;
    case Formulation::erlp_boost:
    case Formulation::qrlp_boost: return 2.0;
    case Formulation::md_boost: return 1.0;
    default: return 0.5;
  }
}

engine::TrainConfig config_for(Formulation f, int iterations, bool early_stopping = true) {
  engine::TrainConfig cfg;
  cfg.params.formulation = f;
  cfg.params.c = default_c(f);
  cfg.max_iterations = iterations;
  cfg.early_stopping = early_stopping;
  return cfg;
}

tree::Hypothesis stump(std::size_t feature, double when_zero, double when_one, std::size_t d) {
  std::vector<TreeNode> nodes(3);
  nodes[0].feature = static_cast<int>(feature);
  nodes[0].zero = 1;
  nodes[0].one = 2;
  nodes[1].score = when_zero;
  nodes[2].score = when_one;
  return tree::Hypothesis(nodes, VotingMode::hard, d);
}

// Natural-sense objective of weights w on the signed matrix, by substitution.
double substituted_objective(Formulation f, const Eigen::MatrixXd& d, const Eigen::VectorXd& w,
                             double c) {
  const Eigen::VectorXd rho = d * w;
  const double t = static_cast<double>(w.size());
  switch (f) {
    case Formulation::hard_margin: return rho.minCoeff();
    case Formulation::lp_boost: return w.sum() + c * (1.0 - rho.array()).max(0.0).sum();
    case Formulation::nm_boost: return (rho.array() - 1.0 / t).min(0.0).sum() + c * rho.sum();
    default: return 0.0;
  }
}

}  // namespace

TEST_CASE("a perfectly predictive feature ends training by iteration 2") {
  const auto d = perfect_feature(3);
  for (auto f : master::all_formulations()) {
    CAPTURE(master::to_string(f));
    const auto r = engine::train(config_for(f, 20), d);
    CHECK(r.model.metadata.iterations <= 2);
    if (f == Formulation::cg_boost)
      CHECK(r.model.metadata.termination == Termination::stalled);
    else
      CHECK(r.model.metadata.termination == Termination::certified);
    CHECK(metrics::sparsity(r.model) == 1);
    CHECK(metrics::accuracy(r.model, d) == 1.0);
  }
}

TEST_CASE("certified termination leaves no stump in the pool above beta + epsilon") {
  int certified = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = oracle::random_binary(300 + seed, 10, 4);
    const auto pool = oracle::stump_pool(d);
    for (auto f : master::all_formulations()) {
      if (f == Formulation::md_boost) continue;  // u is not a distribution there
      auto cfg = config_for(f, 50);
      cfg.params.c = f == Formulation::erlp_boost || f == Formulation::qrlp_boost ? 2.0 : 0.3;
      cfg.learner.kind = tree::LearnerKind::optimal_stump;
      const auto r = engine::train(cfg, d);
      if (r.model.metadata.termination != Termination::certified) continue;
      ++certified;
      for (const auto& votes : pool)
        CHECK(master::price(r.final_u, votes, d.y()) <=
              r.model.metadata.final_beta + cfg.epsilon + 1e-9);
    }
  }
  CHECK(certified > 20);
}

TEST_CASE("training is deterministic and master objectives are monotone") {
  const auto d = small_twonorm(300, 8);
  for (auto f : master::all_formulations()) {
    CAPTURE(master::to_string(f));
    const auto cfg = config_for(f, 15, false);
    const auto a = engine::train(cfg, d);
    const auto b = engine::train(cfg, d);
    CHECK(a.model.weights == b.model.weights);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
      CHECK(a.trace[k].iter == static_cast<int>(k) + 1);
      CHECK(a.trace[k].objective == b.trace[k].objective);
      CHECK(a.trace[k].edge == b.trace[k].edge);
    }
    const bool rises = master::maximizes(f) || f == Formulation::erlp_boost ||
                       f == Formulation::qrlp_boost;
    for (std::size_t k = 1; k < a.trace.size(); ++k) {
      const double prev = a.trace[k - 1].objective, cur = a.trace[k].objective;
      const double tol = 1e-7 * (1.0 + std::abs(prev));
      if (rises)
        CHECK(cur >= prev - tol);
      else
        CHECK(cur <= prev + tol);
    }
    CHECK(a.model.metadata.termination == Termination::iteration_limit);
    CHECK(a.model.hypotheses.size() == 15);
  }
}

TEST_CASE("early stopping off keeps iterating past the certificate") {
  const auto d = perfect_feature(4);
  const auto r = engine::train(config_for(Formulation::lp_boost, 6, false), d);
  CHECK(r.trace.size() == 6);
  CHECK(r.trace[1].certified);
  CHECK(r.model.metadata.termination == Termination::iteration_limit);
}

TEST_CASE("train tracks validation and test accuracy when given") {
  const auto all = small_twonorm(400, 2);
  const auto s = data::split_indices(all.size(), {});
  const auto tr = all.subset(s.train), va = all.subset(s.validation), te = all.subset(s.test);
  const auto r = engine::train(config_for(Formulation::nm_boost, 10, false), tr, {&va, &te});
  const auto& last = r.trace.back();
  CHECK(last.val_acc == doctest::Approx(metrics::accuracy(r.model, va)));
  CHECK(last.test_acc == doctest::Approx(metrics::accuracy(r.model, te)));
  CHECK(last.train_acc == doctest::Approx(metrics::accuracy(r.model, tr)));
  CHECK(last.nnz == metrics::sparsity(r.model));
}

TEST_CASE("config validation") {
  engine::TrainConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg.max_iterations = 1;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  engine::AdaBoostConfig ada;
  ada.learning_rate = 0.0;
  CHECK_THROWS_AS(ada.validate(), ValidationError);
  ada.learning_rate = 1.0;
  ada.rounds = 0;
  CHECK_THROWS_AS(ada.validate(), ValidationError);
}

TEST_CASE("AdaBoost weight at error 0.25 is ln 3") {
  // One feature; the zero leaf holds one positive and one negative.
  const data::BinaryDataset d(4, 1, {1, 1, 0, 0}, {1, 1, -1, 1});
  engine::AdaBoostConfig cfg;
  cfg.rounds = 1;
  const auto r = engine::adaboost_train(cfg, d);
  REQUIRE(r.model.weights.size() == 1);
  CHECK(r.model.weights[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  cfg.learning_rate = 0.5;
  CHECK(engine::adaboost_train(cfg, d).model.weights[0] ==
        doctest::Approx(0.5 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("AdaBoost stops with one tree on a perfect feature") {
  const auto d = perfect_feature(5);
  engine::AdaBoostConfig cfg;
  cfg.rounds = 50;
  const auto r = engine::adaboost_train(cfg, d);
  CHECK(r.model.hypotheses.size() == 1);
  CHECK(r.trace.size() == 1);
  CHECK(r.model.weights[0] == 1.0);
  CHECK(r.model.metadata.termination == Termination::zero_error);
}

TEST_CASE("AdaBoost: the last tree has error one half under the updated weights") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = oracle::random_binary(40 + seed, 60, 8);
    for (int k = 1; k <= 10; ++k) {
      engine::AdaBoostConfig cfg;
      cfg.rounds = k + 1;
      cfg.seed = seed;
      const auto r = engine::adaboost_train(cfg, d);
      if (!r.model.metadata.warnings.empty() ||
          r.model.hypotheses.size() < static_cast<std::size_t>(k))
        break;
      // final_u is the distribution the (k+1)-th round trained on.
      const double err = tree::weighted_error(r.model.hypotheses[k - 1], d, r.final_u);
      CHECK(std::abs(err - 0.5) <= 1e-9);
      ++checked;
    }
  }
  CHECK(checked == 100);
}

TEST_CASE("AdaBoost trace length and finite weights") {
  const auto d = small_twonorm(200, 1);
  engine::AdaBoostConfig cfg;
  cfg.rounds = 30;
  cfg.learner.max_depth = 2;
  const auto r = engine::adaboost_train(cfg, d);
  CHECK(r.trace.size() <= 30);
  for (double a : r.model.weights) CHECK(std::isfinite(a));
}

TEST_CASE("predict: constant model, zero weights and the worked example") {
  const data::BinaryDataset d(3, 1, {1, 0, 0}, {1, 1, -1});
  engine::EnsembleModel m;
  m.hypotheses = {tree::Hypothesis::constant(1.0, VotingMode::hard, 1)};
  m.weights = {1.0};
  CHECK(engine::predict(m, d) == std::vector<int>{1, 1, 1});
  m.weights = {0.0};
  CHECK(engine::predict(m, d) == std::vector<int>{1, 1, 1});

  // h1 = (+1,+1,+1), h2 = (+1,-1,-1) with equal weight: margins (1, 0, 0).
  m.hypotheses.push_back(stump(0, -1.0, 1.0, 1));
  m.weights = {0.5, 0.5};
  CHECK(engine::predict(m, d) == std::vector<int>{1, 1, 1});
  CHECK(engine::decision_values(m, d) == std::vector<double>{1.0, 0.0, 0.0});

  const data::BinaryDataset wide(1, 2, {0, 0}, {1});
  CHECK_THROWS_AS(engine::predict(m, wide), ValidationError);
}

TEST_CASE("model JSON and file round trip") {
  const auto d = small_twonorm(200, 3);
  auto cfg = config_for(Formulation::nm_boost, 8);
  cfg.learner.max_depth = 2;
  cfg.learner.mode = VotingMode::confidence;
  const auto r = engine::train(cfg, d);
  const auto back = engine::model_from_json(nlohmann::json::parse(engine::to_json(r.model).dump()));
  CHECK(back.weights == r.model.weights);
  CHECK(back.hypotheses == r.model.hypotheses);
  CHECK(back.mode == r.model.mode);
  CHECK(back.metadata.termination == r.model.metadata.termination);
  CHECK(engine::decision_values(back, d) == engine::decision_values(r.model, d));

  const auto path = std::filesystem::temp_directory_path() / "tcboost_engine_model.json";
  engine::save_model(r.model, path.string());
  CHECK(engine::load_model(path.string()).weights == r.model.weights);
  CHECK_THROWS_AS(engine::model_from_json(nlohmann::json{{"weights", {1.0}}}), ValidationError);

  engine::EnsembleModel bad = r.model;
  bad.weights.pop_back();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("trace CSV has the fixed header and empty fields for NaN") {
  const auto d = small_twonorm(100, 4);
  engine::AdaBoostConfig cfg;
  cfg.rounds = 3;
  const auto r = engine::adaboost_train(cfg, d);
  std::ostringstream out;
  engine::write_trace_csv(r.trace, out);
  std::istringstream in(out.str());
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == engine::kTraceHeader);
  CHECK(first.rfind("1,", 0) == 0);
  CHECK(first.find(",,") != std::string::npos);
}

TEST_CASE("reweight: a perfect column in the pool") {
  const auto d = perfect_feature(6, 30, 4);
  std::vector<tree::Hypothesis> pool;
  for (std::size_t f = 0; f < 4; ++f) pool.push_back(stump(f, -1.0, 1.0, 4));
  std::vector<double> ada_w = {0.25, 0.25, 0.25, 0.25};

  master::FormulationParams p;
  p.formulation = Formulation::nm_boost;
  p.c = 0.1;
  const auto m = engine::reweight(pool, d, p);
  CHECK(metrics::accuracy(m, d) == 1.0);
  CHECK(metrics::sparsity(m) <= pool.size());

  master::ColumnMatrix cols(d.size());
  for (const auto& h : pool) cols.append(tree::predict_matrix(h, d));
  const auto dm = oracle::signed_matrix(cols.matrix(), d.y());
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m.weights.data(), 4);
  const Eigen::VectorXd w0 = Eigen::Map<const Eigen::VectorXd>(ada_w.data(), 4);
  CHECK(substituted_objective(p.formulation, dm, w, p.c) >=
        substituted_objective(p.formulation, dm, w0, p.c) - 1e-9);
  CHECK(substituted_objective(p.formulation, dm, w, p.c) ==
        doctest::Approx(0.1 * static_cast<double>(d.size())).epsilon(1e-7));
}

TEST_CASE("reweight on a fixed six-column pool matches the oracles") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = oracle::random_binary(900 + seed, 8, 3);
    std::vector<tree::Hypothesis> pool;
    for (std::size_t f = 0; f < 3; ++f) {
      pool.push_back(stump(f, -1.0, 1.0, 3));
      pool.push_back(stump(f, 1.0, -1.0, 3));
    }
    master::ColumnMatrix cols(d.size());
    for (const auto& h : pool) cols.append(tree::predict_matrix(h, d));
    const Eigen::MatrixXd hm = cols.matrix();
    const auto dm = oracle::signed_matrix(hm, d.y());
    for (auto f : {Formulation::hard_margin, Formulation::lp_boost, Formulation::nm_boost}) {
      master::FormulationParams p;
      p.formulation = f;
      p.c = f == Formulation::nm_boost ? 0.2 : 0.5;
      const auto m = engine::reweight(pool, d, p);
      CHECK(m.weights.size() == 6);
      const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(m.weights.data(), 6);
      const double got = substituted_objective(f, dm, w, p.c);
      double ref = 0.0;
      if (f == Formulation::hard_margin) ref = oracle::hard_margin(hm, d.y());
      if (f == Formulation::lp_boost) ref = oracle::lp_boost(hm, d.y(), p.c);
      if (f == Formulation::nm_boost) ref = oracle::nm_boost(hm, d.y(), p.c);
      CHECK(got == doctest::Approx(ref).epsilon(1e-6).scale(1.0));
    }
  }
  CHECK_THROWS_AS(engine::reweight({}, oracle::random_binary(1, 4, 2), {}), ValidationError);
}

TEST_CASE("termination names round trip") {
  for (auto t : {Termination::certified, Termination::iteration_limit, Termination::time_limit,
                 Termination::stalled, Termination::zero_error, Termination::weak_learner_failed})
    CHECK(engine::termination_from_string(engine::to_string(t)) == t);
  CHECK_THROWS_AS(engine::termination_from_string("done"), ValidationError);
}
