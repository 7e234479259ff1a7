#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tcboost/error.hpp"
#include "tcboost/hypothesis.hpp"
#include "tcboost/master.hpp"

using namespace tcboost;
using tree::VotingMode;

namespace {

// f1 = (1,1,0,0), f2 = (1,0,1,0), y = (+,+,-,-)
data::BinaryDataset four() { return data::BinaryDataset(4, 2, {1, 1, 0, 0, 1, 0, 1, 0}, {1, 1, -1, -1}); }

double weighted_accuracy(const tree::Hypothesis& h, const data::BinaryDataset& d,
                         std::span<const double> u) {
  return 1.0 - tree::weighted_error(h, d, u);
}

std::vector<double> random_weights(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(m);
  for (auto& v : u) v = unif(rng);
  return u;
}

}  // namespace

TEST_CASE("greedy stump picks the perfectly predictive feature") {
  const auto d = four();
  const std::vector<double> u(4, 0.25);
  const auto h = tree::train_tree_greedy(d, u, 1, VotingMode::hard);
  REQUIRE(h.nodes().size() == 3);
  CHECK(h.nodes()[0].feature == 0);
  CHECK(tree::weighted_error(h, d, u) == 0.0);
  CHECK(tree::predict_matrix(h, d) == std::vector<double>{1, 1, -1, -1});
}

TEST_CASE("greedy stump under mass on the negatives reaches zero weighted error") {
  const auto d = four();
  const std::vector<double> u = {0, 0, 0.5, 0.5};
  const auto h = tree::train_tree_greedy(d, u, 1, VotingMode::hard);
  CHECK(tree::weighted_error(h, d, u) == 0.0);
  CHECK(oracle::best_stump_accuracy(d, u) == doctest::Approx(1.0));
}

TEST_CASE("pure data gives a constant +1 leaf") {
  const data::BinaryDataset d(3, 2, {1, 0, 1, 0, 0, 1}, {1, 1, 1});
  const std::vector<double> u(3, 1.0);
  const auto h = tree::train_tree_greedy(d, u, 3, VotingMode::hard);
  CHECK(h.depth() == 0);
  REQUIRE(h.nodes().size() == 1);
  CHECK(h.nodes()[0].score == 1.0);
}

TEST_CASE("tie at a leaf votes +1") {
  const data::BinaryDataset d(2, 1, {1, 1}, {1, -1});
  const std::vector<double> u(2, 0.5);
  const auto h = tree::train_tree_greedy(d, u, 1, VotingMode::hard);
  for (double v : tree::predict_matrix(h, d)) CHECK(v == 1.0);
}

TEST_CASE("trainers reject all-zero weights and bad lengths") {
  const auto d = four();
  const std::vector<double> zero(4, 0.0);
  CHECK_THROWS_AS(tree::train_tree_greedy(d, zero, 1, VotingMode::hard), ValidationError);
  CHECK_THROWS_AS(tree::train_stump_optimal(d, zero), ValidationError);
  const std::vector<double> short_u(3, 1.0);
  CHECK_THROWS_AS(tree::train_tree_greedy(d, short_u, 1, VotingMode::hard), ValidationError);
}

TEST_CASE("optimal stump on the four-example data") {
  const auto d = four();
  const std::vector<double> u(4, 0.25);
  const auto h = tree::train_stump_optimal(d, u);
  CHECK(h.nodes()[0].feature == 0);
  CHECK(weighted_accuracy(h, d, u) == 1.0);
}

TEST_CASE("optimal stump matches the exhaustive oracle on random 8x5 data") {
  std::mt19937_64 rng(21);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto d = oracle::random_binary(s, 8, 5);
    const auto u = random_weights(rng, 8);
    const auto h = tree::train_stump_optimal(d, u);
    CHECK(weighted_accuracy(h, d, u) == doctest::Approx(oracle::best_stump_accuracy(d, u)).epsilon(1e-12));
  }
}

TEST_CASE("optimal stump respects a single heavy example") {
  std::mt19937_64 rng(2);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto d = oracle::random_binary(100 + s, 8, 5);
    std::vector<double> u(8, 0.0);
    const std::size_t k = s % 8;
    u[k] = 1.0;
    const auto h = tree::train_stump_optimal(d, u);
    CHECK(h(d, k) == d.label(k));
  }
}

TEST_CASE("depth-2 optimal tree separates XOR") {
  // y = f1 xor f2
  const data::BinaryDataset d(4, 2, {0, 0, 1, 1, 0, 1, 0, 1}, {-1, 1, 1, -1});
  const std::vector<double> u(4, 0.25);
  CHECK(weighted_accuracy(tree::train_tree_optimal_d2(d, u), d, u) == 1.0);
  CHECK(weighted_accuracy(tree::train_stump_optimal(d, u), d, u) < 1.0);
}

TEST_CASE("depth-2 optimal tree matches the oracle and dominates the optimal stump") {
  std::mt19937_64 rng(8);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto d = oracle::random_binary(500 + s, 10, 4);
    const auto u = random_weights(rng, 10);
    const auto h2 = tree::train_tree_optimal_d2(d, u);
    const double a2 = weighted_accuracy(h2, d, u);
    CHECK(a2 == doctest::Approx(oracle::best_depth2_accuracy(d, u)).epsilon(1e-12));
    CHECK(a2 + 1e-12 >= weighted_accuracy(tree::train_stump_optimal(d, u), d, u));
    CHECK(h2.depth() <= 2);
  }
}

TEST_CASE("depth-2 search refuses wide data") {
  const auto d = oracle::random_binary(1, 4, tree::kOptimalDepth2MaxFeatures + 1);
  const std::vector<double> u(4, 1.0);
  CHECK_THROWS_WITH_AS(tree::train_tree_optimal_d2(d, u), doctest::Contains("greedy"),
                       ValidationError);
}

TEST_CASE("predict_matrix on constants, stumps and confidence leaves") {
  const auto d = four();
  const auto one = tree::Hypothesis::constant(1.0, VotingMode::hard, 2);
  CHECK(tree::predict_matrix(one, d) == std::vector<double>(4, 1.0));

  // Leaf reached by X[.,f2]=1 holds 3 positives and 1 negative under uniform u.
  const data::BinaryDataset c(5, 1, {1, 1, 1, 1, 0}, {1, 1, 1, -1, -1});
  const std::vector<double> u(5, 1.0);
  const auto h = tree::train_tree_greedy(c, u, 1, VotingMode::confidence);
  CHECK(h(c, 0) == doctest::Approx(0.5));
  CHECK(h(c, 4) == doctest::Approx(-1.0));

  const data::BinaryDataset wide(1, 3, {0, 0, 0}, {1});
  CHECK_THROWS_AS(tree::predict_matrix(one, wide), ValidationError);
}

TEST_CASE("greedy training is invariant to positive rescaling of u") {
  std::mt19937_64 rng(33);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto d = oracle::random_binary(700 + s, 40, 6);
    const auto u = random_weights(rng, 40);
    for (int depth : {1, 2, 3}) {
      const auto base = tree::train_tree_greedy(d, u, depth, VotingMode::hard);
      for (double c : {1e-3, 7.0, 1e5}) {
        std::vector<double> scaled(u);
        for (auto& v : scaled) v *= c;
        const auto h = tree::train_tree_greedy(d, scaled, depth, VotingMode::hard);
        REQUIRE(h.nodes().size() == base.nodes().size());
        for (std::size_t k = 0; k < h.nodes().size(); ++k) {
          CHECK(h.nodes()[k].feature == base.nodes()[k].feature);
          CHECK(h.nodes()[k].score == base.nodes()[k].score);
        }
      }
    }
  }
}

TEST_CASE("edge equals total weight times one minus twice the error") {
  std::mt19937_64 rng(4);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto d = oracle::random_binary(900 + s, 25, 5);
    const auto u = random_weights(rng, 25);
    const auto h = tree::train_tree_greedy(d, u, 2, VotingMode::hard);
    double total = 0.0;
    for (double v : u) total += v;
    const double edge = master::price(u, h, d);
    CHECK(edge == doctest::Approx(total * (1.0 - 2.0 * tree::weighted_error(h, d, u))));
  }
}

TEST_CASE("optimal stump accuracy dominates the greedy stump") {
  std::mt19937_64 rng(6);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto d = oracle::random_binary(1200 + s, 20, 6);
    const auto u = random_weights(rng, 20);
    const double greedy = weighted_accuracy(tree::train_tree_greedy(d, u, 1, VotingMode::hard), d, u);
    CHECK(weighted_accuracy(tree::train_stump_optimal(d, u), d, u) + 1e-12 >= greedy);
  }
}

TEST_CASE("votes stay in range and depth stays bounded") {
  std::mt19937_64 rng(9);
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto d = oracle::random_binary(1500 + s, 30, 6);
    const auto u = random_weights(rng, 30);
    for (int depth : {0, 1, 2, 4}) {
      const auto hc = tree::train_tree_greedy(d, u, depth, VotingMode::confidence);
      const auto hh = tree::train_tree_greedy(d, u, depth, VotingMode::hard);
      CHECK(hc.depth() <= depth);
      CHECK(hh.depth() <= depth);
      for (double v : tree::predict_matrix(hc, d)) CHECK(std::abs(v) <= 1.0);
      for (double v : tree::predict_matrix(hh, d)) CHECK(std::abs(v) == 1.0);
    }
  }
}

TEST_CASE("serial and parallel greedy training agree") {
  std::mt19937_64 rng(10);
  const auto d = oracle::random_binary(77, 500, 30);
  const auto u = random_weights(rng, 500);
  const auto a = tree::train_tree_greedy(d, u, 4, VotingMode::confidence, Exec::serial);
  const auto b = tree::train_tree_greedy(d, u, 4, VotingMode::confidence, Exec::parallel);
  CHECK(a == b);
}

TEST_CASE("hypothesis JSON round trip is exact") {
  std::mt19937_64 rng(12);
  const auto d = oracle::random_binary(3, 60, 8);
  const auto u = random_weights(rng, 60);
  for (auto mode : {VotingMode::hard, VotingMode::confidence}) {
    const auto h = tree::train_tree_greedy(d, u, 3, mode);
    const auto back = tree::hypothesis_from_json(nlohmann::json::parse(tree::to_json(h).dump()));
    CHECK(back == h);
  }
  CHECK_THROWS_AS(tree::hypothesis_from_json(nlohmann::json::object()), ValidationError);
}

TEST_CASE("learner dispatch and names") {
  const auto d = four();
  const std::vector<double> u(4, 0.25);
  for (auto kind : {tree::LearnerKind::greedy, tree::LearnerKind::optimal_stump,
                    tree::LearnerKind::optimal_d2}) {
    CHECK(tree::learner_from_string(tree::to_string(kind)) == kind);
    const auto h = tree::fit({kind, 1, VotingMode::hard}, d, u);
    CHECK(tree::weighted_error(h, d, u) == 0.0);
  }
  CHECK_THROWS_WITH_AS(tree::learner_from_string("forest"), doctest::Contains("optimal_d2"),
                       ValidationError);
}
