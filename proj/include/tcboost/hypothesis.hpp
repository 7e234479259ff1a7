#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcboost/dataset.hpp"
#include "tcboost/kernels.hpp"

namespace tcboost::tree {

enum class VotingMode { hard, confidence };

std::string to_string(VotingMode mode);
VotingMode voting_mode_from_string(const std::string& s);

/// A binary decision tree over binary features. Leaves hold a vote in
/// {-1,+1} (hard) or a confidence score in [-1,1].
class Hypothesis {
public:
  Hypothesis() = default;
  Hypothesis(std::vector<TreeNode> nodes, VotingMode mode, std::size_t features);

  static Hypothesis constant(double score, VotingMode mode, std::size_t features);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  VotingMode mode() const { return mode_; }
  std::size_t features() const { return features_; }
  int depth() const;

  double operator()(const data::BinaryDataset& data, std::size_t i) const;

  bool operator==(const Hypothesis&) const = default;

private:
  std::vector<TreeNode> nodes_;
  VotingMode mode_ = VotingMode::hard;
  std::size_t features_ = 0;
};

/// Votes of `h` on every example of `data`.
std::vector<double> predict_matrix(const Hypothesis& h, const data::BinaryDataset& data,
                                   Exec exec = Exec::parallel);

/// Greedy top-down growth minimising u-weighted Gini impurity.
Hypothesis train_tree_greedy(const data::BinaryDataset& data, std::span<const double> u,
                             int max_depth, VotingMode mode, Exec exec = Exec::parallel);

/// Exhaustive search over (feature, leaf labelling) stumps for maximum
/// u-weighted accuracy.
Hypothesis train_stump_optimal(const data::BinaryDataset& data, std::span<const double> u,
                               VotingMode mode = VotingMode::hard);

/// Exhaustive depth-2 search (root feature x child features x leaf labels).
Hypothesis train_tree_optimal_d2(const data::BinaryDataset& data, std::span<const double> u,
                                 VotingMode mode = VotingMode::hard);

inline constexpr std::size_t kOptimalDepth2MaxFeatures = 256;

enum class LearnerKind { greedy, optimal_stump, optimal_d2 };

std::string to_string(LearnerKind kind);
LearnerKind learner_from_string(const std::string& s);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::greedy;
  int max_depth = 1;
  VotingMode mode = VotingMode::hard;
};

Hypothesis fit(const LearnerSpec& spec, const data::BinaryDataset& data,
               std::span<const double> u);

/// Sum over misclassified examples of u_i, divided by sum of u.
double weighted_error(const Hypothesis& h, const data::BinaryDataset& data,
                      std::span<const double> u);

nlohmann::json to_json(const Hypothesis& h);
Hypothesis hypothesis_from_json(const nlohmann::json& j);

}  // namespace tcboost::tree
