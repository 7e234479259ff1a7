#include "tcboost/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tcboost/error.hpp"

namespace tcboost::tree {

namespace {

// Relative tolerance for comparing weighted sums; keeps decisions stable
// under rounding from positive rescaling of u.
constexpr double kTieTol = 1e-12;

std::vector<double> normalized(const data::BinaryDataset& data, std::span<const double> u) {
  if (data.size() == 0) throw ValidationError("tree training: empty data");
  if (u.size() != data.size()) throw ValidationError("tree training: |u| != M");
  double total = 0.0;
  for (double v : u) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("tree training: sample weights must be finite and nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw ValidationError("tree training: sample weights are all zero");
  std::vector<double> out(u.begin(), u.end());
  for (double& v : out) v /= total;
  return out;
}

double leaf_score(double w_pos, double w_total, double fallback_p, VotingMode mode) {
  const double p = w_total > 0.0 ? w_pos / w_total : fallback_p;
  if (mode == VotingMode::confidence) return std::clamp(2.0 * p - 1.0, -1.0, 1.0);
  return p >= 0.5 - kTieTol ? 1.0 : -1.0;
}

double gini_mass(double w_pos, double w_total) {
  if (w_total <= 0.0) return 0.0;
  return 2.0 * w_pos * (w_total - w_pos) / w_total;
}

struct Mass {
  double pos = 0.0;
  double total = 0.0;
};

Mass mass_of(const data::BinaryDataset& data, std::span<const double> u,
             const std::vector<std::size_t>& rows) {
  Mass m;
  for (std::size_t i : rows) {
    m.total += u[i];
    if (data.label(i) > 0) m.pos += u[i];
  }
  return m;
}

void partition(const data::BinaryDataset& data, const std::vector<std::size_t>& rows, int feature,
               std::vector<std::size_t>& zero, std::vector<std::size_t>& one) {
  const std::uint8_t* col = data.column(static_cast<std::size_t>(feature));
  for (std::size_t i : rows) (col[i] ? one : zero).push_back(i);
}

class GreedyBuilder {
public:
  GreedyBuilder(const data::BinaryDataset& data, std::span<const double> u, int max_depth,
                VotingMode mode, Exec exec)
      : data_(data), u_(u), max_depth_(max_depth), mode_(mode), exec_(exec),
        pos_(data.features()), tot_(data.features()) {}

  std::vector<TreeNode> build() {
    std::vector<std::size_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(rows, 0, 0.5);
    return std::move(nodes_);
  }

private:
  int grow(const std::vector<std::size_t>& rows, int depth, double parent_p) {
    const Mass m = mass_of(data_, u_, rows);
    const double p = m.total > 0.0 ? m.pos / m.total : parent_p;
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{-1, -1, -1, leaf_score(m.pos, m.total, parent_p, mode_)});

    const double tol = kTieTol * m.total;
    const bool pure = m.pos <= tol || m.total - m.pos <= tol;
    if (depth >= max_depth_ || m.total <= 0.0 || pure) return index;

    kernels::split_statistics(data_, rows, u_, pos_, tot_, exec_);
    double best = gini_mass(m.pos, m.total);
    int best_feature = -1;
    for (std::size_t f = 0; f < data_.features(); ++f) {
      const double w1 = tot_[f], p1 = pos_[f];
      const double w0 = m.total - w1, p0 = m.pos - p1;
      if (w1 <= tol || w0 <= tol) continue;
      const double child = gini_mass(p1, w1) + gini_mass(p0, w0);
      if (child < best - tol) {
        best = child;
        best_feature = static_cast<int>(f);
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> zero, one;
    partition(data_, rows, best_feature, zero, one);
    nodes_[index].feature = best_feature;
    nodes_[index].score = 0.0;
    const int z = grow(zero, depth + 1, p);
    nodes_[index].zero = z;
    const int o = grow(one, depth + 1, p);
    nodes_[index].one = o;
    return index;
  }

  const data::BinaryDataset& data_;
  std::span<const double> u_;
  int max_depth_;
  VotingMode mode_;
  Exec exec_;
  std::vector<double> pos_, tot_;
  std::vector<TreeNode> nodes_;
};

struct Leaf {
  double label;  // +1 or -1
  double accuracy;
};

Leaf best_leaf(double pos, double total) {
  const double neg = total - pos;
  return pos >= neg - kTieTol * total ? Leaf{1.0, pos} : Leaf{-1.0, neg};
}

// Best subtree of depth <= 1 on a branch: either a leaf or a stump.
struct BranchChoice {
  int feature = -1;
  double accuracy = 0.0;
  Mass zero, one;  // masses of the stump's children when feature >= 0
};

BranchChoice best_branch(const data::BinaryDataset& data, std::span<const double> u,
                         const std::vector<std::size_t>& rows, const Mass& m,
                         std::vector<double>& pos, std::vector<double>& tot) {
  BranchChoice best;
  best.accuracy = best_leaf(m.pos, m.total).accuracy;
  if (rows.empty()) return best;
  kernels::split_statistics(data, rows, u, pos, tot, Exec::serial);
  const double tol = kTieTol;
  for (std::size_t g = 0; g < data.features(); ++g) {
    Mass one{pos[g], tot[g]};
    Mass zero{m.pos - pos[g], m.total - tot[g]};
    const double acc =
        best_leaf(one.pos, one.total).accuracy + best_leaf(zero.pos, zero.total).accuracy;
    if (acc > best.accuracy + tol) {
      best = BranchChoice{static_cast<int>(g), acc, zero, one};
    }
  }
  return best;
}

double score_for(const Mass& m, double fallback_p, VotingMode mode) {
  if (mode == VotingMode::confidence) return leaf_score(m.pos, m.total, fallback_p, mode);
  if (m.total <= 0.0) return fallback_p >= 0.5 - kTieTol ? 1.0 : -1.0;
  return best_leaf(m.pos, m.total).label;
}

}  // namespace

std::string to_string(VotingMode mode) { return mode == VotingMode::hard ? "hard" : "confidence"; }

VotingMode voting_mode_from_string(const std::string& s) {
  if (s == "hard") return VotingMode::hard;
  if (s == "confidence") return VotingMode::confidence;
  throw ValidationError("unknown voting mode '" + s + "' (valid: hard, confidence)");
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::greedy: return "greedy";
    case LearnerKind::optimal_stump: return "optimal_stump";
    case LearnerKind::optimal_d2: return "optimal_d2";
  }
  return "greedy";
}

LearnerKind learner_from_string(const std::string& s) {
  if (s == "greedy") return LearnerKind::greedy;
  if (s == "optimal_stump") return LearnerKind::optimal_stump;
  if (s == "optimal_d2") return LearnerKind::optimal_d2;
  throw ValidationError("unknown learner '" + s + "' (valid: greedy, optimal_stump, optimal_d2)");
}

Hypothesis::Hypothesis(std::vector<TreeNode> nodes, VotingMode mode, std::size_t features)
    : nodes_(std::move(nodes)), mode_(mode), features_(features) {
  if (nodes_.empty()) throw ValidationError("hypothesis: empty tree");
  const int n = static_cast<int>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) {
      if (!(std::abs(node.score) <= 1.0))
        throw ValidationError("hypothesis: leaf score outside [-1,1]");
      if (mode_ == VotingMode::hard && std::abs(node.score) != 1.0)
        throw ValidationError("hypothesis: hard leaf score must be +-1");
    } else {
      if (static_cast<std::size_t>(node.feature) >= features_ || node.zero <= 0 ||
          node.one <= 0 || node.zero >= n || node.one >= n)
        throw ValidationError("hypothesis: malformed internal node");
    }
  }
}

Hypothesis Hypothesis::constant(double score, VotingMode mode, std::size_t features) {
  return Hypothesis({TreeNode{-1, -1, -1, score}}, mode, features);
}

int Hypothesis::depth() const {
  // Children always follow their parent in the node array.
  std::vector<int> level(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    deepest = std::max(deepest, level[k]);
    if (!nodes_[k].is_leaf()) {
      level[nodes_[k].zero] = level[k] + 1;
      level[nodes_[k].one] = level[k] + 1;
    }
  }
  return deepest;
}

double Hypothesis::operator()(const data::BinaryDataset& data, std::size_t i) const {
  int k = 0;
  while (!nodes_[k].is_leaf())
    k = data.at(i, static_cast<std::size_t>(nodes_[k].feature)) ? nodes_[k].one : nodes_[k].zero;
  return nodes_[k].score;
}

std::vector<double> predict_matrix(const Hypothesis& h, const data::BinaryDataset& data,
                                   Exec exec) {
  if (h.features() != data.features())
    throw ValidationError("predict: hypothesis expects " + std::to_string(h.features()) +
                          " features, data has " + std::to_string(data.features()));
  std::vector<double> out(data.size());
  kernels::evaluate_tree(h.nodes(), data, out, exec);
  return out;
}

Hypothesis train_tree_greedy(const data::BinaryDataset& data, std::span<const double> u,
                             int max_depth, VotingMode mode, Exec exec) {
  if (max_depth < 0) throw ValidationError("tree training: max_depth must be >= 0");
  auto un = normalized(data, u);
  GreedyBuilder builder(data, un, max_depth, mode, exec);
  return Hypothesis(builder.build(), mode, data.features());
}

Hypothesis train_stump_optimal(const data::BinaryDataset& data, std::span<const double> u,
                               VotingMode mode) {
  auto un = normalized(data, u);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const Mass m = mass_of(data, un, rows);
  std::vector<double> pos(data.features()), tot(data.features());
  kernels::split_statistics(data, rows, un, pos, tot);

  double best = -1.0;
  int best_f = 0;
  double best_zero = 1.0, best_one = 1.0;
  for (std::size_t f = 0; f < data.features(); ++f) {
    const double p1 = pos[f], n1 = tot[f] - pos[f];
    const double p0 = m.pos - pos[f], n0 = (m.total - m.pos) - n1;
    // (zero leaf, one leaf) labellings, +1 on the zero side first.
    const double acc[4] = {p0 + p1, p0 + n1, n0 + p1, n0 + n1};
    const double lz[4] = {1, 1, -1, -1};
    const double lo[4] = {1, -1, 1, -1};
    for (int k = 0; k < 4; ++k) {
      if (acc[k] > best + kTieTol) {
        best = acc[k];
        best_f = static_cast<int>(f);
        best_zero = lz[k];
        best_one = lo[k];
      }
    }
  }
  if (mode == VotingMode::confidence) {
    const double p_root = m.pos / m.total;
    const Mass one{pos[best_f], tot[best_f]};
    const Mass zero{m.pos - one.pos, m.total - one.total};
    best_zero = leaf_score(zero.pos, zero.total, p_root, mode);
    best_one = leaf_score(one.pos, one.total, p_root, mode);
  }
  std::vector<TreeNode> nodes{TreeNode{best_f, 1, 2, 0.0}, TreeNode{-1, -1, -1, best_zero},
                              TreeNode{-1, -1, -1, best_one}};
  return Hypothesis(std::move(nodes), mode, data.features());
}

Hypothesis train_tree_optimal_d2(const data::BinaryDataset& data, std::span<const double> u,
                                 VotingMode mode) {
  if (data.features() > kOptimalDepth2MaxFeatures)
    throw ValidationError("optimal depth-2 search supports at most " +
                          std::to_string(kOptimalDepth2MaxFeatures) +
                          " features; use the greedy trainer for wider data");
  auto un = normalized(data, u);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const Mass m = mass_of(data, un, rows);
  const double p_root = m.pos / m.total;
  std::vector<double> pos(data.features()), tot(data.features());

  double best = best_leaf(m.pos, m.total).accuracy;
  int best_root = -1;
  BranchChoice best_zero, best_one;
  Mass root_zero, root_one;
  std::vector<std::size_t> zero, one;
  for (std::size_t f = 0; f < data.features(); ++f) {
    zero.clear();
    one.clear();
    partition(data, rows, static_cast<int>(f), zero, one);
    const Mass mz = mass_of(data, un, zero), mo = mass_of(data, un, one);
    auto bz = best_branch(data, un, zero, mz, pos, tot);
    auto bo = best_branch(data, un, one, mo, pos, tot);
    if (bz.accuracy + bo.accuracy > best + kTieTol) {
      best = bz.accuracy + bo.accuracy;
      best_root = static_cast<int>(f);
      best_zero = bz;
      best_one = bo;
      root_zero = mz;
      root_one = mo;
    }
  }
  if (best_root < 0)
    return Hypothesis::constant(score_for(m, 0.5, mode), mode, data.features());

  std::vector<TreeNode> nodes{TreeNode{best_root, -1, -1, 0.0}};
  auto emit = [&](const BranchChoice& b, const Mass& branch) {
    const double p_branch = branch.total > 0.0 ? branch.pos / branch.total : p_root;
    const int idx = static_cast<int>(nodes.size());
    if (b.feature < 0) {
      nodes.push_back(TreeNode{-1, -1, -1, score_for(branch, p_root, mode)});
      return idx;
    }
    nodes.push_back(TreeNode{b.feature, idx + 1, idx + 2, 0.0});
    nodes.push_back(TreeNode{-1, -1, -1, score_for(b.zero, p_branch, mode)});
    nodes.push_back(TreeNode{-1, -1, -1, score_for(b.one, p_branch, mode)});
    return idx;
  };
  nodes[0].zero = emit(best_zero, root_zero);
  nodes[0].one = emit(best_one, root_one);
  return Hypothesis(std::move(nodes), mode, data.features());
}

Hypothesis fit(const LearnerSpec& spec, const data::BinaryDataset& data,
               std::span<const double> u) {
  switch (spec.kind) {
    case LearnerKind::greedy: return train_tree_greedy(data, u, spec.max_depth, spec.mode);
    case LearnerKind::optimal_stump: return train_stump_optimal(data, u, spec.mode);
    case LearnerKind::optimal_d2: return train_tree_optimal_d2(data, u, spec.mode);
  }
  throw ValidationError("unknown learner kind");
}

double weighted_error(const Hypothesis& h, const data::BinaryDataset& data,
                      std::span<const double> u) {
  if (u.size() != data.size()) throw ValidationError("weighted_error: |u| != M");
  auto votes = predict_matrix(h, data);
  double wrong = 0.0, total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int pred = votes[i] >= 0.0 ? 1 : -1;
    total += u[i];
    if (pred != data.label(i)) wrong += u[i];
  }
  if (!(total > 0.0)) throw ValidationError("weighted_error: weights sum to zero");
  return wrong / total;
}

nlohmann::json to_json(const Hypothesis& h) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : h.nodes()) {
    if (n.is_leaf())
      nodes.push_back({{"leaf_score", n.score}});
    else
      nodes.push_back({{"feature", n.feature}, {"zero", n.zero}, {"one", n.one}});
  }
  return {{"mode", to_string(h.mode())}, {"features", h.features()}, {"nodes", nodes}};
}

Hypothesis hypothesis_from_json(const nlohmann::json& j) {
  try {
    std::vector<TreeNode> nodes;
    for (const auto& n : j.at("nodes")) {
      if (n.contains("leaf_score"))
        nodes.push_back(TreeNode{-1, -1, -1, n.at("leaf_score").get<double>()});
      else
        nodes.push_back(TreeNode{n.at("feature").get<int>(), n.at("zero").get<int>(),
                                 n.at("one").get<int>(), 0.0});
    }
    return Hypothesis(std::move(nodes), voting_mode_from_string(j.at("mode").get<std::string>()),
                      j.at("features").get<std::size_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("hypothesis json: ") + e.what());
  }
}

}  // namespace tcboost::tree
