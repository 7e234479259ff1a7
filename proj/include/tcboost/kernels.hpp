#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference and an
// OpenMP version selected by `Exec`; tests check that both agree.

#include <cstddef>
#include <span>
#include <vector>

#include "tcboost/dataset.hpp"

namespace tcboost {

enum class Exec { serial, parallel };

struct TreeNode {
  int feature = -1;  // < 0 marks a leaf
  int zero = -1;     // child taken when X[i, feature] == 0
  int one = -1;      // child taken when X[i, feature] == 1
  double score = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

namespace kernels {

/// Weighted class mass on the X==1 side of every feature, restricted to `rows`:
///   pos_one[f] = sum of u_i over rows with X[i,f]=1 and y_i=+1
///   tot_one[f] = sum of u_i over rows with X[i,f]=1
void split_statistics(const data::BinaryDataset& data, std::span<const std::size_t> rows,
                      std::span<const double> u, std::span<double> pos_one,
                      std::span<double> tot_one, Exec exec = Exec::parallel);

/// out[i] = score of the leaf reached by example i.
void evaluate_tree(std::span<const TreeNode> nodes, const data::BinaryDataset& data,
                   std::span<double> out, Exec exec = Exec::parallel);

}  // namespace kernels
}  // namespace tcboost
