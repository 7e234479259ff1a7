#include "tcboost/kernels.hpp"

#include <algorithm>

#include "tcboost/error.hpp"

namespace tcboost::kernels {

void split_statistics(const data::BinaryDataset& data, std::span<const std::size_t> rows,
                      std::span<const double> u, std::span<double> pos_one,
                      std::span<double> tot_one, Exec exec) {
  const std::size_t d = data.features();
  if (pos_one.size() != d || tot_one.size() != d || u.size() != data.size())
    throw ValidationError("split_statistics: size mismatch");
  const auto& y = data.y();

  if (exec == Exec::serial) {
    std::fill(pos_one.begin(), pos_one.end(), 0.0);
    std::fill(tot_one.begin(), tot_one.end(), 0.0);
    for (std::size_t i : rows) {
      const double w = u[i];
      for (std::size_t f = 0; f < d; ++f) {
        if (data.at(i, f)) {
          tot_one[f] += w;
          if (y[i] > 0) pos_one[f] += w;
        }
      }
    }
    return;
  }

  const long nd = static_cast<long>(d);
#pragma omp parallel for schedule(static)
  for (long f = 0; f < nd; ++f) {
    const std::uint8_t* col = data.column(static_cast<std::size_t>(f));
    double pos = 0.0, tot = 0.0;
    for (std::size_t i : rows) {
      if (col[i]) {
        tot += u[i];
        if (y[i] > 0) pos += u[i];
      }
    }
    pos_one[f] = pos;
    tot_one[f] = tot;
  }
}

namespace {

inline double walk(std::span<const TreeNode> nodes, const data::BinaryDataset& data,
                   std::size_t i) {
  int k = 0;
  while (!nodes[k].is_leaf())
    k = data.at(i, static_cast<std::size_t>(nodes[k].feature)) ? nodes[k].one : nodes[k].zero;
  return nodes[k].score;
}

}  // namespace

void evaluate_tree(std::span<const TreeNode> nodes, const data::BinaryDataset& data,
                   std::span<double> out, Exec exec) {
  if (out.size() != data.size()) throw ValidationError("evaluate_tree: output size mismatch");
  if (nodes.empty()) throw ValidationError("evaluate_tree: empty tree");
  const long m = static_cast<long>(data.size());
  if (exec == Exec::serial) {
    for (long i = 0; i < m; ++i) out[i] = walk(nodes, data, static_cast<std::size_t>(i));
    return;
  }
#pragma omp parallel for schedule(static)
  for (long i = 0; i < m; ++i) out[i] = walk(nodes, data, static_cast<std::size_t>(i));
}

}  // namespace tcboost::kernels
