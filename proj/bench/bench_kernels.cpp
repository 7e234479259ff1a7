// Serial reference vs OpenMP kernels on a desk-scale dataset.
//
//   bench_kernels [examples] [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "tcboost/dataset.hpp"
#include "tcboost/hypothesis.hpp"
#include "tcboost/kernels.hpp"
#include "tcboost/master.hpp"

using namespace tcboost;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  std::printf("%-22s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx\n", name, 1e3 * serial,
              1e3 * parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
  std::printf("examples %zu, threads %d, best of %d\n", n, omp_get_max_threads(), repeats);

  const auto data = data::to_binary(data::gen_twonorm(n, 7), 4);
  std::vector<double> u(data.size());
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  for (auto& v : u) v = unif(rng);
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> pos(data.features()), tot(data.features());

  auto stats = [&](Exec e) {
    return best_of(repeats, [&] { kernels::split_statistics(data, rows, u, pos, tot, e); });
  };
  report("split_statistics", stats(Exec::serial), stats(Exec::parallel));

  const auto tree = tree::train_tree_greedy(data, u, 3, tree::VotingMode::hard, Exec::serial);
  std::vector<double> out(data.size());
  auto eval = [&](Exec e) {
    return best_of(repeats, [&] { kernels::evaluate_tree(tree.nodes(), data, out, e); });
  };
  report("evaluate_tree", eval(Exec::serial), eval(Exec::parallel));

  auto grow = [&](Exec e) {
    return best_of(repeats, [&] { tree::train_tree_greedy(data, u, 3, tree::VotingMode::hard, e); });
  };
  report("train_tree_greedy d3", grow(Exec::serial), grow(Exec::parallel));

  // One NM-Boost master over 50 stumps on a 2000-example slice.
  const auto small = data::to_binary(data::gen_twonorm(2000, 11), 4);
  master::ColumnMatrix h(small.size());
  std::vector<double> w(small.size(), 1.0);
  for (int t = 0; t < 50; ++t) {
    const auto stump = tree::train_tree_greedy(small, w, 1, tree::VotingMode::hard, Exec::serial);
    const auto votes = tree::predict_matrix(stump, small, Exec::serial);
    if (h.find(votes) < 0) h.append(votes);
    for (std::size_t i = 0; i < small.size(); ++i)
      if (votes[i] != small.label(i)) w[i] *= 1.5;
  }
  master::FormulationParams params;
  params.formulation = master::Formulation::nm_boost;
  params.c = 0.05;
  auto solve = [&](Exec e) {
    return best_of(repeats, [&] {
      master::MasterInput in{h, small.y(), {}};
      in.options.exec = e;
      master::solve_master(params, in);
    });
  };
  report("nm_boost master (50)", solve(Exec::serial), solve(Exec::parallel));
  return 0;
}
