#include "kkt_system.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "tcboost/error.hpp"

namespace tcboost::solver::detail {

namespace {

constexpr Eigen::Index kDenseBelow = 48;
constexpr std::size_t kMaxThresholdCandidates = 24;
constexpr int kMaxLocal = 16;

struct DisjointSets {
  explicit DisjointSets(Eigen::Index n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  }
  Eigen::Index find(Eigen::Index a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<Eigen::Index> parent;
};

}  // namespace

KktSystem::KktSystem(const Sparse& q, const Sparse& a_eq, const Sparse& a_in, Exec exec,
                     bool dense_only)
    : exec_(exec) {
  const Eigen::Index n = q.rows(), me = a_eq.rows(), mi = a_in.rows();
  n_total_ = n + me + mi;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(q.nonZeros() + 2 * (a_eq.nonZeros() + a_in.nonZeros())));
  for (Eigen::Index k = 0; k < q.outerSize(); ++k)
    for (Sparse::InnerIterator it(q, k); it; ++it)
      if (it.row() != it.col()) trip.emplace_back(it.row(), it.col(), it.value());
  auto add_block = [&](const Sparse& m, Eigen::Index row0) {
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (Sparse::InnerIterator it(m, k); it; ++it) {
        trip.emplace_back(row0 + it.row(), it.col(), it.value());
        trip.emplace_back(it.col(), row0 + it.row(), it.value());
      }
  };
  add_block(a_eq, n);
  add_block(a_in, n + me);
  off_.resize(n_total_, n_total_);
  off_.setFromTriplets(trip.begin(), trip.end());
  off_.makeCompressed();
  diag_ = Eigen::VectorXd::Zero(n_total_);

  // Partition into border and sparse side.
  std::vector<Eigen::Index> degree(static_cast<std::size_t>(n_total_));
  for (Eigen::Index i = 0; i < n_total_; ++i)
    degree[i] = off_.outerIndexPtr()[i + 1] - off_.outerIndexPtr()[i];
  const Eigen::Index threshold =
      dense_only || n_total_ <= kDenseBelow ? 0 : choose_border_threshold(degree);
  std::vector<Eigen::Index> border_pos(static_cast<std::size_t>(n_total_), -1);
  for (Eigen::Index i = 0; i < n_total_; ++i) {
    if (degree[i] >= threshold) {
      border_pos[i] = static_cast<Eigen::Index>(border_.size());
      border_.push_back(i);
    }
  }

  DisjointSets sets(n_total_);
  for (Eigen::Index i = 0; i < n_total_; ++i) {
    if (border_pos[i] >= 0) continue;
    for (decltype(off_)::InnerIterator it(off_, i); it; ++it)
      if (border_pos[it.col()] < 0) sets.unite(i, it.col());
  }
  std::vector<Eigen::Index> comp_of_root(static_cast<std::size_t>(n_total_), -1);
  std::vector<Eigen::Index> local(static_cast<std::size_t>(n_total_), -1);
  for (Eigen::Index i = 0; i < n_total_; ++i) {
    if (border_pos[i] >= 0) continue;
    const auto root = sets.find(i);
    if (comp_of_root[root] < 0) {
      comp_of_root[root] = static_cast<Eigen::Index>(components_.size());
      components_.emplace_back();
    }
    auto& comp = components_[comp_of_root[root]];
    local[i] = static_cast<Eigen::Index>(comp.members.size());
    comp.members.push_back(i);
  }

  const auto nb = static_cast<Eigen::Index>(border_.size());
  Eigen::Index coupled_rows = 0;
  for (auto& comp : components_) {
    const auto s = static_cast<Eigen::Index>(comp.members.size());
    comp.fixed.assign(static_cast<std::size_t>(s * s), 0.0);
    comp.ldlt.resize(static_cast<int>(s));
    max_component_ = std::max(max_component_, static_cast<int>(s));
    comp.p_offset = coupled_rows;
    for (Eigen::Index a = 0; a < s; ++a) {
      bool touches_border = false;
      for (decltype(off_)::InnerIterator it(off_, comp.members[a]); it; ++it) {
        if (border_pos[it.col()] >= 0)
          touches_border = true;
        else
          comp.fixed[static_cast<std::size_t>(local[it.col()] * s + a)] += it.value();
      }
      if (touches_border) comp.coupled.push_back(static_cast<int>(a));
    }
    coupled_rows += static_cast<Eigen::Index>(comp.coupled.size());
    comp.inv_coupled.assign(comp.coupled.size() * comp.coupled.size(), 0.0);
  }

  coupling_ = Eigen::MatrixXd::Zero(coupled_rows, nb);
  for (auto& comp : components_) {
    for (std::size_t k = 0; k < comp.coupled.size(); ++k) {
      const auto row = comp.p_offset + static_cast<Eigen::Index>(k);
      for (decltype(off_)::InnerIterator it(off_, comp.members[comp.coupled[k]]); it; ++it)
        if (border_pos[it.col()] >= 0) coupling_(row, border_pos[it.col()]) += it.value();
    }
  }
  border_fixed_ = Eigen::MatrixXd::Zero(nb, nb);
  for (Eigen::Index b = 0; b < nb; ++b)
    for (decltype(off_)::InnerIterator it(off_, border_[b]); it; ++it)
      if (border_pos[it.col()] >= 0) border_fixed_(b, border_pos[it.col()]) += it.value();
  scaled_coupling_.resize(coupled_rows, nb);
}

// Rows with degree >= threshold go to the border. Each candidate threshold
// is scored by a flop estimate of one factorization; the cheapest wins.
Eigen::Index KktSystem::choose_border_threshold(const std::vector<Eigen::Index>& degree) const {
  std::vector<Eigen::Index> candidates(degree.begin(), degree.end());
  std::sort(candidates.begin(), candidates.end(), std::greater<>());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.size() > kMaxThresholdCandidates) {
    std::vector<Eigen::Index> thinned;
    for (std::size_t k = 0; k < kMaxThresholdCandidates; ++k)
      thinned.push_back(candidates[k * candidates.size() / kMaxThresholdCandidates]);
    candidates = std::move(thinned);
  }
  candidates.push_back(std::numeric_limits<Eigen::Index>::max());

  const auto n = static_cast<std::size_t>(n_total_);
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::Index best = 0;
  for (Eigen::Index threshold : candidates) {
    std::vector<char> in_border(n);
    double nb = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (degree[i] >= threshold) {
        in_border[i] = 1;
        nb += 1.0;
      }
    DisjointSets sets(n_total_);
    std::vector<char> coupled(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_border[i]) continue;
      for (decltype(off_)::InnerIterator it(off_, static_cast<Eigen::Index>(i)); it; ++it) {
        if (in_border[it.col()])
          coupled[i] = 1;
        else
          sets.unite(static_cast<Eigen::Index>(i), it.col());
      }
    }
    std::vector<double> size(n), rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_border[i]) continue;
      const auto root = static_cast<std::size_t>(sets.find(static_cast<Eigen::Index>(i)));
      size[root] += 1.0;
      rows[root] += coupled[i];
    }
    double cost = nb * nb * nb / 3.0;
    double total_rows = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (size[r] == 0.0) continue;
      cost += size[r] * size[r] * size[r] / 3.0 + rows[r] * size[r] * size[r] +
              rows[r] * rows[r] * nb;
      total_rows += rows[r];
    }
    cost += total_rows * nb * nb;
    if (cost < best_cost) {
      best_cost = cost;
      best = threshold;
    }
  }
  return best;
}

void KktSystem::SmallLdlt::resize(int size) {
  n = size;
  a.assign(static_cast<std::size_t>(size * size), 0.0);
  perm.resize(static_cast<std::size_t>(size));
}

bool KktSystem::SmallLdlt::factor() {
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(j * n + i)]; };
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(at(i, i)) > std::abs(at(p, p))) p = i;
    perm[k] = p;
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      for (int i = 0; i < n; ++i) std::swap(at(i, k), at(i, p));
    }
    const double d = at(k, k);
    if (d == 0.0 || !std::isfinite(d)) return false;
    for (int i = k + 1; i < n; ++i) at(i, k) /= d;
    for (int j = k + 1; j < n; ++j) {
      const double ljd = at(j, k) * d;
      for (int i = k + 1; i < n; ++i) at(i, j) -= at(i, k) * ljd;
    }
  }
  return true;
}

void KktSystem::SmallLdlt::solve(double* x, double* scratch) const {
  (void)scratch;
  auto at = [&](int i, int j) { return a[static_cast<std::size_t>(j * n + i)]; };
  for (int k = 0; k < n; ++k) std::swap(x[k], x[perm[k]]);
  for (int k = 0; k < n; ++k)
    for (int i = k + 1; i < n; ++i) x[i] -= at(i, k) * x[k];
  for (int k = 0; k < n; ++k) x[k] /= at(k, k);
  for (int k = n - 1; k >= 0; --k)
    for (int i = k + 1; i < n; ++i) x[k] -= at(i, k) * x[i];
  for (int k = n - 1; k >= 0; --k) std::swap(x[k], x[perm[k]]);
}

void KktSystem::factorize(const Eigen::VectorXd& diag) {
  if (diag.size() != n_total_) throw SolverError("kkt: diagonal has wrong length");
  diag_ = diag;
  // Retry with a growing sign-preserving shift; refinement in solve() works
  // against the unshifted matrix.
  for (double delta : {0.0, 1e-8, 1e-6, 1e-4}) {
    Eigen::VectorXd shifted = diag_;
    if (delta > 0.0)
      for (Eigen::Index i = 0; i < shifted.size(); ++i)
        shifted[i] += shifted[i] < 0.0 ? -delta : delta;
    if (factor_with(shifted)) {
      shifted_ = delta > 0.0;
      return;
    }
  }
  throw SolverError("kkt: factorization failed");
}

bool KktSystem::factor_with(const Eigen::VectorXd& diag) {
  const long nc = static_cast<long>(components_.size());
  bool ok = true;
#pragma omp parallel for schedule(dynamic, 64) if (exec_ == Exec::parallel) reduction(&& : ok)
  for (long c = 0; c < nc; ++c) {
    auto& comp = components_[c];
    const int s = comp.ldlt.n;
    std::copy(comp.fixed.begin(), comp.fixed.end(), comp.ldlt.a.begin());
    for (int a = 0; a < s; ++a) comp.ldlt.a[a * s + a] += diag[comp.members[a]];
    ok = comp.ldlt.factor() && ok;
    const auto r = comp.coupled.size();
    if (r == 0) continue;
    double col[kMaxLocal], scratch[kMaxLocal];
    std::vector<double> big_col, big_scratch;
    double* x = col;
    double* tmp = scratch;
    if (s > kMaxLocal) {
      big_col.resize(s);
      big_scratch.resize(s);
      x = big_col.data();
      tmp = big_scratch.data();
    }
    for (std::size_t k = 0; k < r; ++k) {
      std::fill(x, x + s, 0.0);
      x[comp.coupled[k]] = 1.0;
      comp.ldlt.solve(x, tmp);
      for (std::size_t l = 0; l < r; ++l) comp.inv_coupled[k * r + l] = x[comp.coupled[l]];
    }
    if (!border_.empty()) {
      for (Eigen::Index b = 0; b < coupling_.cols(); ++b)
        for (std::size_t l = 0; l < r; ++l) {
          double acc = 0.0;
          for (std::size_t k = 0; k < r; ++k)
            acc += comp.inv_coupled[k * r + l] * coupling_(comp.p_offset + static_cast<Eigen::Index>(k), b);
          scaled_coupling_(comp.p_offset + static_cast<Eigen::Index>(l), b) = acc;
        }
    }
  }
  if (!ok) return false;

  const auto nb = static_cast<Eigen::Index>(border_.size());
  if (nb == 0) return true;
  Eigen::MatrixXd schur = border_fixed_;
  for (Eigen::Index b = 0; b < nb; ++b) schur(b, b) += diag[border_[b]];
  if (coupling_.rows() > 0) schur.noalias() -= coupling_.transpose() * scaled_coupling_;
  schur = 0.5 * (schur + schur.transpose()).eval();
  schur_.compute(schur);
  return schur_.info() == Eigen::Success && schur_.vectorD().allFinite();
}

Eigen::VectorXd KktSystem::solve_once(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x(n_total_);
  const long nc = static_cast<long>(components_.size());
  const auto nb = static_cast<Eigen::Index>(border_.size());
  Eigen::VectorXd gathered(coupling_.rows());

#pragma omp parallel if (exec_ == Exec::parallel)
  {
    std::vector<double> r(static_cast<std::size_t>(max_component_)), scratch(r.size());
#pragma omp for schedule(dynamic, 64)
  for (long c = 0; c < nc; ++c) {
    const auto& comp = components_[c];
    for (std::size_t a = 0; a < comp.members.size(); ++a) r[a] = rhs[comp.members[a]];
    comp.ldlt.solve(r.data(), scratch.data());
    for (std::size_t k = 0; k < comp.coupled.size(); ++k)
      gathered[comp.p_offset + static_cast<Eigen::Index>(k)] = r[comp.coupled[k]];
  }
  }

  Eigen::VectorXd xb;
  Eigen::VectorXd shift;
  if (nb > 0) {
    Eigen::VectorXd rb(nb);
    for (Eigen::Index b = 0; b < nb; ++b) rb[b] = rhs[border_[b]];
    if (coupling_.rows() > 0) rb.noalias() -= coupling_.transpose() * gathered;
    xb = schur_.solve(rb);
    for (Eigen::Index b = 0; b < nb; ++b) x[border_[b]] = xb[b];
    shift = coupling_ * xb;
  } else {
    shift = Eigen::VectorXd::Zero(coupling_.rows());
  }

#pragma omp parallel if (exec_ == Exec::parallel)
  {
    std::vector<double> r(static_cast<std::size_t>(max_component_)), scratch(r.size());
#pragma omp for schedule(dynamic, 64)
  for (long c = 0; c < nc; ++c) {
    const auto& comp = components_[c];
    for (std::size_t a = 0; a < comp.members.size(); ++a) r[a] = rhs[comp.members[a]];
    for (std::size_t k = 0; k < comp.coupled.size(); ++k)
      r[comp.coupled[k]] -= shift[comp.p_offset + static_cast<Eigen::Index>(k)];
    comp.ldlt.solve(r.data(), scratch.data());
    for (std::size_t a = 0; a < comp.members.size(); ++a) x[comp.members[a]] = r[a];
  }
  }
  return x;
}

Eigen::VectorXd KktSystem::multiply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out = off_ * x;
  out.array() += diag_.array() * x.array();
  return out;
}

Eigen::VectorXd KktSystem::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = solve_once(rhs);
  for (int k = 0; k < (shifted_ ? 6 : 2); ++k) {
    Eigen::VectorXd res = rhs - multiply(x);
    if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>())) break;
    x += solve_once(res);
  }
  return x;
}

}  // namespace tcboost::solver::detail
