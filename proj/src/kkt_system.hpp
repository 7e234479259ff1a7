#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tcboost/kernels.hpp"

namespace tcboost::solver::detail {

/// Symmetric quasidefinite KKT matrix
///
///   [ Q + Dx   A^T   G^T ]
///   [ A        -De   0   ]
///   [ G        0     -Di ]
///
/// whose off-diagonal pattern and values are fixed for a solve and whose
/// diagonal changes every interior-point iteration.
///
/// Rows with high degree (columns of the ensemble matrix, sum rows) form a
/// dense border B, sized by a flop estimate. The remaining rows split into small connected components
/// that are eliminated independently; the border is then solved through its
/// dense Schur complement. With `Exec::serial` and `dense_only` the whole
/// matrix is factorized densely, which is the reference path.
class KktSystem {
public:
  using Sparse = Eigen::SparseMatrix<double>;

  KktSystem(const Sparse& q, const Sparse& a_eq, const Sparse& a_in, Exec exec,
            bool dense_only = false);

  Eigen::Index size() const { return n_total_; }
  std::size_t border_size() const { return border_.size(); }
  std::size_t component_count() const { return components_.size(); }

  void factorize(const Eigen::VectorXd& diag);
  /// Solve with iterative refinement against the unshifted matrix.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;

private:
  // Dense LDL' with symmetric diagonal pivoting for one small block,
  // stored in place; no allocation after construction.
  struct SmallLdlt {
    int n = 0;
    std::vector<double> a;  // column-major n x n
    std::vector<int> perm;

    void resize(int size);
    bool factor();
    void solve(double* x, double* scratch) const;
  };

  struct Component {
    std::vector<Eigen::Index> members;  // global indices
    std::vector<int> coupled;           // local indices with border neighbours
    Eigen::Index p_offset = 0;          // first row in coupling_ for this component
    std::vector<double> fixed;          // off-diagonal block, column-major
    SmallLdlt ldlt;
    std::vector<double> inv_coupled;    // (K_cc^-1) restricted to coupled rows, r x r
  };

  Eigen::VectorXd solve_once(const Eigen::VectorXd& rhs) const;
  Eigen::Index choose_border_threshold(const std::vector<Eigen::Index>& degree) const;

  Eigen::Index n_total_ = 0;
  Exec exec_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> off_;  // off-diagonal part of K
  bool factor_with(const Eigen::VectorXd& diag);

  Eigen::VectorXd diag_;
  bool shifted_ = false;

  std::vector<Eigen::Index> border_;
  std::vector<Component> components_;
  Eigen::MatrixXd border_fixed_;  // off-diagonal border block
  Eigen::MatrixXd coupling_;      // coupled rows x border columns
  Eigen::MatrixXd scaled_coupling_;
  int max_component_ = 0;
  Eigen::LDLT<Eigen::MatrixXd> schur_;
};

}  // namespace tcboost::solver::detail
