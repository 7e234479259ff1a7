#pragma once

#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tcboost/kernels.hpp"

namespace tcboost::solver {

using Sparse = Eigen::SparseMatrix<double>;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize    1/2 x'Qx + c'x
/// subject to  A_eq x  = b_eq
///             A_in x <= h_in
///             lb <= x <= ub        (entries may be +-infinity)
///
/// Q is stored with both triangles and must be symmetric positive semidefinite.
struct ConvexProgram {
  Sparse q;
  VectorXd c;
  Sparse a_eq;
  VectorXd b_eq;
  Sparse a_in;
  VectorXd h_in;
  VectorXd lb;
  VectorXd ub;

  /// n free variables, zero objective, no constraints.
  static ConvexProgram with_variables(Eigen::Index n);

  Eigen::Index variables() const { return c.size(); }
  /// Throws ValidationError on inconsistent dimensions, asymmetric or (for
  /// n <= 200) indefinite Q, or lb > ub.
  void validate() const;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(Status s);

struct SolverOptions {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;
  int max_iterations = 200;
  Exec exec = Exec::parallel;
  /// Factorize the full KKT matrix densely (reference path).
  bool dense_kkt = false;
};

struct Residuals {
  double primal = 0.0;  // scaled infinity norm of constraint violation
  double dual = 0.0;    // scaled infinity norm of the stationarity residual
  double gap = 0.0;     // complementarity / (1 + |objective|)
};

/// Multipliers follow the Lagrangian
///   f(x) + y'(A_eq x - b) + z'(A_in x - h) - z_lower'(x - lb) + z_upper'(x - ub)
/// so z_in, z_lower, z_upper are >= 0 and y_eq is free.
struct SolverResult {
  Status status = Status::iteration_limit;
  VectorXd x;
  VectorXd y_eq;
  VectorXd z_in;
  VectorXd z_lower;  // zero where lb is infinite
  VectorXd z_upper;  // zero where ub is infinite
  double objective = 0.0;
  double dual_objective = 0.0;
  Residuals residuals;
  int iterations = 0;
};

SolverResult solve(const ConvexProgram& program, const SolverOptions& options = {});

/// Plain-text sparse triplet dump: a header line per block followed by
/// "row col value" lines, for cross-checking with external solvers.
void dump_triplets(const ConvexProgram& program, std::ostream& out);

}  // namespace tcboost::solver
