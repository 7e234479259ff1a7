#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "tcboost/dataset.hpp"
#include "tcboost/hypothesis.hpp"
#include "tcboost/solver.hpp"

namespace tcboost::master {

enum class Formulation { hard_margin, lp_boost, cg_boost, erlp_boost, md_boost, nm_boost, qrlp_boost };

std::string to_string(Formulation f);
/// Accepts both "lp_boost" and "lpboost" spellings.
Formulation formulation_from_string(const std::string& s);
std::vector<Formulation> all_formulations();
/// True when the natural objective of `f` is maximized.
bool maximizes(Formulation f);

/// How ERLP/QRLP bound the column edges: one shared scalar (max) or one
/// variable per column summed in the objective (sum).
enum class EdgeAggregation { max, sum };

std::string to_string(EdgeAggregation a);
EdgeAggregation edge_aggregation_from_string(const std::string& s);

struct FormulationParams {
  Formulation formulation = Formulation::lp_boost;
  double c = 1.0;
  double eps_stop = 0.01;
  EdgeAggregation edge_aggregation = EdgeAggregation::max;
  /// MD-Boost: use the exact centring matrix instead of the identity.
  /// Dense in M, so only sensible on small problems.
  bool md_full_a = false;
  /// Move w to a basic solution with the same margins and total weight.
  /// Ignored for CG-Boost and sum-aggregated ERLP/QRLP.
  bool reduce_support = true;

  void validate() const;
};

/// eta = max(0.5, ln M / (eps_stop / 2)).
double entropy_eta(std::size_t m, double eps_stop);
/// max(4/(eps/2), 8/(eps/2)^2), the ERLP master-solve budget.
long erlp_iteration_cap(double eps_stop);

/// M x T matrix of base-learner outputs on the training set, stored by column.
class ColumnMatrix {
public:
  explicit ColumnMatrix(std::size_t rows = 0) : rows_(rows) {}
  ColumnMatrix(std::size_t rows, std::vector<std::vector<double>> columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }
  /// Throws ValidationError on a length mismatch or entries outside [-1, 1].
  void append(std::span<const double> column);
  /// Index of an identical existing column, or -1.
  long find(std::span<const double> column) const;

  Eigen::Map<const Eigen::MatrixXd> matrix() const {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Diagnostics {
  Eigen::VectorXd margins;      // y_i (Hw)_i
  Eigen::VectorXd neg_margins;  // NM-Boost rho^neg, empty otherwise
  Eigen::VectorXd slacks;       // LP/CG-Boost xi, empty otherwise
  double edge_bound = 0.0;      // gamma (ERLP/QRLP) or r (MD-Boost)
};

struct MasterSolution {
  Formulation formulation = Formulation::lp_boost;
  Eigen::VectorXd w;
  Eigen::VectorXd u;
  double beta = 0.0;
  /// Natural-sense objective (maximized value for max problems).
  double objective = 0.0;
  int solver_iterations = 0;
  Diagnostics diagnostics;
};

struct MasterInput {
  const ColumnMatrix& h;
  std::span<const int> y;
  solver::SolverOptions options = {};
};

MasterSolution hard_margin_master(const MasterInput& in);
MasterSolution lpboost_master(const MasterInput& in, double c);
MasterSolution cgboost_master(const MasterInput& in, double c);
MasterSolution erlpboost_master(const MasterInput& in, double c, double eps_stop,
                                std::span<const double> u0,
                                EdgeAggregation agg = EdgeAggregation::max);
MasterSolution qrlpboost_master(const MasterInput& in, double c, double eps_stop,
                                std::span<const double> u0,
                                EdgeAggregation agg = EdgeAggregation::max);
MasterSolution mdboost_master(const MasterInput& in, double c, bool full_a = false);
MasterSolution nmboost_master(const MasterInput& in, double c);

/// Carathéodory reduction: while the support columns of [H; 1'] are linearly
/// dependent, steps along a kernel direction until one weight reaches zero.
/// Hw and sum(w) are unchanged; w is left as is if rounding would move them.
void reduce_support(const ColumnMatrix& h, Eigen::VectorXd& w);

/// Dispatch on `params.formulation`. Identical columns are merged before the
/// solve and the merged weight goes to the first occurrence. CG-Boost (whose
/// objective is not invariant to splitting weight) and NM-Boost (whose margin
/// offset depends on T) are solved as given. The interior-point weights are then
/// passed through reduce_support when `params.reduce_support` is set. `u0`
/// defaults to uniform.
MasterSolution solve_master(const FormulationParams& params, const MasterInput& in,
                            std::span<const double> u0 = {});

/// The program `solve_master` would hand to the solver, for debug dumps.
solver::ConvexProgram build_program(const FormulationParams& params, const ColumnMatrix& h,
                                    std::span<const int> y, std::span<const double> u0 = {});

/// sum_i u_i y_i votes_i
double price(std::span<const double> u, std::span<const double> votes, std::span<const int> y);
double price(std::span<const double> u, const tree::Hypothesis& h, const data::BinaryDataset& data);

nlohmann::json to_json(const MasterSolution& s);

}  // namespace tcboost::master
