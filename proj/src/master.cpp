#include "tcboost/master.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tcboost/error.hpp"

namespace tcboost::master {

using Eigen::Index;
using Eigen::VectorXd;
using solver::ConvexProgram;
using solver::kInf;
using Triplets = std::vector<Eigen::Triplet<double>>;

namespace {

constexpr double kEntropyPerturbation = 1e-12;

struct Names {
  Formulation f;
  const char* canonical;
  const char* compact;
};

constexpr Names kNames[] = {
    {Formulation::hard_margin, "hard_margin", "hardmargin"},
    {Formulation::lp_boost, "lp_boost", "lpboost"},
    {Formulation::cg_boost, "cg_boost", "cgboost"},
    {Formulation::erlp_boost, "erlp_boost", "erlpboost"},
    {Formulation::md_boost, "md_boost", "mdboost"},
    {Formulation::nm_boost, "nm_boost", "nmboost"},
    {Formulation::qrlp_boost, "qrlp_boost", "qrlpboost"},
};

Index idx(std::size_t v) { return static_cast<Index>(v); }

solver::Sparse sparse(Index rows, Index cols, const Triplets& t) {
  solver::Sparse m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void check_input(const MasterInput& in) {
  if (in.h.cols() == 0) throw ValidationError("master: column matrix has no columns");
  if (in.h.rows() == 0) throw ValidationError("master: column matrix has no rows");
  if (in.y.size() != in.h.rows())
    throw ValidationError("master: label count does not match column matrix rows");
  for (int v : in.y)
    if (v != 1 && v != -1) throw ValidationError("master: labels must be -1 or +1");
}

void check_c(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("master: C must be positive");
}

solver::SolverResult run(const ConvexProgram& p, const MasterInput& in, Formulation f) {
  auto r = solver::solve(p, in.options);
  if (r.status != solver::Status::optimal)
    throw SolverError("master " + to_string(f) + ": solver returned " + to_string(r.status));
  return r;
}

VectorXd margins_of(const MasterInput& in, const VectorXd& w) {
  VectorXd m = in.h.matrix() * w;
  for (std::size_t i = 0; i < in.y.size(); ++i) m[idx(i)] *= in.y[i];
  return m;
}

// Rows  sign * y_i * H_ij  at (row0 + i, col0 + j).
void add_signed_h(Triplets& t, const MasterInput& in, Index row0, Index col0, double sign) {
  const std::size_t m = in.h.rows(), cols = in.h.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    const auto col = in.h.column(j);
    for (std::size_t i = 0; i < m; ++i)
      if (col[i] != 0.0) t.emplace_back(row0 + idx(i), col0 + idx(j), sign * in.y[i] * col[i]);
  }
}

// Transposed: (row0 + j, col0 + i) = sign * y_i * H_ij.
void add_signed_ht(Triplets& t, const MasterInput& in, Index row0, Index col0, double sign) {
  const std::size_t m = in.h.rows(), cols = in.h.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    const auto col = in.h.column(j);
    for (std::size_t i = 0; i < m; ++i)
      if (col[i] != 0.0) t.emplace_back(row0 + idx(j), col0 + idx(i), sign * in.y[i] * col[i]);
  }
}

solver::Sparse sum_row(Index n, Index first, Index count) {
  Triplets t;
  for (Index k = 0; k < count; ++k) t.emplace_back(0, first + k, 1.0);
  return sparse(1, n, t);
}

VectorXd clip_nonneg(VectorXd v) { return v.cwiseMax(0.0); }

// ---- program builders -------------------------------------------------------

// x = [w (T), rho]; min -rho; rho - y_i (Hw)_i <= 0; sum w = 1; w >= 0.
ConvexProgram hard_margin_program(const MasterInput& in) {
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  auto p = ConvexProgram::with_variables(t + 1);
  p.c[t] = -1.0;
  Triplets g;
  add_signed_h(g, in, 0, 0, -1.0);
  for (Index i = 0; i < m; ++i) g.emplace_back(i, t, 1.0);
  p.a_in = sparse(m, t + 1, g);
  p.h_in = VectorXd::Zero(m);
  p.a_eq = sum_row(t + 1, 0, t);
  p.b_eq = VectorXd::Ones(1);
  p.lb.head(t).setZero();
  return p;
}

// x = [w (T), xi (M)]; -y_i (Hw)_i - xi_i <= -1; w, xi >= 0.
ConvexProgram soft_margin_program(const MasterInput& in, double c, bool quadratic) {
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  auto p = ConvexProgram::with_variables(t + m);
  if (quadratic) {
    Triplets q;
    for (Index j = 0; j < t; ++j) q.emplace_back(j, j, 1.0);
    p.q = sparse(t + m, t + m, q);
  } else {
    p.c.head(t).setOnes();
  }
  p.c.tail(m).setConstant(c);
  Triplets g;
  add_signed_h(g, in, 0, 0, -1.0);
  for (Index i = 0; i < m; ++i) g.emplace_back(i, t + i, -1.0);
  p.a_in = sparse(m, t + m, g);
  p.h_in = VectorXd::Constant(m, -1.0);
  p.lb.setZero();
  return p;
}

// x = [u (M), gamma (1 or T)]; sum_i u_i y_i H_ij - gamma_(j) <= 0; sum u = 1; 0 <= u <= 1/C.
// q_diag and lin give the separable regularizer on u.
ConvexProgram capped_edge_program(const MasterInput& in, double c, const VectorXd& q_diag,
                                  const VectorXd& lin, EdgeAggregation agg) {
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  const Index ng = agg == EdgeAggregation::max ? 1 : t;
  auto p = ConvexProgram::with_variables(m + ng);
  Triplets q;
  for (Index i = 0; i < m; ++i) q.emplace_back(i, i, q_diag[i]);
  p.q = sparse(m + ng, m + ng, q);
  p.c.head(m) = lin;
  p.c.tail(ng).setOnes();
  Triplets g;
  add_signed_ht(g, in, 0, 0, 1.0);
  for (Index j = 0; j < t; ++j) g.emplace_back(j, m + (ng == 1 ? 0 : j), -1.0);
  p.a_in = sparse(t, m + ng, g);
  p.h_in = VectorXd::Zero(t);
  p.a_eq = sum_row(m + ng, 0, m);
  p.b_eq = VectorXd::Ones(1);
  p.lb.head(m).setZero();
  p.ub.head(m).setConstant(1.0 / c);
  return p;
}

// x = [w (T), rho (M)]; min -sum rho + 1/2 rho'A rho; rho_i - y_i (Hw)_i = 0; sum w = C; w >= 0.
ConvexProgram md_program(const MasterInput& in, double c, bool full_a) {
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  auto p = ConvexProgram::with_variables(t + m);
  Triplets q;
  const double off = m > 1 ? -1.0 / static_cast<double>(m - 1) : 0.0;
  for (Index i = 0; i < m; ++i) {
    q.emplace_back(t + i, t + i, 1.0);
    if (full_a)
      for (Index k = 0; k < m; ++k)
        if (k != i) q.emplace_back(t + i, t + k, off);
  }
  p.q = sparse(t + m, t + m, q);
  p.c.tail(m).setConstant(-1.0);
  Triplets a;
  add_signed_h(a, in, 0, 0, -1.0);
  for (Index i = 0; i < m; ++i) a.emplace_back(i, t + i, 1.0);
  for (Index j = 0; j < t; ++j) a.emplace_back(m, j, 1.0);
  p.a_eq = sparse(m + 1, t + m, a);
  p.b_eq = VectorXd::Zero(m + 1);
  p.b_eq[m] = c;
  p.lb.head(t).setZero();
  return p;
}

// x = [w (T), rho (M), rho_neg (M)]; min -(sum rho_neg + C sum rho)
//   rho_i - y_i (Hw)_i <= 0;  rho_neg_i - rho_i <= -1/T;  rho_neg <= 0;  sum w = 1; w >= 0.
ConvexProgram nm_program(const MasterInput& in, double c) {
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  auto p = ConvexProgram::with_variables(t + 2 * m);
  p.c.segment(t, m).setConstant(-c);
  p.c.tail(m).setConstant(-1.0);
  Triplets g;
  add_signed_h(g, in, 0, 0, -1.0);
  for (Index i = 0; i < m; ++i) {
    g.emplace_back(i, t + i, 1.0);
    g.emplace_back(m + i, t + m + i, 1.0);
    g.emplace_back(m + i, t + i, -1.0);
  }
  p.a_in = sparse(2 * m, t + 2 * m, g);
  p.h_in = VectorXd::Zero(2 * m);
  p.h_in.tail(m).setConstant(-1.0 / static_cast<double>(t));
  p.a_eq = sum_row(t + 2 * m, 0, t);
  p.b_eq = VectorXd::Ones(1);
  p.lb.head(t).setZero();
  p.ub.tail(m).setZero();
  return p;
}

VectorXd reference_distribution(std::span<const double> u0, std::size_t m, bool strictly_positive) {
  if (u0.empty()) return VectorXd::Constant(idx(m), 1.0 / static_cast<double>(m));
  if (u0.size() != m) throw ValidationError("master: u0 length does not match rows");
  VectorXd v(idx(m));
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(u0[i] >= 0.0) || (strictly_positive && u0[i] <= 0.0))
      throw ValidationError(strictly_positive ? "master: u0 must be strictly positive"
                                              : "master: u0 must be nonnegative");
    v[idx(i)] = u0[i];
    sum += u0[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("master: u0 must sum to 1");
  return v;
}

void check_cap(double c, std::size_t m) {
  check_c(c);
  if (c > static_cast<double>(m) * (1.0 + 1e-12))
    throw ValidationError("master: cap 1/C is infeasible (C > M)");
}

ConvexProgram erlp_program(const MasterInput& in, double c, double eps_stop, const VectorXd& u0,
                           EdgeAggregation agg) {
  const double eta = entropy_eta(in.h.rows(), eps_stop);
  const VectorXd a = u0.array() + kEntropyPerturbation;
  const VectorXd q = (2.0 / eta) * a.cwiseInverse();
  const VectorXd lin = (a.array().log() - u0.array() / a.array()) / eta;
  return capped_edge_program(in, c, q, lin, agg);
}

ConvexProgram qrlp_program(const MasterInput& in, double c, double eps_stop, const VectorXd& u0,
                           EdgeAggregation agg) {
  const double eta = entropy_eta(in.h.rows(), eps_stop);
  const VectorXd q = (1.0 / eta) * u0.cwiseInverse();
  const VectorXd lin = u0.array().log() / eta;
  return capped_edge_program(in, c, q, lin, agg);
}

MasterSolution capped_edge_solution(const MasterInput& in, const ConvexProgram& p, Formulation f,
                                    EdgeAggregation agg) {
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  const auto r = run(p, in, f);
  MasterSolution s;
  s.formulation = f;
  s.solver_iterations = r.iterations;
  s.u = clip_nonneg(r.x.head(m));
  VectorXd z = clip_nonneg(r.z_in);
  const double zsum = z.sum();
  s.w = zsum > 0.0 ? VectorXd(z / zsum) : VectorXd::Constant(t, 1.0 / static_cast<double>(t));
  s.beta = agg == EdgeAggregation::max ? r.x[m] : r.x.tail(t).maxCoeff();
  s.objective = r.objective;
  s.diagnostics.edge_bound = s.beta;
  s.diagnostics.margins = margins_of(in, s.w);
  return s;
}

}  // namespace

// ---- names and parameters ---------------------------------------------------

std::string to_string(Formulation f) {
  for (const auto& n : kNames)
    if (n.f == f) return n.canonical;
  return "unknown";
}

Formulation formulation_from_string(const std::string& s) {
  for (const auto& n : kNames)
    if (s == n.canonical || s == n.compact) return n.f;
  std::string valid;
  for (const auto& n : kNames) valid += (valid.empty() ? "" : ", ") + std::string(n.canonical);
  throw ValidationError("unknown formulation '" + s + "' (valid: " + valid + ")");
}

std::vector<Formulation> all_formulations() {
  std::vector<Formulation> out;
  for (const auto& n : kNames) out.push_back(n.f);
  return out;
}

bool maximizes(Formulation f) {
  return f == Formulation::hard_margin || f == Formulation::md_boost || f == Formulation::nm_boost;
}

std::string to_string(EdgeAggregation a) { return a == EdgeAggregation::max ? "max" : "sum"; }

EdgeAggregation edge_aggregation_from_string(const std::string& s) {
  if (s == "max") return EdgeAggregation::max;
  if (s == "sum") return EdgeAggregation::sum;
  throw ValidationError("unknown edge aggregation '" + s + "' (valid: max, sum)");
}

void FormulationParams::validate() const {
  if (formulation != Formulation::hard_margin) check_c(c);
  if (!(eps_stop > 0.0)) throw ValidationError("eps_stop must be positive");
}

double entropy_eta(std::size_t m, double eps_stop) {
  return std::max(0.5, std::log(static_cast<double>(m)) / (0.5 * eps_stop));
}

long erlp_iteration_cap(double eps_stop) {
  const double half = eps_stop / 2.0;
  return static_cast<long>(std::ceil(std::max(4.0 / half, 8.0 / (half * half))));
}

// ---- column matrix ----------------------------------------------------------

ColumnMatrix::ColumnMatrix(std::size_t rows, std::vector<std::vector<double>> columns)
    : rows_(rows) {
  for (const auto& c : columns) append(c);
}

void ColumnMatrix::append(std::span<const double> column) {
  if (column.size() != rows_) throw ValidationError("column length does not match M");
  for (double v : column)
    if (!(std::abs(v) <= 1.0 + 1e-12)) throw ValidationError("column entry outside [-1, 1]");
  data_.insert(data_.end(), column.begin(), column.end());
  ++cols_;
}

long ColumnMatrix::find(std::span<const double> column) const {
  if (column.size() != rows_) return -1;
  for (std::size_t j = 0; j < cols_; ++j) {
    const auto c = this->column(j);
    if (std::equal(c.begin(), c.end(), column.begin())) return static_cast<long>(j);
  }
  return -1;
}

// ---- masters ----------------------------------------------------------------

MasterSolution hard_margin_master(const MasterInput& in) {
  check_input(in);
  const Index t = idx(in.h.cols());
  const auto r = run(hard_margin_program(in), in, Formulation::hard_margin);
  MasterSolution s;
  s.formulation = Formulation::hard_margin;
  s.solver_iterations = r.iterations;
  s.w = clip_nonneg(r.x.head(t));
  s.u = clip_nonneg(r.z_in);
  s.beta = r.y_eq[0];
  s.objective = r.x[t];
  s.diagnostics.margins = margins_of(in, s.w);
  return s;
}

namespace {

MasterSolution soft_margin_master(const MasterInput& in, double c, bool quadratic) {
  check_input(in);
  check_c(c);
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  const auto f = quadratic ? Formulation::cg_boost : Formulation::lp_boost;
  const auto r = run(soft_margin_program(in, c, quadratic), in, f);
  MasterSolution s;
  s.formulation = f;
  s.solver_iterations = r.iterations;
  s.w = clip_nonneg(r.x.head(t));
  s.u = clip_nonneg(r.z_in);
  s.beta = quadratic ? 0.0 : 1.0;
  s.objective = r.objective;
  s.diagnostics.slacks = clip_nonneg(r.x.tail(m));
  s.diagnostics.margins = margins_of(in, s.w);
  return s;
}

}  // namespace

MasterSolution lpboost_master(const MasterInput& in, double c) {
  return soft_margin_master(in, c, false);
}

MasterSolution cgboost_master(const MasterInput& in, double c) {
  return soft_margin_master(in, c, true);
}

MasterSolution erlpboost_master(const MasterInput& in, double c, double eps_stop,
                                std::span<const double> u0, EdgeAggregation agg) {
  check_input(in);
  check_cap(c, in.h.rows());
  const VectorXd ref = reference_distribution(u0, in.h.rows(), false);
  return capped_edge_solution(in, erlp_program(in, c, eps_stop, ref, agg),
                              Formulation::erlp_boost, agg);
}

MasterSolution qrlpboost_master(const MasterInput& in, double c, double eps_stop,
                                std::span<const double> u0, EdgeAggregation agg) {
  check_input(in);
  check_cap(c, in.h.rows());
  const VectorXd ref = reference_distribution(u0, in.h.rows(), true);
  return capped_edge_solution(in, qrlp_program(in, c, eps_stop, ref, agg),
                              Formulation::qrlp_boost, agg);
}

MasterSolution mdboost_master(const MasterInput& in, double c, bool full_a) {
  check_input(in);
  check_c(c);
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  const auto r = run(md_program(in, c, full_a), in, Formulation::md_boost);
  MasterSolution s;
  s.formulation = Formulation::md_boost;
  s.solver_iterations = r.iterations;
  s.w = clip_nonneg(r.x.head(t));
  s.u = r.y_eq.head(m);
  s.beta = r.y_eq[m];
  s.objective = -r.objective;
  s.diagnostics.edge_bound = s.beta;
  s.diagnostics.margins = r.x.tail(m);
  return s;
}

MasterSolution nmboost_master(const MasterInput& in, double c) {
  check_input(in);
  check_c(c);
  const Index t = idx(in.h.cols()), m = idx(in.h.rows());
  const auto r = run(nm_program(in, c), in, Formulation::nm_boost);
  MasterSolution s;
  s.formulation = Formulation::nm_boost;
  s.solver_iterations = r.iterations;
  s.w = clip_nonneg(r.x.head(t));
  const VectorXd z = clip_nonneg(r.z_in.head(m));
  const double zsum = z.sum();
  s.u = z / zsum;
  s.beta = r.y_eq[0] / zsum;
  s.objective = -r.objective;
  s.diagnostics.margins = r.x.segment(t, m);
  s.diagnostics.neg_margins = r.x.tail(m);
  return s;
}

// ---- dispatch ---------------------------------------------------------------

namespace {

MasterSolution dispatch(const FormulationParams& p, const MasterInput& in,
                        std::span<const double> u0) {
  switch (p.formulation) {
    case Formulation::hard_margin: return hard_margin_master(in);
    case Formulation::lp_boost: return lpboost_master(in, p.c);
    case Formulation::cg_boost: return cgboost_master(in, p.c);
    case Formulation::erlp_boost:
      return erlpboost_master(in, p.c, p.eps_stop, u0, p.edge_aggregation);
    case Formulation::qrlp_boost:
      return qrlpboost_master(in, p.c, p.eps_stop, u0, p.edge_aggregation);
    case Formulation::md_boost: return mdboost_master(in, p.c, p.md_full_a);
    case Formulation::nm_boost: return nmboost_master(in, p.c);
  }
  throw ValidationError("unknown formulation");
}

bool keeps_objective_under_support_moves(const FormulationParams& p) {
  if (p.formulation == Formulation::cg_boost) return false;
  const bool capped =
      p.formulation == Formulation::erlp_boost || p.formulation == Formulation::qrlp_boost;
  return !capped || p.edge_aggregation == EdgeAggregation::max;
}

}  // namespace

void reduce_support(const ColumnMatrix& h, VectorXd& w) {
  if (idx(h.cols()) != w.size()) throw ValidationError("reduce_support: length mismatch");
  std::vector<Index> support;
  for (Index j = 0; j < w.size(); ++j)
    if (w[j] > 0.0) support.push_back(j);
  const Index s = static_cast<Index>(support.size());
  if (s < 2) return;

  const Index m = idx(h.rows());
  Eigen::MatrixXd a(m + 1, s);
  for (Index k = 0; k < s; ++k) {
    const auto col = h.column(static_cast<std::size_t>(support[k]));
    a.col(k).head(m) = Eigen::Map<const VectorXd>(col.data(), m);
    a(m, k) = 1.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() == s) return;
  Eigen::MatrixXd kernel = lu.kernel();

  VectorXd v(s);
  for (Index k = 0; k < s; ++k) v[k] = w[support[k]];
  const VectorXd before = a * v;

  for (Index q = 0; q < kernel.cols(); ++q) {
    VectorXd d = kernel.col(q);
    const double scale = d.lpNorm<Eigen::Infinity>();
    if (scale < 1e-12) continue;
    if (d.maxCoeff() < 1e-12 * scale) d = -d;
    Index hit = -1;
    double step = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < s; ++k)
      if (d[k] > 1e-12 * scale && v[k] / d[k] < step) {
        step = v[k] / d[k];
        hit = k;
      }
    if (hit < 0) continue;
    v -= step * d;
    v[hit] = 0.0;
    v = v.cwiseMax(0.0);
    for (Index p = q + 1; p < kernel.cols(); ++p)
      kernel.col(p) -= (kernel(hit, p) / d[hit]) * d;
  }

  const VectorXd after = a * v;
  if ((after - before).lpNorm<Eigen::Infinity>() > 1e-8 * (1.0 + before.lpNorm<Eigen::Infinity>()))
    return;
  for (Index k = 0; k < s; ++k) w[support[k]] = v[k];
}

MasterSolution solve_master(const FormulationParams& params, const MasterInput& in,
                            std::span<const double> u0) {
  params.validate();
  check_input(in);
  const bool reduce = params.reduce_support && keeps_objective_under_support_moves(params);
  if (params.formulation == Formulation::cg_boost || params.formulation == Formulation::nm_boost) {
    MasterSolution s = dispatch(params, in, u0);
    if (reduce) reduce_support(in.h, s.w);
    return s;
  }

  std::vector<std::size_t> first;  // representative column of each class
  std::vector<std::size_t> owner(in.h.cols());
  ColumnMatrix unique(in.h.rows());
  for (std::size_t j = 0; j < in.h.cols(); ++j) {
    const long k = unique.find(in.h.column(j));
    if (k >= 0) {
      owner[j] = static_cast<std::size_t>(k);
    } else {
      owner[j] = first.size();
      first.push_back(j);
      unique.append(in.h.column(j));
    }
  }
  if (unique.cols() == in.h.cols()) {
    MasterSolution s = dispatch(params, in, u0);
    if (reduce) reduce_support(in.h, s.w);
    return s;
  }

  MasterInput reduced{unique, in.y, in.options};
  MasterSolution s = dispatch(params, reduced, u0);
  if (reduce) reduce_support(unique, s.w);
  VectorXd w = VectorXd::Zero(idx(in.h.cols()));
  for (std::size_t k = 0; k < first.size(); ++k) w[idx(first[k])] = s.w[idx(k)];
  s.w = std::move(w);
  return s;
}

ConvexProgram build_program(const FormulationParams& p, const ColumnMatrix& h,
                            std::span<const int> y, std::span<const double> u0) {
  p.validate();
  const MasterInput in{h, y};
  check_input(in);
  switch (p.formulation) {
    case Formulation::hard_margin: return hard_margin_program(in);
    case Formulation::lp_boost: return soft_margin_program(in, p.c, false);
    case Formulation::cg_boost: return soft_margin_program(in, p.c, true);
    case Formulation::erlp_boost:
      check_cap(p.c, h.rows());
      return erlp_program(in, p.c, p.eps_stop, reference_distribution(u0, h.rows(), false),
                          p.edge_aggregation);
    case Formulation::qrlp_boost:
      check_cap(p.c, h.rows());
      return qrlp_program(in, p.c, p.eps_stop, reference_distribution(u0, h.rows(), true),
                          p.edge_aggregation);
    case Formulation::md_boost: return md_program(in, p.c, p.md_full_a);
    case Formulation::nm_boost: return nm_program(in, p.c);
  }
  throw ValidationError("unknown formulation");
}

// ---- pricing ----------------------------------------------------------------

double price(std::span<const double> u, std::span<const double> votes, std::span<const int> y) {
  if (u.size() != votes.size() || u.size() != y.size())
    throw ValidationError("price: length mismatch");
  double edge = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) edge += u[i] * y[i] * votes[i];
  return edge;
}

double price(std::span<const double> u, const tree::Hypothesis& h,
             const data::BinaryDataset& data) {
  const auto votes = tree::predict_matrix(h, data);
  return price(u, votes, data.y());
}

nlohmann::json to_json(const MasterSolution& s) {
  auto vec = [](const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json diag = {{"margins", vec(s.diagnostics.margins)},
                         {"edge_bound", s.diagnostics.edge_bound}};
  if (s.diagnostics.neg_margins.size() > 0) diag["neg_margins"] = vec(s.diagnostics.neg_margins);
  if (s.diagnostics.slacks.size() > 0) diag["slacks"] = vec(s.diagnostics.slacks);
  return {{"formulation", to_string(s.formulation)},
          {"w", vec(s.w)},
          {"u", vec(s.u)},
          {"beta", s.beta},
          {"objective", s.objective},
          {"solver_iterations", s.solver_iterations},
          {"diagnostics", diag}};
}

}  // namespace tcboost::master
