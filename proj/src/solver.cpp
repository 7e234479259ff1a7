#include "tcboost/solver.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kkt_system.hpp"
#include "tcboost/error.hpp"

namespace tcboost::solver {

namespace {

constexpr double kPrimalReg = 1e-10;
constexpr double kDualReg = 1e-10;
constexpr double kStepFraction = 0.995;
constexpr double kDivergence = 1e12;

double inf_norm(const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Largest alpha in (0, 1] with v + alpha*dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

VectorXd gather(const VectorXd& v, const std::vector<Eigen::Index>& idx) {
  VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[idx[k]];
  return out;
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

ConvexProgram ConvexProgram::with_variables(Eigen::Index n) {
  ConvexProgram p;
  p.q.resize(n, n);
  p.c = VectorXd::Zero(n);
  p.a_eq.resize(0, n);
  p.b_eq.resize(0);
  p.a_in.resize(0, n);
  p.h_in.resize(0);
  p.lb = VectorXd::Constant(n, -kInf);
  p.ub = VectorXd::Constant(n, kInf);
  return p;
}

void ConvexProgram::validate() const {
  const Eigen::Index n = c.size();
  if (q.rows() != n || q.cols() != n) throw ValidationError("program: Q must be n x n");
  if (a_eq.cols() != n || a_eq.rows() != b_eq.size())
    throw ValidationError("program: equality block has inconsistent dimensions");
  if (a_in.cols() != n || a_in.rows() != h_in.size())
    throw ValidationError("program: inequality block has inconsistent dimensions");
  if (lb.size() != n || ub.size() != n) throw ValidationError("program: bounds must have length n");
  for (Eigen::Index i = 0; i < n; ++i)
    if (lb[i] > ub[i] || std::isnan(lb[i]) || std::isnan(ub[i]) || lb[i] == kInf || ub[i] == -kInf)
      throw ValidationError("program: invalid bounds at variable " + std::to_string(i));
  if (!c.allFinite() || !b_eq.allFinite() || !h_in.allFinite())
    throw ValidationError("program: non-finite data");
  Sparse qt = q.transpose();
  if (q.nonZeros() > 0) {
    const double asym = Eigen::MatrixXd(q - qt).cwiseAbs().maxCoeff();
    if (asym > 1e-10) throw ValidationError("program: Q is not symmetric");
    if (n <= 200) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Eigen::MatrixXd(q), Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-8)
        throw ValidationError("program: Q is not positive semidefinite");
    }
  }
}

SolverResult solve(const ConvexProgram& input, const SolverOptions& options) {
  input.validate();
  const Eigen::Index n = input.variables();

  // Fixed variables become equality rows so every bound pair has an interior.
  std::vector<Eigen::Index> fixed;
  for (Eigen::Index i = 0; i < n; ++i)
    if (input.lb[i] == input.ub[i]) fixed.push_back(i);
  Sparse a_eq = input.a_eq;
  VectorXd b_eq = input.b_eq;
  VectorXd lb = input.lb, ub = input.ub;
  if (!fixed.empty()) {
    const Eigen::Index me0 = a_eq.rows();
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index k = 0; k < a_eq.outerSize(); ++k)
      for (Sparse::InnerIterator it(a_eq, k); it; ++it)
        trip.emplace_back(it.row(), it.col(), it.value());
    b_eq.conservativeResize(me0 + static_cast<Eigen::Index>(fixed.size()));
    for (std::size_t k = 0; k < fixed.size(); ++k) {
      const auto row = me0 + static_cast<Eigen::Index>(k);
      trip.emplace_back(row, fixed[k], 1.0);
      b_eq[row] = lb[fixed[k]];
      lb[fixed[k]] = -kInf;
      ub[fixed[k]] = kInf;
    }
    a_eq.resize(b_eq.size(), n);
    a_eq.setFromTriplets(trip.begin(), trip.end());
  }

  const Sparse& q = input.q;
  const Sparse& g = input.a_in;
  const VectorXd& c = input.c;
  const VectorXd& h = input.h_in;
  const Eigen::Index me = a_eq.rows(), mi = g.rows();
  const Sparse a_t = a_eq.transpose(), g_t = g.transpose();

  std::vector<Eigen::Index> lower, upper;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(lb[i])) lower.push_back(i);
    if (std::isfinite(ub[i])) upper.push_back(i);
  }
  const auto nl = static_cast<Eigen::Index>(lower.size());
  const auto nu = static_cast<Eigen::Index>(upper.size());
  const VectorXd lb_l = gather(lb, lower), ub_u = gather(ub, upper);

  // Starting point.
  VectorXd x = VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool fl = std::isfinite(lb[i]), fu = std::isfinite(ub[i]);
    if (fl && fu)
      x[i] = 0.5 * (lb[i] + ub[i]);
    else if (fl)
      x[i] = lb[i] + 1.0;
    else if (fu)
      x[i] = ub[i] - 1.0;
  }
  VectorXd y = VectorXd::Zero(me);
  VectorXd z = VectorXd::Ones(mi);
  VectorXd s = (h - g * x).cwiseMax(1.0);
  VectorXd t = gather(x, lower) - lb_l;
  VectorXd v = ub_u - gather(x, upper);
  VectorXd zl = VectorXd::Ones(nl), zu = VectorXd::Ones(nu);

  const double primal_scale =
      1.0 + std::max({inf_norm(b_eq), inf_norm(h), inf_norm(lb_l), inf_norm(ub_u)});
  const double dual_scale = 1.0 + inf_norm(c);
  const Eigen::Index n_compl = mi + nl + nu;
  const bool has_quadratic = q.nonZeros() > 0;

  detail::KktSystem kkt(q, a_eq, g, options.exec, options.dense_kkt);
  VectorXd q_diag = VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < q.outerSize(); ++k)
    for (Sparse::InnerIterator it(q, k); it; ++it)
      if (it.row() == it.col()) q_diag[it.row()] += it.value();

  SolverResult result;
  VectorXd r_d, r_eq, r_in, r_l, r_u;

  auto scatter_add = [](VectorXd& dst, const std::vector<Eigen::Index>& idx, const VectorXd& src,
                        double sign) {
    for (std::size_t k = 0; k < idx.size(); ++k)
      dst[idx[k]] += sign * src[static_cast<Eigen::Index>(k)];
  };

  auto evaluate = [&] {
    const VectorXd qx = q * x;
    r_d = qx + c + a_t * y + g_t * z;
    scatter_add(r_d, lower, zl, -1.0);
    scatter_add(r_d, upper, zu, 1.0);
    r_eq = a_eq * x - b_eq;
    r_in = g * x + s - h;
    r_l = gather(x, lower) - lb_l - t;
    r_u = gather(x, upper) + v - ub_u;
    result.objective = 0.5 * x.dot(qx) + c.dot(x);
    result.dual_objective =
        -0.5 * x.dot(qx) - b_eq.dot(y) - h.dot(z) + lb_l.dot(zl) - ub_u.dot(zu);
    const double compl_sum = s.dot(z) + t.dot(zl) + v.dot(zu);
    result.residuals.primal =
        std::max({inf_norm(r_eq), inf_norm(r_in), inf_norm(r_l), inf_norm(r_u)}) / primal_scale;
    result.residuals.dual = inf_norm(r_d) / dual_scale;
    result.residuals.gap = compl_sum / (1.0 + std::abs(result.objective));
    return compl_sum;
  };

  struct Step {
    VectorXd dx, dy, dz, ds, dt, dzl, dv, dzu;
  };

  auto direction = [&](const VectorXd& rc_s, const VectorXd& rc_t, const VectorXd& rc_v) {
    VectorXd rhs(n + me + mi);
    VectorXd rx = -r_d;
    for (Eigen::Index k = 0; k < nl; ++k)
      rx[lower[k]] -= (rc_t[k] + zl[k] * r_l[k]) / t[k];
    for (Eigen::Index k = 0; k < nu; ++k)
      rx[upper[k]] -= (zu[k] * r_u[k] - rc_v[k]) / v[k];
    rhs << rx, -r_eq, (-r_in + rc_s.cwiseQuotient(z));
    const VectorXd sol = kkt.solve(rhs);
    Step st;
    st.dx = sol.head(n);
    st.dy = sol.segment(n, me);
    st.dz = sol.tail(mi);
    st.ds = -r_in - g * st.dx;
    st.dt = gather(st.dx, lower) + r_l;
    st.dzl = (-rc_t - zl.cwiseProduct(st.dt)).cwiseQuotient(t);
    st.dv = -r_u - gather(st.dx, upper);
    st.dzu = (-rc_v - zu.cwiseProduct(st.dv)).cwiseQuotient(v);
    return st;
  };

  int iter = 0;
  for (;; ++iter) {
    const double compl_sum = evaluate();
    result.iterations = iter;
    if (!x.allFinite() || !z.allFinite() || !y.allFinite()) {
      result.status = Status::iteration_limit;
      break;
    }
    if (result.residuals.primal <= options.feasibility_tol &&
        result.residuals.dual <= options.feasibility_tol &&
        result.residuals.gap <= options.gap_tol) {
      result.status = Status::optimal;
      break;
    }
    const double dual_size = std::max({inf_norm(y), inf_norm(z), inf_norm(zl), inf_norm(zu)});
    if (dual_size > kDivergence) {
      result.status = Status::infeasible;
      break;
    }
    if (inf_norm(x) > kDivergence && result.objective < -kDivergence / 1e4) {
      result.status = Status::unbounded;
      break;
    }
    if (iter >= options.max_iterations) {
      result.status = Status::iteration_limit;
      break;
    }

    VectorXd diag(n + me + mi);
    VectorXd dx_diag = q_diag.array() + kPrimalReg;
    for (Eigen::Index k = 0; k < nl; ++k) dx_diag[lower[k]] += zl[k] / t[k];
    for (Eigen::Index k = 0; k < nu; ++k) dx_diag[upper[k]] += zu[k] / v[k];
    diag << dx_diag, VectorXd::Constant(me, -kDualReg),
        (-(s.cwiseQuotient(z)).array() - kDualReg).matrix();
    kkt.factorize(diag);

    const double mu = n_compl > 0 ? compl_sum / static_cast<double>(n_compl) : 0.0;

    // Predictor.
    const VectorXd sz = s.cwiseProduct(z), tzl = t.cwiseProduct(zl), vzu = v.cwiseProduct(zu);
    Step aff = direction(sz, tzl, vzu);
    double ap = std::min({max_step(s, aff.ds), max_step(t, aff.dt), max_step(v, aff.dv)});
    double ad = std::min({max_step(z, aff.dz), max_step(zl, aff.dzl), max_step(zu, aff.dzu)});
    if (has_quadratic) ap = ad = std::min(ap, ad);
    double sigma = 0.0;
    if (n_compl > 0 && mu > 0.0) {
      const double mu_aff = ((s + ap * aff.ds).dot(z + ad * aff.dz) +
                             (t + ap * aff.dt).dot(zl + ad * aff.dzl) +
                             (v + ap * aff.dv).dot(zu + ad * aff.dzu)) /
                            static_cast<double>(n_compl);
      sigma = std::clamp(std::pow(mu_aff / mu, 3), 0.0, 1.0);
    }

    // Corrector.
    const double target = sigma * mu;
    Step st = direction((sz + aff.ds.cwiseProduct(aff.dz)).array() - target,
                        (tzl + aff.dt.cwiseProduct(aff.dzl)).array() - target,
                        (vzu + aff.dv.cwiseProduct(aff.dzu)).array() - target);
    ap = std::min({max_step(s, st.ds), max_step(t, st.dt), max_step(v, st.dv)});
    ad = std::min({max_step(z, st.dz), max_step(zl, st.dzl), max_step(zu, st.dzu)});
    if (has_quadratic) ap = ad = std::min(ap, ad);
    ap = std::min(1.0, kStepFraction * ap);
    ad = std::min(1.0, kStepFraction * ad);

    x += ap * st.dx;
    s += ap * st.ds;
    t += ap * st.dt;
    v += ap * st.dv;
    y += ad * st.dy;
    z += ad * st.dz;
    zl += ad * st.dzl;
    zu += ad * st.dzu;
  }

  result.x = x;
  result.y_eq = y.head(input.a_eq.rows());
  result.z_in = z;
  result.z_lower = VectorXd::Zero(n);
  result.z_upper = VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < nl; ++k) result.z_lower[lower[k]] = zl[k];
  for (Eigen::Index k = 0; k < nu; ++k) result.z_upper[upper[k]] = zu[k];
  // Multipliers of fixed variables surface as bound duals of the matching sign.
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    const double mult = y[input.a_eq.rows() + static_cast<Eigen::Index>(k)];
    if (mult < 0.0)
      result.z_lower[fixed[k]] = -mult;
    else
      result.z_upper[fixed[k]] = mult;
  }
  return result;
}

void dump_triplets(const ConvexProgram& p, std::ostream& out) {
  out.precision(17);
  auto block = [&](const char* name, const Sparse& m) {
    out << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (Sparse::InnerIterator it(m, k); it; ++it)
        out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  };
  auto vec = [&](const char* name, const VectorXd& v) {
    out << name << ' ' << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
  };
  block("Q", p.q);
  vec("c", p.c);
  block("A_eq", p.a_eq);
  vec("b_eq", p.b_eq);
  block("A_in", p.a_in);
  vec("h_in", p.h_in);
  vec("lb", p.lb);
  vec("ub", p.ub);
}

}  // namespace tcboost::solver
