#include "stgf/qp.hpp"

#include "stgf/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace stgf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative curvature below which a new normal is treated as spanned by the working set.
constexpr double kDependenceTol = 1e-12;

struct WorkingEntry
{
  bool is_eq;
  Index index;
  double mult;
};

}  // namespace

const char* to_string(QpStatus s)
{
  switch (s) {
  case QpStatus::optimal:
    return "optimal";
  case QpStatus::infeasible:
    return "infeasible";
  case QpStatus::max_iter:
    return "max_iter";
  }
  return "unknown";
}

QpProblem QpProblem::unconstrained(MatrixXd hess, VectorXd lin)
{
  QpProblem qp;
  const Index n = lin.size();
  qp.hess = std::move(hess);
  qp.lin = std::move(lin);
  qp.ineq_mat.resize(0, n);
  qp.ineq_rhs.resize(0);
  qp.eq_mat.resize(0, n);
  qp.eq_rhs.resize(0);
  return qp;
}

void QpProblem::validate() const
{
  const Index n = dim();
  auto fail = [](const std::string& what) { throw DimensionError("QpProblem: " + what); };
  if (hess.rows() != n || hess.cols() != n) { fail("hess must be n x n"); }
  if (ineq_mat.rows() != n_ineq() || (n_ineq() > 0 && ineq_mat.cols() != n)) { fail("ineq_mat shape"); }
  if (eq_mat.rows() != n_eq() || (n_eq() > 0 && eq_mat.cols() != n)) { fail("eq_mat shape"); }
  if (n > 0 && (hess - hess.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, hess.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("QpProblem: hess is not symmetric");
  }
}

double tikhonov_epsilon(const MatrixXd& hess)
{
  const double n = std::max<double>(1.0, static_cast<double>(hess.rows()));
  return 1e-10 * (1.0 + hess.trace() / n);
}

double kkt_residual(const QpProblem& qp, const QpSolution& sol)
{
  const Index n = qp.dim();
  if (sol.y.size() != n || sol.ineq_mult.size() != qp.n_ineq() || sol.eq_mult.size() != qp.n_eq()) {
    throw DimensionError("kkt_residual: solution dimensions do not match problem");
  }
  double res = 0.0;
  if (n > 0) {
    VectorXd stat = qp.hess * sol.y + qp.lin;
    if (qp.n_ineq() > 0) { stat.noalias() += qp.ineq_mat.transpose() * sol.ineq_mult; }
    if (qp.n_eq() > 0) { stat.noalias() += qp.eq_mat.transpose() * sol.eq_mult; }
    res = stat.cwiseAbs().maxCoeff();
  }
  if (qp.n_ineq() > 0) {
    const VectorXd slack = qp.ineq_mat * sol.y - qp.ineq_rhs;
    res = std::max(res, slack.cwiseMax(0.0).maxCoeff());
    res = std::max(res, (-sol.ineq_mult).cwiseMax(0.0).maxCoeff());
    res = std::max(res, sol.ineq_mult.cwiseProduct(slack).cwiseAbs().maxCoeff());
  }
  if (qp.n_eq() > 0) { res = std::max(res, (qp.eq_mat * sol.y - qp.eq_rhs).cwiseAbs().maxCoeff()); }
  return res;
}

QpSolution QpSolver::solve(const QpProblem& qp)
{
  qp.validate();
  const Index n = qp.dim();
  const Index mi = qp.n_ineq();
  const Index me = qp.n_eq();
  const double tol = settings_.tol;

  QpSolution sol;
  sol.ineq_mult = VectorXd::Zero(mi);
  sol.eq_mult = VectorXd::Zero(me);

  // Regularize only when the plain factorization breaks down.
  Eigen::LLT<MatrixXd> llt(qp.hess);
  if (llt.info() != Eigen::Success) {
    MatrixXd g = qp.hess;
    g.diagonal().array() += tikhonov_epsilon(qp.hess);
    llt.compute(g);
    if (llt.info() != Eigen::Success) { throw std::invalid_argument("QpProblem: hess is not positive semi-definite"); }
  }

  // Columns of G^{-1} [A' E'], reused by every Schur solve.
  const MatrixXd k_ineq = mi > 0 ? MatrixXd(llt.solve(qp.ineq_mat.transpose())) : MatrixXd(n, 0);
  const MatrixXd k_eq = me > 0 ? MatrixXd(llt.solve(qp.eq_mat.transpose())) : MatrixXd(n, 0);

  auto normal = [&](const WorkingEntry& e) {
    return e.is_eq ? qp.eq_mat.row(e.index).transpose() : qp.ineq_mat.row(e.index).transpose();
  };
  auto kcol = [&](const WorkingEntry& e) { return e.is_eq ? k_eq.col(e.index) : k_ineq.col(e.index); };

  VectorXd y = -llt.solve(qp.lin);
  std::vector<WorkingEntry> work;
  work.reserve(static_cast<std::size_t>(n));

  VectorXd z(n);
  VectorXd r;
  // Primal step z and working-set multiplier step r for adding `cand`:
  //   G z + N r + a = 0,  N' z = 0.
  auto direction = [&](const WorkingEntry& cand) {
    const auto nw = static_cast<Index>(work.size());
    const auto kc = kcol(cand);
    if (nw == 0) {
      z = -kc;
      r.resize(0);
      return;
    }
    MatrixXd s(nw, nw);
    VectorXd rhs(nw);
    for (Index i = 0; i < nw; ++i) {
      const auto ni = normal(work[static_cast<std::size_t>(i)]);
      rhs[i] = -ni.dot(kc);
      for (Index j = 0; j <= i; ++j) {
        s(i, j) = ni.dot(kcol(work[static_cast<std::size_t>(j)]));
        s(j, i) = s(i, j);
      }
    }
    r = s.fullPivLu().solve(rhs);
    z = -kc;
    for (Index i = 0; i < nw; ++i) { z.noalias() -= r[i] * kcol(work[static_cast<std::size_t>(i)]); }
  };

  auto finish = [&](QpStatus status, int iters) {
    sol.y = y;
    sol.status = status;
    sol.iterations = iters;
    sol.active_ineq.clear();
    for (const auto& e : work) {
      if (e.is_eq) {
        sol.eq_mult[e.index] = e.mult;
      } else {
        sol.ineq_mult[e.index] = e.mult;
        sol.active_ineq.push_back(e.index);
      }
    }
    sol.kkt_residual = kkt_residual(qp, sol);
    if (status == QpStatus::optimal) {
      last_active_ = sol.active_ineq;
      last_dim_ = n;
      last_n_ineq_ = mi;
    }
    return sol;
  };

  // Equalities first; their multipliers are free in sign.
  for (Index i = 0; i < me; ++i) {
    const WorkingEntry cand{true, i, 0.0};
    const auto a = normal(cand);
    const double s = a.dot(y) - qp.eq_rhs[i];
    direction(cand);
    const double curv = -a.dot(z);
    if (curv <= kDependenceTol * a.dot(kcol(cand))) {
      if (std::abs(s) <= tol * (1.0 + std::abs(qp.eq_rhs[i]))) { continue; }
      return finish(QpStatus::infeasible, 0);
    }
    const double t = s / curv;
    y.noalias() += t * z;
    for (std::size_t k = 0; k < work.size(); ++k) { work[k].mult += t * r[static_cast<Index>(k)]; }
    work.push_back({true, i, t});
  }

  std::vector<char> in_work(static_cast<std::size_t>(mi), 0);
  std::vector<char> warm(static_cast<std::size_t>(mi), 0);
  if (settings_.warm_start && last_dim_ == n && last_n_ineq_ == mi) {
    for (Index j : last_active_) { warm[static_cast<std::size_t>(j)] = 1; }
  }
  VectorXd row_norm(mi);
  for (Index j = 0; j < mi; ++j) { row_norm[j] = std::max(qp.ineq_mat.row(j).norm(), 1e-300); }

  int iters = 0;
  while (true) {
    // Pick the most violated inactive inequality, previous working set first.
    Index p = -1;
    double best = 0.0;
    bool best_warm = false;
    for (Index j = 0; j < mi; ++j) {
      if (in_work[static_cast<std::size_t>(j)]) { continue; }
      const double s = qp.ineq_mat.row(j).dot(y) - qp.ineq_rhs[j];
      if (s <= tol * (1.0 + std::abs(qp.ineq_rhs[j]))) { continue; }
      const double score = s / row_norm[j];
      const bool is_warm = warm[static_cast<std::size_t>(j)] != 0;
      if (p < 0 || (is_warm && !best_warm) || (is_warm == best_warm && score > best)) {
        p = j;
        best = score;
        best_warm = is_warm;
      }
    }
    if (p < 0) { return finish(QpStatus::optimal, iters); }

    const WorkingEntry cand{false, p, 0.0};
    const auto a = normal(cand);
    const double a_ka = a.dot(kcol(cand));
    double s_p = a.dot(y) - qp.ineq_rhs[p];
    double mult_p = 0.0;

    while (true) {
      if (++iters > settings_.max_iter) { return finish(QpStatus::max_iter, iters - 1); }
      direction(cand);
      const double curv = -a.dot(z);
      const bool dependent = curv <= kDependenceTol * a_ka;

      double t1 = kInf;
      std::size_t block = work.size();
      for (std::size_t k = 0; k < work.size(); ++k) {
        if (work[k].is_eq) { continue; }
        const double rk = r[static_cast<Index>(k)];
        if (rk < 0.0) {
          const double ratio = -work[k].mult / rk;
          if (ratio < t1) {
            t1 = ratio;
            block = k;
          }
        }
      }
      const double t2 = dependent ? kInf : s_p / curv;
      const double t = std::min(t1, t2);
      if (!std::isfinite(t)) { return finish(QpStatus::infeasible, iters); }

      if (!dependent) {
        y.noalias() += t * z;
        s_p -= t * curv;
      }
      for (std::size_t k = 0; k < work.size(); ++k) { work[k].mult += t * r[static_cast<Index>(k)]; }
      mult_p += t;

      if (!dependent && t2 <= t1) {
        work.push_back({false, p, mult_p});
        in_work[static_cast<std::size_t>(p)] = 1;
        break;
      }
      in_work[static_cast<std::size_t>(work[block].index)] = 0;
      work.erase(work.begin() + static_cast<std::ptrdiff_t>(block));
    }
  }
}

QpSolution solve_qp(const QpProblem& qp, double tol, int max_iter)
{
  QpSolver solver(QpSettings{tol, max_iter, false});
  return solver.solve(qp);
}

}  // namespace stgf
