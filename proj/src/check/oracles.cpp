#include "stgf/check/oracles.hpp"

#include "stgf/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace stgf::check {

VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h)
{
  VectorXd g(x.size());
  VectorXd xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const double fp = f(xp);
    xp[i] = x[i] - step;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x, double h)
{
  const VectorXd f0 = f(x);
  MatrixXd jac(f0.size(), x.size());
  VectorXd xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + step;
    const VectorXd fp = f(xp);
    xp[i] = x[i] - step;
    const VectorXd fm = f(xp);
    xp[i] = x[i];
    jac.col(i) = (fp - fm) / (2.0 * step);
  }
  return jac;
}

double scaled_error(const MatrixXd& a, const MatrixXd& b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) { throw DimensionError("scaled_error: shape mismatch"); }
  if (a.size() == 0) { return 0.0; }
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

double qp_objective(const QpProblem& qp, const VectorXd& y)
{
  return 0.5 * y.dot(qp.hess * y) + qp.lin.dot(y);
}

namespace {

// Visits all k-subsets of {0..m-1} in lexicographic order until fn returns true.
template <class Fn>
bool for_each_subset(Index m, Index k, Fn fn)
{
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) { idx[static_cast<std::size_t>(i)] = i; }
  while (true) {
    if (fn(idx)) { return true; }
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - k + i) { --i; }
    if (i < 0) { return false; }
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) { idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1; }
  }
}

}  // namespace

OracleSolution enumerate_qp(const QpProblem& qp, double tol, int max_active)
{
  const Index n = qp.dim();
  const Index mi = qp.n_ineq();
  const Index me = qp.n_eq();
  const Index kmax = max_active < 0 ? mi : std::min<Index>(mi, max_active);

  OracleSolution best;
  best.ineq_mult = VectorXd::Zero(mi);
  best.eq_mult = VectorXd::Zero(me);

  for (Index k = 0; k <= kmax; ++k) {
    const bool done = for_each_subset(mi, k, [&](const std::vector<Index>& set) {
      ++best.subsets_tried;
      const Index mc = me + k;
      MatrixXd kkt = MatrixXd::Zero(n + mc, n + mc);
      VectorXd rhs(n + mc);
      kkt.topLeftCorner(n, n) = qp.hess;
      rhs.head(n) = -qp.lin;
      MatrixXd a(mc, n);
      VectorXd b(mc);
      if (me > 0) {
        a.topRows(me) = qp.eq_mat;
        b.head(me) = qp.eq_rhs;
      }
      for (Index j = 0; j < k; ++j) {
        a.row(me + j) = qp.ineq_mat.row(set[static_cast<std::size_t>(j)]);
        b[me + j] = qp.ineq_rhs[set[static_cast<std::size_t>(j)]];
      }
      kkt.topRightCorner(n, mc) = a.transpose();
      kkt.bottomLeftCorner(mc, n) = a;
      rhs.tail(mc) = b;

      const VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const VectorXd y = sol.head(n);
      const VectorXd lam = sol.tail(mc);

      const double scale = 1.0 + qp.hess.cwiseAbs().maxCoeff() * std::max(1.0, y.cwiseAbs().maxCoeff())
                           + qp.lin.cwiseAbs().maxCoeff();
      if ((kkt * sol - rhs).cwiseAbs().maxCoeff() > 1e3 * tol * scale) { return false; }
      for (Index j = 0; j < k; ++j) {
        if (lam[me + j] < -tol * scale) { return false; }
      }
      for (Index i = 0; i < mi; ++i) {
        if (qp.ineq_mat.row(i).dot(y) - qp.ineq_rhs[i] > tol * (1.0 + std::abs(qp.ineq_rhs[i])) * scale) {
          return false;
        }
      }
      best.y = y;
      best.eq_mult = lam.head(me);
      for (Index j = 0; j < k; ++j) { best.ineq_mult[set[static_cast<std::size_t>(j)]] = lam[me + j]; }
      best.objective = qp_objective(qp, y);
      best.found = true;
      return true;
    });
    if (done) { break; }
  }
  return best;
}

OracleSolution primal_direction(const NlpEval& e, const ClassKappaSpec& kappa)
{
  const Index n = e.grad.size();
  QpProblem qp;
  qp.hess = MatrixXd::Identity(n, n);
  qp.lin = e.grad;
  qp.ineq_mat = e.g.size() > 0 ? e.jac_g : MatrixXd(0, n);
  qp.ineq_rhs = -kappa.ineq(e.g);
  qp.eq_mat = e.h.size() > 0 ? e.jac_h : MatrixXd(0, n);
  qp.eq_rhs = -kappa.eq(e.h);
  return enumerate_qp(qp);
}

}  // namespace stgf::check
