#include "stgf/sgf.hpp"

#include "stgf/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stgf {

NlpEval NlpFunctions::operator()(const VectorXd& w) const
{
  NlpEval e;
  eval(w, e);
  return e;
}

double ClassKappa::operator()(double z) const
{
  switch (kind) {
  case Kind::exponential:
    return gain * std::exp(rate * z);
  case Kind::shifted_exponential:
    return gain * std::expm1(rate * z);
  case Kind::linear:
    return gain * z;
  }
  return 0.0;
}

VectorXd ClassKappa::operator()(const VectorXd& z) const
{
  return z.unaryExpr([this](double v) { return (*this)(v); });
}

void ClassKappa::validate() const
{
  if (!(gain > 0)) { throw std::invalid_argument("class-kappa gain must be > 0"); }
  if (kind != Kind::linear && !(rate > 0)) { throw std::invalid_argument("class-kappa rate must be > 0"); }
}

const char* to_string(ClassKappa::Kind k)
{
  switch (k) {
  case ClassKappa::Kind::exponential:
    return "exponential";
  case ClassKappa::Kind::shifted_exponential:
    return "shifted_exponential";
  case ClassKappa::Kind::linear:
    return "linear";
  }
  return "unknown";
}

std::optional<ClassKappa::Kind> parse_kappa_kind(const std::string& s)
{
  if (s == "exponential") { return ClassKappa::Kind::exponential; }
  if (s == "shifted_exponential") { return ClassKappa::Kind::shifted_exponential; }
  if (s == "linear") { return ClassKappa::Kind::linear; }
  return std::nullopt;
}

QpProblem build_correction_qp(const NlpEval& e, const ClassKappaSpec& kappa)
{
  const Index n = e.grad.size();
  const Index l = e.g.size();
  const Index k = e.h.size();
  if (e.jac_g.rows() != l || (l > 0 && e.jac_g.cols() != n) || e.jac_h.rows() != k || (k > 0 && e.jac_h.cols() != n)) {
    throw DimensionError("NLP Jacobian shapes do not match value counts");
  }

  MatrixXd jac(l + k, n);
  if (l > 0) { jac.topRows(l) = e.jac_g; }
  if (k > 0) { jac.bottomRows(k) = e.jac_h; }
  const MatrixXd gram = jac * jac.transpose();

  QpProblem qp;
  qp.hess = gram + gram.transpose();
  qp.lin = VectorXd::Zero(l + k);
  qp.ineq_mat = -gram.topRows(l);
  qp.ineq_rhs = (l > 0 ? VectorXd(e.jac_g * e.grad) : VectorXd(0)) - kappa.ineq(e.g);
  qp.eq_mat = -gram.bottomRows(k);
  qp.eq_rhs = (k > 0 ? VectorXd(e.jac_h * e.grad) : VectorXd(0)) - kappa.eq(e.h);
  return qp;
}

double nlp_kkt_residual(const NlpEval& e, const VectorXd& mu, const VectorXd& nu)
{
  if (mu.size() != e.g.size() || nu.size() != e.h.size()) {
    throw DimensionError("multiplier sizes do not match constraint counts");
  }
  VectorXd stat = e.grad;
  if (mu.size() > 0) { stat.noalias() += e.jac_g.transpose() * mu; }
  if (nu.size() > 0) { stat.noalias() += e.jac_h.transpose() * nu; }
  double res = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  if (e.g.size() > 0) {
    res = std::max(res, e.g.cwiseMax(0.0).maxCoeff());
    res = std::max(res, (-mu).cwiseMax(0.0).maxCoeff());
    res = std::max(res, mu.cwiseProduct(e.g).cwiseAbs().maxCoeff());
  }
  if (e.h.size() > 0) { res = std::max(res, e.h.cwiseAbs().maxCoeff()); }
  return res;
}

double nlp_kkt_residual(const NlpFunctions& nlp, const VectorXd& w, const VectorXd& mu, const VectorXd& nu)
{
  return nlp_kkt_residual(nlp(w), mu, nu);
}

SafeGradientFlow::SafeGradientFlow(QpSettings qp) : qp_(qp) {}

FlowResult SafeGradientFlow::direction(const NlpFunctions& nlp, const VectorXd& w, const ClassKappaSpec& kappa)
{
  if (w.size() != nlp.dim) { throw DimensionError("decision vector size does not match NLP dimension"); }
  nlp.eval(w, eval_);
  return direction(eval_, kappa);
}

FlowResult SafeGradientFlow::direction(const NlpEval& e, const ClassKappaSpec& kappa)
{
  const Index l = e.g.size();
  const Index k = e.h.size();

  FlowResult out;
  if (l + k == 0) {
    out.direction = -e.grad;
    out.mu.resize(0);
    out.nu.resize(0);
    return out;
  }

  const QpProblem qp = build_correction_qp(e, kappa);
  const QpSolution sol = qp_.solve(qp);
  out.qp_status = sol.status;
  out.qp_iterations = sol.iterations;
  out.qp_kkt = sol.kkt_residual;
  if (sol.status == QpStatus::infeasible) {
    QpInfeasibleError::Diagnostics d;
    d.n_ineq = l;
    d.n_eq = k;
    for (Index i = 0; i < l; ++i) {
      if (e.jac_g.row(i).squaredNorm() == 0.0) { ++d.zero_gradient_rows; }
    }
    d.min_ineq_rhs = l > 0 ? qp.ineq_rhs.minCoeff() : 0.0;
    throw QpInfeasibleError(
      "safe gradient flow QP infeasible (" + std::to_string(d.zero_gradient_rows)
        + " inequality rows with zero gradient)",
      d);
  }

  out.mu = sol.y.head(l);
  out.nu = sol.y.tail(k);
  out.direction = -e.grad;
  if (l > 0) { out.direction.noalias() -= e.jac_g.transpose() * out.mu; }
  if (k > 0) { out.direction.noalias() -= e.jac_h.transpose() * out.nu; }
  return out;
}

VectorXd SafeGradientFlow::step(const NlpFunctions& nlp, const VectorXd& w, const ClassKappaSpec& kappa, double xi)
{
  if (!(xi > 0)) { throw std::invalid_argument("flow step size must be > 0"); }
  return w + xi * direction(nlp, w, kappa).direction;
}

FlowSummary SafeGradientFlow::flow_to_convergence(
  const NlpFunctions& nlp, const VectorXd& w0, const ClassKappaSpec& kappa, double xi, double tol, int max_iters)
{
  if (!w0.allFinite()) { throw std::invalid_argument("flow start point is not finite"); }
  if (!(xi > 0)) { throw std::invalid_argument("flow step size must be > 0"); }

  FlowSummary out;
  out.w = w0;
  int it = 0;
  while (true) {
    FlowResult f;
    try {
      f = direction(nlp, out.w, kappa);
    } catch (const QpInfeasibleError&) {
      out.converged = false;
      break;
    }
    out.mu = f.mu;
    out.nu = f.nu;
    out.direction_norm = f.direction.norm();
    if (out.direction_norm <= tol) {
      out.converged = true;
      break;
    }
    if (it >= max_iters) { break; }
    out.w.noalias() += xi * f.direction;
    ++it;
  }
  out.iterations = it;
  if (out.mu.size() == 0 && out.nu.size() == 0) {
    const NlpEval e = nlp(out.w);
    out.mu = VectorXd::Zero(e.g.size());
    out.nu = VectorXd::Zero(e.h.size());
  }
  out.kkt_residual = nlp_kkt_residual(nlp, out.w, out.mu, out.nu);
  return out;
}

}  // namespace stgf
