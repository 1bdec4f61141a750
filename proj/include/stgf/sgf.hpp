#pragma once

/**
 * @file
 * @brief Safe gradient flow for  min c(w)  s.t.  g(w) <= 0,  h(w) = 0.
 *
 * The flow is
 *
 *   dw/ds = -grad c - Jg' mu - Jh' nu
 *
 * where (mu, nu) is the minimum-norm correction that keeps the constraint
 * set forward invariant:
 *
 *   min  || Jg' mu + Jh' nu ||^2
 *   s.t. -Jg Jg' mu - Jg Jh' nu <= Jg grad c - alpha(g)
 *        -Jh Jg' mu - Jh Jh' nu  = Jh grad c - alpha_eq(h)
 *
 * The multipliers are not sign-constrained in this QP.
 */

#include "stgf/qp.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace stgf {

/// Values and first derivatives of an NLP at one point.
struct NlpEval
{
  double cost = 0.0;
  VectorXd grad;
  VectorXd g;      ///< inequality values, feasible when <= 0
  MatrixXd jac_g;  ///< rows(g) x dim
  VectorXd h;
  MatrixXd jac_h;  ///< rows(h) x dim
};

struct NlpFunctions
{
  Index dim = 0;
  /// Fills `out` at `w`. Must be callable concurrently if shared between engines.
  std::function<void(const VectorXd& w, NlpEval& out)> eval;

  NlpEval operator()(const VectorXd& w) const;
};

/// Extended class-kappa style function used in the invariance constraints.
struct ClassKappa
{
  enum class Kind : std::uint8_t {
    exponential,          ///< a e^{r z}; nonzero at z = 0
    shifted_exponential,  ///< a (e^{r z} - 1)
    linear,               ///< a z
  };

  Kind kind = Kind::shifted_exponential;
  double gain = 20.0;
  double rate = 10.0;

  double operator()(double z) const;
  VectorXd operator()(const VectorXd& z) const;
  bool vanishes_at_zero() const { return kind != Kind::exponential; }
  void validate() const;
};

const char* to_string(ClassKappa::Kind k);
std::optional<ClassKappa::Kind> parse_kappa_kind(const std::string& s);

struct ClassKappaSpec
{
  ClassKappa ineq{};
  ClassKappa eq{ClassKappa::Kind::linear, 20.0, 1.0};
};

struct FlowResult
{
  VectorXd direction;
  VectorXd mu;
  VectorXd nu;
  QpStatus qp_status = QpStatus::optimal;
  int qp_iterations = 0;
  double qp_kkt = 0.0;
};

/// The correction QP is infeasible. Carries diagnostics for the caller's fallback policy.
class QpInfeasibleError : public std::runtime_error
{
public:
  struct Diagnostics
  {
    Index n_ineq = 0;
    Index n_eq = 0;
    Index zero_gradient_rows = 0;  ///< inequality rows with ||grad g_i|| == 0
    double min_ineq_rhs = 0.0;     ///< smallest entry of Jg grad c - alpha(g)
  };

  QpInfeasibleError(const std::string& what, Diagnostics d) : std::runtime_error(what), diag_(d) {}
  const Diagnostics& diagnostics() const { return diag_; }

private:
  Diagnostics diag_;
};

struct FlowSummary
{
  VectorXd w;
  VectorXd mu;
  VectorXd nu;
  double direction_norm = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Builds the correction QP of the flow at a point.
QpProblem build_correction_qp(const NlpEval& e, const ClassKappaSpec& kappa);

/**
 * @brief KKT residual of the NLP: max of ||grad c + Jg' mu + Jh' nu||_inf,
 * max(g, 0), |h|, max(-mu, 0) and |mu_i g_i|.
 */
double nlp_kkt_residual(const NlpEval& e, const VectorXd& mu, const VectorXd& nu);
double nlp_kkt_residual(const NlpFunctions& nlp, const VectorXd& w, const VectorXd& mu, const VectorXd& nu);

/**
 * @brief Flow engine. Owns a QP workspace, so use one instance per thread.
 */
class SafeGradientFlow
{
public:
  explicit SafeGradientFlow(QpSettings qp = QpSettings{1e-9, 500, true});

  /// Throws QpInfeasibleError when the correction QP has no solution.
  FlowResult direction(const NlpFunctions& nlp, const VectorXd& w, const ClassKappaSpec& kappa);
  FlowResult direction(const NlpEval& e, const ClassKappaSpec& kappa);

  /// w + xi * direction.
  VectorXd step(const NlpFunctions& nlp, const VectorXd& w, const ClassKappaSpec& kappa, double xi);

  /**
   * @brief Euler steps of the flow until ||direction|| <= tol or max_iters.
   *
   * Returns the last iterate together with the KKT residual recomputed from
   * the NLP at that point. An infeasible correction QP ends the run
   * (converged = false) with the last good iterate.
   */
  FlowSummary flow_to_convergence(
    const NlpFunctions& nlp, const VectorXd& w0, const ClassKappaSpec& kappa, double xi, double tol, int max_iters);

  QpSolver& qp_solver() { return qp_; }

private:
  QpSolver qp_;
  NlpEval eval_;
};

}  // namespace stgf
