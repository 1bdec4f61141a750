#pragma once

/**
 * @file
 * @brief Reference computations used to cross-check the solvers. They favour
 * simplicity over speed and share no code with the solvers they test.
 */

#include "stgf/qp.hpp"
#include "stgf/sgf.hpp"

#include <functional>

namespace stgf::check {

/// Central differences with step h * max(1, |x_i|).
VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x, double h = 1e-6);
MatrixXd fd_jacobian(const std::function<VectorXd(const VectorXd&)>& f, const VectorXd& x, double h = 1e-6);

/// max |a - b| / max(1, max |b|).
double scaled_error(const MatrixXd& a, const MatrixXd& b);

struct OracleSolution
{
  VectorXd y;
  VectorXd ineq_mult;
  VectorXd eq_mult;
  double objective = 0.0;
  bool found = false;
  long subsets_tried = 0;
};

/**
 * @brief Strictly convex QP by active-set enumeration.
 *
 * Subsets of inequalities are tried in order of size. For each one the
 * equality-constrained KKT system is solved directly; the first candidate that
 * is primal feasible with nonnegative multipliers is the unique optimum.
 */
OracleSolution enumerate_qp(const QpProblem& qp, double tol = 1e-9, int max_active = -1);

double qp_objective(const QpProblem& qp, const VectorXd& y);

/**
 * @brief Flow direction computed directly over the velocity:
 * min 1/2 |v + grad c|^2 s.t. Jg v <= -alpha(g), Jh v = -alpha_eq(h).
 */
OracleSolution primal_direction(const NlpEval& e, const ClassKappaSpec& kappa);

}  // namespace stgf::check
