#pragma once

/**
 * @file
 * @brief Small dense convex QP solver.
 *
 * Solves
 *
 *   min  1/2 y' P y + q' y
 *   s.t. A y <= b,   E y = d
 *
 * with P symmetric positive semi-definite. A Tikhonov term eps I with
 * eps = 1e-10 (1 + trace(P)/n) is always added so the minimizer is unique.
 *
 * The method is a dual active-set scheme in the Goldfarb-Idnani family: start
 * from the unconstrained minimizer, add equalities, then repeatedly add the
 * most violated inequality while keeping the active multipliers nonnegative.
 * Constraint directions G^{-1} a_j are factorized once per solve; each
 * iteration solves the Schur system of the working set.
 */

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace stgf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct QpProblem
{
  MatrixXd hess;      ///< P, n x n
  VectorXd lin;       ///< q, n
  MatrixXd ineq_mat;  ///< A, m_i x n
  VectorXd ineq_rhs;  ///< b, m_i
  MatrixXd eq_mat;    ///< E, m_e x n
  VectorXd eq_rhs;    ///< d, m_e

  Index dim() const { return lin.size(); }
  Index n_ineq() const { return ineq_rhs.size(); }
  Index n_eq() const { return eq_rhs.size(); }

  /// Empty constraint blocks with the right column count.
  static QpProblem unconstrained(MatrixXd hess, VectorXd lin);

  /// Throws DimensionError / std::invalid_argument on inconsistent sizes or asymmetric P.
  void validate() const;
};

enum class QpStatus : std::uint8_t { optimal, infeasible, max_iter };

const char* to_string(QpStatus s);

struct QpSolution
{
  VectorXd y;
  VectorXd ineq_mult;  ///< >= 0 at optimality
  VectorXd eq_mult;
  QpStatus status = QpStatus::max_iter;
  double kkt_residual = 0.0;
  int iterations = 0;
  std::vector<Index> active_ineq;  ///< working-set inequalities at exit
};

struct QpSettings
{
  double tol = 1e-9;
  int max_iter = 500;
  bool warm_start = true;
};

/**
 * @brief Max of stationarity, primal violation, multiplier sign violation and
 * complementarity, evaluated against the unregularized problem.
 */
double kkt_residual(const QpProblem& qp, const QpSolution& sol);

/// Regularization added to P when its Cholesky factorization fails.
double tikhonov_epsilon(const MatrixXd& hess);

/**
 * @brief Reusable solver with workspace and warm-start memory.
 *
 * One instance per thread. The warm start only changes the order in which
 * violated inequalities enter the working set; the result does not depend on it.
 */
class QpSolver
{
public:
  QpSolver() = default;
  explicit QpSolver(QpSettings settings) : settings_(settings) {}

  QpSolution solve(const QpProblem& qp);

  const QpSettings& settings() const { return settings_; }
  QpSettings& settings() { return settings_; }

  /// Forget the previous working set.
  void reset() { last_active_.clear(); }

private:
  QpSettings settings_{};
  std::vector<Index> last_active_;
  Index last_dim_ = -1;
  Index last_n_ineq_ = -1;
};

/// One-shot convenience wrapper (cold start).
QpSolution solve_qp(const QpProblem& qp, double tol = 1e-9, int max_iter = 500);

}  // namespace stgf
