#pragma once

/**
 * @file
 * @brief Finite-horizon trajectory NLP built from the inverter model.
 *
 * Decision vector layout (x_0 is the measurement and is not a decision):
 *
 *   w = [x_1, ..., x_T, u_0, ..., u_{T-1}],   dim = 3T + 2T
 *
 * Cost      C(w) = sum_{tau=0}^{T-1} c(x_tau, u_tau) + c_f(x_T)
 * Ineq.     G_tau = g(x_tau),                       tau = 1..T
 * Eq.       H_tau = x_{tau+1} - F(x_tau, u_tau),   tau = 0..T-1  (F: Euler step)
 *           followed by optional per-step state equalities h(x_tau), tau = 1..T.
 */

#include "stgf/errors.hpp"
#include "stgf/model.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace stgf {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct HorizonSpec
{
  int horizon_t = 10;  ///< number of steps T
  double dt = 1e-3;    ///< [s]

  void validate() const;
  Index n_states() const { return 3 * static_cast<Index>(horizon_t); }
  Index n_inputs() const { return 2 * static_cast<Index>(horizon_t); }
  Index dim() const { return n_states() + n_inputs(); }
  /// Column of the first component of x_tau, tau in 1..T.
  Index state_col(int tau) const { return 3 * static_cast<Index>(tau - 1); }
  /// Column of the first component of u_tau, tau in 0..T-1.
  Index input_col(int tau) const { return n_states() + 2 * static_cast<Index>(tau); }
};

struct TrajectoryDecision
{
  State x0;                   ///< measured, fixed
  std::vector<State> states;  ///< x_1 .. x_T
  std::vector<Input> inputs;  ///< u_0 .. u_{T-1}

  /// State at horizon index tau in 0..T (0 is the measurement).
  const State& state_at(int tau) const { return tau == 0 ? x0 : states[static_cast<std::size_t>(tau - 1)]; }

  VectorXd flatten() const;
  static TrajectoryDecision unflatten(const State& x0, const Eigen::Ref<const VectorXd>& w, const HorizonSpec& spec);
  void check(const HorizonSpec& spec) const;
};

/// Optional equality constraint h(x) = 0 imposed on every predicted state.
struct StepEquality
{
  Index rows = 0;
  /// Writes h(x) into values (rows) and dh/dx into jac (rows x 3).
  std::function<void(const State&, Eigen::Ref<VectorXd> values, Eigen::Ref<MatrixXd> jac)> eval;
};

struct StackedEval
{
  double c_val = 0.0;
  VectorXd c_grad;
  VectorXd g_vals;
  MatrixXd g_jac;
  VectorXd h_vals;
  MatrixXd h_jac;
};

/// Everything needed to evaluate C, G, H besides the decision itself.
struct TrajectoryProblem
{
  HorizonSpec spec;
  PlantParams plant;
  CostParams cost;
  GridSignals grid;
  StepEquality extra_eq;  ///< rows == 0 disables it
};

/// x_{tau+1} = F(x_tau, u_tau); returns x_1..x_T.
std::vector<State> rollout(
  const State& x0, const std::vector<Input>& inputs, const GridSignals& g, const PlantParams& p, const HorizonSpec& spec);

StackedEval eval_stacked(const TrajectoryDecision& w, const TrajectoryProblem& problem);

/// In-place variant that reuses the storage of `out`.
void eval_stacked(const TrajectoryDecision& w, const TrajectoryProblem& problem, StackedEval& out);

}  // namespace stgf
