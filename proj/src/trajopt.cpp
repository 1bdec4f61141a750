#include "stgf/trajopt.hpp"

#include <string>

namespace stgf {

void HorizonSpec::validate() const
{
  if (horizon_t < 2) { throw std::invalid_argument("horizon must be >= 2 steps"); }
  if (!(dt > 0)) { throw std::invalid_argument("horizon dt must be > 0"); }
}

void TrajectoryDecision::check(const HorizonSpec& spec) const
{
  const auto t = static_cast<std::size_t>(spec.horizon_t);
  if (states.size() != t || inputs.size() != t) {
    throw DimensionError(
      "trajectory has " + std::to_string(states.size()) + " states and " + std::to_string(inputs.size())
      + " inputs, horizon is " + std::to_string(t));
  }
}

VectorXd TrajectoryDecision::flatten() const
{
  const auto t = static_cast<Index>(states.size());
  VectorXd w(3 * t + 2 * static_cast<Index>(inputs.size()));
  for (Index k = 0; k < t; ++k) { w.segment<3>(3 * k) = states[static_cast<std::size_t>(k)].vec(); }
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    w.segment<2>(3 * t + 2 * static_cast<Index>(k)) = inputs[k].vec();
  }
  return w;
}

TrajectoryDecision TrajectoryDecision::unflatten(
  const State& x0, const Eigen::Ref<const VectorXd>& w, const HorizonSpec& spec)
{
  if (w.size() != spec.dim()) {
    throw DimensionError(
      "decision vector has size " + std::to_string(w.size()) + ", expected " + std::to_string(spec.dim()));
  }
  TrajectoryDecision out;
  out.x0 = x0;
  out.states.reserve(static_cast<std::size_t>(spec.horizon_t));
  out.inputs.reserve(static_cast<std::size_t>(spec.horizon_t));
  for (int tau = 1; tau <= spec.horizon_t; ++tau) {
    out.states.push_back(State::from(w.segment<3>(spec.state_col(tau))));
  }
  for (int tau = 0; tau < spec.horizon_t; ++tau) {
    out.inputs.push_back(Input::from(w.segment<2>(spec.input_col(tau))));
  }
  return out;
}

std::vector<State> rollout(
  const State& x0, const std::vector<Input>& inputs, const GridSignals& g, const PlantParams& p, const HorizonSpec& spec)
{
  if (inputs.size() != static_cast<std::size_t>(spec.horizon_t)) {
    throw DimensionError(
      "rollout got " + std::to_string(inputs.size()) + " inputs, horizon is " + std::to_string(spec.horizon_t));
  }
  std::vector<State> xs;
  xs.reserve(inputs.size());
  State x = x0;
  for (const auto& u : inputs) {
    x = discrete_dynamics(x, u, g, p, spec.dt);
    xs.push_back(x);
  }
  return xs;
}

StackedEval eval_stacked(const TrajectoryDecision& w, const TrajectoryProblem& problem)
{
  StackedEval out;
  eval_stacked(w, problem, out);
  return out;
}

void eval_stacked(const TrajectoryDecision& w, const TrajectoryProblem& problem, StackedEval& out)
{
  const HorizonSpec& spec = problem.spec;
  w.check(spec);

  const int T = spec.horizon_t;
  const Index n = spec.dim();
  const Index n_extra = problem.extra_eq.rows;
  const Index n_h = 3 * static_cast<Index>(T) + n_extra * T;
  const double dt = spec.dt;
  const double k_pq = problem.plant.k_pq;

  out.c_val = 0.0;
  out.c_grad.setZero(n);
  out.g_vals.resize(T);
  out.g_jac.setZero(T, n);
  out.h_vals.resize(n_h);
  out.h_jac.setZero(n_h, n);

  for (int tau = 0; tau < T; ++tau) {
    const State& x = w.state_at(tau);
    const Input& u = w.inputs[static_cast<std::size_t>(tau)];

    const CostEval c = stage_cost(x, u, problem.grid, problem.cost, k_pq);
    out.c_val += c.value;
    if (tau > 0) { out.c_grad.segment<3>(spec.state_col(tau)) += c.grad_x; }
    out.c_grad.segment<2>(spec.input_col(tau)) += c.grad_u;

    // Defect block: x_{tau+1} - x_tau - dt f(x_tau, u_tau)
    const Index row = 3 * static_cast<Index>(tau);
    const State& next = w.state_at(tau + 1);
    out.h_vals.segment<3>(row) = next.vec() - discrete_dynamics(x, u, problem.grid, problem.plant, dt).vec();

    const DynamicsJacobians jac = dynamics_jacobians(x, u, problem.grid, problem.plant);
    out.h_jac.block<3, 3>(row, spec.state_col(tau + 1)) = Mat3::Identity();
    if (tau > 0) { out.h_jac.block<3, 3>(row, spec.state_col(tau)) = -(Mat3::Identity() + dt * jac.a); }
    out.h_jac.block<3, 2>(row, spec.input_col(tau)) = -dt * jac.b;
  }

  const CostEval cf = terminal_cost(w.state_at(T), problem.grid, problem.cost, k_pq);
  out.c_val += cf.value;
  out.c_grad.segment<3>(spec.state_col(T)) += cf.grad_x;

  for (int tau = 1; tau <= T; ++tau) {
    const State& x = w.state_at(tau);
    out.g_vals[tau - 1] = current_limit(x, problem.plant);
    out.g_jac.block<1, 3>(tau - 1, spec.state_col(tau)) = current_limit_grad(x, problem.plant).transpose();
  }

  if (n_extra > 0) {
    MatrixXd jac(n_extra, 3);
    VectorXd vals(n_extra);
    for (int tau = 1; tau <= T; ++tau) {
      const Index row = 3 * static_cast<Index>(T) + n_extra * (tau - 1);
      problem.extra_eq.eval(w.state_at(tau), vals, jac);
      out.h_vals.segment(row, n_extra) = vals;
      out.h_jac.block(row, spec.state_col(tau), n_extra, 3) = jac;
    }
  }
}

}  // namespace stgf
