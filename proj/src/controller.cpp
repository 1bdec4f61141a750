#include "stgf/controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stgf {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point start)
{
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

}  // namespace

NlpFunctions trajectory_nlp(TrajectoryProblem problem, const State& x0)
{
  NlpFunctions nlp;
  nlp.dim = problem.spec.dim();
  nlp.eval = [problem = std::move(problem), x0](const VectorXd& w, NlpEval& out) {
    const TrajectoryDecision d = TrajectoryDecision::unflatten(x0, w, problem.spec);
    StackedEval s;
    eval_stacked(d, problem, s);
    out.cost = s.c_val;
    out.grad = std::move(s.c_grad);
    out.g = std::move(s.g_vals);
    out.jac_g = std::move(s.g_jac);
    out.h = std::move(s.h_vals);
    out.jac_h = std::move(s.h_jac);
  };
  return nlp;
}

void StgfConfig::validate() const
{
  spec.validate();
  if (k_updates < 0) { throw std::invalid_argument("k_updates must be >= 0"); }
  if (!(xi > 0)) { throw std::invalid_argument("xi must be > 0"); }
  if (n_steps < 0) { throw std::invalid_argument("n_steps must be >= 0"); }
  kappa.ineq.validate();
  kappa.eq.validate();
}

StgfController::StgfController(PlantParams plant, CostParams cost, StgfConfig cfg)
  : plant_(plant), cost_(cost), cfg_(cfg), flow_(cfg.qp)
{
  plant_.validate();
  cost_.validate();
  cfg_.validate();
  init(State{}, Input{cost_.v_nom, cost_.omega_nom}, GridSignals{});
}

void StgfController::init(const State& x0, const Input& u_init, const GridSignals& g)
{
  inputs_.assign(static_cast<std::size_t>(cfg_.spec.horizon_t), u_init);
  states_ = rollout(x0, inputs_, g, plant_, cfg_.spec);
  optimized_ = TrajectoryDecision{x0, states_, inputs_};
  last_direction_.resize(0);
  flow_.qp_solver().reset();
  diag_ = {};
}

void StgfController::reset(const State& x0, const Input& u0, const GridSignals& g, const Reference& ref)
{
  cost_.p_ref = ref.p_ref;
  cost_.q_ref = ref.q_ref;
  init(x0, u0, g);
}

void StgfController::set_inputs(std::vector<Input> inputs)
{
  if (inputs.size() != static_cast<std::size_t>(cfg_.spec.horizon_t)) {
    throw DimensionError("input trajectory length must equal the horizon");
  }
  inputs_ = std::move(inputs);
}

ControlOutput StgfController::step(const State& x_meas, const GridSignals& g, const Reference& ref)
{
  const auto start = Clock::now();
  cost_.p_ref = ref.p_ref;
  cost_.q_ref = ref.q_ref;
  diag_ = {};

  const TrajectoryProblem problem{cfg_.spec, plant_, cost_, g, {}};
  states_ = rollout(x_meas, inputs_, g, plant_, cfg_.spec);
  VectorXd w = TrajectoryDecision{x_meas, states_, inputs_}.flatten();
  const NlpFunctions nlp = trajectory_nlp(problem, x_meas);

  for (int j = 0; j < cfg_.k_updates; ++j) {
    VectorXd dir;
    try {
      FlowResult f = flow_.direction(nlp, w, cfg_.kappa);
      diag_.qp_status = f.qp_status;
      dir = std::move(f.direction);
    } catch (const QpInfeasibleError&) {
      ++diag_.infeasible_updates;
      diag_.qp_status = QpStatus::infeasible;
      dir = last_direction_.size() == w.size() ? VectorXd(0.5 * last_direction_) : VectorXd::Zero(w.size());
    }
    diag_.direction_norm = dir.norm();
    w.noalias() += cfg_.xi * dir;
    last_direction_ = std::move(dir);
  }
  diag_.wall_time_us = elapsed_us(start);

  optimized_ = TrajectoryDecision::unflatten(x_meas, w, cfg_.spec);
  const StackedEval check = eval_stacked(optimized_, problem);
  diag_.max_g = check.g_vals.maxCoeff();
  diag_.max_h = check.h_vals.cwiseAbs().maxCoeff();

  ControlOutput out;
  out.u = optimized_.inputs.front();
  out.solve_time_us = diag_.wall_time_us;
  out.qp_infeasible = diag_.infeasible_updates > 0;
  out.plan_max_g = diag_.max_g;

  states_ = optimized_.states;
  inputs_ = optimized_.inputs;
  std::rotate(inputs_.begin(), inputs_.begin() + 1, inputs_.end());
  inputs_.back() = optimized_.inputs.back();
  return out;
}

// ---------------------------------------------------------------------------

NlpFunctions equilibrium_nlp(const CostParams& c, const PlantParams& p, const GridSignals& g)
{
  NlpFunctions nlp;
  nlp.dim = 5;
  nlp.eval = [c, p, g](const VectorXd& z, NlpEval& out) {
    const State x{z[0], z[1], z[2]};
    const Input u{z[3], z[4]};
    const CostEval ce = stage_cost(x, u, g, c, p.k_pq);
    out.cost = ce.value;
    out.grad.resize(5);
    out.grad << ce.grad_x, ce.grad_u;

    out.g.resize(1);
    out.g[0] = current_limit(x, p);
    out.jac_g.setZero(1, 5);
    out.jac_g.block<1, 3>(0, 0) = current_limit_grad(x, p).transpose();

    const DynamicsJacobians j = dynamics_jacobians(x, u, g, p);
    out.h = continuous_dynamics(x, u, g, p);
    out.jac_h.resize(3, 5);
    out.jac_h << j.a, j.b;
  };
  return nlp;
}

EquilibriumResult solve_equilibrium(
  const CostParams& c, const PlantParams& p, const GridSignals& g, double tol, const EquilibriumOptions& opts)
{
  if (!(tol > 0)) { throw std::invalid_argument("equilibrium tolerance must be > 0"); }
  const NlpFunctions nlp = equilibrium_nlp(c, p, g);

  VectorXd z0(5);
  if (opts.start_from_nominal) {
    z0 << 0.0, 0.0, 0.0, c.v_nom, c.omega_nom;
  } else {
    z0 << opts.x_start.vec(), opts.u_start.vec();
  }

  SafeGradientFlow flow(QpSettings{1e-12, 200, false});
  // The dynamics residual is in pu/s, so the direction has to be driven well below tol.
  const FlowSummary fs = flow.flow_to_convergence(nlp, z0, opts.kappa, opts.xi, 1e-4 * tol, opts.max_iters);

  EquilibriumResult res;
  res.iterations = fs.iterations;
  State x = State::from(fs.w.head<3>());
  const Input u = Input::from(fs.w.tail<2>());

  double gv = current_limit(x, p);
  if (gv > 0.0 && gv <= tol) {
    const double scale = p.i_max / x.current_magnitude();
    x.i_d *= scale;
    x.i_q *= scale;
    while (current_limit(x, p) > 0.0) {
      x.i_d = std::nextafter(x.i_d, 0.0);
      x.i_q = std::nextafter(x.i_q, 0.0);
    }
    gv = current_limit(x, p);
  }

  VectorXd z(5);
  z << x.vec(), u.vec();
  const VectorXd mu = fs.mu.size() == 1 ? fs.mu : VectorXd::Zero(1);
  const VectorXd nu = fs.nu.size() == 3 ? fs.nu : VectorXd::Zero(3);
  res.x = x;
  res.u = u;
  res.kkt = nlp_kkt_residual(nlp, z, mu, nu);
  res.mu = mu[0];
  res.g_val = gv;
  res.cost = stage_cost(x, u, g, c, p.k_pq).value;
  res.pq = power_output(x, g, p.k_pq);
  res.converged = res.kkt <= tol && gv <= 0.0;
  res.constraint_active = res.mu > tol && gv >= -1e-4;
  return res;
}

}  // namespace stgf
