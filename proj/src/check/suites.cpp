#include "stgf/check/suites.hpp"

#include "stgf/check/oracles.hpp"
#include "stgf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stgf::check {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(Rng& rng, double sd)
{
  return std::normal_distribution<double>(0.0, sd)(rng);
}

State random_state(Rng& rng, double r_max)
{
  const double r = r_max * std::sqrt(uniform(rng, 0.0, 1.0));
  const double th = uniform(rng, -std::numbers::pi, std::numbers::pi);
  return {r * std::cos(th), r * std::sin(th), uniform(rng, -0.6, 0.6)};
}

Input random_input(Rng& rng, double omega_nom)
{
  return {uniform(rng, 0.85, 1.15), omega_nom + uniform(rng, -3.0, 3.0)};
}

void record(SuiteResult& r, double err, double tol, const std::string& what)
{
  ++r.cases;
  r.worst = std::max(r.worst, err);
  if (!(err <= tol)) {
    ++r.failures;
    if (r.detail.empty()) {
      std::ostringstream os;
      os << what << ": error " << err << " > " << tol;
      r.detail = os.str();
    }
  }
}

void finish(SuiteResult& r)
{
  r.passed = r.failures == 0;
  if (r.passed && r.detail.empty()) {
    std::ostringstream os;
    os << r.cases << " cases, worst " << r.worst;
    r.detail = os.str();
  }
}

/// Max |stationarity|, primal violation, negative multiplier, complementarity.
double independent_kkt(const QpProblem& qp, const QpSolution& s)
{
  VectorXd stat = qp.hess * s.y + qp.lin;
  if (qp.n_ineq() > 0) { stat += qp.ineq_mat.transpose() * s.ineq_mult; }
  if (qp.n_eq() > 0) { stat += qp.eq_mat.transpose() * s.eq_mult; }
  double r = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  for (Index i = 0; i < qp.n_ineq(); ++i) {
    const double slack = qp.ineq_mat.row(i).dot(s.y) - qp.ineq_rhs[i];
    r = std::max({r, slack, -s.ineq_mult[i], std::abs(slack * s.ineq_mult[i])});
  }
  for (Index i = 0; i < qp.n_eq(); ++i) { r = std::max(r, std::abs(qp.eq_mat.row(i).dot(s.y) - qp.eq_rhs[i])); }
  return r;
}

}  // namespace

SuiteResult gradient_suite(int n_points, std::uint64_t seed, double tol)
{
  SuiteResult r;
  r.name = "gradients";
  Rng rng(seed);

  for (int k = 0; k < n_points; ++k) {
    PlantParams p;
    p.iq_cross_coupling = (k % 4) == 3;
    p.k_pq = (k % 2) == 0 ? kDefaultPowerConstant : 1.0;
    GridSignals g{uniform(rng, 0.9, 1.1), p.omega_base + uniform(rng, -2.0, 2.0)};
    CostParams c;
    c.p_ref = uniform(rng, -3.0, 3.0);
    c.q_ref = uniform(rng, -1.0, 1.0);
    const State x = random_state(rng, 1.3);
    const Input u = random_input(rng, c.omega_nom);

    VectorXd z(5);
    z << x.vec(), u.vec();
    const auto xs = [](const VectorXd& v) { return State{v[0], v[1], v[2]}; };
    const auto us = [](const VectorXd& v) { return Input{v[3], v[4]}; };

    const DynamicsJacobians j = dynamics_jacobians(x, u, g, p);
    MatrixXd jac_an(3, 5);
    jac_an << j.a, j.b;
    const MatrixXd jac_fd = fd_jacobian([&](const VectorXd& v) { return VectorXd(continuous_dynamics(xs(v), us(v), g, p)); }, z);
    record(r, scaled_error(jac_an, jac_fd), tol, "dynamics Jacobian");

    const PowerJacobian pj = power_jacobian(x, g, p.k_pq);
    MatrixXd pq_an(2, 3);
    pq_an << pj.dp.transpose(), pj.dq.transpose();
    const MatrixXd pq_fd = fd_jacobian(
      [&](const VectorXd& v) {
        const PowerOutput o = power_output(xs(v), g, p.k_pq);
        return VectorXd(Eigen::Vector2d(o.p, o.q));
      },
      x.vec());
    record(r, scaled_error(pq_an, pq_fd), tol, "power Jacobian");

    const VectorXd gl_fd = fd_gradient([&](const VectorXd& v) { return current_limit(xs(v), p); }, x.vec());
    record(r, scaled_error(current_limit_grad(x, p), gl_fd), tol, "current-limit gradient");

    const CostEval sc = stage_cost(x, u, g, c, p.k_pq);
    VectorXd sc_an(5);
    sc_an << sc.grad_x, sc.grad_u;
    const VectorXd sc_fd = fd_gradient([&](const VectorXd& v) { return stage_cost(xs(v), us(v), g, c, p.k_pq).value; }, z);
    record(r, scaled_error(sc_an, sc_fd), tol, "stage-cost gradient");

    const CostEval tc = terminal_cost(x, g, c, p.k_pq);
    const VectorXd tc_fd = fd_gradient([&](const VectorXd& v) { return terminal_cost(xs(v), g, c, p.k_pq).value; }, x.vec());
    record(r, scaled_error(tc.grad_x, tc_fd), tol, "terminal-cost gradient");

    // Stacked trajectory functions.
    TrajectoryProblem prob{HorizonSpec{2 + k % 9, 1e-3}, p, c, g, {}};
    const Index n = prob.spec.dim();
    const State x0 = random_state(rng, 1.0);
    VectorXd w(n);
    for (int t = 1; t <= prob.spec.horizon_t; ++t) {
      w.segment<3>(prob.spec.state_col(t)) = random_state(rng, 1.3).vec();
      w.segment<2>(prob.spec.input_col(t - 1)) = random_input(rng, c.omega_nom).vec();
    }
    const auto eval = [&](const VectorXd& v) { return eval_stacked(TrajectoryDecision::unflatten(x0, v, prob.spec), prob); };
    const StackedEval s = eval(w);
    record(r, scaled_error(s.c_grad, fd_gradient([&](const VectorXd& v) { return eval(v).c_val; }, w)), tol,
      "stacked cost gradient");
    record(r, scaled_error(s.g_jac, fd_jacobian([&](const VectorXd& v) { return eval(v).g_vals; }, w)), tol,
      "stacked inequality Jacobian");
    record(r, scaled_error(s.h_jac, fd_jacobian([&](const VectorXd& v) { return eval(v).h_vals; }, w)), tol,
      "stacked equality Jacobian");
  }
  finish(r);
  return r;
}

SuiteResult qp_oracle_suite(int n_problems, std::uint64_t seed)
{
  SuiteResult r;
  r.name = "qp-oracle";
  Rng rng(seed);
  QpSolver warm(QpSettings{1e-9, 500, true});

  for (int k = 0; k < n_problems; ++k) {
    const Index n = 1 + static_cast<Index>(rng() % 6);
    const Index mi = static_cast<Index>(rng() % 7);
    const Index me = static_cast<Index>(rng() % static_cast<std::uint64_t>(std::min<Index>(2, n - 1) + 1));

    const auto rnd = [&](Index rows, Index cols) {
      MatrixXd m(rows, cols);
      for (Index i = 0; i < m.size(); ++i) { m.data()[i] = normal(rng, 1.0); }
      return m;
    };
    const MatrixXd m = rnd(n, n);
    QpProblem qp;
    qp.hess = m.transpose() * m + 0.1 * MatrixXd::Identity(n, n);
    qp.lin = rnd(n, 1);
    const VectorXd y0 = rnd(n, 1);
    qp.ineq_mat = rnd(mi, n);
    qp.ineq_rhs = qp.ineq_mat * y0;
    for (Index i = 0; i < mi; ++i) {
      if (rng() % 3 != 0) { qp.ineq_rhs[i] += uniform(rng, 0.0, 1.0); }
    }
    qp.eq_mat = rnd(me, n);
    qp.eq_rhs = qp.eq_mat * y0;

    const OracleSolution o = enumerate_qp(qp);
    if (!o.found) {
      record(r, 1.0, 0.0, "oracle found no solution");
      continue;
    }
    for (const bool use_warm : {false, true}) {
      const QpSolution s = use_warm ? warm.solve(qp) : solve_qp(qp);
      if (s.status != QpStatus::optimal) {
        record(r, 1.0, 0.0, std::string("status ") + to_string(s.status));
        continue;
      }
      record(r, (s.y - o.y).cwiseAbs().maxCoeff(), 1e-6, "primal mismatch");
      record(r, std::abs(qp_objective(qp, s.y) - o.objective), 1e-8, "objective mismatch");
      record(r, independent_kkt(qp, s), 1e-8, "KKT residual");
    }
  }
  finish(r);
  return r;
}

SuiteResult form_equivalence_suite(int n_points, std::uint64_t seed, double tol)
{
  SuiteResult r;
  r.name = "form-equivalence";
  Rng rng(seed);
  const RunConfig cfg = default_config();

  for (int k = 0; k < n_points; ++k) {
    CostParams c = cfg.cost;
    c.p_ref = uniform(rng, -3.0, 3.0);
    c.q_ref = uniform(rng, -1.0, 1.0);
    TrajectoryProblem prob{cfg.stgf.spec, cfg.plant, c, cfg.grid, {}};
    const State x0 = random_state(rng, 1.0);
    TrajectoryDecision d{x0, {}, {}};
    for (int t = 0; t < prob.spec.horizon_t; ++t) {
      State s = random_state(rng, 1.1);
      s.i_d = std::copysign(std::max(std::abs(s.i_d), 0.05), s.i_d);
      s.delta *= 0.05;
      d.states.push_back(s);
      Input u = random_input(rng, c.omega_nom);
      u.v = 1.0 + 0.1 * (u.v - 1.0);
      d.inputs.push_back(u);
    }
    const StackedEval s = eval_stacked(d, prob);
    const NlpEval e{s.c_val, s.c_grad, s.g_vals, s.g_jac, s.h_vals, s.h_jac};

    SafeGradientFlow flow(QpSettings{1e-12, 1000, false});
    FlowResult dual;
    try {
      dual = flow.direction(e, cfg.stgf.kappa);
    } catch (const QpInfeasibleError& ex) {
      record(r, 1.0, 0.0, ex.what());
      continue;
    }
    const OracleSolution primal = primal_direction(e, cfg.stgf.kappa);
    if (!primal.found) {
      record(r, 1.0, 0.0, "direct velocity QP not solved");
      continue;
    }
    record(r, scaled_error(dual.direction, primal.y), tol, "direction mismatch");
  }
  finish(r);
  return r;
}

SuiteResult anytime_feasibility_suite(const RunConfig& cfg, int n_trajectories, std::uint64_t seed)
{
  SuiteResult r;
  r.name = "anytime-feasibility";
  Rng rng(seed);
  const HorizonSpec& spec = cfg.stgf.spec;
  const PlantParams& p = cfg.plant;
  const double a = p.r_over_l();
  const double b = p.voltage_gain();
  long attempts = 0;

  while (r.cases < n_trajectories) {
    if (++attempts > 1000L * n_trajectories) {
      r.detail = "could not generate enough feasible trajectories";
      r.failures = 1;
      break;
    }
    const GridSignals g{cfg.grid.e_mag * uniform(rng, 0.95, 1.05), cfg.grid.omega_e};

    // Near-equilibrium start: delta chosen so the q-axis current is almost stationary.
    State x0 = random_state(rng, 0.97);
    const double s = -(g.omega_e * x0.i_d + a * x0.i_q) / (b * g.e_mag);
    if (std::abs(s) >= 1.0) { continue; }
    x0.delta = std::asin(s) + normal(rng, 2e-4);

    std::vector<Input> inputs;
    State xt = x0;
    double max_g = current_limit(x0, p);
    for (int t = 0; t < spec.horizon_t; ++t) {
      Input u;
      u.omega = g.omega_e + normal(rng, 0.5);
      u.v = (b * g.e_mag * std::cos(xt.delta) + a * xt.i_d - u.omega * xt.i_q) / b + normal(rng, 2e-4);
      inputs.push_back(u);
      xt = discrete_dynamics(xt, u, g, p, spec.dt);
      max_g = std::max(max_g, current_limit(xt, p));
    }
    if (max_g > -1e-3) { continue; }

    CostParams c = cfg.cost;
    const int pick = static_cast<int>(rng() % 3);
    const Reference ref = pick == 0 ? Reference{0.0, 0.0}
                          : pick == 1 ? Reference{2.5, -0.5}
                                      : Reference{uniform(rng, -3.0, 3.0), uniform(rng, -1.0, 1.0)};
    StgfController ctrl(p, c, cfg.stgf);
    ctrl.init(x0, inputs.front(), g);
    ctrl.set_inputs(inputs);
    ctrl.step(x0, g, ref);
    const StgfDiagnostics& dg = ctrl.last_diagnostics();
    record(r, std::max(0.0, dg.max_g), 0.0, "current limit violated after one cycle");
    if (dg.infeasible_updates > 0) { record(r, 1.0, 0.0, "correction QP infeasible"); }
  }
  finish(r);
  std::ostringstream os;
  os << r.cases << " trajectories (" << attempts << " drawn), worst max G " << r.worst;
  if (r.passed) { r.detail = os.str(); }
  return r;
}

SuiteResult equality_drift_report(const RunConfig& cfg, int cycles)
{
  SuiteResult r;
  r.name = "equality-drift";
  const CostParams c = cfg.final_cost();
  const EquilibriumResult eq = solve_equilibrium(c, cfg.plant, cfg.grid, cfg.equilibrium_tol);

  StgfController ctrl(cfg.plant, c, cfg.stgf);
  ctrl.init(eq.x, eq.u, cfg.grid);
  const Reference ref{c.p_ref, c.q_ref};
  State x = eq.x;
  double drift = 0.0;
  for (int k = 0; k < cycles; ++k) {
    const ControlOutput out = ctrl.step(x, cfg.grid, ref);
    x = discrete_dynamics(x, out.u, cfg.grid, cfg.plant, cfg.stgf.spec.dt);
    drift = std::max(drift, (x.vec() - eq.x.vec()).norm());
  }
  r.cases = cycles;
  r.worst = drift;
  const bool literal = !cfg.stgf.kappa.eq.vanishes_at_zero();
  std::ostringstream os;
  os << "max |x - x*| over " << cycles << " cycles: " << drift;
  if (literal) {
    os << " (equality alpha nonzero at 0, drift expected)";
  } else if (drift > 1e-4) {
    r.failures = 1;
  }
  r.detail = os.str();
  r.passed = r.failures == 0;
  return r;
}

SuiteResult coupling_report(const RunConfig& cfg, int steps)
{
  SuiteResult r;
  r.name = "coupling";
  PlantParams std_p = cfg.plant;
  std_p.iq_cross_coupling = false;
  PlantParams lit_p = cfg.plant;
  lit_p.iq_cross_coupling = true;

  const Input u{cfg.cost.v_nom * 1.002, cfg.cost.omega_nom};
  State xs;
  State xl;
  double diff = 0.0;
  try {
    for (int k = 0; k < steps; ++k) {
      xs = integrate_plant(xs, u, cfg.grid, std_p, cfg.scenario.dt, cfg.scenario.substeps, Integrator::rk4, k);
      xl = integrate_plant(xl, u, cfg.grid, lit_p, cfg.scenario.dt, cfg.scenario.substeps, Integrator::rk4, k);
      diff = std::max(diff, std::hypot(xs.i_d - xl.i_d, xs.i_q - xl.i_q));
    }
  } catch (const SimulationError& e) {
    diff = std::numeric_limits<double>::infinity();
  }
  r.cases = steps;
  r.worst = diff;
  std::ostringstream os;
  os << "open-loop current divergence between q-axis coupling variants over " << steps << " steps: " << diff
     << " pu (final |I| " << xs.current_magnitude() << " vs " << xl.current_magnitude() << ")";
  r.detail = os.str();
  return r;
}

std::vector<SuiteResult> run_all(const RunConfig& cfg)
{
  std::vector<SuiteResult> out;
  out.push_back(gradient_suite());
  out.push_back(qp_oracle_suite());
  out.push_back(form_equivalence_suite());
  out.push_back(anytime_feasibility_suite(cfg));
  if (!cfg.stgf.kappa.eq.vanishes_at_zero()) { out.push_back(equality_drift_report(cfg)); }
  if (cfg.plant.iq_cross_coupling) { out.push_back(coupling_report(cfg)); }
  return out;
}

}  // namespace stgf::check
