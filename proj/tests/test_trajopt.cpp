#include "stgf/check/oracles.hpp"
#include "stgf/trajopt.hpp"

#include <doctest.h>

#include <numbers>

using namespace stgf;

namespace {

TrajectoryProblem problem(int t)
{
  TrajectoryProblem p{HorizonSpec{t, 1e-3}, PlantParams{}, CostParams{}, GridSignals{}, {}};
  p.cost.p_ref = 2.5;
  p.cost.q_ref = -0.5;
  return p;
}

TrajectoryDecision sample(const TrajectoryProblem& p)
{
  TrajectoryDecision d{State{0.2, -0.1, 0.01}, {}, {}};
  for (int t = 0; t < p.spec.horizon_t; ++t) {
    d.inputs.push_back(Input{1.0 + 0.001 * t, p.cost.omega_nom + 0.1 * t});
    d.states.push_back(State{0.2 + 0.05 * t, -0.1 + 0.02 * t, 0.01 - 0.001 * t});
  }
  return d;
}

}  // namespace

TEST_CASE("decision layout")
{
  const HorizonSpec s{10, 1e-3};
  CHECK(s.dim() == 50);
  CHECK(s.state_col(1) == 0);
  CHECK(s.state_col(10) == 27);
  CHECK(s.input_col(0) == 30);
  CHECK(s.input_col(9) == 48);
  CHECK_THROWS_AS(HorizonSpec({1, 1e-3}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(HorizonSpec({4, 0.0}).validate(), std::invalid_argument);
}

TEST_CASE("flatten and unflatten are inverse")
{
  const auto p = problem(4);
  const TrajectoryDecision d = sample(p);
  const VectorXd w = d.flatten();
  REQUIRE(w.size() == p.spec.dim());
  CHECK(w[p.spec.state_col(2) + 1] == d.states[1].i_q);
  CHECK(w[p.spec.input_col(3) + 1] == d.inputs[3].omega);
  const TrajectoryDecision back = TrajectoryDecision::unflatten(d.x0, w, p.spec);
  CHECK(back.flatten() == w);
  CHECK_THROWS_AS(TrajectoryDecision::unflatten(d.x0, VectorXd::Zero(7), p.spec), DimensionError);
}

TEST_CASE("rollout follows the Euler map and satisfies the defects")
{
  const auto p = problem(6);
  TrajectoryDecision d = sample(p);
  d.states = rollout(d.x0, d.inputs, p.grid, p.plant, p.spec);
  REQUIRE(d.states.size() == 6);
  State x = d.x0;
  for (int t = 0; t < 6; ++t) {
    x = discrete_dynamics(x, d.inputs[static_cast<std::size_t>(t)], p.grid, p.plant, p.spec.dt);
    CHECK(d.states[static_cast<std::size_t>(t)].vec() == x.vec());
  }
  const StackedEval e = eval_stacked(d, p);
  CHECK(e.h_vals.size() == 18);
  CHECK(e.h_vals.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant trajectory at a zero-current equilibrium")
{
  auto p = problem(2);
  p.grid.e_mag = 0.0;
  const std::vector<Input> u(2, Input{0.0, p.grid.omega_e});
  const auto xs = rollout(State{}, u, p.grid, p.plant, p.spec);
  CHECK(xs.size() == 2);
  for (const auto& x : xs) { CHECK(x.vec().norm() == 0.0); }
}

TEST_CASE("stacked values are sums of per-step values")
{
  const auto p = problem(5);
  const TrajectoryDecision d = sample(p);
  const StackedEval e = eval_stacked(d, p);
  double c = terminal_cost(d.states.back(), p.grid, p.cost).value;
  for (int t = 0; t < 5; ++t) { c += stage_cost(d.state_at(t), d.inputs[static_cast<std::size_t>(t)], p.grid, p.cost).value; }
  CHECK(e.c_val == doctest::Approx(c).epsilon(1e-14));
  REQUIRE(e.g_vals.size() == 5);
  for (int t = 1; t <= 5; ++t) { CHECK(e.g_vals[t - 1] == current_limit(d.state_at(t), p.plant)); }
  const State pred = discrete_dynamics(d.states[1], d.inputs[2], p.grid, p.plant, p.spec.dt);
  CHECK((e.h_vals.segment<3>(6) - (d.states[2].vec() - pred.vec())).norm() < 1e-12);
}

TEST_CASE("stacked derivatives agree with central differences")
{
  for (const int t : {2, 10}) {
    const auto p = problem(t);
    const TrajectoryDecision d = sample(p);
    const VectorXd w = d.flatten();
    const auto ev = [&](const VectorXd& v) { return eval_stacked(TrajectoryDecision::unflatten(d.x0, v, p.spec), p); };
    const StackedEval e = ev(w);
    CHECK(check::scaled_error(e.c_grad, check::fd_gradient([&](const VectorXd& v) { return ev(v).c_val; }, w)) < 1e-7);
    CHECK(check::scaled_error(e.g_jac, check::fd_jacobian([&](const VectorXd& v) { return ev(v).g_vals; }, w)) < 1e-7);
    CHECK(check::scaled_error(e.h_jac, check::fd_jacobian([&](const VectorXd& v) { return ev(v).h_vals; }, w)) < 1e-7);
  }
}

TEST_CASE("extra per-step equalities are appended after the defects")
{
  auto p = problem(3);
  p.extra_eq.rows = 1;
  p.extra_eq.eval = [](const State& x, Eigen::Ref<VectorXd> v, Eigen::Ref<MatrixXd> j) {
    v[0] = x.delta;
    j.setZero();
    j(0, 2) = 1.0;
  };
  const TrajectoryDecision d = sample(p);
  const StackedEval e = eval_stacked(d, p);
  REQUIRE(e.h_vals.size() == 12);
  CHECK(e.h_vals[9] == d.states[0].delta);
  CHECK(e.h_jac(11, p.spec.state_col(3) + 2) == 1.0);
}

TEST_CASE("size mismatches are rejected")
{
  const auto p = problem(3);
  TrajectoryDecision d = sample(p);
  d.inputs.pop_back();
  CHECK_THROWS_AS(eval_stacked(d, p), DimensionError);
  CHECK_THROWS_AS(rollout(d.x0, d.inputs, p.grid, p.plant, p.spec), DimensionError);
}
