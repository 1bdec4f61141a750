#include "stgf/check/oracles.hpp"
#include "stgf/check/suites.hpp"
#include "stgf/sgf.hpp"

#include <doctest.h>

#include <cmath>

using namespace stgf;

namespace {

ClassKappaSpec linear(double a)
{
  return {{ClassKappa::Kind::linear, a, 1.0}, {ClassKappa::Kind::linear, a, 1.0}};
}

// min |w - p|^2 s.t. |w|^2 <= 1 with p = (2, 1): optimum p / sqrt(5), multiplier sqrt(5) - 1.
NlpFunctions disc_problem()
{
  NlpFunctions f;
  f.dim = 2;
  f.eval = [](const VectorXd& w, NlpEval& e) {
    const Eigen::Vector2d p(2.0, 1.0);
    e.cost = (w - p).squaredNorm();
    e.grad = 2.0 * (w - p);
    e.g = VectorXd::Constant(1, w.squaredNorm() - 1.0);
    e.jac_g = 2.0 * w.transpose();
    e.h.resize(0);
    e.jac_h.resize(0, 2);
  };
  return f;
}

}  // namespace

TEST_CASE("class-kappa functions")
{
  const ClassKappa shifted{ClassKappa::Kind::shifted_exponential, 20.0, 10.0};
  const ClassKappa expo{ClassKappa::Kind::exponential, 20.0, 10.0};
  const ClassKappa lin{ClassKappa::Kind::linear, 20.0, 1.0};
  CHECK(shifted(-0.1) == doctest::Approx(-12.642411176571153));
  CHECK(expo(-0.1) == doctest::Approx(7.357588823428847));
  CHECK(expo(0.0) == 20.0);
  CHECK(shifted(0.0) == 0.0);
  CHECK(lin(-0.1) == doctest::Approx(-2.0));
  CHECK(shifted.vanishes_at_zero());
  CHECK_FALSE(expo.vanishes_at_zero());
  for (auto k : {ClassKappa::Kind::exponential, ClassKappa::Kind::shifted_exponential, ClassKappa::Kind::linear}) {
    CHECK(parse_kappa_kind(to_string(k)) == k);
  }
  CHECK_FALSE(parse_kappa_kind("cubic").has_value());
  CHECK_THROWS_AS((ClassKappa{ClassKappa::Kind::linear, 0.0, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("no constraints gives plain gradient descent")
{
  NlpEval e;
  e.grad = Eigen::Vector3d(1.0, -2.0, 0.5);
  e.g.resize(0);
  e.jac_g.resize(0, 3);
  e.h.resize(0);
  e.jac_h.resize(0, 3);
  SafeGradientFlow flow;
  const FlowResult r = flow.direction(e, ClassKappaSpec{});
  CHECK(r.direction == -e.grad);
}

TEST_CASE("inequality correction by hand")
{
  // c = |w|^2 / 2, g = 1 - w1 at w = (2, 0); alpha(z) = z lets w1 decrease at rate 1 at most.
  NlpEval e;
  e.grad = Eigen::Vector2d(2.0, 0.0);
  e.g = VectorXd::Constant(1, -1.0);
  e.jac_g = Eigen::RowVector2d(-1.0, 0.0);
  e.h.resize(0);
  e.jac_h.resize(0, 2);
  SafeGradientFlow flow;
  const FlowResult r = flow.direction(e, linear(1.0));
  CHECK((r.direction - Eigen::Vector2d(-1.0, 0.0)).norm() < 1e-12);
  CHECK(r.mu[0] == doctest::Approx(1.0));

  // Far from the boundary the correction is inactive.
  const FlowResult free = flow.direction(e, linear(5.0));
  CHECK((free.direction + e.grad).norm() < 1e-12);
  CHECK(std::abs(free.mu[0]) < 1e-12);
}

TEST_CASE("equality correction by hand")
{
  NlpEval e;
  e.grad = Eigen::Vector2d::Zero();
  e.g.resize(0);
  e.jac_g.resize(0, 2);
  e.h = VectorXd::Constant(1, -1.0);
  e.jac_h = Eigen::RowVector2d(1.0, 1.0);
  SafeGradientFlow flow;
  const FlowResult r = flow.direction(e, linear(3.0));
  CHECK((r.direction - Eigen::Vector2d(1.5, 1.5)).norm() < 1e-12);
  CHECK(r.nu[0] == doctest::Approx(-1.5));
}

TEST_CASE("correction QP layout")
{
  NlpEval e;
  e.grad = Eigen::Vector2d(1.0, 2.0);
  e.g = VectorXd::Constant(1, -0.5);
  e.jac_g = Eigen::RowVector2d(1.0, 0.0);
  e.h = VectorXd::Constant(1, 0.25);
  e.jac_h = Eigen::RowVector2d(0.0, 2.0);
  const QpProblem qp = build_correction_qp(e, linear(2.0));
  MatrixXd hess(2, 2);
  hess << 2, 0, 0, 8;
  CHECK(qp.hess == hess);
  CHECK(qp.lin.norm() == 0.0);
  CHECK(qp.ineq_mat == Eigen::RowVector2d(-1.0, 0.0));
  CHECK(qp.ineq_rhs[0] == doctest::Approx(1.0 + 1.0));
  CHECK(qp.eq_mat == Eigen::RowVector2d(0.0, -4.0));
  CHECK(qp.eq_rhs[0] == doctest::Approx(4.0 - 0.5));
}

TEST_CASE("flow converges to the KKT point and stays feasible")
{
  const NlpFunctions f = disc_problem();
  SafeGradientFlow flow;
  const ClassKappaSpec kappa = linear(20.0);
  VectorXd w = Eigen::Vector2d(-0.5, 0.2);
  for (int k = 0; k < 2000; ++k) {
    const double g0 = f(w).g[0];
    const VectorXd d = flow.direction(f, w, kappa).direction;
    w += 1e-2 * d;
    // grad g . d <= -20 g, so an Euler step only adds the chord error xi^2 |d|^2.
    CHECK(f(w).g[0] <= (1.0 - 0.2) * g0 + 1e-4 * d.squaredNorm() + 1e-12);
    CHECK(f(w).g[0] <= 1e-4);
  }
  const FlowSummary s = flow.flow_to_convergence(f, Eigen::Vector2d(-0.5, 0.2), kappa, 1e-2, 1e-10, 100000);
  CHECK(s.converged);
  CHECK((s.w - Eigen::Vector2d(2.0, 1.0) / std::sqrt(5.0)).norm() < 1e-9);
  CHECK(s.mu[0] == doctest::Approx(std::sqrt(5.0) - 1.0).epsilon(1e-8));
  CHECK(s.kkt_residual < 1e-8);
}

TEST_CASE("zero constraint gradient with alpha(0) != 0 is infeasible")
{
  // g = w1^2 - 1 at w = 0 has zero gradient while the exponential alpha demands g to decrease.
  NlpFunctions f;
  f.dim = 1;
  f.eval = [](const VectorXd& w, NlpEval& e) {
    e.cost = 0.5 * w.squaredNorm();
    e.grad = w;
    e.g = VectorXd::Constant(1, w[0] * w[0] - 1.0);
    e.jac_g = MatrixXd::Constant(1, 1, 2.0 * w[0]);
    e.h.resize(0);
    e.jac_h.resize(0, 1);
  };
  SafeGradientFlow flow;
  ClassKappaSpec kappa;
  kappa.ineq.kind = ClassKappa::Kind::exponential;
  try {
    flow.direction(f, VectorXd::Zero(1), kappa);
    FAIL("expected QpInfeasibleError");
  } catch (const QpInfeasibleError& ex) {
    CHECK(ex.diagnostics().zero_gradient_rows == 1);
    CHECK(ex.diagnostics().min_ineq_rhs < 0.0);
  }
  kappa.ineq.kind = ClassKappa::Kind::shifted_exponential;
  CHECK_NOTHROW(flow.direction(f, VectorXd::Zero(1), kappa));

  const FlowSummary s = flow.flow_to_convergence(f, VectorXd::Zero(1), ClassKappaSpec{{ClassKappa::Kind::exponential, 20, 10}, {}},
    1e-3, 1e-12, 10);
  CHECK_FALSE(s.converged);
}

TEST_CASE("KKT residual")
{
  const NlpFunctions f = disc_problem();
  const VectorXd w = Eigen::Vector2d(2.0, 1.0) / std::sqrt(5.0);
  CHECK(nlp_kkt_residual(f, w, VectorXd::Constant(1, std::sqrt(5.0) - 1.0), VectorXd(0)) < 1e-14);
  CHECK(nlp_kkt_residual(f, w, VectorXd::Zero(1), VectorXd(0)) > 0.1);
  CHECK_THROWS_AS(nlp_kkt_residual(f, w, VectorXd::Zero(2), VectorXd(0)), DimensionError);
}

TEST_CASE("dual form matches the direct velocity QP on inverter trajectories")
{
  const check::SuiteResult r = check::form_equivalence_suite(30, 21);
  INFO(r.detail);
  CHECK(r.passed);
}
