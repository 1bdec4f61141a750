#include "stgf/check/oracles.hpp"
#include "stgf/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace stgf;

namespace {

constexpr double kWb = 2.0 * std::numbers::pi * 60.0;

struct Point
{
  State x;
  Input u;
  GridSignals g;
  CostParams c;
};

// Values below come from tests/oracle/gen_values.py, which integrates nothing
// and shares no code with the library: the right-hand side is evaluated in
// amps and volts with 40-digit arithmetic and converted to per-unit after.
Point point(int k)
{
  Point p;
  if (k == 0) {
    p.x = {0.3, -0.2, 0.05};
    p.u = {1.02, kWb + 0.5};
    p.g = {1.0, kWb};
    p.c.p_ref = 0.4;
    p.c.q_ref = 0.1;
  } else {
    p.x = {0.9, 0.4, -0.3};
    p.u = {0.95, kWb - 1.2};
    p.g = {1.05, kWb + 0.3};
    p.c.p_ref = 2.5;
    p.c.q_ref = -0.5;
  }
  return p;
}

void check_close(double got, double want, double rel = 1e-12)
{
  CHECK(std::abs(got - want) <= rel * std::max(1.0, std::abs(want)));
}

}  // namespace

TEST_CASE("dynamics match the SI-unit reference")
{
  const double f[2][3] = {{462.70795226434511, -1446.2036654521208, -0.5}, {-1413.6086317180703, 8049.1694579161419, 1.5}};
  const double lit[2] = {-1257.4581062367332, 8237.0650171315295};
  for (int k = 0; k < 2; ++k) {
    const Point p = point(k);
    PlantParams plant;
    const Vec3 v = continuous_dynamics(p.x, p.u, p.g, plant);
    for (int i = 0; i < 3; ++i) { check_close(v[i], f[k][i]); }

    plant.iq_cross_coupling = true;
    const Vec3 w = continuous_dynamics(p.x, p.u, p.g, plant);
    check_close(w[0], f[k][0]);
    check_close(w[1], lit[k]);
    check_close(w[2], f[k][2]);
  }
}

TEST_CASE("euler step")
{
  const Point p = point(0);
  const State n = discrete_dynamics(p.x, p.u, p.g, PlantParams{}, 1e-3);
  check_close(n.i_d, 0.76270795226434511);
  check_close(n.i_q, -1.6462036654521208);
  check_close(n.delta, 0.0495);
}

TEST_CASE("power, limit and costs match the reference")
{
  const double pq[2][2] = {{0.43444386639653131, 0.32211570429029512}, {1.1680117431389026, -1.0207618810915806}};
  const double gv[2] = {-0.87, -0.03};
  const double stage[2] = {0.14306096900290575, 6.3740890381441106};
  const double term[2] = {0.016060969002905751, 5.6415890381441106};
  for (int k = 0; k < 2; ++k) {
    const Point p = point(k);
    const PowerOutput o = power_output(p.x, p.g);
    check_close(o.p, pq[k][0]);
    check_close(o.q, pq[k][1]);
    check_close(current_limit(p.x, PlantParams{}), gv[k]);
    check_close(stage_cost(p.x, p.u, p.g, p.c).value, stage[k]);
    check_close(terminal_cost(p.x, p.g, p.c).value, term[k]);
  }
}

TEST_CASE("power output at axis-aligned states")
{
  const GridSignals g{};
  PowerOutput o = power_output(State{1.0, 0.0, 0.0}, g);
  CHECK(o.p == doctest::Approx(1.5));
  CHECK(o.q == doctest::Approx(0.0));
  o = power_output(State{1.0, 0.0, std::numbers::pi / 2}, g);
  CHECK(o.p == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(o.q == doctest::Approx(1.5));
  o = power_output(State{1.0, 0.0, 0.0}, g, 1.0);
  CHECK(o.p == doctest::Approx(1.0));
}

TEST_CASE("zero current at zero voltage and matching frequency is an equilibrium")
{
  const Vec3 v = continuous_dynamics(State{}, Input{0.0, kWb}, GridSignals{0.0, kWb}, PlantParams{});
  CHECK(v.norm() == 0.0);
}

TEST_CASE("current limit boundary")
{
  const PlantParams p;
  CHECK(current_limit(State{0.6, 0.8, 0.0}, p) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(current_limit(State{}, p) == -1.0);
  const Vec3 gr = current_limit_grad(State{0.6, -0.8, 2.0}, p);
  CHECK(gr[0] == 1.2);
  CHECK(gr[1] == -1.6);
  CHECK(gr[2] == 0.0);
}

TEST_CASE("costs vanish at their targets")
{
  CostParams c;
  c.p_ref = 0.0;
  c.q_ref = 0.0;
  const GridSignals g;
  CHECK(stage_cost(State{}, Input{c.v_nom, c.omega_nom}, g, c).value == 0.0);
  CHECK(terminal_cost(State{}, g, c).value == 0.0);

  // A state producing exactly (P*, Q*).
  const State x{0.4, -0.1, 0.0};
  const PowerOutput o = power_output(x, g);
  c.p_ref = o.p;
  c.q_ref = o.q;
  CHECK(stage_cost(x, Input{c.v_nom, c.omega_nom}, g, c).value == doctest::Approx(0.0).epsilon(1e-28));
  CHECK(terminal_cost(x, g, c).grad_u.norm() == 0.0);
}

TEST_CASE("analytic derivatives agree with central differences")
{
  for (int k = 0; k < 2; ++k) {
    const Point p = point(k);
    for (const bool literal : {false, true}) {
      PlantParams plant;
      plant.iq_cross_coupling = literal;
      VectorXd z(5);
      z << p.x.vec(), p.u.vec();
      const DynamicsJacobians j = dynamics_jacobians(p.x, p.u, p.g, plant);
      MatrixXd an(3, 5);
      an << j.a, j.b;
      const MatrixXd fd = check::fd_jacobian(
        [&](const VectorXd& v) {
          return VectorXd(continuous_dynamics(State{v[0], v[1], v[2]}, Input{v[3], v[4]}, p.g, plant));
        },
        z);
      CHECK(check::scaled_error(an, fd) < 1e-8);
    }
  }
}

TEST_CASE("parameter validation")
{
  PlantParams p;
  CHECK_NOTHROW(p.validate());
  p.l = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = PlantParams{};
  p.i_max = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CostParams c;
  c.tau_v = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  GridSignals g;
  g.e_mag = -1.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("wrap_angle")
{
  CHECK(wrap_angle(0.5) == doctest::Approx(0.5));
  CHECK(wrap_angle(3.0 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2.0 * std::numbers::pi));
}
