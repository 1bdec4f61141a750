#include "stgf/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stgf {

namespace {

void require(bool ok, const char* what)
{
  if (!ok) { throw std::invalid_argument(std::string("invalid parameter: ") + what); }
}

}  // namespace

void PlantParams::validate() const
{
  require(r > 0, "plant.r must be > 0");
  require(l > 0, "plant.l must be > 0");
  require(i_max > 0, "plant.i_max must be > 0");
  require(omega_base > 0 && v_base > 0 && s_base > 0 && i_base > 0, "plant bases must be > 0");
  require(k_pq > 0, "plant.k_pq must be > 0");
}

void GridSignals::validate() const
{
  require(e_mag >= 0, "grid.e_mag must be >= 0");
  require(omega_e > 0, "grid.omega_e must be > 0");
}

void CostParams::validate() const
{
  require(m_p > 0, "cost.m_p must be > 0");
  require(m_q > 0, "cost.m_q must be > 0");
  require(tau_v > 0, "cost.tau_v must be > 0");
}

double State::current_magnitude() const { return std::hypot(i_d, i_q); }

Vec3 continuous_dynamics(const State& x, const Input& u, const GridSignals& g, const PlantParams& p)
{
  const double a = p.r_over_l();
  const double b = p.voltage_gain();
  const double cross = p.iq_cross_coupling ? x.i_q : x.i_d;
  return {
    -a * x.i_d + u.omega * x.i_q + b * (u.v - g.e_mag * std::cos(x.delta)),
    -a * x.i_q - u.omega * cross - b * g.e_mag * std::sin(x.delta),
    g.omega_e - u.omega,
  };
}

State discrete_dynamics(
  const State& x, const Input& u, const GridSignals& g, const PlantParams& p, double dt)
{
  return State::from(x.vec() + dt * continuous_dynamics(x, u, g, p));
}

DynamicsJacobians dynamics_jacobians(
  const State& x, const Input& u, const GridSignals& g, const PlantParams& p)
{
  const double a = p.r_over_l();
  const double b = p.voltage_gain();
  const double s = std::sin(x.delta);
  const double c = std::cos(x.delta);

  DynamicsJacobians j;
  j.a(0, 0) = -a;
  j.a(0, 1) = u.omega;
  j.a(0, 2) = b * g.e_mag * s;
  if (p.iq_cross_coupling) {
    j.a(1, 1) = -a - u.omega;
  } else {
    j.a(1, 0) = -u.omega;
    j.a(1, 1) = -a;
  }
  j.a(1, 2) = -b * g.e_mag * c;

  j.b(0, 0) = b;
  j.b(0, 1) = x.i_q;
  j.b(1, 1) = p.iq_cross_coupling ? -x.i_q : -x.i_d;
  j.b(2, 1) = -1.0;
  return j;
}

PowerOutput power_output(const State& x, const GridSignals& g, double k_pq)
{
  const double s = std::sin(x.delta);
  const double c = std::cos(x.delta);
  const double k = k_pq * g.e_mag;
  return {k * (c * x.i_d + s * x.i_q), k * (s * x.i_d - c * x.i_q)};
}

PowerJacobian power_jacobian(const State& x, const GridSignals& g, double k_pq)
{
  const double s = std::sin(x.delta);
  const double c = std::cos(x.delta);
  const double k = k_pq * g.e_mag;
  PowerJacobian j;
  j.dp = k * Vec3(c, s, -s * x.i_d + c * x.i_q);
  j.dq = k * Vec3(s, -c, c * x.i_d + s * x.i_q);
  return j;
}

double current_limit(const State& x, const PlantParams& p)
{
  return x.i_d * x.i_d + x.i_q * x.i_q - p.i_max * p.i_max;
}

Vec3 current_limit_grad(const State& x, const PlantParams&) { return {2.0 * x.i_d, 2.0 * x.i_q, 0.0}; }

CostEval terminal_cost(const State& x, const GridSignals& g, const CostParams& c, double k_pq)
{
  const auto pq = power_output(x, g, k_pq);
  const auto dpq = power_jacobian(x, g, k_pq);
  const double ep = pq.p - c.p_ref;
  const double eq = pq.q - c.q_ref;

  CostEval out;
  out.value = 0.5 * c.m_p * ep * ep + 0.5 * c.m_q / c.tau_v * eq * eq;
  out.grad_x = c.m_p * ep * dpq.dp + c.m_q / c.tau_v * eq * dpq.dq;
  return out;
}

CostEval stage_cost(
  const State& x, const Input& u, const GridSignals& g, const CostParams& c, double k_pq)
{
  CostEval out = terminal_cost(x, g, c, k_pq);
  const double ev = u.v - c.v_nom;
  const double ew = u.omega - c.omega_nom;
  out.value += 0.5 / c.tau_v * ev * ev + 0.5 * ew * ew;
  out.grad_u = Vec2(ev / c.tau_v, ew);
  return out;
}

double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a, two_pi);
  if (w <= -std::numbers::pi) {
    w += two_pi;
  } else if (w > std::numbers::pi) {
    w -= two_pi;
  }
  return w;
}

}  // namespace stgf
