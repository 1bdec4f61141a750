#include "stgf/controller.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace stgf {

void DroopConfig::validate(double i_max) const
{
  if (k_p < 0 || k_q < 0 || tau_f < 0 || k_vi < 0 || k_sync < 0) {
    throw std::invalid_argument("droop gains must be >= 0");
  }
  if (!(i_thresh > 0 && i_thresh <= i_max)) { throw std::invalid_argument("droop i_thresh must be in (0, i_max]"); }
}

DroopOutput droop_step(
  const DroopState& d,
  const State& x_meas,
  double p_meas,
  double q_meas,
  const DroopConfig& cfg,
  double dt,
  const CostParams& ref)
{
  // Exact discretization of a first-order lag; tau_f = 0 passes the measurement through.
  const double a = cfg.tau_f > 0 ? -std::expm1(-dt / cfg.tau_f) : 1.0;

  DroopOutput out;
  out.next.p_f = d.p_f + a * (p_meas - d.p_f);
  out.next.q_f = d.q_f + a * (q_meas - d.q_f);

  out.u.omega = ref.omega_nom + cfg.k_p * (ref.p_ref - out.next.p_f);
  out.u.v = ref.v_nom + cfg.k_q * (ref.q_ref - out.next.q_f);

  const double excess = x_meas.current_magnitude() - cfg.i_thresh;
  if (excess > 0.0) {
    const double sgn = (x_meas.delta > 0.0) - (x_meas.delta < 0.0);
    out.u.v -= cfg.k_vi * excess;
    out.u.omega += cfg.k_sync * excess * sgn;
    out.limiter_active = true;
  }
  return out;
}

DroopController::DroopController(PlantParams plant, CostParams cost, DroopConfig cfg, double dt)
  : plant_(plant), cost_(cost), cfg_(cfg), dt_(dt)
{
  plant_.validate();
  cost_.validate();
  cfg_.validate(plant_.i_max);
  if (!(dt_ > 0)) { throw std::invalid_argument("droop dt must be > 0"); }
}

void DroopController::reset(const State& x0, const Input&, const GridSignals& g, const Reference& ref)
{
  cost_.p_ref = ref.p_ref;
  cost_.q_ref = ref.q_ref;
  const PowerOutput pq = power_output(x0, g, plant_.k_pq);
  state_ = {pq.p, pq.q};
}

ControlOutput DroopController::step(const State& x_meas, const GridSignals& g, const Reference& ref)
{
  const auto start = std::chrono::steady_clock::now();
  cost_.p_ref = ref.p_ref;
  cost_.q_ref = ref.q_ref;
  const PowerOutput pq = power_output(x_meas, g, plant_.k_pq);
  const DroopOutput d = droop_step(state_, x_meas, pq.p, pq.q, cfg_, dt_, cost_);
  state_ = d.next;

  ControlOutput out;
  out.u = d.u;
  out.limiter_active = d.limiter_active;
  out.plan_max_g = current_limit(x_meas, plant_);
  out.solve_time_us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace stgf
