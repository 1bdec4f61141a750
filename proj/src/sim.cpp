#include "stgf/sim.hpp"

#include "stgf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stgf {

State integrate_plant(
  const State& x, const Input& u, const GridSignals& g, const PlantParams& p, double dt, int substeps, Integrator method,
  long step)
{
  if (substeps < 1) { throw std::invalid_argument("substeps must be >= 1"); }
  if (!(dt > 0)) { throw std::invalid_argument("integration step must be > 0"); }

  const double h = dt / substeps;
  const auto f = [&](const Vec3& s) { return continuous_dynamics(State::from(s), u, g, p); };
  Vec3 s = x.vec();
  for (int i = 0; i < substeps; ++i) {
    if (method == Integrator::euler) {
      s += h * f(s);
    } else {
      const Vec3 k1 = f(s);
      const Vec3 k2 = f(s + 0.5 * h * k1);
      const Vec3 k3 = f(s + 0.5 * h * k2);
      const Vec3 k4 = f(s + h * k3);
      s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  if (!s.allFinite()) { throw SimulationError("plant state is not finite at step " + std::to_string(step), step); }
  return State::from(s);
}

void Scenario::validate() const
{
  if (n_steps < 0) { throw std::invalid_argument("n_steps must be >= 0"); }
  if (!(dt > 0)) { throw std::invalid_argument("dt must be > 0"); }
  if (substeps < 1) { throw std::invalid_argument("substeps must be >= 1"); }
  long prev = -1;
  for (const auto& r : references) {
    if (r.index <= prev) {
      throw std::invalid_argument("reference schedule indices must be >= 0 and increase strictly");
    }
    prev = r.index;
  }
  prev = -1;
  for (const auto& s : grid_changes) {
    if (s.index <= prev) {
      throw std::invalid_argument("grid schedule indices must be >= 0 and increase strictly");
    }
    s.grid.validate();
    prev = s.index;
  }
  initial_grid.validate();
}

Reference Scenario::reference_at(long k) const
{
  Reference r = initial_ref;
  for (const auto& s : references) {
    if (s.index > k) { break; }
    r = {s.p_ref, s.q_ref};
  }
  return r;
}

GridSignals Scenario::grid_at(long k) const
{
  GridSignals g = initial_grid;
  for (const auto& s : grid_changes) {
    if (s.index > k) { break; }
    g = s.grid;
  }
  return g;
}

double SimRecord::max_current() const
{
  double m = 0.0;
  for (const auto& r : rows) { m = std::max(m, r.i_mag); }
  return m;
}

TimingStats timing_stats(std::vector<double> samples)
{
  TimingStats t;
  t.count = samples.size();
  if (samples.empty()) { return t; }
  std::sort(samples.begin(), samples.end());
  const auto rank = [&](double q) {
    const auto r = static_cast<std::size_t>(std::ceil(q * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(r, 1, samples.size()) - 1];
  };
  t.min = samples.front();
  t.max = samples.back();
  const std::size_t n = samples.size();
  t.median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  t.p99 = rank(0.99);
  return t;
}

SimRecord run_scenario(const Scenario& sc, Controller& ctrl, const PlantParams& p, const CostParams& c)
{
  sc.validate();
  p.validate();

  SimRecord rec;
  rec.rows.reserve(static_cast<std::size_t>(sc.n_steps));
  ctrl.reset(sc.x0, sc.u0, sc.grid_at(0), sc.reference_at(0));

  CostParams cost = c;
  State x = sc.x0;
  for (long k = 0; k < sc.n_steps; ++k) {
    const Reference ref = sc.reference_at(k);
    const GridSignals g = sc.grid_at(k);
    cost.p_ref = ref.p_ref;
    cost.q_ref = ref.q_ref;

    ControlOutput out;
    try {
      out = ctrl.step(x, g, ref);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::exception& e) {
      throw SimulationError(std::string("controller failed at step ") + std::to_string(k) + ": " + e.what(), k);
    }
    if (rec.first_feasible_cycle < 0 && out.plan_max_g <= 0.0) { rec.first_feasible_cycle = k; }

    x = integrate_plant(x, out.u, g, p, sc.dt, sc.substeps, sc.integrator, k);

    SimRow row;
    row.t = static_cast<double>(k + 1) * sc.dt;
    row.x = x;
    row.u = out.u;
    const PowerOutput pq = power_output(x, g, p.k_pq);
    row.p = pq.p;
    row.q = pq.q;
    row.i_mag = x.current_magnitude();
    row.g_val = current_limit(x, p);
    row.stage_cost = stage_cost(x, out.u, g, cost, p.k_pq).value;
    row.solve_time_us = out.solve_time_us;
    row.qp_infeasible = out.qp_infeasible;
    row.limiter_active = out.limiter_active;
    rec.rows.push_back(row);
  }
  return rec;
}

}  // namespace stgf
