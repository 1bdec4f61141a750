#pragma once

/**
 * @file
 * @brief Closed-loop simulation: zero-order-hold inputs, a fixed-step plant
 * integrator, reference and grid schedules, and per-step records.
 */

#include "stgf/controller.hpp"
#include "stgf/model.hpp"

#include <cstdint>
#include <vector>

namespace stgf {

enum class Integrator : std::uint8_t {
  rk4,
  euler,  ///< test mode; with one substep this equals the controller's prediction
};

/**
 * @brief Integrate the plant over one controller period with the input held.
 *
 * Throws SimulationError(step) if the state stops being finite.
 */
State integrate_plant(
  const State& x,
  const Input& u,
  const GridSignals& g,
  const PlantParams& p,
  double dt,
  int substeps,
  Integrator method = Integrator::rk4,
  long step = -1);

struct ReferenceStep
{
  long index = 0;
  double p_ref = 0.0;
  double q_ref = 0.0;
};

struct GridStep
{
  long index = 0;
  GridSignals grid;
};

struct Scenario
{
  long n_steps = 300;
  double dt = 1e-3;  ///< controller period [s]
  State x0{};
  Input u0{};
  Reference initial_ref{};
  GridSignals initial_grid{};
  std::vector<ReferenceStep> references{{100, 2.5, -0.5}};
  std::vector<GridStep> grid_changes{};
  int substeps = 10;
  Integrator integrator = Integrator::rk4;

  void validate() const;
  /// Reference in force during cycle k (changes apply at the start of the cycle).
  Reference reference_at(long k) const;
  GridSignals grid_at(long k) const;
};

struct SimRow
{
  double t = 0.0;  ///< end of the cycle, (k + 1) dt
  State x;         ///< state at the end of the cycle
  Input u;         ///< input held during the cycle
  double p = 0.0;
  double q = 0.0;
  double i_mag = 0.0;
  double g_val = 0.0;
  double stage_cost = 0.0;
  double solve_time_us = 0.0;
  bool qp_infeasible = false;
  bool limiter_active = false;
};

struct SimRecord
{
  std::vector<SimRow> rows;
  /// First cycle whose planned trajectory satisfied the current limit, -1 if none.
  long first_feasible_cycle = -1;

  double max_current() const;
};

struct TimingStats
{
  std::size_t count = 0;
  double min = 0.0;
  double median = 0.0;
  double p99 = 0.0;  ///< nearest-rank
  double max = 0.0;
};

TimingStats timing_stats(std::vector<double> samples);

/// Runs the loop: reference -> measure -> controller -> hold and integrate -> record.
SimRecord run_scenario(const Scenario& sc, Controller& ctrl, const PlantParams& p, const CostParams& c);

}  // namespace stgf
