#pragma once

/**
 * @file
 * @brief Feedback controllers for the inverter: the rolling-horizon safe
 * trajectory gradient flow (STGF) controller, a droop baseline with a current
 * limiter, and the optimal-equilibrium solver.
 */

#include "stgf/model.hpp"
#include "stgf/sgf.hpp"
#include "stgf/trajopt.hpp"

#include <string>
#include <vector>

namespace stgf {

struct Reference
{
  double p_ref = 0.0;
  double q_ref = 0.0;
};

struct ControlOutput
{
  Input u;
  double solve_time_us = 0.0;
  bool qp_infeasible = false;
  bool limiter_active = false;
  double plan_max_g = 0.0;  ///< largest current-limit value the controller is planning for
};

/// Common interface driven by the closed-loop simulator.
class Controller
{
public:
  virtual ~Controller() = default;
  virtual void reset(const State& x0, const Input& u0, const GridSignals& g, const Reference& ref) = 0;
  virtual ControlOutput step(const State& x_meas, const GridSignals& g, const Reference& ref) = 0;
  virtual std::string name() const = 0;
};

/// Trajectory NLP (C, G, H) seen by the flow, with x0 held fixed.
NlpFunctions trajectory_nlp(TrajectoryProblem problem, const State& x0);

// ---------------------------------------------------------------------------
// STGF

struct StgfConfig
{
  HorizonSpec spec{};
  int k_updates = 2;
  double xi = 1e-3;
  ClassKappaSpec kappa{};
  int n_steps = 300;
  QpSettings qp{1e-9, 500, true};

  void validate() const;
};

/// Per-cycle record of what the optimization did.
struct StgfDiagnostics
{
  QpStatus qp_status = QpStatus::optimal;
  int infeasible_updates = 0;
  double direction_norm = 0.0;
  double wall_time_us = 0.0;
  double max_g = 0.0;  ///< max_tau g(x_tau) of the optimized trajectory
  double max_h = 0.0;  ///< max |defect| of the optimized trajectory
};

class StgfController final : public Controller
{
public:
  StgfController(PlantParams plant, CostParams cost, StgfConfig cfg);

  /// Fill the input trajectory with u_init and roll the states out from x0.
  void init(const State& x0, const Input& u_init, const GridSignals& g);

  void reset(const State& x0, const Input& u0, const GridSignals& g, const Reference& ref) override;

  /**
   * @brief One control cycle: take x_meas as x_0, roll out, run K flow
   * updates, return u_0 and shift the inputs one slot left (last one repeated).
   *
   * An infeasible correction QP reuses half of the previous direction for that
   * update and sets qp_infeasible.
   */
  ControlOutput step(const State& x_meas, const GridSignals& g, const Reference& ref) override;

  std::string name() const override { return "stgf"; }

  const std::vector<Input>& inputs() const { return inputs_; }
  const std::vector<State>& states() const { return states_; }
  /// Replace the stored input trajectory (must have length T).
  void set_inputs(std::vector<Input> inputs);
  /// Trajectory after the last cycle's updates, before the shift.
  const TrajectoryDecision& last_optimized() const { return optimized_; }
  const StgfDiagnostics& last_diagnostics() const { return diag_; }
  const StgfConfig& config() const { return cfg_; }

private:
  PlantParams plant_;
  CostParams cost_;
  StgfConfig cfg_;
  SafeGradientFlow flow_;
  std::vector<Input> inputs_;
  std::vector<State> states_;
  TrajectoryDecision optimized_;
  VectorXd last_direction_;
  StgfDiagnostics diag_;
};

// ---------------------------------------------------------------------------
// Optimal equilibrium

struct EquilibriumOptions
{
  double xi = 1e-2;
  int max_iters = 400000;
  ClassKappaSpec kappa{{ClassKappa::Kind::linear, 20.0, 1.0}, {ClassKappa::Kind::linear, 20.0, 1.0}};
  State x_start{};
  Input u_start{};
  bool start_from_nominal = true;  ///< start at (0, 0, 0, v_nom, omega_nom)
};

struct EquilibriumResult
{
  State x;
  Input u;
  double kkt = 0.0;
  double mu = 0.0;  ///< current-limit multiplier
  double cost = 0.0;
  PowerOutput pq;
  double g_val = 0.0;
  bool converged = false;
  bool constraint_active = false;
  int iterations = 0;
};

/// Static NLP over (I_d, I_q, delta, V, omega): min c s.t. g <= 0, f = 0.
NlpFunctions equilibrium_nlp(const CostParams& c, const PlantParams& p, const GridSignals& g);

/**
 * @brief Flow the static NLP to a KKT point.
 *
 * converged is set when the KKT residual is <= tol and g(x*) <= 0. When the
 * final iterate sits outside the disc by no more than tol, the current is
 * scaled radially onto it.
 */
EquilibriumResult solve_equilibrium(
  const CostParams& c, const PlantParams& p, const GridSignals& g, double tol, const EquilibriumOptions& opts = {});

// ---------------------------------------------------------------------------
// Droop baseline

struct DroopConfig
{
  double k_p = 0.0005 * 2.0 * std::numbers::pi * 60.0;   ///< [rad/s per pu]
  double k_q = 0.01;                                     ///< [pu per pu]
  double tau_f = 0.02;                                   ///< [s]
  double i_thresh = 0.98;                                ///< [pu]
  double k_vi = 0.02;                                    ///< [pu per pu]
  double k_sync = 0.02 * 2.0 * std::numbers::pi * 60.0;  ///< [rad/s per pu]

  void validate(double i_max) const;
};

struct DroopState
{
  double p_f = 0.0;
  double q_f = 0.0;
};

struct DroopOutput
{
  Input u;
  DroopState next;
  bool limiter_active = false;
};

/**
 * @brief P-omega / Q-V droop with filtered power measurements.
 *
 * Above i_thresh the voltage is lowered by k_vi (|I| - i_thresh) and the
 * frequency is moved by k_sync (|I| - i_thresh) sign(delta), which slows the
 * angle drift that caused the excess current.
 */
DroopOutput droop_step(
  const DroopState& d,
  const State& x_meas,
  double p_meas,
  double q_meas,
  const DroopConfig& cfg,
  double dt,
  const CostParams& ref);

class DroopController final : public Controller
{
public:
  DroopController(PlantParams plant, CostParams cost, DroopConfig cfg, double dt);

  void reset(const State& x0, const Input& u0, const GridSignals& g, const Reference& ref) override;
  ControlOutput step(const State& x_meas, const GridSignals& g, const Reference& ref) override;
  std::string name() const override { return "droop"; }
  const DroopState& filter_state() const { return state_; }

private:
  PlantParams plant_;
  CostParams cost_;
  DroopConfig cfg_;
  double dt_;
  DroopState state_;
};

}  // namespace stgf
