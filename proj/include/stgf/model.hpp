#pragma once

/**
 * @file
 * @brief Grid-connected voltage-source inverter in the dq frame.
 *
 * Three states (d/q current and grid-to-inverter angle), two inputs (voltage
 * magnitude and frequency), an RL branch to an infinite bus. Electrical
 * quantities are per-unit, angular frequencies are rad/s and time is seconds.
 *
 * The RL branch parameters are given per-unit on the bases of PlantParams.
 * Converting R, L to SI (R = r z_b, L = l z_b / w_b) and back gives
 *
 *   dI_d/dt = -(r w_b / l) I_d + w I_q + (sqrt2 w_b / l)(V - E cos(delta))
 *   dI_q/dt = -(r w_b / l) I_q - w I_d - (sqrt2 w_b / l) E sin(delta)
 *   d delta/dt = w_e - w
 *
 * which is what continuous_dynamics() evaluates.
 */

#include <Eigen/Core>

#include <numbers>

namespace stgf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

inline constexpr double kDefaultPowerConstant = 1.5;

/// Physical parameters and bases of the inverter and its branch.
struct PlantParams
{
  double r = 0.0069;                           ///< branch resistance [pu]
  double l = 0.0196;                           ///< branch inductance [pu]
  double i_max = 1.0;                          ///< current magnitude limit [pu]
  double omega_base = 2.0 * std::numbers::pi * 60.0;  ///< [rad/s]
  double v_base = 120.0;                       ///< [V rms, phase]
  double s_base = 1500.0;                      ///< [VA]
  double i_base = 4.167;                       ///< [A rms]

  /// Scale of the dq power formulas, P = k_pq (E cos d I_d + E sin d I_q).
  double k_pq = kDefaultPowerConstant;
  /// Use -w I_q in the q-axis row instead of the dq-consistent -w I_d.
  bool iq_cross_coupling = false;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  /// R/L expressed per second.
  double r_over_l() const { return r * omega_base / l; }
  /// Current slope per unit of voltage mismatch [pu/s per pu].
  double voltage_gain() const { return std::numbers::sqrt2 * omega_base / l; }
};

/// Infinite-bus voltage magnitude and frequency.
struct GridSignals
{
  double e_mag = 1.0;                              ///< [pu]
  double omega_e = 2.0 * std::numbers::pi * 60.0;  ///< [rad/s]

  void validate() const;
};

struct State
{
  double i_d = 0.0;    ///< [pu]
  double i_q = 0.0;    ///< [pu]
  double delta = 0.0;  ///< grid angle minus inverter angle [rad], never wrapped here

  Vec3 vec() const { return {i_d, i_q, delta}; }
  static State from(const Eigen::Ref<const Vec3>& v) { return {v[0], v[1], v[2]}; }
  double current_magnitude() const;
};

struct Input
{
  double v = 1.0;                                ///< voltage magnitude [pu]
  double omega = 2.0 * std::numbers::pi * 60.0;  ///< inverter frequency [rad/s]

  Vec2 vec() const { return {v, omega}; }
  static Input from(const Eigen::Ref<const Vec2>& v) { return {v[0], v[1]}; }
};

/// Cost weights, references and nominal operating point.
struct CostParams
{
  double m_p = 2.0 * std::numbers::pi;
  double m_q = 0.05;
  double tau_v = 0.1;
  double p_ref = 0.0;                              ///< [pu]
  double q_ref = 0.0;                              ///< [pu]
  double v_nom = 1.0;                              ///< [pu]
  double omega_nom = 2.0 * std::numbers::pi * 60.0;  ///< [rad/s]

  void validate() const;
};

struct PowerOutput
{
  double p = 0.0;
  double q = 0.0;
};

/// Partial derivatives of (P, Q) with respect to the state.
struct PowerJacobian
{
  Vec3 dp = Vec3::Zero();
  Vec3 dq = Vec3::Zero();
};

struct DynamicsJacobians
{
  Mat3 a = Mat3::Zero();   ///< df/dx
  Mat32 b = Mat32::Zero(); ///< df/du
};

/// Scalar value with gradients split by state and input.
struct CostEval
{
  double value = 0.0;
  Vec3 grad_x = Vec3::Zero();
  Vec2 grad_u = Vec2::Zero();
};

Vec3 continuous_dynamics(const State& x, const Input& u, const GridSignals& g, const PlantParams& p);

/// One forward-Euler step of length dt.
State discrete_dynamics(
  const State& x, const Input& u, const GridSignals& g, const PlantParams& p, double dt);

DynamicsJacobians dynamics_jacobians(
  const State& x, const Input& u, const GridSignals& g, const PlantParams& p);

PowerOutput power_output(const State& x, const GridSignals& g, double k_pq = kDefaultPowerConstant);
PowerJacobian power_jacobian(const State& x, const GridSignals& g, double k_pq = kDefaultPowerConstant);

/// I_d^2 + I_q^2 - I_max^2, feasible when <= 0.
double current_limit(const State& x, const PlantParams& p);
Vec3 current_limit_grad(const State& x, const PlantParams& p);

CostEval stage_cost(
  const State& x, const Input& u, const GridSignals& g, const CostParams& c, double k_pq = kDefaultPowerConstant);

/// Stage cost without the input terms; grad_u is always zero.
CostEval terminal_cost(
  const State& x, const GridSignals& g, const CostParams& c, double k_pq = kDefaultPowerConstant);

/// Wraps an angle to (-pi, pi]. Only used when writing logs.
double wrap_angle(double a);

}  // namespace stgf
