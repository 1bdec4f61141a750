#pragma once

/**
 * @file
 * @brief Run configuration read from sectioned JSON.
 *
 * Every key is optional; absent keys keep the built-in defaults. Unknown
 * keys raise ConfigError naming the key as "section.name".
 */

#include "stgf/controller.hpp"
#include "stgf/sim.hpp"

#include <memory>
#include <string>

namespace stgf {

struct RunConfig
{
  PlantParams plant{};
  GridSignals grid{};
  CostParams cost{};
  std::string ctrl_type = "stgf";  ///< "stgf" or "droop"
  StgfConfig stgf{};
  DroopConfig droop{};
  Scenario scenario{};
  double equilibrium_tol = 1e-8;

  /// References the closed loop is chasing at the last step.
  Reference final_reference() const;
  /// Cost parameters with the final references filled in.
  CostParams final_cost() const;
};

/// Defaults: the step scenario with the horizon, update count and step size of the reference study.
RunConfig default_config();

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Controller of the given type ("stgf" or "droop"), or of cfg.ctrl_type when type is empty.
std::unique_ptr<Controller> make_controller(const RunConfig& cfg, const std::string& type = "");

/// The configured scenario run with the given controller type.
SimRecord run_config(const RunConfig& cfg, const std::string& type = "");

}  // namespace stgf
