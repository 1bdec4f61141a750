#pragma once

/**
 * @file
 * @brief Randomized property suites behind `stgf check` and the acceptance tests.
 */

#include "stgf/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stgf::check {

struct SuiteResult
{
  std::string name;
  bool passed = true;
  int cases = 0;
  int failures = 0;
  double worst = 0.0;  ///< worst observed error measure of the suite
  std::string detail;
};

/// Analytic derivatives of the model and the stacked trajectory against central differences.
SuiteResult gradient_suite(int n_points = 100, std::uint64_t seed = 1, double tol = 1e-6);

/// Random small strictly convex QPs against active-set enumeration.
SuiteResult qp_oracle_suite(int n_problems = 500, std::uint64_t seed = 2);

/// Dual-form flow direction against the direct velocity QP at random trajectory points.
SuiteResult form_equivalence_suite(int n_points = 100, std::uint64_t seed = 3, double tol = 1e-6);

/// One controller cycle from random feasible trajectories keeps every current-limit value <= 0.
SuiteResult anytime_feasibility_suite(const RunConfig& cfg, int n_trajectories = 100, std::uint64_t seed = 4);

/**
 * @brief Idle-at-optimum drift with the configured class-kappa functions.
 * Informational: a nonzero alpha(0) on the equalities is expected to drift.
 */
SuiteResult equality_drift_report(const RunConfig& cfg, int cycles = 100);

/// Side-by-side open-loop simulation of the two q-axis coupling variants. Informational.
SuiteResult coupling_report(const RunConfig& cfg, int steps = 300);

std::vector<SuiteResult> run_all(const RunConfig& cfg);

}  // namespace stgf::check
