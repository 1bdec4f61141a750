// Command-line front end: run, equilibrium, bench, check.

#include "stgf/check/suites.hpp"
#include "stgf/config.hpp"
#include "stgf/csv.hpp"
#include "stgf/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace stgf;

constexpr int kOk = 0;
constexpr int kRuntimeFailure = 1;
constexpr int kConfigError = 2;

RunConfig config_from(const std::string& path)
{
  return path.empty() ? default_config() : load_config(path);
}

void print_timing(const char* label, const TimingStats& t)
{
  std::printf("%-12s n=%zu  min=%.1f  median=%.1f  p99=%.1f  max=%.1f  [us]\n", label, t.count, t.min, t.median, t.p99,
    t.max);
}

std::vector<double> solve_times(const SimRecord& rec)
{
  std::vector<double> v;
  v.reserve(rec.rows.size());
  for (const auto& r : rec.rows) { v.push_back(r.solve_time_us); }
  return v;
}

int cmd_run(const std::string& cfg_path, const std::string& out_path, const std::string& controller, bool no_timestamp)
{
  const RunConfig cfg = config_from(cfg_path);
  const SimRecord rec = run_config(cfg, controller);
  CsvOptions opts;
  opts.timestamp = !no_timestamp;
  opts.timing = !no_timestamp;
  if (out_path == "-") {
    write_csv(std::cout, rec, opts);
    return kOk;
  }
  write_csv_file(out_path, rec, opts);

  std::printf("controller      %s\n", controller.empty() ? cfg.ctrl_type.c_str() : controller.c_str());
  std::printf("steps           %zu\n", rec.rows.size());
  if (!rec.rows.empty()) {
    const SimRow& f = rec.rows.back();
    std::printf("final P         %.6f pu\n", f.p);
    std::printf("final Q         %.6f pu\n", f.q);
    std::printf("final V         %.6f pu\n", f.u.v);
    std::printf("final omega     %.6f rad/s\n", f.u.omega);
    std::printf("final cost      %.6f\n", f.stage_cost);
    std::printf("max |I|         %.6f pu\n", rec.max_current());
    std::printf("first feasible  %ld\n", rec.first_feasible_cycle);
    const TimingStats t = timing_stats(solve_times(rec));
    std::printf("solve time      median %.1f us, max %.1f us\n", t.median, t.max);
  }
  std::printf("wrote %s\n", out_path.c_str());
  return kOk;
}

int cmd_equilibrium(const std::string& cfg_path)
{
  const RunConfig cfg = config_from(cfg_path);
  const CostParams c = cfg.final_cost();
  const EquilibriumResult eq = solve_equilibrium(c, cfg.plant, cfg.grid, cfg.equilibrium_tol);
  std::printf("references      P* = %.6f  Q* = %.6f\n", c.p_ref, c.q_ref);
  std::printf("x*              I_d = %.10f  I_q = %.10f  delta = %.10f\n", eq.x.i_d, eq.x.i_q, eq.x.delta);
  std::printf("u*              V = %.10f  omega = %.10f\n", eq.u.v, eq.u.omega);
  std::printf("achieved        P = %.10f  Q = %.10f\n", eq.pq.p, eq.pq.q);
  std::printf("|I|             %.10f pu\n", eq.x.current_magnitude());
  std::printf("cost            %.10f\n", eq.cost);
  std::printf("kkt residual    %.3e\n", eq.kkt);
  std::printf("multiplier      %.6e\n", eq.mu);
  std::printf("constraint      %s\n", eq.constraint_active ? "active" : "inactive");
  std::printf("iterations      %d\n", eq.iterations);
  if (!eq.converged) {
    std::fprintf(stderr, "equilibrium did not converge (KKT residual %.3e > %.3e); best iterate printed\n", eq.kkt,
      cfg.equilibrium_tol);
    return kRuntimeFailure;
  }
  return kOk;
}

int cmd_bench(const std::string& cfg_path, int reps)
{
  if (reps < 1) { throw std::invalid_argument("repetitions must be >= 1"); }
  const RunConfig cfg = config_from(cfg_path);
  RunConfig cold = cfg;
  cold.stgf.qp.warm_start = false;

  std::vector<double> t_stgf;
  std::vector<double> t_cold;
  std::vector<double> t_droop;
  for (int i = 0; i < reps; ++i) {
    const auto a = solve_times(run_config(cfg, "stgf"));
    const auto b = solve_times(run_config(cold, "stgf"));
    const auto c = solve_times(run_config(cfg, "droop"));
    t_stgf.insert(t_stgf.end(), a.begin(), a.end());
    t_cold.insert(t_cold.end(), b.begin(), b.end());
    t_droop.insert(t_droop.end(), c.begin(), c.end());
  }
  const TimingStats s = timing_stats(t_stgf);
  const TimingStats sc = timing_stats(t_cold);
  const TimingStats d = timing_stats(t_droop);
  print_timing("stgf", s);
  print_timing("stgf-cold", sc);
  print_timing("droop", d);
  std::printf("droop median < stgf median: %s\n", d.median < s.median ? "yes" : "no");
  std::printf("warm median <= cold median: %s\n", s.median <= sc.median ? "yes" : "no");
  return kOk;
}

int cmd_check(const std::string& cfg_path)
{
  const RunConfig cfg = config_from(cfg_path);
  bool ok = true;
  for (const auto& r : check::run_all(cfg)) {
    std::printf("[%s] %-20s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kOk : kRuntimeFailure;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Grid-forming inverter control with a current limit"};
  app.require_subcommand(1);

  std::string cfg_path;
  std::string out_path = "run.csv";
  std::string controller;
  bool no_timestamp = false;
  int reps = 1;

  auto* run = app.add_subcommand("run", "closed-loop simulation, writes a CSV");
  run->add_option("config", cfg_path, "JSON config (defaults when omitted)");
  run->add_option("-o,--output", out_path, "CSV path, '-' for stdout");
  run->add_option("--controller", controller, "override ctrl.type")->check(CLI::IsMember({"stgf", "droop"}));
  run->add_flag("--no-timestamp", no_timestamp, "omit the timestamp comment and write solve times as 0");

  auto* equilibrium = app.add_subcommand("equilibrium", "solve for the optimal steady state");
  equilibrium->add_option("config", cfg_path, "JSON config");

  auto* bench = app.add_subcommand("bench", "per-cycle solve-time distribution");
  bench->add_option("config", cfg_path, "JSON config");
  bench->add_option("-n,--repetitions", reps, "scenario repetitions")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "run the property suites");
  check->add_option("config", cfg_path, "JSON config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) { return cmd_run(cfg_path, out_path, controller, no_timestamp); }
    if (*equilibrium) { return cmd_equilibrium(cfg_path); }
    if (*bench) { return cmd_bench(cfg_path, reps); }
    if (*check) { return cmd_check(cfg_path); }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error%s%s: %s\n", e.key().empty() ? "" : " at ", e.key().c_str(), e.what());
    return kConfigError;
  } catch (const SimulationError& e) {
    std::fprintf(stderr, "simulation failed at step %ld: %s\n", e.step(), e.what());
    return kRuntimeFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}
