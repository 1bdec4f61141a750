#include "proc.hpp"

#include "stgf/csv.hpp"

#include <doctest.h>

#include <unistd.h>

namespace fs = std::filesystem;

namespace {

std::size_t line_count(const std::string& s)
{
  std::size_t n = 0;
  for (char c : s) { n += c == '\n'; }
  return n;
}

}  // namespace

TEST_CASE("run writes one row per step")
{
  const fs::path d = scratch_dir("cli_run");
  const ProcResult r = run_cli("run -o " + (d / "a.csv").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("max |I|") != std::string::npos);
  const std::string csv = slurp(d / "a.csv");
  CHECK(csv.rfind("# generated", 0) == 0);
  CHECK(line_count(csv) == 302);

  write_file(d / "empty.json", R"({"sim": {"n_steps": 0}})");
  CHECK(run_cli("run " + (d / "empty.json").string() + " --no-timestamp -o " + (d / "e.csv").string()).code == 0);
  CHECK(slurp(d / "e.csv") == std::string(stgf::kCsvHeader) + "\n");
  fs::remove_all(d);
}

TEST_CASE("identical runs give identical bytes")
{
  const fs::path d = scratch_dir("cli_det");
  REQUIRE(run_cli("run --no-timestamp -o " + (d / "a.csv").string()).code == 0);
  REQUIRE(run_cli("run --no-timestamp -o " + (d / "b.csv").string()).code == 0);
  CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
  fs::remove_all(d);
}

TEST_CASE("droop and stgf on the same config")
{
  const fs::path d = scratch_dir("cli_droop");
  CHECK(run_cli("run --controller droop --no-timestamp -o " + (d / "d.csv").string()).code == 0);
  std::ifstream in(d / "d.csv");
  const stgf::SimRecord rec = stgf::read_csv(in);
  CHECK(rec.rows.size() == 300);
  CHECK(rec.max_current() <= 1.05);
  fs::remove_all(d);
}

TEST_CASE("config errors exit with 2 and name the key")
{
  const fs::path d = scratch_dir("cli_cfg");
  write_file(d / "bad.json", R"({"plant": {"r_ohm": 0.1}})");
  ProcResult r = run_cli("equilibrium " + (d / "bad.json").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("plant.r_ohm") != std::string::npos);

  write_file(d / "syntax.json", "{\n\"plant\": [\n");
  r = run_cli("run " + (d / "syntax.json").string() + " -o " + (d / "x.csv").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("line") != std::string::npos);

  CHECK(run_cli("run /nonexistent.json").code == 2);
  fs::remove_all(d);
}

TEST_CASE("equilibrium reports an active limit for the step references")
{
  const ProcResult r = run_cli("equilibrium");
  CHECK(r.code == 0);
  CHECK(r.out.find("constraint      active") != std::string::npos);
  CHECK(r.out.find("|I|             1.0000000000") != std::string::npos);
}

TEST_CASE("non-converged equilibrium exits with 1")
{
  const fs::path d = scratch_dir("cli_eq");
  write_file(d / "tight.json", R"({"equilibrium": {"tol": 1e-300}})");
  const ProcResult r = run_cli("equilibrium " + (d / "tight.json").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("best iterate") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("bench prints both distributions")
{
  const fs::path d = scratch_dir("cli_bench");
  write_file(d / "short.json", R"({"sim": {"n_steps": 50}})");
  const ProcResult r = run_cli("bench " + (d / "short.json").string() + " -n 1");
  CHECK(r.code == 0);
  CHECK(r.out.find("stgf         n=50") != std::string::npos);
  CHECK(r.out.find("droop        n=50") != std::string::npos);
  CHECK(r.out.find("p99=") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("simulation failures exit with 1 and the step")
{
  const fs::path d = scratch_dir("cli_sim");
  // A huge step size makes the explicit plant update blow up.
  write_file(d / "blow.json", R"({"ctrl": {"type": "droop"}, "sim": {"dt_ms": 1000, "substeps": 1, "integrator": "euler"}})");
  const ProcResult r = run_cli("run " + (d / "blow.json").string() + " -o " + (d / "x.csv").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("at step") != std::string::npos);
  fs::remove_all(d);
}
