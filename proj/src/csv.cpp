#include "stgf/csv.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace stgf {

namespace {

void put(std::ostream& os, double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

void write_csv(std::ostream& os, const SimRecord& rec, const CsvOptions& opts)
{
  if (opts.timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << buf << '\n';
  }
  os << kCsvHeader << '\n';
  for (const auto& r : rec.rows) {
    const double cols[] = {r.t, r.x.i_d, r.x.i_q, r.x.delta, r.u.v, r.u.omega, r.p, r.q, r.i_mag, r.g_val, r.stage_cost,
                           opts.timing ? r.solve_time_us : 0.0};
    for (double c : cols) {
      put(os, c);
      os << ',';
    }
    os << (r.qp_infeasible ? 1 : 0) << ',' << (r.limiter_active ? 1 : 0) << '\n';
  }
}

void write_csv_file(const std::string& path, const SimRecord& rec, const CsvOptions& opts)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { throw std::runtime_error("cannot open '" + path + "' for writing"); }
  write_csv(out, rec, opts);
  if (!out) { throw std::runtime_error("write to '" + path + "' failed"); }
}

SimRecord read_csv(std::istream& is)
{
  SimRecord rec;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') { continue; }
    if (!header) {
      if (line != kCsvHeader) { throw std::runtime_error("unexpected CSV header: " + line); }
      header = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      v.push_back(std::strtod(cell.c_str(), &end));
      if (end == cell.c_str() || *end != '\0') { throw std::runtime_error("bad CSV number: " + cell); }
    }
    if (v.size() != 14) { throw std::runtime_error("CSV row has " + std::to_string(v.size()) + " columns, expected 14"); }
    SimRow r;
    r.t = v[0];
    r.x = State{v[1], v[2], v[3]};
    r.u = Input{v[4], v[5]};
    r.p = v[6];
    r.q = v[7];
    r.i_mag = v[8];
    r.g_val = v[9];
    r.stage_cost = v[10];
    r.solve_time_us = v[11];
    r.qp_infeasible = v[12] != 0.0;
    r.limiter_active = v[13] != 0.0;
    rec.rows.push_back(r);
  }
  if (!header) { throw std::runtime_error("CSV has no header"); }
  return rec;
}

}  // namespace stgf
