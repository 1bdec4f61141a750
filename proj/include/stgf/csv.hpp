#pragma once

#include "stgf/sim.hpp"

#include <iosfwd>
#include <string>

namespace stgf {

/// Column order of every emitted record.
inline constexpr const char* kCsvHeader =
  "t_s,i_d_pu,i_q_pu,delta_rad,v_pu,omega_rad_s,p_pu,q_pu,i_mag_pu,g_val,stage_cost,solve_time_us,qp_infeasible,"
  "limiter_active";

struct CsvOptions
{
  /// Leading "# generated ..." comment line with the wall-clock time.
  bool timestamp = true;
  /// Write measured solve times; when false the column is written as 0 so output is reproducible.
  bool timing = true;
};

/// Numbers are printed with 17 significant digits, so read_csv gives back the same doubles.
void write_csv(std::ostream& os, const SimRecord& rec, const CsvOptions& opts = {});
void write_csv_file(const std::string& path, const SimRecord& rec, const CsvOptions& opts = {});

/// Parses output of write_csv. Comment lines starting with '#' are skipped.
SimRecord read_csv(std::istream& is);

}  // namespace stgf
