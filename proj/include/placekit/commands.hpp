#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "placekit/config.hpp"

// CLI verbs as library functions.  All CSV output carries a header row,
// fixed column order, and 12 significant digits.  Exit codes: 0 ok,
// 2 config error, 3 numerical failure, 4 validation-suite failure (the
// binary maps exceptions onto these).

namespace placekit::cli {

struct GridSpec {
  double lo = 0, hi = 0;
  int n = 0;
  std::vector<double> points() const;
  // parses "lo:hi:n" or a comma list "a,b,c"
  static GridSpec parse(const std::string& text);
  std::vector<double> explicit_points;
};

void cmd_cost(const RunConfig& cfg, const std::vector<double>& x_grid,
              const std::string& out_dir);
void cmd_optimal(const RunConfig& cfg, const std::string& out_dir);
void cmd_critical_time(const RunConfig& cfg, std::ostream& report,
                       const GridSpec* sweep_s0 = nullptr,
                       const std::string& out_dir = "");
void cmd_approx(const RunConfig& cfg, bool use_bar_t0,
                const std::string& out_dir);
void cmd_rho(const RunConfig& cfg, const std::vector<double>& depth_grid,
             const std::vector<double>& t_grid_seconds,
             const std::string& out_path);
void cmd_rho_report(const RunConfig& cfg, double t_seconds,
                    std::ostream& report);
// returns the number of failed checks (nonzero means exit code 4)
int cmd_validate(const RunConfig& cfg, std::ostream& report);
void cmd_estimate(const std::string& input_csv, const std::string& out_path,
                  std::ostream& report);
void cmd_simulate(const RunConfig& cfg, const std::string& kind, double depth,
                  double t, long n_paths, std::ostream& report);

}  // namespace placekit::cli
