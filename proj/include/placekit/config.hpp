#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "placekit/queue_model.hpp"
#include "placekit/simulate.hpp"
#include "placekit/types.hpp"

namespace placekit::cli {

// Run configuration: JSON document, `//` and `/* */` comments allowed,
// unknown keys rejected.
struct RunConfig {
  sim::PriceModel model = sim::PriceModel::bachelier;
  MarketParams market;
  enum class RhoKind { constant, table, queue } rho_kind = RhoKind::constant;
  double rho_constant = 1.0;
  std::string rho_path;  // table csv or queue-model json
  std::vector<double> horizons;  // days
  std::string output;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double root_tol = 1e-10;
  std::uint64_t seed = 1;
  std::string base_dir;  // directory of the config file

  // Builds the rho surface: constant value, tabulated CSV, or the queue
  // engine sampled over the configured horizons.
  ExecProbability make_rho(int queue_max_ticks = 40) const;
  queue::QueueModel load_queue_model() const;
  std::string resolve(const std::string& path) const;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text,
                           const std::string& base_dir);

// rho table CSV: header `x,t,rho`, complete rectangular grid.
ExecProbability load_rho_table(const std::string& path);

}  // namespace placekit::cli
