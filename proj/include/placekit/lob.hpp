#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "placekit/queue_model.hpp"

// LOB event-log ingestion and rate estimation.  Input is a CSV with header
// `timestamp,side,event,level,size`: timestamp in seconds since session
// open, side in {bid, ask}, event in {add, cancel, execute, price_change},
// level in ticks from the opposite best (for price_change events the level
// encodes the direction of the move, negative = downward), size in batches
// of 100 shares (for price_change events the refilled queue size).  Lines
// starting with `#` are ignored.

namespace placekit::lob {

struct LobEventRecord {
  double timestamp = 0;
  enum class Side { bid, ask } side = Side::bid;
  enum class Event { add, cancel, execute, price_change } event = Event::add;
  int level = 0;
  long size = 0;
};

struct ParseReport {
  std::vector<LobEventRecord> records;
  struct Malformed {
    std::size_t line_no;
    std::string text;
    std::string reason;
  };
  std::vector<Malformed> malformed;
  std::size_t data_lines = 0;
};

// Throws std::runtime_error when the file is unreadable or more than 1% of
// data lines are malformed; individual bad lines are collected with line
// numbers.
ParseReport parse_events(const std::string& path);
ParseReport parse_events(std::istream& in);

struct RateEstimates {
  double lambda_a = 0, lambda_b = 0;  // batches/sec added at level 1
  double dep_a = 0, dep_b = 0;        // batches/sec cancel+execute at level 1
  double se_lambda_a = 0, se_lambda_b = 0, se_dep_a = 0, se_dep_b = 0;
  std::map<int, double> f_a_hist;  // best-ask size after downward moves
  double mean_bid_after_drop = 0;
  double active_seconds = 0;  // gaps > 60 s excluded
  long level1_events = 0;
  bool degenerate = false;  // no depletion flow observed

  std::string to_json() const;
};

// Requires >= 1000 level-1 events.
RateEstimates estimate_rates(const std::vector<LobEventRecord>& events);

// Assembles a QueueModel; theta_k defaults are required when the estimates
// carry none.  An absent depth profile means the empty-book regime.
queue::QueueModel build_queue_model(const RateEstimates& est,
                                    const std::vector<double>& theta_k,
                                    const std::vector<int>& depth_profile,
                                    double tick = 0.01);

// Synthetic Poisson event log for estimator checks: independent add and
// cancel/execute streams at the given rates plus occasional downward
// price_change events carrying refill sizes.
struct SyntheticLogSpec {
  double lambda_a = 21.78, lambda_b = 21.98;
  double dep_a = 19.32, dep_b = 18.68;
  double refill_rate = 0.05;       // downward price changes per second
  double fa_mean = 6.0;            // mean refilled best-ask size
  double bid_after_drop_mean = 38.0;
  long n_events = 100000;
  std::uint64_t seed = 1;
};
std::vector<LobEventRecord> generate_synthetic_log(const SyntheticLogSpec& spec);
void write_event_csv(const std::string& path,
                     const std::vector<LobEventRecord>& records);

}  // namespace placekit::lob
