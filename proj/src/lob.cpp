#include "placekit/lob.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "placekit/rng.hpp"

namespace placekit::lob {

namespace {

bool parse_line(const std::string& line, double prev_ts, LobEventRecord* rec,
                std::string* reason) {
  std::stringstream ss(line);
  std::string ts, side, event, level, size;
  if (!std::getline(ss, ts, ',') || !std::getline(ss, side, ',') ||
      !std::getline(ss, event, ',') || !std::getline(ss, level, ',') ||
      !std::getline(ss, size)) {
    *reason = "expected 5 comma-separated fields";
    return false;
  }
  try {
    rec->timestamp = std::stod(ts);
    rec->level = std::stoi(level);
    rec->size = std::stol(size);
  } catch (const std::exception&) {
    *reason = "non-numeric timestamp/level/size";
    return false;
  }
  if (rec->timestamp < prev_ts) {
    *reason = "timestamp decreasing";
    return false;
  }
  if (rec->size < 1) {
    *reason = "size must be >= 1";
    return false;
  }
  if (side == "bid") rec->side = LobEventRecord::Side::bid;
  else if (side == "ask") rec->side = LobEventRecord::Side::ask;
  else {
    *reason = "side must be bid or ask";
    return false;
  }
  if (event == "add") rec->event = LobEventRecord::Event::add;
  else if (event == "cancel") rec->event = LobEventRecord::Event::cancel;
  else if (event == "execute") rec->event = LobEventRecord::Event::execute;
  else if (event == "price_change")
    rec->event = LobEventRecord::Event::price_change;
  else {
    *reason = "unknown event type";
    return false;
  }
  return true;
}

}  // namespace

ParseReport parse_events(std::istream& in) {
  ParseReport rep;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  double prev_ts = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("timestamp", 0) == 0) continue;  // header row
    }
    ++rep.data_lines;
    LobEventRecord rec;
    std::string reason;
    if (parse_line(line, prev_ts, &rec, &reason)) {
      prev_ts = rec.timestamp;
      rep.records.push_back(rec);
    } else {
      rep.malformed.push_back({line_no, line, reason});
    }
  }
  if (rep.data_lines > 0 &&
      rep.malformed.size() * 100 > rep.data_lines) {
    std::ostringstream os;
    os << "parse_events: " << rep.malformed.size() << " of " << rep.data_lines
       << " lines malformed (> 1%)";
    throw std::runtime_error(os.str());
  }
  return rep;
}

ParseReport parse_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_events: cannot open " + path);
  return parse_events(in);
}

RateEstimates estimate_rates(const std::vector<LobEventRecord>& events) {
  long level1 = 0;
  for (const auto& e : events)
    if (e.level == 1 || e.event == LobEventRecord::Event::price_change)
      ++level1;
  if (level1 < 1000)
    throw std::invalid_argument(
        "estimate_rates: need >= 1000 level-1 events");

  RateEstimates est;
  est.level1_events = level1;
  // active time: close gaps over 60 s (halts)
  double active = 0, prev = events.front().timestamp;
  for (const auto& e : events) {
    double gap = e.timestamp - prev;
    if (gap <= 60.0) active += gap;
    prev = e.timestamp;
  }
  if (!(active > 0))
    throw std::invalid_argument("estimate_rates: zero active time");
  est.active_seconds = active;

  double add_a = 0, add_b = 0, dep_a = 0, dep_b = 0;
  double add_a2 = 0, add_b2 = 0, dep_a2 = 0, dep_b2 = 0;
  double bid_drop_sum = 0;
  long bid_drops = 0;
  std::map<int, long> fa_counts;
  long fa_total = 0;
  for (const auto& e : events) {
    double s = static_cast<double>(e.size), s2 = s * s;
    bool ask = e.side == LobEventRecord::Side::ask;
    switch (e.event) {
      case LobEventRecord::Event::add:
        if (e.level == 1) {
          (ask ? add_a : add_b) += s;
          (ask ? add_a2 : add_b2) += s2;
        }
        break;
      case LobEventRecord::Event::cancel:
      case LobEventRecord::Event::execute:
        if (e.level == 1) {
          (ask ? dep_a : dep_b) += s;
          (ask ? dep_a2 : dep_b2) += s2;
        }
        break;
      case LobEventRecord::Event::price_change:
        if (e.level < 0) {  // downward move, spread re-closed
          if (ask) {
            fa_counts[static_cast<int>(e.size)]++;
            ++fa_total;
          } else {
            bid_drop_sum += s;
            ++bid_drops;
          }
        }
        break;
    }
  }
  est.lambda_a = add_a / active;
  est.lambda_b = add_b / active;
  est.dep_a = dep_a / active;
  est.dep_b = dep_b / active;
  est.se_lambda_a = std::sqrt(add_a2) / active;
  est.se_lambda_b = std::sqrt(add_b2) / active;
  est.se_dep_a = std::sqrt(dep_a2) / active;
  est.se_dep_b = std::sqrt(dep_b2) / active;
  est.degenerate = !(est.dep_a > 0) || !(est.dep_b > 0);
  for (const auto& [size, count] : fa_counts)
    est.f_a_hist[size] = static_cast<double>(count) / fa_total;
  est.mean_bid_after_drop = bid_drops > 0 ? bid_drop_sum / bid_drops : 0.0;
  return est;
}

std::string RateEstimates::to_json() const {
  nlohmann::json j;
  j["lambda_a"] = lambda_a;
  j["lambda_b"] = lambda_b;
  j["dep_a"] = dep_a;
  j["dep_b"] = dep_b;
  j["standard_errors"] = {{"lambda_a", se_lambda_a},
                          {"lambda_b", se_lambda_b},
                          {"dep_a", se_dep_a},
                          {"dep_b", se_dep_b}};
  nlohmann::json fa = nlohmann::json::object();
  for (const auto& [size, p] : f_a_hist) fa[std::to_string(size)] = p;
  j["f_a_hist"] = fa;
  j["mean_bid_after_drop"] = mean_bid_after_drop;
  j["active_seconds"] = active_seconds;
  j["level1_events"] = level1_events;
  j["degenerate"] = degenerate;
  return j.dump(2);
}

queue::QueueModel build_queue_model(const RateEstimates& est,
                                    const std::vector<double>& theta_k,
                                    const std::vector<int>& depth_profile,
                                    double tick) {
  if (est.f_a_hist.empty())
    throw std::invalid_argument("build_queue_model: empty f_a histogram");
  if (est.degenerate)
    throw std::invalid_argument(
        "build_queue_model: degenerate estimates (no depletion flow)");
  if (theta_k.empty())
    throw std::invalid_argument(
        "build_queue_model: theta_k defaults required");
  queue::QueueModel q;
  q.lambda_a = est.lambda_a;
  q.lambda_b = est.lambda_b;
  q.dep_a = est.dep_a;
  q.dep_b = est.dep_b;
  q.theta_k = theta_k;
  q.depth_profile = depth_profile;  // empty means the zero profile
  q.tick = tick;
  int max_size = est.f_a_hist.rbegin()->first;
  std::vector<double> probs(max_size, 0.0);
  for (const auto& [size, p] : est.f_a_hist) probs[size - 1] = p;
  q.f_a = queue::DiscreteDist(probs);
  q.validate();
  return q;
}

std::vector<LobEventRecord> generate_synthetic_log(const SyntheticLogSpec& spec) {
  CounterRng rng(spec.seed, 0);
  // merged Poisson streams; each event carries one batch except refills
  struct Stream {
    double rate;
    LobEventRecord::Side side;
    LobEventRecord::Event event;
  };
  const Stream streams[] = {
      {spec.lambda_a, LobEventRecord::Side::ask, LobEventRecord::Event::add},
      {spec.lambda_b, LobEventRecord::Side::bid, LobEventRecord::Event::add},
      {spec.dep_a, LobEventRecord::Side::ask, LobEventRecord::Event::cancel},
      {spec.dep_b, LobEventRecord::Side::bid, LobEventRecord::Event::cancel},
      {spec.refill_rate, LobEventRecord::Side::ask,
       LobEventRecord::Event::price_change},
  };
  double total = 0;
  for (const auto& s : streams) total += s.rate;
  auto sample_shifted_poisson = [&](double mean1) {
    // Poisson(mean1 - 1) + 1 via inversion
    double m = std::max(mean1 - 1.0, 0.0);
    double limit = std::exp(-m), prod = rng.next_uniform();
    long k = 0;
    while (prod > limit) {
      prod *= rng.next_uniform();
      ++k;
    }
    return k + 1;
  };
  std::vector<LobEventRecord> out;
  out.reserve(spec.n_events);
  double time = 0;
  while (static_cast<long>(out.size()) < spec.n_events) {
    time += -std::log(rng.next_uniform()) / total;
    double u = rng.next_uniform() * total, cum = 0;
    const Stream* pick = &streams[0];
    for (const auto& s : streams) {
      cum += s.rate;
      if (u <= cum) {
        pick = &s;
        break;
      }
    }
    LobEventRecord rec;
    rec.timestamp = time;
    rec.side = pick->side;
    rec.event = pick->event;
    if (pick->event == LobEventRecord::Event::price_change) {
      rec.level = -1;  // downward move, spread re-closed
      rec.size = sample_shifted_poisson(spec.fa_mean);
      out.push_back(rec);
      LobEventRecord bid = rec;
      bid.side = LobEventRecord::Side::bid;
      bid.size = sample_shifted_poisson(spec.bid_after_drop_mean);
      if (static_cast<long>(out.size()) < spec.n_events) out.push_back(bid);
    } else {
      rec.level = 1;
      rec.size = 1;
      // split depletion stream between cancels and executes
      if (pick->event == LobEventRecord::Event::cancel &&
          rng.next_uniform() < 0.5)
        rec.event = LobEventRecord::Event::execute;
      out.push_back(rec);
    }
  }
  return out;
}

void write_event_csv(const std::string& path,
                     const std::vector<LobEventRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_event_csv: cannot write " + path);
  out << "timestamp,side,event,level,size\n";
  for (const auto& r : records) {
    out << std::setprecision(12) << r.timestamp << ","
        << (r.side == LobEventRecord::Side::bid ? "bid" : "ask") << ",";
    switch (r.event) {
      case LobEventRecord::Event::add: out << "add"; break;
      case LobEventRecord::Event::cancel: out << "cancel"; break;
      case LobEventRecord::Event::execute: out << "execute"; break;
      case LobEventRecord::Event::price_change: out << "price_change"; break;
    }
    out << "," << r.level << "," << r.size << "\n";
  }
}

}  // namespace placekit::lob
