#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "placekit/lob.hpp"
#include "placekit/rho_engine.hpp"

using namespace placekit;
using namespace placekit::lob;

TEST_CASE("empty input parses to an empty stream") {
  std::istringstream in("");
  ParseReport rep = parse_events(in);
  CHECK(rep.records.empty());
  CHECK(rep.malformed.empty());
}

TEST_CASE("single well-formed line") {
  std::istringstream in("timestamp,side,event,level,size\n1.5,ask,add,1,3\n");
  ParseReport rep = parse_events(in);
  REQUIRE(rep.records.size() == 1);
  CHECK(rep.records[0].timestamp == 1.5);
  CHECK(rep.records[0].side == LobEventRecord::Side::ask);
  CHECK(rep.records[0].event == LobEventRecord::Event::add);
  CHECK(rep.records[0].level == 1);
  CHECK(rep.records[0].size == 3);
}

TEST_CASE("schema violations are collected with line numbers") {
  std::istringstream in(
      "timestamp,side,event,level,size\n"
      "1.0,ask,add,1,1\n"
      "2.0,mid,add,1,1\n"       // bad side
      "3.0,bid,cancel,1,1\n"
      "2.5,bid,cancel,1,1\n"    // decreasing timestamp
      "# comment line\n"
      "4.0,bid,oops,1,1\n"      // bad event
      "5.0,bid,add,1,0\n"       // size < 1
      "6.0,bid,add,1,2\n"
      "7.0,bid,add,1,2\n"
      "8.0,bid,add,1,2\n");
  bool threw = false;
  try {
    parse_events(in);
  } catch (const std::runtime_error&) {
    threw = true;  // > 1% malformed aborts
  }
  CHECK(threw);
}

TEST_CASE("malformed below the threshold is reported, not fatal") {
  std::ostringstream big;
  big << "timestamp,side,event,level,size\n";
  for (int i = 0; i < 1000; ++i)
    big << i << ".0,ask,add,1,1\n";
  big << "1000.5,mid,add,1,1\n";  // single bad line: 0.1%
  std::istringstream in(big.str());
  ParseReport rep = parse_events(in);
  CHECK(rep.records.size() == 1000);
  REQUIRE(rep.malformed.size() == 1);
  CHECK(rep.malformed[0].line_no == 1002);
  CHECK(rep.malformed[0].reason == "side must be bid or ask");
}

TEST_CASE("parsing is idempotent and order-preserving") {
  SyntheticLogSpec spec;
  spec.n_events = 3000;
  auto events = generate_synthetic_log(spec);
  std::ostringstream buf;
  buf << "timestamp,side,event,level,size\n";
  for (auto& e : events) {
    buf << e.timestamp << ","
        << (e.side == LobEventRecord::Side::bid ? "bid" : "ask") << ",";
    switch (e.event) {
      case LobEventRecord::Event::add: buf << "add"; break;
      case LobEventRecord::Event::cancel: buf << "cancel"; break;
      case LobEventRecord::Event::execute: buf << "execute"; break;
      case LobEventRecord::Event::price_change: buf << "price_change"; break;
    }
    buf << "," << e.level << "," << e.size << "\n";
  }
  std::istringstream in1(buf.str()), in2(buf.str());
  ParseReport a = parse_events(in1), b = parse_events(in2);
  REQUIRE(a.records.size() == b.records.size());
  REQUIRE(a.records.size() == events.size());
  for (size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].timestamp == b.records[i].timestamp);
    CHECK(a.records[i].size == b.records[i].size);
  }
}

TEST_CASE("rate estimates recover the generator within 5% at 1e5 events") {
  SyntheticLogSpec spec;
  spec.n_events = 100000;
  spec.seed = 42;
  auto events = generate_synthetic_log(spec);
  RateEstimates est = estimate_rates(events);
  CHECK(std::abs(est.lambda_a - spec.lambda_a) / spec.lambda_a < 0.05);
  CHECK(std::abs(est.lambda_b - spec.lambda_b) / spec.lambda_b < 0.05);
  CHECK(std::abs(est.dep_a - spec.dep_a) / spec.dep_a < 0.05);
  CHECK(std::abs(est.dep_b - spec.dep_b) / spec.dep_b < 0.05);
  CHECK(!est.degenerate);
  // f_a histogram sums to one, mean near the generator mean
  double total = 0, mean = 0;
  for (auto& [size, p] : est.f_a_hist) {
    total += p;
    mean += size * p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(spec.fa_mean).epsilon(0.1));
  CHECK(est.mean_bid_after_drop ==
        doctest::Approx(spec.bid_after_drop_mean).epsilon(0.1));
}

TEST_CASE("estimator error shrinks like 1/sqrt(n)") {
  // rms relative error over replicates at n = 1e3, 1e4, 1e5; the log-log
  // slope should sit near -1/2
  std::vector<long> ns{1000, 10000, 100000};
  std::vector<double> rms(3, 0.0);
  const int reps = 24;
  for (int r = 0; r < reps; ++r) {
    for (size_t i = 0; i < ns.size(); ++i) {
      SyntheticLogSpec spec;
      spec.n_events = ns[i];
      spec.seed = 1000 + 7919 * r + i;
      auto events = generate_synthetic_log(spec);
      RateEstimates est = estimate_rates(events);
      double rel = std::abs(est.dep_a - spec.dep_a) / spec.dep_a;
      rms[i] += rel * rel;
    }
  }
  for (double& v : rms) v = std::sqrt(v / reps);
  // least-squares slope of log(rms) vs log(n), n on 3 points
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < ns.size(); ++i) {
    double lx = std::log(static_cast<double>(ns[i])), ly = std::log(rms[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  CHECK(-slope >= 0.4);
  CHECK(-slope <= 0.6);
}

TEST_CASE("degenerate flow is flagged and rejected downstream") {
  std::vector<LobEventRecord> events;
  for (int i = 0; i < 2000; ++i) {
    LobEventRecord e;
    e.timestamp = i * 0.01;
    e.side = LobEventRecord::Side::ask;
    e.event = LobEventRecord::Event::add;
    e.level = 1;
    e.size = 1;
    events.push_back(e);
  }
  RateEstimates est = estimate_rates(events);
  CHECK(est.degenerate);
  CHECK(est.dep_a == 0.0);
  CHECK_THROWS_AS(build_queue_model(est, {0.5}, {}), std::invalid_argument);
}

TEST_CASE("point-mass refill histogram") {
  std::vector<LobEventRecord> events;
  double t = 0;
  for (int i = 0; i < 2000; ++i) {
    LobEventRecord e;
    e.timestamp = (t += 0.01);
    e.side = LobEventRecord::Side::ask;
    e.event = i % 2 == 0 ? LobEventRecord::Event::add
                         : LobEventRecord::Event::execute;
    e.level = 1;
    e.size = 1;
    events.push_back(e);
    if (i % 20 == 0) {
      LobEventRecord pc;
      pc.timestamp = t;
      pc.side = LobEventRecord::Side::ask;
      pc.event = LobEventRecord::Event::price_change;
      pc.level = -1;
      pc.size = 6;
      events.push_back(pc);
    }
  }
  RateEstimates est = estimate_rates(events);
  REQUIRE(est.f_a_hist.size() == 1);
  CHECK(est.f_a_hist.at(6) == doctest::Approx(1.0));
}

TEST_CASE("fewer than 1000 level-1 events is rejected") {
  std::vector<LobEventRecord> events(10);
  for (int i = 0; i < 10; ++i) {
    events[i].timestamp = i;
    events[i].level = 1;
    events[i].size = 1;
  }
  CHECK_THROWS_AS(estimate_rates(events), std::invalid_argument);
}

TEST_CASE("estimates at table-1 rates assemble into a working queue model") {
  SyntheticLogSpec spec;
  spec.n_events = 100000;
  spec.seed = 9;
  auto events = generate_synthetic_log(spec);
  RateEstimates est = estimate_rates(events);
  queue::QueueModel q = build_queue_model(est, {1.2, 0.7, 0.45, 0.3}, {38, 5});
  queue::HittingModel h;
  h.kind = queue::HittingModel::Kind::bachelier;
  h.params = MarketParams{-0.25, 0.2, 50.0, 0.0, 0.0};
  double val = queue::rho(q, h, 2 * q.tick, 30.0);
  CHECK(val >= 0.0);
  CHECK(val <= 1.0);
  // omitted depth profile means the empty-book regime
  queue::QueueModel q0 = build_queue_model(est, {1.2, 0.7}, {});
  CHECK(q0.depth_at(2) == 0);
}
