#include "placekit/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "placekit/rho_engine.hpp"

namespace placekit::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key()))
      throw std::invalid_argument("config: unknown key '" + it.key() +
                                  "' in " + where);
}

}  // namespace

RunConfig parse_run_config(const std::string& text,
                           const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config: parse error: ") +
                                e.what());
  }
  reject_unknown(j, {"model", "market", "rho", "horizons", "output",
                     "tolerances", "seed"},
                 "top level");
  RunConfig c;
  c.base_dir = base_dir;
  std::string model = j.at("model").get<std::string>();
  if (model == "bachelier") c.model = sim::PriceModel::bachelier;
  else if (model == "black-scholes") c.model = sim::PriceModel::black_scholes;
  else throw std::invalid_argument("config: model must be bachelier or black-scholes");

  const json& m = j.at("market");
  reject_unknown(m, {"mu", "sigma", "s0", "rebate", "fee"}, "market");
  c.market.mu = m.at("mu").get<double>();
  c.market.sigma = m.at("sigma").get<double>();
  c.market.s0 = m.value("s0", 1.0);
  c.market.rebate = m.value("rebate", 0.0);
  c.market.fee = m.value("fee", 0.0);
  c.market.validate();

  const json& r = j.at("rho");
  reject_unknown(r, {"constant", "table", "queue"}, "rho");
  if (r.size() != 1)
    throw std::invalid_argument("config: rho needs exactly one of constant/table/queue");
  if (r.contains("constant")) {
    c.rho_kind = RunConfig::RhoKind::constant;
    c.rho_constant = r["constant"].get<double>();
    if (!(c.rho_constant >= 0 && c.rho_constant <= 1))
      throw std::invalid_argument("config: rho constant outside [0,1]");
  } else if (r.contains("table")) {
    c.rho_kind = RunConfig::RhoKind::table;
    c.rho_path = r["table"].get<std::string>();
  } else {
    c.rho_kind = RunConfig::RhoKind::queue;
    c.rho_path = r["queue"].get<std::string>();
  }

  c.horizons = j.at("horizons").get<std::vector<double>>();
  if (c.horizons.empty())
    throw std::invalid_argument("config: horizons must be non-empty");
  for (double t : c.horizons)
    if (!(t > 0)) throw std::invalid_argument("config: horizons must be > 0");

  c.output = j.value("output", std::string());
  if (j.contains("tolerances")) {
    const json& tol = j["tolerances"];
    reject_unknown(tol, {"abs_tol", "rel_tol", "root_tol"}, "tolerances");
    c.abs_tol = tol.value("abs_tol", c.abs_tol);
    c.rel_tol = tol.value("rel_tol", c.rel_tol);
    c.root_tol = tol.value("root_tol", c.root_tol);
    if (!(c.abs_tol > 0 && c.rel_tol > 0 && c.root_tol > 0))
      throw std::invalid_argument("config: tolerances must be > 0");
  }
  c.seed = j.value("seed", std::uint64_t{1});
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string dir;
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return parse_run_config(ss.str(), dir);
}

std::string RunConfig::resolve(const std::string& path) const {
  if (path.empty() || path[0] == '/' || base_dir.empty()) return path;
  return base_dir + "/" + path;
}

queue::QueueModel RunConfig::load_queue_model() const {
  if (rho_kind != RhoKind::queue)
    throw std::invalid_argument("config: rho is not queue-backed");
  return queue::QueueModel::from_json_file(resolve(rho_path));
}

ExecProbability RunConfig::make_rho(int queue_max_ticks) const {
  switch (rho_kind) {
    case RhoKind::constant:
      return ExecProbability::constant(rho_constant);
    case RhoKind::table:
      return load_rho_table(resolve(rho_path));
    case RhoKind::queue: {
      queue::QueueModel q = load_queue_model();
      queue::HittingModel h;
      h.kind = model == sim::PriceModel::bachelier
                   ? queue::HittingModel::Kind::bachelier
                   : queue::HittingModel::Kind::black_scholes;
      h.params = market;
      return queue::make_exec_probability(q, h, horizons, queue_max_ticks);
    }
  }
  throw std::logic_error("config: unreachable rho kind");
}

ExecProbability load_rho_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("rho table: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,t,rho", 0) != 0)
    throw std::invalid_argument("rho table: expected header x,t,rho");
  std::map<double, std::map<double, double>> grid;  // x -> t -> rho
  std::set<double> ts;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string xs, tss, rs;
    if (!std::getline(ss, xs, ',') || !std::getline(ss, tss, ',') ||
        !std::getline(ss, rs))
      throw std::invalid_argument("rho table: bad line " +
                                  std::to_string(line_no));
    double x = std::stod(xs), t = std::stod(tss), r = std::stod(rs);
    grid[x][t] = r;
    ts.insert(t);
  }
  if (grid.size() < 2 || ts.size() < 2)
    throw std::invalid_argument("rho table: need at least a 2x2 grid");
  std::vector<double> xs_v, ts_v(ts.begin(), ts.end());
  std::vector<double> vals;
  for (const auto& [x, row] : grid) xs_v.push_back(x);
  for (const auto& [x, row] : grid) {
    if (row.size() != ts_v.size())
      throw std::invalid_argument("rho table: incomplete grid");
    for (double t : ts_v) vals.push_back(row.at(t));
  }
  return ExecProbability::tabulated(std::move(xs_v), std::move(ts_v),
                                    std::move(vals));
}

}  // namespace placekit::cli
