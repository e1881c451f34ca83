#include "pdms/errors.hpp"
#include "pdms/harness.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pdms {

unsigned ReqsSchedule::at(std::uint64_t cycle) const {
  unsigned v = 0;
  for (const auto &[from, reqs] : steps)
    if (from <= cycle)
      v = reqs;
  return v;
}

ReqsSchedule ReqsSchedule::parse(const std::string &text) {
  ReqsSchedule s;
  s.steps.clear();
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos)
      throw MalformedScenario("reqs entry '" + item + "' is not cycle:value");
    try {
      s.steps.emplace_back(static_cast<unsigned>(std::stoul(item.substr(0, colon))),
                           static_cast<unsigned>(std::stoul(item.substr(colon + 1))));
    } catch (const std::logic_error &) {
      throw MalformedScenario("reqs entry '" + item + "' is not numeric");
    }
  }
  std::stable_sort(s.steps.begin(), s.steps.end());
  return s;
}

std::string ReqsSchedule::str() const {
  std::string out;
  for (const auto &[from, reqs] : steps) {
    if (!out.empty())
      out += ",";
    out += std::to_string(from) + ":" + std::to_string(reqs);
  }
  return out;
}

namespace {

std::string trim(const std::string &s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto t = trim(item); !t.empty())
      out.push_back(t);
  return out;
}

std::uint64_t to_u64(const std::string &key, const std::string &v) {
  try {
    if (v.empty() || v[0] == '-' || v[0] == '+')
      throw std::invalid_argument(v); // stoull would wrap "-3"
    std::size_t used = 0;
    auto n = std::stoull(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return n;
  } catch (const std::logic_error &) {
    throw MalformedScenario(key + " expects a non-negative integer, got '" + v + "'");
  }
}

double to_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return d;
  } catch (const std::logic_error &) {
    throw MalformedScenario(key + " expects a number, got '" + v + "'");
  }
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes")
    return true;
  if (v == "false" || v == "0" || v == "no")
    return false;
  throw MalformedScenario(key + " expects true or false, got '" + v + "'");
}

std::string join(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &i : items)
    out += (out.empty() ? "" : ",") + i;
  return out;
}

} // namespace

ExperimentConfig ExperimentConfig::parse(const std::string &text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // a comment starts at a '#' that opens the line or follows a blank, so
    // protocol names like Baseline# survive
    for (std::size_t i = 0; i < line.size(); ++i)
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw MalformedScenario("line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    auto u = [&] { return to_u64(key, v); };

    if (key == "name")
      c.name = v;
    else if (key == "scenario")
      c.scenario_row = static_cast<int>(u());
    else if (key == "peers")
      c.peers = u();
    else if (key == "rules")
      c.rules = u();
    else if (key == "min_acq")
      c.min_acq = u();
    else if (key == "max_acq")
      c.max_acq = u();
    else if (key == "seed")
      c.seed = u();
    else if (key == "seeds")
      c.seeds = u();
    else if (key == "t_gossip")
      c.gossip.t_gossip = u();
    else if (key == "v_gossip")
      c.gossip.v_gossip = u();
    else if (key == "l_gossip")
      c.gossip.l_gossip = u();
    else if (key == "topology") {
      try {
        c.topology = parse_topology(v);
      } catch (const UnknownTopology &e) {
        throw MalformedScenario(e.what());
      }
    } else if (key == "topology_param")
      c.topology_param = u();
    else if (key == "protocols") {
      c.protocols.clear();
      for (const auto &p : split_list(v)) {
        try {
          c.protocols.push_back(parse_protocol(p));
        } catch (const ParseError &e) {
          throw MalformedScenario(e.what());
        }
      }
    } else if (key == "topk_max")
      c.topk_max = u();
    else if (key == "topk")
      c.topk = u();
    else if (key == "alpha")
      c.alpha = v == "unbounded" ? std::nullopt
                                 : std::optional<unsigned>(static_cast<unsigned>(u()));
    else if (key == "reqs")
      c.reqs = ReqsSchedule::parse(v);
    else if (key == "rank_fn") {
      try {
        c.rank = parse_rank_fn(v);
      } catch (const ParseError &e) {
        throw MalformedScenario(e.what());
      }
    } else if (key == "accept_probability")
      c.accept_probability = to_double(key, v);
    else if (key == "queries")
      c.queries = u();
    else if (key == "cycles")
      c.warmup_cycles = u();
    else if (key == "precision_cycles")
      c.precision_cycles = u();
    else if (key == "churn_step")
      c.churn_step = u();
    else if (key == "churn_steps")
      c.churn_steps = u();
    else if (key == "experiments")
      c.experiments = split_list(v);
    else if (key == "time_peers") {
      c.time_peers.clear();
      for (const auto &p : split_list(v))
        c.time_peers.push_back(to_u64(key, p));
    } else if (key == "parallel")
      c.parallel = to_bool(key, v);
    else
      throw MalformedScenario("unknown key '" + key + "'");
  }
  c.gossip.validate();
  if (c.accept_probability < 0.0 || c.accept_probability > 1.0)
    throw MalformedScenario("accept_probability must be within [0, 1]");
  if (c.seeds == 0)
    throw MalformedScenario("seeds must be positive");
  static const std::vector<std::string> known = {"recall", "precision", "foaf", "churn",
                                                 "time"};
  for (const auto &e : c.experiments)
    if (std::find(known.begin(), known.end(), e) == known.end())
      throw MalformedScenario("unknown experiment '" + e + "'");
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw MalformedScenario("cannot open scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::str() const {
  std::ostringstream os;
  os << "name=" << name << "\n"
     << "scenario=" << scenario_row << "\n"
     << "peers=" << peers << "\n";
  if (rules)
    os << "rules=" << *rules << "\n";
  if (min_acq)
    os << "min_acq=" << *min_acq << "\n";
  if (max_acq)
    os << "max_acq=" << *max_acq << "\n";
  os << "seed=" << seed << "\n"
     << "seeds=" << seeds << "\n"
     << "t_gossip=" << gossip.t_gossip << "\n"
     << "v_gossip=" << gossip.v_gossip << "\n"
     << "l_gossip=" << gossip.l_gossip << "\n"
     << "topology=" << to_string(topology) << "\n";
  if (topology_param)
    os << "topology_param=" << *topology_param << "\n";
  std::vector<std::string> names;
  for (auto p : protocols)
    names.push_back(to_string(p));
  os << "protocols=" << join(names) << "\n"
     << "topk_max=" << topk_max << "\n"
     << "topk=" << topk << "\n"
     << "alpha=" << (alpha ? std::to_string(*alpha) : "unbounded") << "\n"
     << "reqs=" << reqs.str() << "\n"
     << "rank_fn=" << to_string(rank) << "\n"
     << "accept_probability=" << accept_probability << "\n"
     << "queries=" << queries << "\n"
     << "cycles=" << warmup_cycles << "\n"
     << "precision_cycles=" << precision_cycles << "\n"
     << "churn_step=" << churn_step << "\n"
     << "churn_steps=" << churn_steps << "\n"
     << "experiments=" << join(experiments) << "\n";
  std::vector<std::string> sizes;
  for (auto n : time_peers)
    sizes.push_back(std::to_string(n));
  os << "time_peers=" << join(sizes) << "\n"
     << "parallel=" << (parallel ? "true" : "false") << "\n";
  return os.str();
}

ScenarioSpec ExperimentConfig::spec(std::uint64_t s) const {
  ScenarioSpec spec = ScenarioSpec::scaled(scenario_row, peers, s);
  if (rules)
    spec.target_rules = *rules;
  if (min_acq)
    spec.min_acq = *min_acq;
  if (max_acq)
    spec.max_acq = *max_acq;
  return spec;
}

TopologyInfo ExperimentConfig::topology_info() const {
  TopologyInfo t;
  t.mode = topology;
  t.param = topology_param ? *topology_param : peers;
  return t;
}

} // namespace pdms
