#include "pdms/workload.hpp"

#include "pdms/errors.hpp"
#include "pdms/rng.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>

namespace pdms {

const std::vector<DictionaryWord> &dictionary() {
  static const std::vector<DictionaryWord> words = {
      {"Hospital", 2},     {"Doctor", 3},        {"Patient", 3},    {"Nurse", 2},
      {"Department", 2},   {"Grant", 3},         {"Ward", 2},       {"Clinic", 2},
      {"Surgeon", 2},      {"Treatment", 3},     {"Diagnosis", 2},  {"Prescription", 3},
      {"Drug", 2},         {"Pharmacy", 2},      {"Insurance", 2},  {"Appointment", 3},
      {"Laboratory", 2},   {"Test", 2},          {"Result", 3},     {"Room", 1},
      {"Bed", 2},          {"Staff", 2},         {"Specialist", 2}, {"Symptom", 1},
      {"Disease", 1},      {"Vaccine", 2},       {"Allergy", 2},    {"Therapy", 2},
      {"Admission", 3},    {"Discharge", 2},     {"Invoice", 3},    {"Researcher", 2},
      {"Trial", 3},        {"Institution", 2},   {"City", 1},       {"Address", 2},
      {"Ambulance", 1},    {"Emergency", 2},     {"Record", 3},     {"Consultation", 3},
  };
  return words;
}

ScenarioSpec ScenarioSpec::scaled(int row, std::size_t peers, std::uint64_t seed) {
  struct Row {
    std::size_t peers, mappings, min_acq, max_acq;
  };
  static const Row rows[] = {
      {500, 2767, 3, 12},   {1000, 6202, 2, 14},  {1500, 9941, 2, 15},
      {2000, 13814, 2, 16}, {2500, 17893, 2, 17}, {3000, 22037, 1, 18},
      {3500, 26394, 1, 18}, {4000, 30696, 1, 20}, {4500, 34941, 1, 21},
      {5000, 39261, 1, 21},
  };
  if (row < 1 || row > 10)
    throw InfeasibleSpec("scenario row must be in 1..10");
  const Row &r = rows[row - 1];
  ScenarioSpec s;
  s.peers = peers;
  s.target_rules = static_cast<std::size_t>(
      std::llround(static_cast<double>(r.mappings) * static_cast<double>(peers) /
                   static_cast<double>(r.peers)));
  s.min_acq = r.min_acq;
  s.max_acq = std::min(r.max_acq, peers - 1);
  s.seed = seed;
  return s;
}

void ScenarioSpec::validate() const {
  if (peers < 2)
    throw InfeasibleSpec("need at least two peers");
  if (min_acq < 1 || min_acq > max_acq)
    throw InfeasibleSpec("acquaintance bounds must satisfy 1 <= min <= max");
  if (max_acq >= peers)
    throw InfeasibleSpec("max acquaintances must be below the peer count");
  if (min_tables < 1 || min_tables > max_tables || max_tables > dictionary().size())
    throw InfeasibleSpec("bad table bounds");
  if (min_rules_per_mapping < 1 || min_rules_per_mapping > max_rules_per_mapping)
    throw InfeasibleSpec("bad rules-per-mapping bounds");
  if (max_atoms_per_side < 1)
    throw InfeasibleSpec("rules need at least one atom per side");
  if (existential_ratio < 0.0 || existential_ratio > 1.0)
    throw InfeasibleSpec("existential ratio must be a probability");
}

std::string schema_fingerprint(const std::vector<Table> &schema) {
  std::vector<std::string> parts;
  for (const auto &t : schema)
    parts.push_back(t.name + "/" + std::to_string(t.arity));
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (const auto &p : parts)
    out += p + ";";
  return out;
}

namespace {

std::vector<std::vector<Table>> make_schemas(const ScenarioSpec &spec, Rng &rng) {
  const auto &words = dictionary();
  std::set<std::string> fingerprints;
  std::vector<std::vector<Table>> schemas;
  for (std::size_t p = 0; p < spec.peers; ++p) {
    auto count = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(spec.min_tables),
                        static_cast<std::int64_t>(spec.max_tables)));
    std::vector<Table> schema;
    for (auto i : rng.sample_indices(words.size(), count))
      schema.push_back({words[i].name, words[i].arity});
    if (fingerprints.contains(schema_fingerprint(schema))) {
      auto &t = schema[rng.uniform_below(schema.size())];
      t.name += "_" + std::to_string(p);
    }
    fingerprints.insert(schema_fingerprint(schema));
    schemas.push_back(std::move(schema));
  }
  return schemas;
}

using Edge = std::pair<PeerId, PeerId>;

std::vector<Edge> make_graph(const ScenarioSpec &spec, std::size_t edge_target, Rng &rng) {
  const std::size_t n = spec.peers;
  std::vector<std::size_t> degree(n, 0);
  std::set<Edge> edges;
  auto connect = [&](std::size_t a, std::size_t b) {
    if (a == b)
      return false;
    Edge e{static_cast<PeerId>(std::min(a, b)), static_cast<PeerId>(std::max(a, b))};
    if (edges.contains(e) || degree[a] >= spec.max_acq || degree[b] >= spec.max_acq)
      return false;
    edges.insert(e);
    ++degree[a];
    ++degree[b];
    return true;
  };

  // random spanning tree keeps the acquaintance graph connected
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = i;
  rng.shuffle(order);
  for (std::size_t i = 1; i < n; ++i) {
    bool linked = false;
    for (int attempt = 0; attempt < 64 && !linked; ++attempt)
      linked = connect(order[i], order[rng.uniform_below(i)]);
    for (std::size_t j = 0; j < i && !linked; ++j)
      linked = connect(order[i], order[j]);
    if (!linked)
      throw InfeasibleSpec("cannot build a connected graph under the degree cap");
  }

  std::size_t stall = 0;
  while (edges.size() < edge_target && stall < 64 * n) {
    if (connect(rng.uniform_below(n), rng.uniform_below(n)))
      stall = 0;
    else
      ++stall;
  }

  for (std::size_t p = 0; p < n; ++p) {
    std::size_t guard = 0;
    while (degree[p] < spec.min_acq) {
      if (!connect(p, rng.uniform_below(n)) && ++guard > 64 * n)
        throw InfeasibleSpec("cannot satisfy the minimum acquaintance count");
    }
  }
  return {edges.begin(), edges.end()};
}

// Per-edge rule counts within bounds whose sum is as close as possible to the
// target.
std::vector<std::size_t> split_rules(const ScenarioSpec &spec, std::size_t edges,
                                     Rng &rng) {
  const auto lo = static_cast<std::int64_t>(spec.min_rules_per_mapping);
  const auto hi = static_cast<std::int64_t>(spec.max_rules_per_mapping);
  std::vector<std::size_t> counts(edges);
  std::size_t total = 0;
  for (auto &c : counts) {
    c = static_cast<std::size_t>(rng.uniform_int(lo, hi));
    total += c;
  }
  const std::size_t target = std::clamp(spec.target_rules, edges * static_cast<std::size_t>(lo),
                                        edges * static_cast<std::size_t>(hi));
  while (total != target) {
    auto &c = counts[rng.uniform_below(edges)];
    if (total < target && c < static_cast<std::size_t>(hi)) {
      ++c;
      ++total;
    } else if (total > target && c > static_cast<std::size_t>(lo)) {
      --c;
      --total;
    }
  }
  return counts;
}

class RuleMaker {
public:
  RuleMaker(const ScenarioSpec &spec, Rng &rng) : spec_(spec), rng_(rng) {}

  std::optional<RulePtr> make(const std::vector<Table> &source,
                              const std::vector<Table> &target) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto rule = std::make_shared<const MappingRule>(draw(source, target));
      if (used_.insert(rule->signature()).second)
        return rule;
    }
    return std::nullopt;
  }

private:
  std::size_t side_size(std::size_t tables) {
    auto cap = std::min(spec_.max_atoms_per_side, tables);
    return static_cast<std::size_t>(rng_.uniform_int(1, static_cast<std::int64_t>(cap)));
  }

  MappingRule draw(const std::vector<Table> &source, const std::vector<Table> &target) {
    int next_var = 0;
    auto fresh = [&] { return Term::var("x" + std::to_string(next_var++)); };

    std::vector<Atom> body;
    std::vector<Term> body_vars;
    for (auto i : rng_.sample_indices(source.size(), side_size(source.size()))) {
      Atom a{source[i].name, {}};
      for (unsigned k = 0; k < source[i].arity; ++k)
        a.params.push_back(fresh());
      // join with the previous atom most of the time
      if (!body.empty() && rng_.bernoulli(0.7)) {
        const auto &prev = body.back().params;
        a.params[rng_.uniform_below(a.params.size())] = prev[rng_.uniform_below(prev.size())];
      }
      for (const auto &t : a.params)
        if (std::find(body_vars.begin(), body_vars.end(), t) == body_vars.end())
          body_vars.push_back(t);
      body.push_back(std::move(a));
    }

    std::vector<Atom> head;
    int next_exist = 0;
    for (auto i : rng_.sample_indices(target.size(), side_size(target.size()))) {
      Atom a{target[i].name, {}};
      for (unsigned k = 0; k < target[i].arity; ++k)
        a.params.push_back(body_vars[rng_.uniform_below(body_vars.size())]);
      if (rng_.bernoulli(spec_.existential_ratio))
        a.params[rng_.uniform_below(a.params.size())] =
            Term::var("e" + std::to_string(next_exist++));
      head.push_back(std::move(a));
    }
    return MappingRule(std::move(body), std::move(head));
  }

  const ScenarioSpec &spec_;
  Rng &rng_;
  std::set<Signature> used_;
};

} // namespace

GeneratedNetwork generate_network(const ScenarioSpec &spec) {
  spec.validate();
  Rng rng(spec.seed);
  GeneratedNetwork g;
  g.schemas = make_schemas(spec, rng);

  const double mean_rules = 0.5 * static_cast<double>(spec.min_rules_per_mapping +
                                                      spec.max_rules_per_mapping);
  auto edge_target = static_cast<std::size_t>(
      std::llround(static_cast<double>(spec.target_rules) / mean_rules));
  g.edges = make_graph(spec, std::max<std::size_t>(edge_target, spec.peers - 1), rng);

  auto counts = split_rules(spec, g.edges.size(), rng);
  RuleMaker maker(spec, rng);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto [a, b] = g.edges[e];
    if (rng.bernoulli(0.5))
      std::swap(a, b);
    std::vector<RulePtr> rules;
    for (std::size_t r = 0; r < counts[e]; ++r)
      if (auto rule = maker.make(g.schemas[a], g.schemas[b]))
        rules.push_back(*rule);
    if (rules.empty())
      throw InfeasibleSpec("could not draw a distinct rule between peers " +
                           std::to_string(a) + " and " + std::to_string(b));
    g.mappings.push_back(
        std::make_shared<const SchemaMapping>(SchemaMapping::make(a, b, std::move(rules))));
  }
  return g;
}

Network build_network(const GeneratedNetwork &g, const GossipConfig &cfg,
                      const TopologyInfo &topo, std::uint64_t seed) {
  Network net(cfg, topo, seed);
  for (const auto &s : g.schemas)
    net.add_peer(s);
  for (const auto &m : g.mappings)
    net.add_mapping(m);
  return net;
}

namespace {

std::string constant_for(Rng &rng) {
  const auto &words = dictionary();
  std::string w = words[rng.uniform_below(words.size())].name;
  for (auto &c : w)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w + "_" + std::to_string(rng.uniform_below(10));
}

} // namespace

std::vector<GeneratedQuery> generate_queries(const Network &net, std::size_t n,
                                             std::uint64_t seed, double constant_ratio) {
  std::vector<GeneratedQuery> out;
  if (n == 0)
    return out;
  std::vector<PeerId> candidates;
  for (const auto &p : net.peers())
    if (p.alive && !p.mappings.empty())
      candidates.push_back(p.id);
  if (candidates.empty())
    throw InfeasibleSpec("no live peer holds a mapping");

  Rng rng(seed);
  std::size_t failures = 0;
  while (out.size() < n) {
    if (++failures > 1000 * n)
      throw InfeasibleSpec("could not draw relevant queries");
    const PeerState &p = net.peer(candidates[rng.uniform_below(candidates.size())]);
    const SchemaMapping &m = *p.mappings[rng.uniform_below(p.mappings.size())];
    const MappingRule &r = *m.rules[rng.uniform_below(m.rules.size())];

    // atoms over the origin's own schema: the body of an outward mapping or
    // the universal head atoms of an inward one
    std::vector<Atom> pool;
    if (p.is_outward(m)) {
      pool = r.body();
    } else {
      for (const auto &a : r.head())
        if (!r.has_existential(a))
          pool.push_back(a);
    }
    if (pool.empty())
      continue;
    auto take = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<std::int64_t>(std::min<std::size_t>(3, pool.size()))));
    auto picked = rng.sample_indices(pool.size(), take);
    std::sort(picked.begin(), picked.end());

    ConjunctiveQuery q;
    std::map<std::string, Term> rename;
    for (auto i : picked) {
      Atom a = pool[i];
      for (auto &t : a.params) {
        auto it = rename.find(t.name);
        if (it == rename.end()) {
          Term replacement = rng.bernoulli(constant_ratio)
                                 ? Term::constant(constant_for(rng))
                                 : Term::var("v" + std::to_string(rename.size()));
          it = rename.emplace(t.name, replacement).first;
        }
        t = it->second;
      }
      q.atoms.push_back(std::move(a));
    }
    if (!mapping_relevant(q, m))
      continue;
    out.push_back({p.id, std::move(q)});
  }
  return out;
}

} // namespace pdms
