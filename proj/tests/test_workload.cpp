#include "pdms/errors.hpp"
#include "pdms/text_format.hpp"
#include "pdms/workload.hpp"

#include <doctest.h>

#include <map>

using namespace pdms;

TEST_CASE("dictionary names keep one arity") {
  std::map<std::string, unsigned> seen;
  for (const auto &w : dictionary()) {
    CHECK(w.arity >= 1);
    CHECK(seen.emplace(w.name, w.arity).second);
  }
  CHECK(dictionary().size() == 40);
}

TEST_CASE("scaled scenario rows") {
  auto s = ScenarioSpec::scaled(4, 200, 1);
  CHECK(s.peers == 200);
  CHECK(s.target_rules == 1381); // 13814 * 200 / 2000
  CHECK(s.min_acq == 2);
  CHECK(s.max_acq == 16);
  CHECK_THROWS_AS(ScenarioSpec::scaled(11, 200, 1), InfeasibleSpec);
  auto bad = s;
  bad.max_acq = 300;
  CHECK_THROWS_AS(bad.validate(), InfeasibleSpec);
}

TEST_CASE("generated network respects its scenario") {
  auto spec = ScenarioSpec::scaled(4, 60, 2);
  auto g = generate_network(spec);
  REQUIRE(g.schemas.size() == 60);
  std::map<std::string, unsigned> arity;
  for (const auto &w : dictionary())
    arity[w.name] = w.arity;
  for (const auto &schema : g.schemas) {
    CHECK(schema.size() >= spec.min_tables);
    CHECK(schema.size() <= spec.max_tables);
    for (const auto &t : schema)
      CHECK(arity.at(t.name) == t.arity);
  }
  std::vector<std::size_t> degree(60, 0);
  for (const auto &[a, b] : g.edges) {
    CHECK(a < b);
    ++degree[a];
    ++degree[b];
  }
  for (auto d : degree)
    CHECK(d <= spec.max_acq);
  std::size_t rules = 0;
  for (const auto &m : g.mappings) {
    CHECK(m->rules.size() >= spec.min_rules_per_mapping);
    CHECK(m->rules.size() <= spec.max_rules_per_mapping);
    rules += m->rules.size();
    for (const auto &r : m->rules) {
      CHECK(r->body().size() <= spec.max_atoms_per_side);
      CHECK(r->head().size() <= spec.max_atoms_per_side);
    }
  }
  CHECK(rules >= spec.target_rules * 9 / 10);
  CHECK(rules <= spec.target_rules * 11 / 10);
}

TEST_CASE("generation is deterministic per seed") {
  auto a = generate_network(ScenarioSpec::scaled(2, 40, 7));
  auto b = generate_network(ScenarioSpec::scaled(2, 40, 7));
  auto c = generate_network(ScenarioSpec::scaled(2, 40, 8));
  auto text = [](const GeneratedNetwork &g) {
    std::string s;
    for (const auto &sc : g.schemas)
      s += schema_fingerprint(sc) + ";";
    for (const auto &m : g.mappings)
      s += m->id.hex() + ";";
    return s;
  };
  CHECK(text(a) == text(b));
  CHECK(text(a) != text(c));
}

TEST_CASE("queries are relevant at their origin") {
  auto spec = ScenarioSpec::scaled(4, 50, 3);
  Network net = build_network(generate_network(spec), GossipConfig{},
                              TopologyInfo{TopologyInfo::Mode::Unstructured, 50}, 3);
  auto qs = generate_queries(net, 20, 3);
  REQUIRE(qs.size() == 20);
  for (const auto &gq : qs) {
    CHECK(gq.query.atoms.size() >= 1);
    CHECK(gq.query.atoms.size() <= 3);
    bool relevant = false;
    for (const auto &m : net.peer(gq.origin).mappings)
      relevant = relevant || mapping_relevant(gq.query, *m);
    CHECK(relevant);
  }
  auto again = generate_queries(net, 20, 3);
  for (std::size_t i = 0; i < qs.size(); ++i)
    CHECK(format_query(again[i].query) == format_query(qs[i].query));
}
