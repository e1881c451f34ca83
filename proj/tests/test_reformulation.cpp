#include "pdms/errors.hpp"
#include "pdms/harness.hpp"
#include "pdms/reformulation.hpp"
#include "pdms/text_format.hpp"

#include <doctest.h>

#include <functional>

using namespace pdms;

namespace {

RulePtr rule(const char *text) { return std::make_shared<MappingRule>(parse_rule(text)); }

void link(Network &net, PeerId s, PeerId t, std::vector<RulePtr> rules) {
  net.add_mapping(std::make_shared<SchemaMapping>(SchemaMapping::make(s, t, std::move(rules))));
}

// 0 -> 1 -> 2 with GAV rules renaming Hospital to Clinic to Place, plus
// filler mappings 0 -> 3 and 2 -> 4 so IMF values stay positive.
Network chain() {
  Network net(GossipConfig{}, TopologyInfo{TopologyInfo::Mode::Unstructured, 5}, 7);
  net.add_peer({{"Hospital", 2}, {"Staff", 1}});
  net.add_peer({{"Clinic", 2}});
  net.add_peer({{"Place", 2}, {"Road", 1}});
  net.add_peer({{"Nurse", 1}});
  net.add_peer({{"Street", 1}});
  link(net, 0, 1, {rule("Hospital($n,$l) -> Clinic($n,$l)")});
  link(net, 1, 2, {rule("Clinic($n,$l) -> Place($n,$l)")});
  link(net, 0, 3, {rule("Staff($s) -> Nurse($s)")});
  link(net, 2, 4, {rule("Road($r) -> Street($r)")});
  return net;
}

std::set<Rewriting> expected(std::initializer_list<std::pair<PeerId, const char *>> items) {
  std::set<Rewriting> out;
  for (const auto &[p, q] : items)
    out.insert({p, canonical_key(parse_query(q))});
  return out;
}

QueryConfig config(Protocol p, std::size_t k = 0) {
  QueryConfig c;
  c.protocol = p;
  c.top_k = k;
  return c;
}

// Every (peer, query) obtainable from the origin by applying relevant rules
// of any mapping in either direction, up to `depth` hops. Independent of the
// walk: no processed set, no ranking, every case of the shipping table.
std::set<Rewriting> closure(const Network &net, PeerId origin, const ConjunctiveQuery &q,
                            unsigned depth) {
  std::map<Rewriting, unsigned> best; // largest remaining depth seen
  std::function<void(PeerId, const ConjunctiveQuery &, unsigned)> dfs =
      [&](PeerId p, const ConjunctiveQuery &cq, unsigned d) {
        auto [it, fresh] = best.try_emplace({p, canonical_key(cq)}, d);
        if (!fresh) {
          if (it->second >= d)
            return;
          it->second = d;
        }
        if (d == 0)
          return;
        for (const auto &m : net.peer(p).mappings) {
          const PeerId other = m->source == p ? m->target : m->source;
          if (!net.live(other))
            continue;
          for (const auto &r : m->rules)
            for (Direction dir : {Direction::Forward, Direction::Backward}) {
              if (!relevant(cq, *r, dir))
                continue;
              ConjunctiveQuery t;
              try {
                t = translate(cq, *r, dir);
              } catch (const ConflictingBindings &) {
                continue;
              }
              dfs(other, cq, d - 1);
              dfs(other, t, d - 1);
              dfs(p, t, d - 1);
            }
        }
      };
  dfs(origin, minimize(q), depth);
  std::set<Rewriting> out;
  for (const auto &[r, d] : best)
    out.insert(r);
  return out;
}

} // namespace

TEST_CASE("protocol names") {
  for (auto p : all_protocols())
    CHECK(parse_protocol(to_string(p)) == p);
  CHECK_THROWS_AS(parse_protocol("Full+"), ParseError);
  CHECK(traits(Protocol::Full).uses_foaf);
  CHECK_FALSE(traits(Protocol::FullMinus).uses_foaf);
  CHECK(traits(Protocol::Baseline).propagates_irrelevant);
}

TEST_CASE("forward chain is followed to the end") {
  Network net = chain();
  auto r = translate_query(net, 0, parse_query("Hospital($x,'SF')"), config(Protocol::FullMinus));
  CHECK(r.rewritings == expected({{0, "Hospital($x,'SF')"},
                                  {1, "Clinic($x,'SF')"},
                                  {2, "Place($x,'SF')"}}));
  CHECK(r.relevant == r.rewritings);
  CHECK(r.translated.size() == 2);
  CHECK(r.messages == 2);
  CHECK(within_rewriting_bound(r, 1));

  auto truth = centralized_oracle(net, 0, parse_query("Hospital($x,'SF')"));
  CHECK(truth.rewritings == r.rewritings);
  CHECK(recall(r, truth) == 1.0);
}

TEST_CASE("backward translation runs against the mappings") {
  Network net = chain();
  auto r = translate_query(net, 2, parse_query("Place($x,$y)"), config(Protocol::FullMinus));
  CHECK(r.rewritings == expected({{2, "Place($x,$y)"},
                                  {1, "Clinic($x,$y)"},
                                  {0, "Hospital($x,$y)"}}));
}

TEST_CASE("hop limit") {
  Network net = chain();
  auto c = config(Protocol::FullMinus);
  c.alpha = 1;
  auto r = translate_query(net, 0, parse_query("Hospital($x,'SF')"), c);
  CHECK(r.rewritings.size() == 2);
  auto truth = centralized_oracle(net, 0, parse_query("Hospital($x,'SF')"), 1u);
  CHECK(truth.rewritings == r.rewritings);
}

TEST_CASE("departed peers drop messages") {
  Network net = chain();
  net.peer(1).alive = false;
  auto r = translate_query(net, 0, parse_query("Hospital($x,'SF')"), config(Protocol::FullMinus));
  CHECK(r.rewritings.size() == 1);
  CHECK(r.dropped == 1);
  CHECK_THROWS_AS(translate_query(net, 1, parse_query("Clinic($x,$y)"), config(Protocol::Full)),
                  DeadPeer);
  CHECK(centralized_oracle(net, 0, parse_query("Hospital($x,'SF')")).rewritings.size() == 1);
}

TEST_CASE("baseline floods the original query") {
  Network net = chain();
  auto r = translate_query(net, 0, parse_query("Hospital($x,'SF')"), config(Protocol::Baseline));
  // every peer sees the untranslated query
  CHECK(r.rewritings.size() == 5);
  CHECK(r.translated.empty());
  auto plus = translate_query(net, 0, parse_query("Hospital($x,'SF')"),
                              config(Protocol::BaselinePlus));
  CHECK(plus.translated.size() == 2);
  for (const auto &rw : expected({{1, "Clinic($x,'SF')"}, {2, "Place($x,'SF')"}}))
    CHECK(plus.rewritings.contains(rw));
}

TEST_CASE("top-k restricts the mappings followed") {
  Network net = chain();
  // Staff is only reachable through 0 -> 3; with k=1 the Hospital mapping
  // is the single relevant choice for the Hospital query
  auto r = translate_query(net, 0, parse_query("Hospital($x,$y)"), config(Protocol::FullMinus, 1));
  CHECK(r.rewritings.size() == 3);
  // Baseline picks by hash order and may spend its single slot on Staff
  auto base = translate_query(net, 0, parse_query("Hospital($x,$y)"), config(Protocol::Baseline, 1));
  CHECK(base.translated.empty());
}

TEST_CASE("protocol results on generated networks") {
  ExperimentConfig cfg;
  cfg.peers = 40;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Network base = prepare_network(cfg, seed);
    base.run_cycles(5);
    auto queries = generate_queries(base, 4, seed);
    for (const auto &gq : queries) {
      auto truth = centralized_oracle(base, gq.origin, gq.query);
      CHECK(within_rewriting_bound(truth, gq.query.atoms.size()));
      for (std::size_t k : {1u, 3u}) {
        std::map<Protocol, QueryResultSet> res;
        for (auto p : all_protocols()) {
          Network net = base;
          res[p] = translate_query(net, gq.origin, gq.query, config(p, k));
          CHECK(within_rewriting_bound(res[p], gq.query.atoms.size()));
          double rc = recall(res[p], truth);
          CHECK(rc >= 0.0);
          CHECK(rc <= 1.0);
        }
        // friendship links only add branches after the mapping walk settles
        for (const auto &rw : res[Protocol::FullMinus].rewritings)
          CHECK(res[Protocol::Full].rewritings.contains(rw));
      }
      // without a top-k cut, everything within 2 hops is reachable by brute force
      Network net = base;
      auto c = config(Protocol::FullMinus, 0);
      c.alpha = 2;
      auto reach = closure(base, gq.origin, gq.query, 2);
      for (const auto &rw : translate_query(net, gq.origin, gq.query, c).rewritings)
        CHECK(reach.contains(rw));
    }
  }
}

TEST_CASE("oracle is reachable by brute force") {
  ExperimentConfig cfg;
  cfg.peers = 25;
  Network net = prepare_network(cfg, 11);
  for (const auto &gq : generate_queries(net, 5, 11)) {
    auto truth = centralized_oracle(net, gq.origin, gq.query, 3u);
    auto reach = closure(net, gq.origin, gq.query, 3);
    for (const auto &rw : truth.rewritings)
      CHECK(reach.contains(rw));
  }
}

TEST_CASE("rewriting bound") {
  QueryResultSet r;
  r.relevant_rules = 2;
  r.translated = {"a", "b", "c", "d"};
  CHECK(within_rewriting_bound(r, 2));
  CHECK_FALSE(within_rewriting_bound(r, 1));
  r.relevant_rules = 0;
  r.translated.clear();
  CHECK(within_rewriting_bound(r, 3));
}
