#include "pdms/errors.hpp"
#include "pdms/gossip.hpp"
#include "pdms/peer.hpp"
#include "pdms/text_format.hpp"

#include <doctest.h>

using namespace pdms;

namespace {

RulePtr rule(const char *text) { return std::make_shared<MappingRule>(parse_rule(text)); }

MappingPtr mapping(PeerId s, PeerId t, std::vector<RulePtr> rules) {
  return std::make_shared<SchemaMapping>(SchemaMapping::make(s, t, std::move(rules)));
}

} // namespace

TEST_CASE("rows per rule atom") {
  auto r = rule("A($x,$y), B($y) -> C($x,?z)");
  auto rows = rows_for_rule(r, 3, 4, 9);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].atom == "A/2");
  CHECK(rows[2].side == Side::Head);
  CHECK(rows[2].provider == 9);
}

TEST_CASE("merge deduplicates and skips local rules") {
  LocalSemanticView v(100);
  auto r1 = rule("A($x) -> B($x)");
  auto r2 = rule("B($x) -> C($x)");
  v.merge(1, rows_for_rule(r1, 1, 2, 1), {});
  v.merge(2, rows_for_rule(r1, 1, 2, 2), {});
  CHECK(v.rows().size() == 2);
  CHECK(v.knows(2));
  v.merge(3, rows_for_rule(r2, 3, 4, 3), {r2->signature()});
  CHECK(v.rows().size() == 2);
  CHECK(v.distinct_rules().size() == 1);
  v.check_integrity();
}

TEST_CASE("ageing, oldest contact and eviction") {
  LocalSemanticView v(4);
  v.add_contact(7, 3);
  v.add_contact(5, 3);
  v.add_contact(7, 0); // keeps the existing age
  CHECK(v.age_of(7) == 3u);
  CHECK(v.oldest() == 5u);
  v.age_all();
  CHECK(v.age_of(5) == 4u);

  v.merge(1, rows_for_rule(rule("A($x) -> B($x)"), 1, 2, 1), {});
  v.age_all();
  v.merge(2, rows_for_rule(rule("C($x) -> D($x)"), 2, 3, 2), {});
  CHECK(v.rows().size() == 4);
  // provider 1 is older, its rows go first
  v.merge(3, rows_for_rule(rule("E($x) -> F($x)"), 3, 4, 3), {});
  CHECK(v.rows().size() == 4);
  CHECK_FALSE(v.knows(1));
  CHECK(v.knows(3));
  v.check_integrity();
  // youngest first, ties by id
  CHECK(v.peers_by_age() == std::vector<PeerId>{2, 3, 5, 7});
}

TEST_CASE("gossip exchange moves rows both ways") {
  GossipConfig cfg;
  cfg.l_gossip = 50;
  PeerState a(0, cfg.v_gossip), b(1, cfg.v_gossip);
  a.add_mapping(mapping(0, 5, {rule("A($x) -> B($x)")}));
  b.add_mapping(mapping(1, 6, {rule("C($x) -> D($x)")}));
  a.lsv.add_contact(1);
  Rng rng(4);

  auto out = gossip_active(a, cfg, rng);
  REQUIRE(out);
  CHECK(out->target == 1);
  CHECK(a.awaiting_reply == 1u);
  auto reply = gossip_passive(b, out->message, cfg, rng);
  CHECK(b.lsv.knows(0));
  CHECK(b.lsv.distinct_rules().size() == 1);
  gossip_complete(a, reply, cfg);
  CHECK(a.lsv.distinct_rules().size() == 1);
  CHECK(a.lsv.age_of(1) == 0u);
  CHECK_FALSE(a.awaiting_reply);
  CHECK_THROWS_AS(gossip_complete(a, reply, cfg), UnmatchedReply);

  b.alive = false;
  CHECK_THROWS_AS(gossip_passive(b, out->message, cfg, rng), DeadPeer);
}

TEST_CASE("unanswered contact is dropped on the next cycle") {
  GossipConfig cfg;
  PeerState a(0, cfg.v_gossip);
  a.lsv.add_contact(1);
  a.lsv.add_contact(2);
  Rng rng(1);
  auto first = gossip_active(a, cfg, rng);
  REQUIRE(first);
  auto second = gossip_active(a, cfg, rng);
  REQUIRE(second);
  CHECK(second->target != first->target);
  CHECK_FALSE(a.lsv.knows(first->target));
  PeerState lonely(9, cfg.v_gossip);
  CHECK_FALSE(gossip_active(lonely, cfg, rng));
}

TEST_CASE("sample size is bounded by l_gossip") {
  GossipConfig cfg;
  cfg.l_gossip = 3;
  PeerState a(0, cfg.v_gossip);
  a.add_mapping(mapping(0, 1, {rule("A($x,$y), B($y) -> C($x,$y), D($y)")}));
  Rng rng(2);
  CHECK(local_rows(a).size() == 4);
  CHECK(sample_rows(a, cfg, rng).size() == 3);

  GossipConfig bad;
  bad.l_gossip = 0;
  CHECK_THROWS_AS(bad.validate(), MalformedScenario);
  bad = GossipConfig{};
  bad.t_gossip = 2;
  CHECK_THROWS_AS(bad.validate(), MalformedScenario);
}
