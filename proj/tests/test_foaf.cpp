#include "pdms/errors.hpp"
#include "pdms/foaf.hpp"
#include "pdms/network.hpp"
#include "pdms/reformulation.hpp"
#include "pdms/text_format.hpp"

#include <doctest.h>

using namespace pdms;

namespace {

RulePtr rule(const std::string &text) {
  return std::make_shared<MappingRule>(parse_rule(text));
}

void link(Network &net, PeerId s, PeerId t, std::vector<RulePtr> rules) {
  net.add_mapping(std::make_shared<SchemaMapping>(SchemaMapping::make(s, t, std::move(rules))));
}

// Peer 0 holds filler rules and has seen, through its View, the mapping
// 1 -> 2 that speaks about Hospital. Peer 3 is unrelated.
Network foaf_net() {
  Network net(GossipConfig{}, TopologyInfo{TopologyInfo::Mode::Unstructured, 4}, 3);
  for (int i = 0; i < 5; ++i)
    net.add_peer({});
  std::vector<RulePtr> filler;
  for (int i = 0; i < 6; ++i)
    filler.push_back(rule("F" + std::to_string(i) + "($x) -> G" + std::to_string(i) + "($x)"));
  link(net, 0, 4, filler);
  auto hosp = rule("Hospital($n,$l) -> Clinic($n,$l)");
  link(net, 1, 2, {hosp});
  link(net, 3, 4, {rule("Road($r) -> Street($r)")});
  PeerState &p = net.peer(0);
  p.lsv.merge(1, rows_for_rule(hosp, 1, 2, 1), p.local_signatures());
  return net;
}

} // namespace

TEST_CASE("foaf file keeps insertion order and refuses its owner") {
  FoafFile f(4);
  f.add(7);
  f.add(2);
  f.add(7);
  REQUIRE(f.size() == 2);
  CHECK(f.friends()[0].peer == 7);
  CHECK(f.friends()[0].summary_ref == summary_ref(7));
  CHECK(f.contains(2));
  CHECK_THROWS_AS(f.add(4), SelfFriendship);
}

TEST_CASE("foaf file serialization round trip") {
  FoafFile f(1);
  f.add(3);
  f.add(9);
  auto text = f.serialize();
  CHECK(text.rfind("owner: 1\n", 0) == 0);
  auto back = FoafFile::parse(text);
  CHECK(back.owner() == 1);
  CHECK(back.serialize() == text);
  CHECK_THROWS_AS(FoafFile::parse("knows: 3 u s\n"), ParseError);
  CHECK_THROWS_AS(FoafFile::parse("owner: 1\nlikes: 3\n"), ParseError);
  CHECK_THROWS_AS(FoafFile::parse(""), ParseError);
  CHECK_THROWS_AS(FoafFile::parse("owner: 1\nknows: 1 u s\n"), SelfFriendship);
}

TEST_CASE("direct friends come from the best LSV mapping") {
  Network net = foaf_net();
  QueryConfig cfg;
  cfg.top_k = 1;
  auto q = parse_query("Hospital($x,'SF')");
  CHECK(find_direct_foaf_friends(net, 0, q, cfg) == 1);
  CHECK(net.peer(0).foaf.contains(2));
  // already a friend: nothing new
  CHECK(find_direct_foaf_friends(net, 0, q, cfg) == 0);
  // no LSV row matches
  CHECK(find_direct_foaf_friends(net, 0, parse_query("Road($r)"), cfg) == 0);
}

TEST_CASE("invitations can be declined or go unanswered") {
  Network net = foaf_net();
  QueryConfig cfg;
  cfg.top_k = 1;
  cfg.accept_probability = 0.0;
  auto q = parse_query("Hospital($x,$y)");
  CHECK(find_direct_foaf_friends(net, 0, q, cfg) == 0);
  cfg.accept_probability = 1.0;
  net.peer(2).alive = false;
  CHECK(find_direct_foaf_friends(net, 0, q, cfg) == 0);
  CHECK(net.peer(0).foaf.size() == 0);
}

TEST_CASE("friends ranked by summary hits") {
  Network net = foaf_net();
  PeerState &p = net.peer(0);
  p.foaf.add(3);
  p.foaf.add(2);
  p.foaf.add(1);
  auto q = parse_query("Hospital($x,$y)");
  // peers 1 and 2 both hold the Hospital rule; 3 does not
  auto ranked = friends_with_greatest_count(net, 0, q, 0);
  CHECK(ranked == std::vector<PeerId>{1, 2});
  CHECK(friends_with_greatest_count(net, 0, q, 1) == std::vector<PeerId>{1});
  net.peer(1).alive = false;
  CHECK(friends_with_greatest_count(net, 0, q, 0) == std::vector<PeerId>{2});
}

TEST_CASE("Full reaches a disconnected peer through a friend") {
  Network net = foaf_net();
  net.peer(0).foaf.add(2);
  QueryConfig cfg;
  cfg.protocol = Protocol::Full;
  cfg.top_k = 2;
  auto q = parse_query("Clinic($x,$y)");
  auto r = translate_query(net, 0, q, cfg);
  CHECK(r.rewritings.contains(Rewriting{2, canonical_key(q)}));
  CHECK(r.rewritings.contains(Rewriting{1, canonical_key(parse_query("Hospital($x,$y)"))}));
  cfg.protocol = Protocol::FullMinus;
  CHECK(translate_query(net, 0, q, cfg).rewritings.size() == 1);
}
