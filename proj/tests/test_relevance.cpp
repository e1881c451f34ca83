#include "pdms/errors.hpp"
#include "pdms/lsv.hpp"
#include "pdms/relevance.hpp"
#include "pdms/text_format.hpp"

#include <doctest.h>

#include <cmath>

using namespace pdms;

namespace {

RulePtr rule(const char *text) { return std::make_shared<MappingRule>(parse_rule(text)); }

} // namespace

TEST_CASE("atom frequency counts unifiable atoms of a side") {
  auto m = parse_rule("A($x,$y), E($y,$z), B($z) -> C($x,?w)");
  CHECK(atom_frequency(parse_atom("A($p,$q)"), m, Side::Body) == doctest::Approx(1.0 / 3.0));
  CHECK(atom_frequency(parse_atom("A($p)"), m, Side::Body) == 0.0);
  CHECK(atom_frequency(parse_atom("B('k')"), m, Side::Body) == doctest::Approx(1.0 / 3.0));
  CHECK(atom_frequency(parse_atom("C($p,$q)"), m, Side::Head) == doctest::Approx(1.0));
  CHECK(atom_frequency(parse_atom("D($p)"), m, Side::Body) == 0.0);
}

TEST_CASE("imf values") {
  CHECK(imf_value(0, 0) == 0.0);
  CHECK(imf_value(10, 0) == doctest::Approx(std::log(10.0)));
  CHECK(imf_value(10, 4) == doctest::Approx(std::log(2.0)));
  CHECK(imf_value(10, 9) == 0.0);  // log(1)
  CHECK(imf_value(10, 30) == 0.0); // clamped
}

TEST_CASE("rank functions") {
  CHECK(rank(RankFn::HarmonicMean, {1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(rank(RankFn::HarmonicMean, {1.0, 0.5}) == doctest::Approx(2.0 / 3.0));
  CHECK(rank(RankFn::HarmonicMean, {1.0, 0.0}) == 0.0);
  CHECK(rank(RankFn::Sum, {1.0, 0.5}) == doctest::Approx(1.5));
  CHECK(rank(RankFn::Mean, {1.0, 0.5}) == doctest::Approx(0.75));
  CHECK(rank(RankFn::Mean, {}) == 0.0);
  CHECK(parse_rank_fn(to_string(RankFn::Sum)) == RankFn::Sum);
  CHECK_THROWS_AS(parse_rank_fn("median"), ParseError);
}

TEST_CASE("matched side prefers the body") {
  auto m = parse_rule("A($x,$y) -> A($x,$y), B($y,?z)");
  CHECK(matched_side(parse_query("A($p,$q)"), m) == MatchedSide::Body);
  CHECK(matched_side(parse_query("B($p,$q)"), m) == MatchedSide::None);
  auto g = parse_rule("A($x,$y) -> C($x,$y)");
  CHECK(matched_side(parse_query("C($p,$q)"), g) == MatchedSide::Head);
}

TEST_CASE("serial and parallel atom counts agree") {
  std::vector<RulePtr> rules;
  const char *texts[] = {"A($x,$y) -> B($x,$y)", "A($x,$y), C($y) -> D($x,?z)",
                         "C($x) -> A($x,$x)", "B($x,$y) -> A($y,$x), C($x)",
                         "D($x,$y) -> B($x,?w)"};
  for (int i = 0; i < 400; ++i)
    rules.push_back(rule(texts[i % 5]));
  auto q = parse_query("A($p,$q), B($q,'k'), C($p)");
  auto s = count_atoms_serial(q, rules);
  auto p = count_atoms_parallel(q, rules);
  CHECK(s.n == 400);
  CHECK(s.body == p.body);
  CHECK(s.head == p.head);
  CHECK(s.body[0] == 160); // texts 0 and 1
  CHECK(s.head[0] == 80); // text 3; A($x,$x) does not take A($p,$q)
}

TEST_CASE("score and mapping score") {
  std::vector<RulePtr> rules = {rule("A($x,$y) -> B($x,$y)"), rule("A($x,$y), C($y) -> B($x,?z)"),
                                rule("C($x,$y) -> A($x,$y)")};
  auto q = parse_query("A($p,$q)");
  SideIMF imf{{2.0}, {3.0}};
  auto rv = score_rules(q, rules, imf);
  REQUIRE(rv.per_rule.size() == 3);
  CHECK(rv.per_rule[0].side == MatchedSide::Body);
  CHECK(rv.per_rule[0].score == doctest::Approx(2.0));
  CHECK(rv.per_rule[1].score == doctest::Approx(1.0)); // AF 1/2
  CHECK(rv.per_rule[2].side == MatchedSide::Head);
  CHECK(rv.per_rule[2].score == doctest::Approx(3.0));
  CHECK(mapping_score(rv) == doctest::Approx(3.0)); // max(2+1, 3)

  auto local = score_rules(q, rules, imf, RankFn::HarmonicMean, true);
  CHECK(local.per_rule[0].score == doctest::Approx(1.0));

  // zero IMF removes the match
  auto none = score_rules(q, rules, SideIMF{{0.0}, {0.0}});
  CHECK(mapping_score(none) == 0.0);
  CHECK(none.per_rule[0].side == MatchedSide::None);
}

TEST_CASE("relevance collection and imf cache") {
  PeerState p(0, 500), friend_peer(1, 500), stranger(2, 500);
  auto r1 = rule("A($x) -> B($x)");
  auto r2 = rule("B($x) -> C($x)");
  auto r3 = rule("A($x) -> C($x)");
  p.add_mapping(std::make_shared<SchemaMapping>(SchemaMapping::make(0, 5, {r1})));
  friend_peer.add_mapping(std::make_shared<SchemaMapping>(SchemaMapping::make(1, 6, {r2})));
  stranger.add_mapping(std::make_shared<SchemaMapping>(SchemaMapping::make(2, 7, {r3})));
  p.foaf.add(1);
  PeerLookup lookup = [&](PeerId id) -> const PeerState * {
    if (id == 1)
      return &friend_peer;
    if (id == 2)
      return &stranger;
    return nullptr;
  };
  CHECK(relevance_collection(p, 0, lookup).size() == 1);
  CHECK(relevance_collection(p, 2, lookup).size() == 2);

  p.lsv.merge(2, rows_for_rule(r3, 2, 7, 2), p.local_signatures());
  CHECK(relevance_collection(p, 0, lookup).size() == 2);
  // View contacts come before friends
  auto c = relevance_collection(p, 1, lookup);
  CHECK(c.size() == 2);

  auto q = parse_query("A($v)");
  auto imf1 = compute_imf(q, p, 0, lookup, 1);
  CHECK(imf1.body[0] == 0.0); // both rules hold A: ln(2/3) clamps
  CHECK(imf1.head[0] == doctest::Approx(std::log(2.0)));
  p.lsv.drop_provider(2);
  CHECK(compute_imf(q, p, 0, lookup, 1).head == imf1.head); // same epoch, cached
  auto imf2 = compute_imf(q, p, 0, lookup, 2);
  CHECK(imf2.head[0] == 0.0); // ln(1/1)
  CHECK(p.collection_cache.size() == 1);
}

TEST_CASE("collection estimate") {
  TopologyInfo dht{TopologyInfo::Mode::Dht, 5};
  CHECK(estimated_peers(dht) == 32);
  CHECK(estimate_collection(3, 4, dht).total == 7 * 32);
  TopologyInfo sp{TopologyInfo::Mode::SuperPeer, 40};
  CHECK(estimated_peers(sp) == 40);
  CHECK(parse_topology("unstructured") == TopologyInfo::Mode::Unstructured);
  CHECK_THROWS_AS(parse_topology("ring"), UnknownTopology);
  CHECK_THROWS_AS(estimated_peers(TopologyInfo{TopologyInfo::Mode::Dht, 80}), UnknownTopology);
}
