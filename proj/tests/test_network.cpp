#include "pdms/errors.hpp"
#include "pdms/harness.hpp"
#include "pdms/network.hpp"

#include <doctest.h>

using namespace pdms;

namespace {

Network small(std::uint64_t seed = 5) {
  ExperimentConfig cfg;
  cfg.peers = 30;
  return prepare_network(cfg, seed);
}

} // namespace

TEST_CASE("gossip spreads rules and keeps views consistent") {
  Network net = small();
  std::size_t before = 0;
  for (const auto &p : net.peers())
    before += p.lsv.distinct_rules().size();
  CHECK(before == 0);
  net.run_cycles(6);
  CHECK(net.cycle() == 6);
  std::size_t after = 0;
  for (const auto &p : net.peers()) {
    p.lsv.check_integrity();
    after += p.lsv.distinct_rules().size();
  }
  CHECK(after > 0);
  CHECK(net.counters().exchanges > 0);
  CHECK(net.counters().messages_sent >= 2 * net.counters().exchanges);
}

TEST_CASE("same seed, same run") {
  Network a = small(9), b = small(9);
  a.run_cycles(4);
  b.run_cycles(4);
  CHECK(snapshot(a) == snapshot(b));
  Network c = small(10);
  c.run_cycles(4);
  CHECK(snapshot(a) != snapshot(c));
}

TEST_CASE("snapshot restore continues identically") {
  Network a = small();
  a.run_cycles(3);
  Network b = restore(snapshot(a));
  CHECK(snapshot(b) == snapshot(a));
  a.run_cycles(2);
  b.run_cycles(2);
  CHECK(snapshot(b) == snapshot(a));

  auto bytes = snapshot(a);
  CHECK_THROWS_AS(restore(bytes.substr(0, bytes.size() / 2)), CorruptSnapshot);
  bytes[bytes.size() / 2] ^= 0x5a;
  CHECK_THROWS_AS(restore(bytes), CorruptSnapshot);
}

TEST_CASE("churn removes peers and gossip forgets them") {
  Network net = small();
  net.run_cycles(3);
  std::set<PeerId> keep = {0, 1};
  auto gone = net.apply_churn(10, keep);
  CHECK(gone.size() == 10);
  CHECK(net.alive_count() == 20);
  for (auto id : gone) {
    CHECK_FALSE(keep.contains(id));
    CHECK(net.live(id) == nullptr);
  }
  CHECK_THROWS_AS(net.apply_churn(19, keep), MalformedScenario);
  net.run_cycles(8);
  // contacts that never answer are dropped along with their rows
  for (const auto &p : net.peers())
    if (p.alive)
      for (const auto &row : p.lsv.rows())
        for (auto id : gone)
          CHECK(row.provider != id);
}

TEST_CASE("churn plan runs inside cycles") {
  Network net = small();
  ChurnPlan plan;
  plan.steps.push_back({net.gossip_config().t_gossip * 2, 5});
  net.set_churn_plan(plan);
  net.run_cycles(4);
  CHECK(net.alive_count() == 25);
  CHECK(net.counters().removals == 5);
}

TEST_CASE("injected actions run in the next cycle") {
  Network net = small();
  int ran = 0;
  net.inject([&] { ++ran; });
  CHECK(ran == 0);
  net.run_cycle();
  CHECK(ran == 1);
}

TEST_CASE("epoch moves with gossip") {
  Network net = small();
  auto e = net.epoch();
  net.run_cycle();
  CHECK(net.epoch() != e);
}
