#pragma once

#include "pdms/gossip.hpp"
#include "pdms/peer.hpp"
#include "pdms/relevance.hpp"
#include "pdms/rng.hpp"

#include <cstdint>
#include <functional>
#include <queue>
#include <set>
#include <string>
#include <vector>

namespace pdms {

struct ChurnStep {
  std::uint64_t tick = 0;
  std::size_t remove = 0;
};

struct ChurnPlan {
  std::vector<ChurnStep> steps;
};

struct SimEvent {
  enum class Kind : std::uint8_t { GossipTimer, MessageDelivery, QueryInjection, ChurnAction };

  std::uint64_t time = 0;
  std::uint64_t seq = 0;
  Kind kind = Kind::GossipTimer;
  PeerId peer = 0;           // timer owner or message recipient
  PeerId from = 0;           // message sender
  GossipMessage message;     // MessageDelivery only
  std::size_t count = 0;     // ChurnAction only
  std::function<void()> action; // QueryInjection only
};

struct SimCounters {
  std::uint64_t events = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_dropped = 0;
  std::uint64_t exchanges = 0; // completed request/reply pairs
  std::uint64_t joins = 0;
  std::uint64_t removals = 0;
};

/// Discrete-event kernel holding every peer. Gossip runs in cycles of
/// t_gossip ticks; a request is delivered one tick after the timer fires and
/// the reply one tick later, so each cycle drains completely.
class Network {
public:
  Network(GossipConfig cfg, TopologyInfo topo, std::uint64_t seed);

  PeerId add_peer(std::vector<Table> schema);
  /// Registers the mapping at both end peers and makes them gossip contacts.
  void add_mapping(MappingPtr m);

  std::size_t size() const { return peers_.size(); }
  std::size_t alive_count() const;
  PeerState &peer(PeerId id) { return peers_.at(id); }
  const PeerState &peer(PeerId id) const { return peers_.at(id); }
  const std::vector<PeerState> &peers() const { return peers_; }
  /// nullptr for departed or unknown peers.
  const PeerState *live(PeerId id) const;
  PeerLookup lookup() const;

  const GossipConfig &gossip_config() const { return cfg_; }
  const TopologyInfo &topology() const { return topo_; }
  std::uint64_t now() const { return now_; }
  std::uint64_t cycle() const { return cycle_; }
  /// Changes whenever gossip or churn may have changed what peers know.
  std::uint64_t epoch() const { return epoch_; }
  const SimCounters &counters() const { return counters_; }
  Rng &rng() { return rng_; }

  void set_churn_plan(ChurnPlan plan);
  const ChurnPlan &churn_plan() const { return plan_; }

  /// Runs one gossip cycle, including due churn actions.
  void run_cycle();
  void run_cycles(std::size_t n);
  /// Schedules an action at the current tick of the next cycle.
  void inject(std::function<void()> action);

  /// Marks `count` uniformly chosen alive peers dead; returns them in draw
  /// order. Draws from a dedicated stream so plans are comparable across
  /// protocols. Peers in `keep` are never chosen. Throws MalformedScenario if
  /// count exceeds the eligible population.
  std::vector<PeerId> apply_churn(std::size_t count, const std::set<PeerId> &keep = {});

  std::vector<MappingPtr> all_mappings() const;
  /// Signature-distinct rules over all peers, dead ones included.
  std::vector<RulePtr> all_rules() const;

private:
  friend std::string snapshot(const Network &net);
  friend Network restore(std::string_view bytes);

  struct Later {
    bool operator()(const SimEvent &a, const SimEvent &b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };

  void schedule(SimEvent ev);
  void dispatch(SimEvent &ev);
  void deliver(SimEvent &ev);

  GossipConfig cfg_;
  TopologyInfo topo_;
  Rng rng_;
  Rng churn_rng_;
  std::vector<PeerState> peers_;
  std::vector<MappingPtr> mappings_;
  ChurnPlan plan_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t cycle_ = 0;
  std::uint64_t epoch_ = 0;
  SimCounters counters_;
};

std::string snapshot(const Network &net);
/// Throws CorruptSnapshot on truncated or altered input.
Network restore(std::string_view bytes);

} // namespace pdms
