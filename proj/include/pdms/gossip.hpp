#pragma once

#include "pdms/lsv.hpp"
#include "pdms/peer.hpp"
#include "pdms/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pdms {

struct GossipConfig {
  std::uint64_t t_gossip = 10; // ticks per cycle
  std::size_t v_gossip = 500;  // LSV row capacity
  std::size_t l_gossip = 100;  // rows per message

  /// Throws MalformedScenario unless 0 < l_gossip <= v_gossip and t_gossip > 2.
  void validate() const;
};

struct GossipMessage {
  enum class Kind : std::uint8_t { Request, Reply };
  PeerId sender = 0;
  Kind kind = Kind::Request;
  std::vector<LsvRow> rows;
};

/// Rows describing the peer's own local rules.
std::vector<LsvRow> local_rows(const PeerState &p);

/// Up to l_gossip rows drawn uniformly from the LSV content plus local rows.
std::vector<LsvRow> sample_rows(const PeerState &p, const GossipConfig &cfg, Rng &rng);

struct OutgoingGossip {
  PeerId target;
  GossipMessage message;
};

/// Active side of one cycle: ages the View, picks the oldest contact and
/// builds a request. A contact that never answered the previous request is
/// dropped first. Returns nothing when the View is empty.
std::optional<OutgoingGossip> gossip_active(PeerState &p, const GossipConfig &cfg,
                                            Rng &rng);

/// Passive side: builds the reply from the current content, then merges the
/// request with the sender at age 0.
GossipMessage gossip_passive(PeerState &p, const GossipMessage &request,
                             const GossipConfig &cfg, Rng &rng);

/// Merges a reply. Throws UnmatchedReply when no request to the sender is
/// outstanding.
void gossip_complete(PeerState &p, const GossipMessage &reply, const GossipConfig &cfg);

} // namespace pdms
