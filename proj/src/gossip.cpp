#include "pdms/gossip.hpp"

#include "pdms/errors.hpp"

namespace pdms {

void GossipConfig::validate() const {
  if (l_gossip == 0 || l_gossip > v_gossip)
    throw MalformedScenario("gossip message size must be in (0, view capacity]");
  if (t_gossip < 3)
    throw MalformedScenario("gossip period must leave room for a round trip");
}

std::vector<LsvRow> local_rows(const PeerState &p) {
  std::vector<LsvRow> rows;
  std::set<Signature> seen;
  for (const auto &m : p.mappings)
    for (const auto &r : m->rules)
      if (seen.insert(r->signature()).second)
        for (auto &row : rows_for_rule(r, m->source, m->target, p.id))
          rows.push_back(std::move(row));
  return rows;
}

std::vector<LsvRow> sample_rows(const PeerState &p, const GossipConfig &cfg, Rng &rng) {
  const auto &content = p.lsv.rows();
  std::vector<LsvRow> own = local_rows(p);
  const std::size_t total = content.size() + own.size();
  std::vector<LsvRow> out;
  for (auto i : rng.sample_indices(total, cfg.l_gossip))
    out.push_back(i < content.size() ? content[i] : own[i - content.size()]);
  return out;
}

std::optional<OutgoingGossip> gossip_active(PeerState &p, const GossipConfig &cfg,
                                            Rng &rng) {
  if (p.awaiting_reply) {
    p.lsv.drop_provider(*p.awaiting_reply);
    p.awaiting_reply.reset();
  }
  p.lsv.age_all();
  auto target = p.lsv.oldest();
  if (!target)
    return std::nullopt;
  p.awaiting_reply = *target;
  return OutgoingGossip{*target,
                        {p.id, GossipMessage::Kind::Request, sample_rows(p, cfg, rng)}};
}

GossipMessage gossip_passive(PeerState &p, const GossipMessage &request,
                             const GossipConfig &cfg, Rng &rng) {
  if (!p.alive)
    throw DeadPeer("peer " + std::to_string(p.id) + " has left");
  GossipMessage reply{p.id, GossipMessage::Kind::Reply, sample_rows(p, cfg, rng)};
  p.lsv.merge(request.sender, request.rows, p.local_signatures());
  return reply;
}

void gossip_complete(PeerState &p, const GossipMessage &reply, const GossipConfig &) {
  if (!p.awaiting_reply || *p.awaiting_reply != reply.sender)
    throw UnmatchedReply("peer " + std::to_string(p.id) + " got an unexpected reply from " +
                         std::to_string(reply.sender));
  p.awaiting_reply.reset();
  p.lsv.merge(reply.sender, reply.rows, p.local_signatures());
}

} // namespace pdms
