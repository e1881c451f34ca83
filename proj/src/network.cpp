#include "pdms/network.hpp"

#include "pdms/errors.hpp"

#include <set>

namespace pdms {

namespace {
constexpr std::uint64_t kChurnStream = 0x9e3779b97f4a7c15ULL;
}

Network::Network(GossipConfig cfg, TopologyInfo topo, std::uint64_t seed)
    : cfg_(cfg), topo_(topo), rng_(seed), churn_rng_(seed ^ kChurnStream) {
  cfg_.validate();
}

PeerId Network::add_peer(std::vector<Table> schema) {
  auto id = static_cast<PeerId>(peers_.size());
  PeerState p(id, cfg_.v_gossip);
  p.schema = std::move(schema);
  p.rebuild_summary();
  peers_.push_back(std::move(p));
  if (cycle_ > 0)
    ++counters_.joins;
  ++epoch_;
  return id;
}

void Network::add_mapping(MappingPtr m) {
  if (m->source >= peers_.size() || m->target >= peers_.size() || m->source == m->target)
    throw MalformedScenario("mapping " + m->id.short_hex() + " has bad end peers");
  PeerState &s = peers_[m->source];
  PeerState &t = peers_[m->target];
  s.add_mapping(m);
  t.add_mapping(m);
  s.lsv.add_contact(t.id);
  t.lsv.add_contact(s.id);
  mappings_.push_back(std::move(m));
  ++epoch_;
}

std::size_t Network::alive_count() const {
  std::size_t n = 0;
  for (const auto &p : peers_)
    n += p.alive ? 1 : 0;
  return n;
}

const PeerState *Network::live(PeerId id) const {
  if (id >= peers_.size() || !peers_[id].alive)
    return nullptr;
  return &peers_[id];
}

PeerLookup Network::lookup() const {
  return [this](PeerId id) { return live(id); };
}

void Network::set_churn_plan(ChurnPlan plan) { plan_ = std::move(plan); }

void Network::schedule(SimEvent ev) {
  if (ev.time < now_)
    throw std::logic_error("event scheduled in the past");
  ev.seq = seq_++;
  queue_.push(std::move(ev));
}

void Network::inject(std::function<void()> action) {
  SimEvent ev;
  ev.time = now_;
  ev.kind = SimEvent::Kind::QueryInjection;
  ev.action = std::move(action);
  schedule(std::move(ev));
}

void Network::run_cycle() {
  const std::uint64_t start = now_;
  const std::uint64_t end = start + cfg_.t_gossip;
  ++epoch_;
  for (const auto &step : plan_.steps)
    if (step.tick >= start && step.tick < end) {
      SimEvent ev;
      ev.time = step.tick;
      ev.kind = SimEvent::Kind::ChurnAction;
      ev.count = step.remove;
      schedule(std::move(ev));
    }
  for (const auto &p : peers_)
    if (p.alive) {
      SimEvent ev;
      ev.time = start;
      ev.kind = SimEvent::Kind::GossipTimer;
      ev.peer = p.id;
      schedule(std::move(ev));
    }
  while (!queue_.empty() && queue_.top().time < end) {
    SimEvent ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    ++counters_.events;
    dispatch(ev);
  }
  now_ = end;
  ++cycle_;
  ++epoch_;
}

void Network::run_cycles(std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    run_cycle();
}

void Network::dispatch(SimEvent &ev) {
  switch (ev.kind) {
  case SimEvent::Kind::GossipTimer: {
    PeerState &p = peers_[ev.peer];
    if (!p.alive)
      return;
    auto out = gossip_active(p, cfg_, rng_);
    if (!out)
      return;
    SimEvent msg;
    msg.time = now_ + 1;
    msg.kind = SimEvent::Kind::MessageDelivery;
    msg.peer = out->target;
    msg.from = p.id;
    msg.message = std::move(out->message);
    ++counters_.messages_sent;
    schedule(std::move(msg));
    return;
  }
  case SimEvent::Kind::MessageDelivery:
    deliver(ev);
    return;
  case SimEvent::Kind::QueryInjection:
    if (ev.action)
      ev.action();
    return;
  case SimEvent::Kind::ChurnAction:
    apply_churn(std::min(ev.count, alive_count()));
    return;
  }
}

void Network::deliver(SimEvent &ev) {
  if (!live(ev.peer)) {
    ++counters_.messages_dropped;
    return;
  }
  PeerState &p = peers_[ev.peer];
  if (ev.message.kind == GossipMessage::Kind::Request) {
    SimEvent reply;
    reply.time = now_ + 1;
    reply.kind = SimEvent::Kind::MessageDelivery;
    reply.peer = ev.from;
    reply.from = p.id;
    reply.message = gossip_passive(p, ev.message, cfg_, rng_);
    ++counters_.messages_sent;
    schedule(std::move(reply));
  } else {
    gossip_complete(p, ev.message, cfg_);
    ++counters_.exchanges;
  }
}

std::vector<PeerId> Network::apply_churn(std::size_t count, const std::set<PeerId> &keep) {
  std::vector<PeerId> alive;
  for (const auto &p : peers_)
    if (p.alive && !keep.contains(p.id))
      alive.push_back(p.id);
  if (count > alive.size())
    throw MalformedScenario("cannot remove " + std::to_string(count) + " of " +
                            std::to_string(alive.size()) + " eligible peers");
  std::vector<PeerId> removed;
  for (auto i : churn_rng_.sample_indices(alive.size(), count)) {
    peers_[alive[i]].alive = false;
    removed.push_back(alive[i]);
  }
  counters_.removals += removed.size();
  ++epoch_;
  return removed;
}

std::vector<MappingPtr> Network::all_mappings() const { return mappings_; }

std::vector<RulePtr> Network::all_rules() const {
  std::vector<RulePtr> out;
  std::set<Signature> seen;
  for (const auto &m : mappings_)
    for (const auto &r : m->rules)
      if (seen.insert(r->signature()).second)
        out.push_back(r);
  return out;
}

} // namespace pdms
