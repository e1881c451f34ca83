#include "pdms/peer.hpp"

#include "pdms/errors.hpp"

namespace pdms {

void PeerState::add_mapping(MappingPtr m) {
  if (m->source != id && m->target != id)
    throw InvalidRule("mapping " + m->id.short_hex() + " does not involve peer " +
                      std::to_string(id));
  for (const auto &r : m->rules)
    local_sigs_.insert(r->signature());
  mappings.push_back(std::move(m));
  rebuild_summary();
  imf_cache.clear();
}

void PeerState::rebuild_summary() { summary = MappingSummary::of_rules(local_rules()); }

std::vector<RulePtr> PeerState::local_rules() const {
  std::vector<RulePtr> out;
  std::set<Signature> seen;
  for (const auto &m : mappings)
    for (const auto &r : m->rules)
      if (seen.insert(r->signature()).second)
        out.push_back(r);
  return out;
}

} // namespace pdms
