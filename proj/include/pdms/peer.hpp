#pragma once

#include "pdms/foaf.hpp"
#include "pdms/lsv.hpp"
#include "pdms/mapping.hpp"
#include "pdms/summary.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pdms {

struct Table {
  std::string name;
  unsigned arity = 0;
  friend auto operator<=>(const Table &, const Table &) = default;
};

/// Per query atom IMF values for the body and head sides.
struct SideIMF {
  std::vector<double> body;
  std::vector<double> head;
};

struct PeerState {
  PeerId id = 0;
  std::vector<Table> schema;
  std::vector<MappingPtr> mappings; // inward and outward
  LocalSemanticView lsv;
  MappingSummary summary;
  FoafFile foaf;
  bool alive = true;
  /// Gossip target whose reply has not arrived yet.
  std::optional<PeerId> awaiting_reply;

  PeerState() = default;
  PeerState(PeerId id, std::size_t lsv_capacity)
      : id(id), lsv(lsv_capacity), foaf(id) {}

  /// Registers a mapping this peer is source or target of, refreshing the
  /// signature set and the summary. Throws InvalidRule otherwise.
  void add_mapping(MappingPtr m);
  void rebuild_summary();

  const std::set<Signature> &local_signatures() const { return local_sigs_; }
  /// Signature-distinct local rules in mapping order.
  std::vector<RulePtr> local_rules() const;

  bool is_outward(const SchemaMapping &m) const { return m.source == id; }
  PeerId other_end(const SchemaMapping &m) const {
    return m.source == id ? m.target : m.source;
  }

  /// IMF vectors already computed for a query in the current gossip state.
  std::map<std::string, SideIMF> imf_cache;
  std::uint64_t imf_epoch = 0; // epoch the caches belong to
  /// Rule collection behind the cached IMF values, by "reqs|friends".
  std::map<std::string, std::vector<RulePtr>> collection_cache;

private:
  std::set<Signature> local_sigs_;
};

} // namespace pdms
