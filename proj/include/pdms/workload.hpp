#pragma once

#include "pdms/mapping.hpp"
#include "pdms/network.hpp"
#include "pdms/peer.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pdms {

struct DictionaryWord {
  const char *name;
  unsigned arity;
};

/// The 40 table names schemas are drawn from. A name keeps one arity
/// everywhere, so atoms with the same label can meet across peers.
const std::vector<DictionaryWord> &dictionary();

struct ScenarioSpec {
  std::size_t peers = 50;
  std::size_t target_rules = 350;
  std::size_t min_acq = 2;
  std::size_t max_acq = 16;
  std::size_t min_tables = 2;
  std::size_t max_tables = 6;
  std::size_t min_rules_per_mapping = 1;
  std::size_t max_rules_per_mapping = 6;
  std::size_t max_atoms_per_side = 3;
  double existential_ratio = 1.0 / 3.0;
  std::uint64_t seed = 1;

  /// Row 1..10 of the reference scenario table scaled to `peers` peers; the
  /// rule target scales proportionally, acquaintance bounds are kept.
  static ScenarioSpec scaled(int row, std::size_t peers, std::uint64_t seed);

  /// Throws InfeasibleSpec.
  void validate() const;
};

struct GeneratedNetwork {
  std::vector<std::vector<Table>> schemas;
  std::vector<MappingPtr> mappings;
  std::vector<std::pair<PeerId, PeerId>> edges; // acquaintances, smaller id first
};

GeneratedNetwork generate_network(const ScenarioSpec &spec);

/// Peers and mappings loaded into a fresh kernel.
Network build_network(const GeneratedNetwork &g, const GossipConfig &cfg,
                      const TopologyInfo &topo, std::uint64_t seed);

std::string schema_fingerprint(const std::vector<Table> &schema);

struct GeneratedQuery {
  PeerId origin = 0;
  ConjunctiveQuery query;
};

/// Queries of 1-3 atoms taken from a rule side that lives in the origin
/// peer's schema; each is relevant to at least one mapping of its origin.
std::vector<GeneratedQuery> generate_queries(const Network &net, std::size_t n,
                                             std::uint64_t seed,
                                             double constant_ratio = 0.3);

} // namespace pdms
