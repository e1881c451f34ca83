#pragma once

#include "pdms/mapping.hpp"
#include "pdms/network.hpp"
#include "pdms/relevance.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pdms {

enum class Protocol : std::uint8_t { Full, FullMinus, BaselineHash, BaselinePlus, Baseline };

const char *to_string(Protocol p);
Protocol parse_protocol(const std::string &name);
const std::vector<Protocol> &all_protocols();

struct ProtocolTraits {
  bool uses_af_imf;
  bool uses_foaf;
  bool uses_gossip_lsv;
  bool propagates_irrelevant;
};
ProtocolTraits traits(Protocol p);

struct QueryConfig {
  Protocol protocol = Protocol::Full;
  std::size_t top_k = 1; // 0 means every mapping
  std::optional<unsigned> alpha; // hop limit, unbounded when empty
  unsigned reqs = 0;
  RankFn rank = RankFn::HarmonicMean;
  double accept_probability = 1.0;
  /// Queries longer than this are recorded but not translated further.
  std::size_t max_query_atoms = 12;
  /// Safety valve on visited states per query.
  std::size_t max_states = 200000;
};

/// A query evaluated at a peer, identified by its canonical text.
struct Rewriting {
  PeerId peer = 0;
  std::string query;
  friend auto operator<=>(const Rewriting &, const Rewriting &) = default;
};

struct QueryResultSet {
  std::set<Rewriting> rewritings;
  /// Subset reached through relevant mappings or relevant at the peer.
  std::set<Rewriting> relevant;
  /// Distinct translated queries (canonical, peer ignored), original excluded.
  std::set<std::string> translated;
  /// Signatures of the rules used by successful translations.
  std::set<Signature> rules_used;
  /// Rules anywhere among live peers relevant to some query handled in the run.
  std::size_t relevant_rules = 0;
  std::uint64_t messages = 0;
  std::uint64_t dropped = 0;
  std::size_t states = 0;
  std::size_t foaf_added = 0;
  bool truncated = false;
};

/// |translated| <= |relevant rules|^|query atoms|, with 0^k = 0.
bool within_rewriting_bound(const QueryResultSet &r, std::size_t query_atoms);

/// Query translation started at `origin`. Runs to completion; messages move
/// one hop per tick. Mutates FOAF files under protocols that use them.
QueryResultSet translate_query(Network &net, PeerId origin, const ConjunctiveQuery &q,
                               const QueryConfig &cfg);

/// Invites the target peers of the best-scoring LSV mappings. Returns the
/// number of friends added.
std::size_t find_direct_foaf_friends(Network &net, PeerId p, const ConjunctiveQuery &q,
                                     const QueryConfig &cfg);

/// Friends ranked by positive summary probes (single atoms plus the whole
/// conjunction), descending, ties by id; only counts above zero.
std::vector<PeerId> friends_with_greatest_count(const Network &net, PeerId p,
                                                const ConjunctiveQuery &q,
                                                std::size_t top_k);

/// Ground truth: every rewriting reachable through mappings whose exact
/// AF-IMF score over the global rule collection is positive, between live
/// peers.
QueryResultSet centralized_oracle(const Network &net, PeerId origin,
                                  const ConjunctiveQuery &q,
                                  std::optional<unsigned> alpha = std::nullopt,
                                  std::size_t max_query_atoms = 12);

double recall(const QueryResultSet &retrieved, const QueryResultSet &truth);

} // namespace pdms
