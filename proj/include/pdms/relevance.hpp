#pragma once

#include "pdms/mapping.hpp"
#include "pdms/peer.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace pdms {

enum class RankFn : std::uint8_t { HarmonicMean, Sum, Mean };
const char *to_string(RankFn f);
RankFn parse_rank_fn(const std::string &name);

enum class MatchedSide : std::uint8_t { None, Body, Head };

struct RuleScore {
  double score = 0.0;
  MatchedSide side = MatchedSide::None;
};

/// One entry per input rule, same order.
struct RelevanceVector {
  std::vector<RuleScore> per_rule;
};

/// Number of rules in a collection, and per query atom the number of rules
/// holding a unifiable atom in the body (resp. head).
struct AtomCounts {
  std::size_t n = 0;
  std::vector<std::size_t> body;
  std::vector<std::size_t> head;
};

// Kernels over a rule collection; both give identical counts.
AtomCounts count_atoms_serial(const ConjunctiveQuery &q,
                              const std::vector<RulePtr> &rules);
AtomCounts count_atoms_parallel(const ConjunctiveQuery &q,
                                const std::vector<RulePtr> &rules);

/// ln(n / (1 + count)), 0 when n is 0 or the log is negative.
double imf_value(std::size_t n, std::size_t count);
SideIMF imf_from_counts(const AtomCounts &c);

/// Unifiable atoms of the side divided by the side's atom count.
double atom_frequency(const Atom &a, const MappingRule &m, Side side);

/// Body when every query atom unifies with a body atom, else Head when every
/// query atom unifies with an existential-free head atom, else None.
MatchedSide matched_side(const ConjunctiveQuery &q, const MappingRule &m);

double rank(RankFn f, const std::vector<double> &values);

/// Scores each rule. With `af_only` IMF is taken as 1 (local metric).
RelevanceVector score_rules(const ConjunctiveQuery &q,
                            const std::vector<RulePtr> &rules, const SideIMF &imf,
                            RankFn f = RankFn::HarmonicMean, bool af_only = false);

/// max(sum of head-matched rule scores, sum of body-matched rule scores).
double mapping_score(const RelevanceVector &rv);

/// Live peer state by id, nullptr for departed or unknown peers.
using PeerLookup = std::function<const PeerState *(PeerId)>;

/// Signature-distinct union of the rules a peer can count: its local rules,
/// its LSV rules, then the local and LSV rules of up to `reqs` live remote
/// peers (View by ascending age, then FOAF friends in file order).
std::vector<RulePtr> relevance_collection(const PeerState &p, unsigned reqs,
                                          const PeerLookup &lookup);

/// IMF vectors for q at p, cached per (query, epoch, reqs). `epoch` should
/// change whenever gossip has changed any LSV.
SideIMF compute_imf(const ConjunctiveQuery &q, PeerState &p, unsigned reqs,
                    const PeerLookup &lookup, std::uint64_t epoch);

RelevanceVector compute_relevance(const ConjunctiveQuery &q,
                                  const std::vector<RulePtr> &rules, PeerState &p,
                                  unsigned reqs, const PeerLookup &lookup,
                                  std::uint64_t epoch,
                                  RankFn f = RankFn::HarmonicMean,
                                  bool af_only = false);

// -- collection size estimate ---------------------------------------------------

struct TopologyInfo {
  enum class Mode : std::uint8_t { Dht, SuperPeer, Unstructured };
  Mode mode = Mode::Unstructured;
  /// Routing-table size r for DHT, registered N for super-peer, flood count
  /// for unstructured.
  std::uint64_t param = 0;
};

const char *to_string(TopologyInfo::Mode m);
/// Throws UnknownTopology.
TopologyInfo::Mode parse_topology(const std::string &name);

struct CollectionEstimate {
  std::uint64_t k = 0; // distinct local rules
  std::uint64_t t = 0; // distinct LSV rules
  std::uint64_t n = 0; // estimated peers
  std::uint64_t total = 0;
};

std::uint64_t estimated_peers(const TopologyInfo &topo);
CollectionEstimate estimate_collection(const PeerState &p, const TopologyInfo &topo);
CollectionEstimate estimate_collection(std::uint64_t k, std::uint64_t t,
                                       const TopologyInfo &topo);

} // namespace pdms
