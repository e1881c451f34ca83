#include "pdms/relevance.hpp"

#include "pdms/errors.hpp"
#include "pdms/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pdms {

const char *to_string(RankFn f) {
  switch (f) {
  case RankFn::HarmonicMean:
    return "harmonic";
  case RankFn::Sum:
    return "sum";
  case RankFn::Mean:
    return "mean";
  }
  return "?";
}

RankFn parse_rank_fn(const std::string &name) {
  if (name == "harmonic")
    return RankFn::HarmonicMean;
  if (name == "sum")
    return RankFn::Sum;
  if (name == "mean")
    return RankFn::Mean;
  throw ParseError("unknown rank function '" + name + "'");
}

double imf_value(std::size_t n, std::size_t count) {
  if (n == 0)
    return 0.0;
  double v = std::log(static_cast<double>(n) / (1.0 + static_cast<double>(count)));
  return v > 0.0 ? v : 0.0;
}

SideIMF imf_from_counts(const AtomCounts &c) {
  SideIMF imf;
  for (auto b : c.body)
    imf.body.push_back(imf_value(c.n, b));
  for (auto h : c.head)
    imf.head.push_back(imf_value(c.n, h));
  return imf;
}

double atom_frequency(const Atom &a, const MappingRule &m, Side side) {
  const auto &atoms = m.side(side);
  if (atoms.empty())
    return 0.0;
  auto hits = std::count_if(atoms.begin(), atoms.end(), [&](const Atom &b) {
    return unify_atom(a, b).has_value();
  });
  return static_cast<double>(hits) / static_cast<double>(atoms.size());
}

MatchedSide matched_side(const ConjunctiveQuery &q, const MappingRule &m) {
  if (relevant_forward(q, m))
    return MatchedSide::Body;
  if (relevant_backward(q, m))
    return MatchedSide::Head;
  return MatchedSide::None;
}

double rank(RankFn f, const std::vector<double> &values) {
  if (values.empty())
    return 0.0;
  double sum = 0.0;
  switch (f) {
  case RankFn::HarmonicMean:
    for (double v : values) {
      if (v <= 0.0)
        return 0.0;
      sum += 1.0 / v;
    }
    return static_cast<double>(values.size()) / sum;
  case RankFn::Sum:
  case RankFn::Mean:
    for (double v : values)
      sum += v;
    return f == RankFn::Sum ? sum : sum / static_cast<double>(values.size());
  }
  return 0.0;
}

RelevanceVector score_rules(const ConjunctiveQuery &q,
                            const std::vector<RulePtr> &rules, const SideIMF &imf,
                            RankFn f, bool af_only) {
  RelevanceVector rv;
  rv.per_rule.reserve(rules.size());
  for (const auto &r : rules) {
    RuleScore s;
    s.side = matched_side(q, *r);
    if (s.side != MatchedSide::None) {
      const Side side = s.side == MatchedSide::Body ? Side::Body : Side::Head;
      const auto &weights = side == Side::Body ? imf.body : imf.head;
      std::vector<double> atom_scores;
      for (std::size_t i = 0; i < q.atoms.size(); ++i)
        atom_scores.push_back(atom_frequency(q.atoms[i], *r, side) *
                              (af_only ? 1.0 : weights[i]));
      s.score = rank(f, atom_scores);
    }
    if (s.score <= 0.0) {
      // a zero score carries no match for ranking purposes
      s.score = 0.0;
      s.side = MatchedSide::None;
    }
    rv.per_rule.push_back(s);
  }
  return rv;
}

double mapping_score(const RelevanceVector &rv) {
  double body = 0.0, head = 0.0;
  for (const auto &s : rv.per_rule) {
    if (s.side == MatchedSide::Body)
      body += s.score;
    else if (s.side == MatchedSide::Head)
      head += s.score;
  }
  return std::max(body, head);
}

std::vector<RulePtr> relevance_collection(const PeerState &p, unsigned reqs,
                                          const PeerLookup &lookup) {
  std::vector<RulePtr> out;
  std::set<Signature> seen;
  auto take = [&](const std::vector<RulePtr> &rules) {
    for (const auto &r : rules)
      if (seen.insert(r->signature()).second)
        out.push_back(r);
  };
  take(p.local_rules());
  take(p.lsv.distinct_rules());

  if (reqs == 0 || !lookup)
    return out;
  std::vector<PeerId> remote = p.lsv.peers_by_age();
  for (const auto &f : p.foaf.friends())
    if (std::find(remote.begin(), remote.end(), f.peer) == remote.end())
      remote.push_back(f.peer);
  unsigned asked = 0;
  for (PeerId r : remote) {
    if (asked >= reqs)
      break;
    const PeerState *other = lookup(r);
    if (!other)
      continue; // a departed peer does not answer
    take(other->local_rules());
    take(other->lsv.distinct_rules());
    ++asked;
  }
  return out;
}

SideIMF compute_imf(const ConjunctiveQuery &q, PeerState &p, unsigned reqs,
                    const PeerLookup &lookup, std::uint64_t epoch) {
  if (p.imf_epoch != epoch) {
    p.imf_cache.clear();
    p.collection_cache.clear();
    p.imf_epoch = epoch;
  }
  const std::string scope = std::to_string(reqs) + "|" + std::to_string(p.foaf.size());
  const std::string key = format_query(q) + "|" + scope;
  if (auto it = p.imf_cache.find(key); it != p.imf_cache.end())
    return it->second;
  auto cached = p.collection_cache.find(scope);
  if (cached == p.collection_cache.end())
    cached = p.collection_cache.emplace(scope, relevance_collection(p, reqs, lookup)).first;
  const auto &rules = cached->second;
  constexpr std::size_t kParallelThreshold = 4096;
  AtomCounts counts = rules.size() >= kParallelThreshold
                          ? count_atoms_parallel(q, rules)
                          : count_atoms_serial(q, rules);
  SideIMF imf = imf_from_counts(counts);
  p.imf_cache.emplace(key, imf);
  return imf;
}

RelevanceVector compute_relevance(const ConjunctiveQuery &q,
                                  const std::vector<RulePtr> &rules, PeerState &p,
                                  unsigned reqs, const PeerLookup &lookup,
                                  std::uint64_t epoch, RankFn f, bool af_only) {
  SideIMF imf = af_only ? SideIMF{std::vector<double>(q.atoms.size(), 1.0),
                                  std::vector<double>(q.atoms.size(), 1.0)}
                        : compute_imf(q, p, reqs, lookup, epoch);
  return score_rules(q, rules, imf, f, af_only);
}

// -- collection size estimate ---------------------------------------------------

const char *to_string(TopologyInfo::Mode m) {
  switch (m) {
  case TopologyInfo::Mode::Dht:
    return "dht";
  case TopologyInfo::Mode::SuperPeer:
    return "superpeer";
  case TopologyInfo::Mode::Unstructured:
    return "unstructured";
  }
  return "?";
}

TopologyInfo::Mode parse_topology(const std::string &name) {
  if (name == "dht")
    return TopologyInfo::Mode::Dht;
  if (name == "superpeer")
    return TopologyInfo::Mode::SuperPeer;
  if (name == "unstructured")
    return TopologyInfo::Mode::Unstructured;
  throw UnknownTopology(name);
}

std::uint64_t estimated_peers(const TopologyInfo &topo) {
  switch (topo.mode) {
  case TopologyInfo::Mode::Dht:
    if (topo.param >= 64)
      throw UnknownTopology("routing table size too large");
    return std::uint64_t{1} << topo.param;
  case TopologyInfo::Mode::SuperPeer:
  case TopologyInfo::Mode::Unstructured:
    return topo.param;
  }
  throw UnknownTopology("unhandled topology mode");
}

CollectionEstimate estimate_collection(std::uint64_t k, std::uint64_t t,
                                       const TopologyInfo &topo) {
  CollectionEstimate e;
  e.k = k;
  e.t = t;
  e.n = estimated_peers(topo);
  e.total = (k + t) * e.n;
  return e;
}

CollectionEstimate estimate_collection(const PeerState &p, const TopologyInfo &topo) {
  return estimate_collection(p.local_rules().size(), p.lsv.distinct_rules().size(),
                             topo);
}

} // namespace pdms
