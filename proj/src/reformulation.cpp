#include "pdms/reformulation.hpp"

#include "pdms/errors.hpp"
#include "pdms/text_format.hpp"
#include "pdms/summary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace pdms {

const char *to_string(Protocol p) {
  switch (p) {
  case Protocol::Full:
    return "Full";
  case Protocol::FullMinus:
    return "Full-";
  case Protocol::BaselineHash:
    return "Baseline#";
  case Protocol::BaselinePlus:
    return "Baseline+";
  case Protocol::Baseline:
    return "Baseline";
  }
  return "?";
}

Protocol parse_protocol(const std::string &name) {
  for (auto p : all_protocols())
    if (name == to_string(p))
      return p;
  throw ParseError("unknown protocol '" + name + "'");
}

const std::vector<Protocol> &all_protocols() {
  static const std::vector<Protocol> all = {Protocol::Full, Protocol::FullMinus,
                                            Protocol::BaselineHash, Protocol::BaselinePlus,
                                            Protocol::Baseline};
  return all;
}

ProtocolTraits traits(Protocol p) {
  switch (p) {
  case Protocol::Full:
    return {true, true, true, false};
  case Protocol::FullMinus:
    return {true, false, true, false};
  case Protocol::BaselineHash:
    return {false, false, false, false};
  case Protocol::BaselinePlus:
    return {false, false, false, true};
  case Protocol::Baseline:
    return {false, false, false, true};
  }
  return {};
}

bool within_rewriting_bound(const QueryResultSet &r, std::size_t query_atoms) {
  const double bound = std::pow(static_cast<double>(r.relevant_rules),
                                static_cast<double>(query_atoms));
  return static_cast<double>(r.translated.size()) <= bound;
}

double recall(const QueryResultSet &retrieved, const QueryResultSet &truth) {
  if (truth.rewritings.empty())
    return 1.0;
  std::size_t hit = 0;
  for (const auto &r : truth.rewritings)
    hit += retrieved.rewritings.contains(r) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.rewritings.size());
}

namespace {

struct Envelope {
  PeerId peer = 0;
  ConjunctiveQuery query;
  std::optional<Signature> arrival; // mapping the query came through
  bool relevant = false;
  bool via_friend = false;
  std::string key; // canonical text of `query`
  // 0 for the mapping-driven walk, 1 once a friendship link was taken
  int tier = 0;
};

// Breadth-first walk shared by the protocols and the oracle. A state is
// (peer, canonical query, arrival mapping) and is expanded once.
class Walk {
public:
  Walk(const Network &net, const ConjunctiveQuery &original, std::size_t max_states)
      : net_(net), original_key_(canonical_key(original)), max_states_(max_states) {}

  QueryResultSet result;

  void start(PeerId origin, const ConjunctiveQuery &q) {
    Envelope e{origin, minimize(q), std::nullopt, true};
    e.query.hops = q.hops;
    enqueue(std::move(e));
  }

  /// Counts one message; drops it if the destination is gone.
  void send(PeerId dest, const ConjunctiveQuery &q, std::optional<Signature> via,
            bool relevant) {
    ++result.messages;
    if (!net_.live(dest)) {
      ++result.dropped;
      return;
    }
    Envelope e{dest, minimize(q), via, relevant, !via};
    e.tier = via ? tier_ : 1;
    enqueue(std::move(e));
  }

  void record(PeerId p, const ConjunctiveQuery &q, bool relevant) {
    record(p, canonical_key(q), relevant);
  }
  void record(PeerId p, std::string key, bool relevant) {
    Rewriting r{p, std::move(key)};
    if (relevant)
      result.relevant.insert(r);
    result.rewritings.insert(std::move(r));
  }

  void translated(const ConjunctiveQuery &q, const MappingRule &rule) {
    result.rules_used.insert(rule.signature());
    auto key = canonical_key(q);
    if (key != original_key_)
      result.translated.insert(std::move(key));
  }

  /// A peer uses each of its mappings at most once per query.
  bool processed(PeerId p, const Signature &m) const { return processed_.contains({p, m}); }
  void mark(PeerId p, const Signature &m) { processed_.emplace(p, m); }
  /// Same rule for friendship links.
  bool claim_friend(PeerId p, PeerId f) { return friend_links_.emplace(p, f).second; }

  /// Counts the live rules relevant to any handled query.
  void finish() {
    std::map<std::string, std::vector<const MappingRule *>> by_label;
    std::set<Signature> seen;
    for (const auto &p : net_.peers()) {
      if (!p.alive)
        continue;
      for (const auto &m : p.mappings)
        for (const auto &r : m->rules) {
          if (!seen.insert(r->signature()).second)
            continue;
          std::set<std::string> labels;
          for (const auto &a : r->body())
            labels.insert(a.label);
          for (const auto &a : r->head())
            labels.insert(a.label);
          for (const auto &l : labels)
            by_label[l].push_back(r.get());
        }
    }
    std::set<const MappingRule *> hit;
    for (const auto &[key, q] : handled_) {
      auto it = by_label.find(q.atoms.front().label);
      if (it == by_label.end())
        continue;
      for (const MappingRule *r : it->second)
        if (!hit.contains(r) && (relevant_forward(q, *r) || relevant_backward(q, *r)))
          hit.insert(r);
    }
    result.relevant_rules = hit.size();
  }

  /// Friendship branches wait until the mapping-driven walk has settled, so
  /// they never take a mapping away from it.
  std::optional<Envelope> next() {
    auto &q = !queue_[0].empty() ? queue_[0] : queue_[1];
    if (q.empty())
      return std::nullopt;
    Envelope e = std::move(q.front());
    q.pop_front();
    tier_ = e.tier;
    return e;
  }

private:
  void enqueue(Envelope e) {
    e.key = canonical_key(e.query);
    std::string key = std::to_string(e.peer) + "|" + e.key + "|" +
                      (e.arrival ? e.arrival->hex() : "-");
    if (!visited_.insert(std::move(key)).second)
      return;
    if (visited_.size() > max_states_) {
      result.truncated = true;
      return;
    }
    ++result.states;
    handled_.try_emplace(e.key, e.query);
    queue_[e.tier].push_back(std::move(e));
  }

  const Network &net_;
  std::string original_key_;
  std::size_t max_states_;
  std::deque<Envelope> queue_[2];
  int tier_ = 0;
  std::set<std::string> visited_;
  std::set<std::pair<PeerId, Signature>> processed_;
  std::set<std::pair<PeerId, PeerId>> friend_links_;
  std::map<std::string, ConjunctiveQuery> handled_;
};

// A rewriting that no longer mentions the image of some query variable
// cannot return answers for it, and one made only of fresh variables says
// nothing about the query; both are discarded.
std::optional<ConjunctiveQuery> try_translate(const ConjunctiveQuery &q,
                                              const MappingRule &r, Direction d) {
  try {
    Translation t = translate_with_bindings(q, r, d);
    std::set<Term> kept;
    bool informative = false;
    for (const auto &a : t.query.atoms)
      for (const auto &term : a.params) {
        kept.insert(term);
        informative = informative || !is_fresh_variable(term);
      }
    if (!informative)
      return std::nullopt;
    for (const auto &[var, term] : t.bindings)
      if (!is_fresh_variable(Term::var(var)) && !kept.contains(term))
        return std::nullopt;
    return std::move(t.query);
  } catch (const ConflictingBindings &) {
    return std::nullopt;
  }
}

/// Translation case table for one mapping. Returns false when no rule of the
/// mapping is relevant to q. `out` is the query with the hop count already
/// increased.
bool follow_relevant(Walk &walk, const PeerState &p, const SchemaMapping &m,
                     const ConjunctiveQuery &out) {
  const PeerId dest = p.other_end(m);
  const bool outward = p.is_outward(m);
  bool body = false;
  for (const auto &r : m.rules)
    body = body || relevant_forward(out, *r);
  const Direction dir = body ? Direction::Forward : Direction::Backward;
  bool any = false;
  bool sent_original = false;
  for (const auto &r : m.rules) {
    if (!relevant(out, *r, dir))
      continue;
    auto translated = try_translate(out, *r, dir);
    if (!translated)
      continue;
    any = true;
    translated->hops = out.hops;
    walk.translated(*translated, *r);
    // along the mapping an outward peer ships Q' and keeps Q; against it the
    // roles swap
    const bool ship_translated = outward == body;
    if (ship_translated) {
      walk.send(dest, *translated, m.id, true);
    } else {
      walk.record(p.id, *translated, true);
      if (!sent_original) {
        walk.send(dest, out, m.id, true);
        sent_original = true;
      }
    }
  }
  return any;
}

bool relevant_here(const PeerState &p, const ConjunctiveQuery &q) {
  return std::any_of(p.mappings.begin(), p.mappings.end(),
                     [&](const MappingPtr &m) { return mapping_relevant(q, *m); });
}

struct Candidate {
  MappingPtr mapping;
  double score = 0.0;
  bool relevant = false;
  Signature order_key; // Baseline family only
};

} // namespace

std::vector<PeerId> friends_with_greatest_count(const Network &net, PeerId p,
                                                const ConjunctiveQuery &q,
                                                std::size_t top_k) {
  std::vector<std::string> probes;
  for (const auto &a : q.atoms)
    probes.push_back(atoms_key({a}));
  if (q.atoms.size() > 1)
    probes.push_back(atoms_key(q.atoms));

  std::vector<std::pair<std::size_t, PeerId>> ranked;
  for (const auto &f : net.peer(p).foaf.friends()) {
    const PeerState *other = net.live(f.peer);
    if (!other)
      continue; // dangling link: the summary cannot be fetched
    std::size_t hits = 0;
    for (const auto &k : probes)
      hits += other->summary.contains(k) ? 1 : 0;
    if (hits > 0)
      ranked.emplace_back(hits, f.peer);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (top_k != 0 && ranked.size() > top_k)
    ranked.resize(top_k);
  std::vector<PeerId> out;
  for (const auto &r : ranked)
    out.push_back(r.second);
  return out;
}

std::size_t find_direct_foaf_friends(Network &net, PeerId id, const ConjunctiveQuery &q,
                                     const QueryConfig &cfg) {
  PeerState &p = net.peer(id);
  std::set<std::string> labels;
  for (const auto &a : q.atoms)
    labels.insert(atom_label_key(a));
  // group LSV rules into the mappings they came from; rules sharing no atom
  // with q score zero and are left out
  std::map<std::pair<PeerId, PeerId>, std::vector<RulePtr>> groups;
  std::map<std::pair<PeerId, PeerId>, std::set<Signature>> seen;
  for (const auto &row : p.lsv.rows()) {
    if (!labels.contains(row.atom))
      continue;
    auto key = std::make_pair(row.source, row.target);
    if (seen[key].insert(row.rule_sig).second)
      groups[key].push_back(row.rule);
  }
  if (groups.empty())
    return 0;
  const SideIMF imf = compute_imf(q, p, cfg.reqs, net.lookup(), net.epoch());
  std::vector<std::pair<double, PeerId>> scored;
  for (const auto &[ends, rules] : groups) {
    double s = mapping_score(score_rules(q, rules, imf, cfg.rank));
    if (s > 0.0)
      scored.emplace_back(s, ends.second);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto &a, const auto &b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (cfg.top_k != 0 && scored.size() > cfg.top_k)
    scored.resize(cfg.top_k);

  std::size_t added = 0;
  for (const auto &[score, target] : scored) {
    if (target == id || p.foaf.contains(target))
      continue;
    if (!net.live(target))
      continue; // invitation is never answered
    if (!net.rng().bernoulli(cfg.accept_probability))
      continue;
    p.foaf.add(target);
    ++added;
  }
  return added;
}

QueryResultSet translate_query(Network &net, PeerId origin, const ConjunctiveQuery &q,
                               const QueryConfig &cfg) {
  const ProtocolTraits t = traits(cfg.protocol);
  Walk walk(net, q, cfg.max_states);
  if (!net.live(origin))
    throw DeadPeer("query origin " + std::to_string(origin) + " has left");
  walk.start(origin, q);
  const PeerLookup lookup = net.lookup();

  while (auto env = walk.next()) {
    PeerState &p = net.peer(env->peer);
    const bool treatable = env->relevant || relevant_here(p, env->query);
    // a friend that cannot treat the query neither answers nor spreads it
    if (env->via_friend && !treatable)
      continue;
    walk.record(p.id, env->key, treatable);
    if (cfg.alpha && env->query.hops >= *cfg.alpha)
      continue;
    if (env->query.atoms.size() > cfg.max_query_atoms)
      continue;
    ConjunctiveQuery out = env->query;
    ++out.hops;

    if (t.uses_foaf)
      walk.result.foaf_added += find_direct_foaf_friends(net, p.id, out, cfg);

    std::vector<Candidate> cands;
    for (const auto &m : p.mappings) {
      if (env->arrival && m->id == *env->arrival)
        continue;
      if (walk.processed(p.id, m->id))
        continue; // top-k is taken among unprocessed mappings
      Candidate c{m, 0.0, mapping_relevant(out, *m), {}};
      if (t.propagates_irrelevant) {
        c.order_key = Signature::of(env->key + "|" + std::to_string(p.id) +
                                    "|" + m->id.hex());
      } else {
        auto rv = compute_relevance(out, m->rules, p, cfg.reqs, lookup, net.epoch(),
                                    cfg.rank, !t.uses_af_imf);
        c.score = mapping_score(rv);
      }
      cands.push_back(std::move(c));
    }
    if (t.propagates_irrelevant) {
      std::sort(cands.begin(), cands.end(), [](const Candidate &a, const Candidate &b) {
        return a.order_key < b.order_key;
      });
    } else {
      std::sort(cands.begin(), cands.end(), [](const Candidate &a, const Candidate &b) {
        if (a.score != b.score)
          return a.score > b.score;
        if (a.relevant != b.relevant)
          return a.relevant;
        return a.mapping->id < b.mapping->id;
      });
    }
    if (cfg.top_k != 0 && cands.size() > cfg.top_k)
      cands.resize(cfg.top_k);
    std::sort(cands.begin(), cands.end(), [](const Candidate &a, const Candidate &b) {
      return a.mapping->id < b.mapping->id;
    });

    for (const auto &c : cands) {
      const SchemaMapping &m = *c.mapping;
      bool used = false;
      switch (cfg.protocol) {
      case Protocol::Full:
      case Protocol::FullMinus:
      case Protocol::BaselineHash:
        used = c.relevant && follow_relevant(walk, p, m, out);
        break;
      case Protocol::BaselinePlus:
        if (c.relevant)
          follow_relevant(walk, p, m, out);
        walk.send(p.other_end(m), out, m.id, false);
        used = true;
        break;
      case Protocol::Baseline:
        walk.send(p.other_end(m), out, m.id, false);
        used = true;
        break;
      }
      if (used)
        walk.mark(p.id, m.id);
    }

    if (t.uses_foaf)
      for (PeerId f : friends_with_greatest_count(net, p.id, out, cfg.top_k))
        if (walk.claim_friend(p.id, f))
          walk.send(f, out, std::nullopt, false);
  }
  walk.finish();
  return walk.result;
}

QueryResultSet centralized_oracle(const Network &net, PeerId origin,
                                  const ConjunctiveQuery &q, std::optional<unsigned> alpha,
                                  std::size_t max_query_atoms) {
  Walk walk(net, q, SIZE_MAX);
  if (!net.live(origin))
    return walk.result;
  walk.start(origin, q);
  const std::vector<RulePtr> global = net.all_rules();
  std::map<std::string, SideIMF> imf_cache;

  while (auto env = walk.next()) {
    const PeerState &p = net.peer(env->peer);
    walk.record(p.id, env->key, true);
    if (alpha && env->query.hops >= *alpha)
      continue;
    if (env->query.atoms.size() > max_query_atoms)
      continue;
    ConjunctiveQuery out = env->query;
    ++out.hops;
    const std::string key = format_query(out);
    auto it = imf_cache.find(key);
    if (it == imf_cache.end())
      it = imf_cache.emplace(key, imf_from_counts(count_atoms_serial(out, global))).first;

    std::vector<MappingPtr> chosen;
    for (const auto &m : p.mappings) {
      if (env->arrival && m->id == *env->arrival)
        continue;
      if (!net.live(p.other_end(*m)))
        continue;
      if (mapping_score(score_rules(out, m->rules, it->second)) > 0.0)
        chosen.push_back(m);
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const MappingPtr &a, const MappingPtr &b) { return a->id < b->id; });
    for (const auto &m : chosen)
      if (!walk.processed(p.id, m->id) && follow_relevant(walk, p, *m, out))
        walk.mark(p.id, m->id);
  }
  walk.finish();
  return walk.result;
}

} // namespace pdms
