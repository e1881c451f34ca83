#include "pdms/mapping.hpp"

#include "pdms/errors.hpp"
#include "pdms/text_format.hpp"

#include <algorithm>
#include <functional>

namespace pdms {

const char *to_string(Side s) { return s == Side::Body ? "Body" : "Head"; }
const char *to_string(Direction d) {
  return d == Direction::Forward ? "forward" : "backward";
}

// -- MappingRule ----------------------------------------------------------------

namespace {

std::string canonical_rule_text(const std::vector<Atom> &body,
                                const std::vector<Atom> &head,
                                const std::set<std::string> &existentials) {
  auto by_label = [](const Atom &a, const Atom &b) {
    return std::tie(a.label, a.params) < std::tie(b.label, b.params);
  };
  std::vector<Atom> b = body, h = head;
  std::stable_sort(b.begin(), b.end(), by_label);
  std::stable_sort(h.begin(), h.end(), by_label);

  std::map<std::string, std::string> rename;
  int universals = 0, exists = 0;
  auto emit = [&](const std::vector<Atom> &atoms) {
    std::string out;
    for (const auto &a : atoms) {
      if (!out.empty())
        out += "&";
      out += a.label + "(";
      for (std::size_t i = 0; i < a.params.size(); ++i) {
        const auto &name = a.params[i].name;
        auto it = rename.find(name);
        if (it == rename.end()) {
          std::string fresh = existentials.contains(name)
                                  ? "e" + std::to_string(exists++)
                                  : "v" + std::to_string(universals++);
          it = rename.emplace(name, std::move(fresh)).first;
        }
        if (i)
          out += ",";
        out += it->second;
      }
      out += ")";
    }
    return out;
  };
  std::string text = "body:" + emit(b);
  text += "|head:" + emit(h);
  return text;
}

void check_unique_labels(const std::vector<Atom> &atoms, const char *side) {
  std::set<std::string> seen;
  for (const auto &a : atoms)
    if (!seen.insert(a.label).second)
      throw InvalidRule(std::string("label ") + a.label + " repeats in the " + side);
}

} // namespace

MappingRule::MappingRule(std::vector<Atom> body, std::vector<Atom> head)
    : body_(std::move(body)), head_(std::move(head)) {
  if (body_.empty() || head_.empty())
    throw InvalidRule("body and head must be non-empty");
  check_unique_labels(body_, "body");
  check_unique_labels(head_, "head");

  std::set<std::string> body_vars;
  for (const auto &a : body_)
    for (const auto &t : a.params) {
      if (!t.is_variable())
        throw InvalidRule("rule parameters must be variables");
      body_vars.insert(t.name);
    }
  for (const auto &a : head_)
    for (const auto &t : a.params) {
      if (!t.is_variable())
        throw InvalidRule("rule parameters must be variables");
      if (!body_vars.contains(t.name))
        existentials_.insert(t.name);
    }
  canonical_ = canonical_rule_text(body_, head_, existentials_);
  signature_ = Signature::of(canonical_);
}

bool MappingRule::has_existential(const Atom &head_atom) const {
  return std::any_of(head_atom.params.begin(), head_atom.params.end(),
                     [&](const Term &t) { return is_existential(t.name); });
}

SchemaMapping SchemaMapping::make(PeerId source, PeerId target,
                                  std::vector<RulePtr> rules) {
  if (rules.empty())
    throw InvalidRule("a schema mapping needs at least one rule");
  std::vector<std::string> sigs;
  for (const auto &r : rules)
    sigs.push_back(r->signature().hex());
  std::sort(sigs.begin(), sigs.end());
  std::string joined;
  for (const auto &s : sigs)
    joined += s;
  return SchemaMapping{Signature::of(joined), source, target, std::move(rules)};
}

// -- unification ------------------------------------------------------------------

std::optional<Substitution> unify_atom(const Atom &query_atom,
                                       const Atom &rule_atom) {
  if (query_atom.label != rule_atom.label ||
      query_atom.arity() != rule_atom.arity())
    return std::nullopt;
  Substitution sub;
  for (std::size_t i = 0; i < rule_atom.arity(); ++i) {
    const Term &r = rule_atom.params[i];
    const Term &q = query_atom.params[i];
    if (r.is_constant()) {
      if (r != q)
        return std::nullopt;
      continue;
    }
    auto [it, inserted] = sub.emplace(r.name, q);
    if (!inserted && it->second != q)
      return std::nullopt;
  }
  return sub;
}

bool unifies_with_any(const Atom &query_atom, const std::vector<Atom> &atoms) {
  return std::any_of(atoms.begin(), atoms.end(), [&](const Atom &a) {
    return unify_atom(query_atom, a).has_value();
  });
}

bool relevant_forward(const ConjunctiveQuery &q, const MappingRule &m) {
  if (q.atoms.empty())
    return false;
  return std::all_of(q.atoms.begin(), q.atoms.end(), [&](const Atom &a) {
    return unifies_with_any(a, m.body());
  });
}

bool relevant_backward(const ConjunctiveQuery &q, const MappingRule &m) {
  if (q.atoms.empty())
    return false;
  return std::all_of(q.atoms.begin(), q.atoms.end(), [&](const Atom &a) {
    return std::any_of(m.head().begin(), m.head().end(), [&](const Atom &h) {
      return !m.has_existential(h) && unify_atom(a, h).has_value();
    });
  });
}

bool relevant(const ConjunctiveQuery &q, const MappingRule &m, Direction d) {
  return d == Direction::Forward ? relevant_forward(q, m) : relevant_backward(q, m);
}

bool mapping_relevant(const ConjunctiveQuery &q, const SchemaMapping &mapping) {
  return std::any_of(mapping.rules.begin(), mapping.rules.end(),
                     [&](const RulePtr &r) {
                       return relevant_forward(q, *r) || relevant_backward(q, *r);
                     });
}

// -- translation -----------------------------------------------------------------

bool is_fresh_variable(const Term &t) {
  if (!t.is_variable() || t.name.size() < 2 || t.name[0] != 'f')
    return false;
  return std::all_of(t.name.begin() + 1, t.name.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

std::set<std::string> variables_of(const ConjunctiveQuery &q) {
  std::set<std::string> vars;
  for (const auto &a : q.atoms)
    for (const auto &t : a.params)
      if (t.is_variable())
        vars.insert(t.name);
  return vars;
}

namespace {

class FreshNames {
public:
  explicit FreshNames(const ConjunctiveQuery &q) : taken_(variables_of(q)) {}
  Term next() {
    std::string name;
    do {
      name = "f" + std::to_string(++counter_);
    } while (taken_.contains(name));
    return Term::var(std::move(name));
  }

private:
  std::set<std::string> taken_;
  int counter_ = 0;
};

// Union-find over query terms, used to merge the bindings that different
// query atoms impose on the same rule variable.
class TermClasses {
public:
  std::size_t id(const Term &t) {
    auto [it, inserted] = index_.emplace(t, terms_.size());
    if (inserted) {
      terms_.push_back(t);
      parent_.push_back(terms_.size() - 1);
    }
    return it->second;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x)
      x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(const Term &a, const Term &b) {
    std::size_t ra = find(id(a)), rb = find(id(b));
    if (ra == rb)
      return;
    // keep the earliest-registered term as root so representatives follow
    // the query's own term order
    if (rb < ra)
      std::swap(ra, rb);
    parent_[rb] = ra;
  }
  /// Constant of the class if any, else its earliest non-fresh variable, else
  /// the root. Fresh names get renamed later and must not absorb a query's
  /// own variable.
  Term representative(const Term &t) {
    std::size_t root = find(id(t));
    std::optional<Term> constant;
    std::optional<Term> named;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (find(i) != root)
        continue;
      if (!terms_[i].is_constant()) {
        if (!named && !is_fresh_variable(terms_[i]))
          named = terms_[i];
        continue;
      }
      if (constant && *constant != terms_[i])
        throw ConflictingBindings(format_term(*constant) + " vs " +
                                  format_term(terms_[i]));
      constant = terms_[i];
    }
    return constant ? *constant : named ? *named : terms_[root];
  }

private:
  std::map<Term, std::size_t> index_;
  std::vector<Term> terms_;
  std::vector<std::size_t> parent_;
};

Atom apply(const Atom &a, const std::function<Term(const std::string &)> &f) {
  Atom out{a.label, {}};
  out.params.reserve(a.params.size());
  for (const auto &t : a.params)
    out.params.push_back(t.is_variable() ? f(t.name) : t);
  return out;
}

Translation translate_forward(const ConjunctiveQuery &q, const MappingRule &m) {
  TermClasses classes;
  for (const auto &a : q.atoms)
    for (const auto &t : a.params)
      classes.id(t);

  std::map<std::string, Term> rule_binding;
  for (const auto &qa : q.atoms) {
    std::optional<Substitution> sub;
    for (const auto &ba : m.body())
      if ((sub = unify_atom(qa, ba)))
        break;
    if (!sub)
      throw NotRelevant("query atom " + format_atom(qa) + " matches no body atom");
    for (const auto &[var, term] : *sub) {
      auto [it, inserted] = rule_binding.emplace(var, term);
      if (!inserted)
        classes.unite(it->second, term);
    }
  }

  Translation out;
  for (const auto &v : variables_of(q))
    out.bindings[v] = classes.representative(Term::var(v));
  for (const auto &a : q.atoms)
    for (const auto &t : a.params)
      if (t.is_constant())
        classes.representative(t); // surfaces constant/constant conflicts

  FreshNames fresh(q);
  std::map<std::string, Term> unbound;
  auto image = [&](const std::string &var) -> Term {
    if (auto it = rule_binding.find(var); it != rule_binding.end())
      return classes.representative(it->second);
    auto [it, inserted] = unbound.try_emplace(var);
    if (inserted)
      it->second = fresh.next();
    return it->second;
  };
  for (const auto &ha : m.head())
    out.query.atoms.push_back(apply(ha, image));
  out.query.hops = q.hops;
  return out;
}

Translation translate_backward(const ConjunctiveQuery &q, const MappingRule &m) {
  Translation out;
  FreshNames fresh(q);
  for (const auto &qa : q.atoms) {
    std::optional<Substitution> sub;
    for (const auto &ha : m.head()) {
      if (m.has_existential(ha))
        continue;
      if ((sub = unify_atom(qa, ha)))
        break;
    }
    if (!sub)
      throw NotRelevant("query atom " + format_atom(qa) +
                        " matches no universal head atom");
    std::map<std::string, Term> copy_vars;
    auto image = [&](const std::string &var) -> Term {
      if (auto it = sub->find(var); it != sub->end())
        return it->second;
      auto [it, inserted] = copy_vars.try_emplace(var);
      if (inserted)
        it->second = fresh.next();
      return it->second;
    };
    for (const auto &ba : m.body())
      out.query.atoms.push_back(apply(ba, image));
  }
  for (const auto &v : variables_of(q))
    out.bindings[v] = Term::var(v);
  out.query.hops = q.hops;
  return out;
}

} // namespace

Translation translate_with_bindings(const ConjunctiveQuery &q,
                                    const MappingRule &m, Direction dir) {
  if (!relevant(q, m, dir))
    throw NotRelevant(std::string("query is not ") + to_string(dir) +
                      "-relevant to the rule");
  Translation t = dir == Direction::Forward ? translate_forward(q, m)
                                            : translate_backward(q, m);
  t.query = minimize(t.query);
  return t;
}

ConjunctiveQuery translate(const ConjunctiveQuery &q, const MappingRule &m,
                           Direction dir) {
  return translate_with_bindings(q, m, dir).query;
}

// -- minimization ----------------------------------------------------------------

namespace {

bool has_fresh(const Atom &a) {
  return std::any_of(a.params.begin(), a.params.end(), is_fresh_variable);
}

// Atom b can receive atom a: same label and arity, equal non-fresh terms.
bool may_land(const Atom &a, const Atom &b) {
  if (b.label != a.label || b.arity() != a.arity())
    return false;
  for (std::size_t k = 0; k < a.arity(); ++k)
    if (!is_fresh_variable(a.params[k]) && a.params[k] != b.params[k])
      return false;
  return true;
}

// Is there a mapping of the fresh variables under which every atom of `from`
// lands in `into`? The search gives up (answering no) after `budget` steps,
// which only costs minimality, never correctness.
bool homomorphic(const std::vector<Atom> &from, const std::vector<Atom> &into,
                 std::size_t budget = 200000) {
  std::vector<std::vector<const Atom *>> cands(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    for (const Atom &b : into)
      if (may_land(from[i], b))
        cands[i].push_back(&b);
    if (cands[i].empty())
      return false;
  }
  // fewest candidates first, then atoms sharing fresh variables with those
  // already placed, so conflicts show up early
  std::vector<std::size_t> order;
  std::vector<bool> placed(from.size(), false);
  std::set<std::string> bound;
  while (order.size() < from.size()) {
    std::size_t best = from.size();
    std::pair<int, std::size_t> best_key{1, 0};
    for (std::size_t i = 0; i < from.size(); ++i) {
      if (placed[i])
        continue;
      bool touches = false;
      for (const auto &t : from[i].params)
        touches = touches || (is_fresh_variable(t) && bound.contains(t.name));
      std::pair<int, std::size_t> key{touches ? 0 : 1, cands[i].size()};
      if (best == from.size() || key < best_key) {
        best = i;
        best_key = key;
      }
    }
    placed[best] = true;
    order.push_back(best);
    for (const auto &t : from[best].params)
      if (is_fresh_variable(t))
        bound.insert(t.name);
  }

  std::map<std::string, Term> h;
  std::size_t steps = 0;
  std::function<bool(std::size_t)> step = [&](std::size_t n) -> bool {
    if (n == order.size())
      return true;
    const Atom &a = from[order[n]];
    for (const Atom *b : cands[order[n]]) {
      if (++steps > budget)
        return false;
      std::vector<std::string> added;
      bool ok = true;
      for (std::size_t k = 0; k < a.arity() && ok; ++k) {
        const Term &s = a.params[k];
        if (!is_fresh_variable(s))
          continue;
        const Term &t = b->params[k];
        auto it = h.find(s.name);
        if (it == h.end()) {
          h.emplace(s.name, t);
          added.push_back(s.name);
        } else {
          ok = it->second == t;
        }
      }
      if (ok && step(n + 1))
        return true;
      for (const auto &v : added)
        h.erase(v);
      if (steps > budget)
        return false;
    }
    return false;
  };
  return step(0);
}

std::vector<Atom> rename_fresh(const std::vector<Atom> &atoms) {
  std::map<std::string, std::string> rename;
  std::vector<Atom> out = atoms;
  for (auto &a : out)
    for (auto &t : a.params)
      if (is_fresh_variable(t)) {
        auto [it, inserted] = rename.try_emplace(t.name);
        if (inserted)
          it->second = "f" + std::to_string(rename.size());
        t.name = it->second;
      }
  return out;
}

} // namespace

ConjunctiveQuery minimize(const ConjunctiveQuery &q) {
  std::vector<Atom> atoms;
  for (const auto &a : q.atoms)
    if (std::find(atoms.begin(), atoms.end(), a) == atoms.end())
      atoms.push_back(a);

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < atoms.size() && atoms.size() > 1; ++i) {
      if (!has_fresh(atoms[i]))
        continue;
      std::vector<Atom> rest = atoms;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      if (homomorphic(atoms, rest)) {
        atoms = std::move(rest);
        changed = true;
        break;
      }
    }
  }
  ConjunctiveQuery out;
  out.atoms = rename_fresh(atoms);
  out.hops = q.hops;
  return out;
}

std::string canonical_key(const ConjunctiveQuery &q) {
  ConjunctiveQuery m = minimize(q);
  auto masked = [](const Atom &a) {
    Atom b = a;
    for (auto &t : b.params)
      if (is_fresh_variable(t))
        t.name = "f";
    return b;
  };
  std::stable_sort(m.atoms.begin(), m.atoms.end(),
                   [&](const Atom &a, const Atom &b) { return masked(a) < masked(b); });
  auto atoms = rename_fresh(m.atoms);
  std::vector<std::string> parts;
  for (const auto &a : atoms)
    parts.push_back(format_atom(a));
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto &p : parts) {
    if (!key.empty())
      key += " & ";
    key += p;
  }
  return key;
}

} // namespace pdms
