#pragma once

// Reference semantics used only by tests: naive chase of a source instance
// with one tgd, and conjunctive query evaluation by backtracking.

#include "pdms/mapping.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using pdms::Atom;
using pdms::ConjunctiveQuery;
using pdms::Instance;
using pdms::MappingRule;
using pdms::Term;

using Binding = std::map<std::string, Term>;

inline bool is_null(const Term &t) {
  return t.is_constant() && t.name.rfind("#null", 0) == 0;
}

// Calls `emit` for every homomorphism of `atoms` into `facts` extending `b`.
inline void homomorphisms(const std::vector<Atom> &atoms, const std::set<Atom> &facts,
                          Binding b, const std::function<void(const Binding &)> &emit,
                          std::size_t i = 0) {
  if (i == atoms.size()) {
    emit(b);
    return;
  }
  const Atom &a = atoms[i];
  for (const Atom &f : facts) {
    if (f.label != a.label || f.arity() != a.arity())
      continue;
    Binding next = b;
    bool ok = true;
    for (std::size_t k = 0; k < a.arity() && ok; ++k) {
      const Term &p = a.params[k];
      if (p.is_constant()) {
        ok = p == f.params[k];
      } else if (auto it = next.find(p.name); it != next.end()) {
        ok = it->second == f.params[k];
      } else {
        next.emplace(p.name, f.params[k]);
      }
    }
    if (ok)
      homomorphisms(atoms, facts, std::move(next), emit, i + 1);
  }
}

// Oblivious chase: one head instance per body match, fresh nulls for
// existentials. Only target facts are returned.
inline Instance chase(const Instance &src, const MappingRule &m) {
  Instance out;
  std::size_t nulls = 0;
  homomorphisms(m.body(), src.facts, {}, [&](const Binding &b) {
    Binding full = b;
    for (const auto &e : m.existentials())
      full[e] = Term::constant("#null" + std::to_string(nulls++));
    for (const Atom &h : m.head()) {
      Atom f{h.label, {}};
      for (const Term &p : h.params)
        f.params.push_back(p.is_constant() ? p : full.at(p.name));
      out.facts.insert(f);
    }
  });
  return out;
}

using Answer = std::vector<Term>;

// Answers of q projected on `vars`, each variable resolved through `rename`
// first (identity when absent). Answers holding a null are dropped.
inline std::set<Answer> eval(const ConjunctiveQuery &q, const Instance &inst,
                             const std::vector<std::string> &vars,
                             const std::map<std::string, Term> &rename = {}) {
  std::set<Answer> out;
  homomorphisms(q.atoms, inst.facts, {}, [&](const Binding &b) {
    Answer a;
    for (const auto &v : vars) {
      Term t = Term::var(v);
      if (auto it = rename.find(v); it != rename.end())
        t = it->second;
      if (t.is_variable())
        t = b.at(t.name);
      if (is_null(t))
        return;
      a.push_back(t);
    }
    out.insert(std::move(a));
  });
  return out;
}

} // namespace oracle
