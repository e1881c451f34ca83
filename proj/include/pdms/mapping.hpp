#pragma once

#include "pdms/signature.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pdms {

using PeerId = std::uint32_t;

/// A constant value or a variable. Variables and constants live in disjoint
/// namespaces; the kind is part of the identity.
struct Term {
  enum class Kind : std::uint8_t { Constant, Variable };

  Kind kind = Kind::Variable;
  std::string name;

  static Term var(std::string name) { return {Kind::Variable, std::move(name)}; }
  static Term constant(std::string value) {
    return {Kind::Constant, std::move(value)};
  }

  bool is_variable() const { return kind == Kind::Variable; }
  bool is_constant() const { return kind == Kind::Constant; }

  friend auto operator<=>(const Term &, const Term &) = default;
};

struct Atom {
  std::string label;
  std::vector<Term> params;

  std::size_t arity() const { return params.size(); }

  friend auto operator<=>(const Atom &, const Atom &) = default;
};

struct ConjunctiveQuery {
  std::vector<Atom> atoms;
  unsigned hops = 0;

  friend bool operator==(const ConjunctiveQuery &a, const ConjunctiveQuery &b) {
    return a.atoms == b.atoms && a.hops == b.hops;
  }
};

enum class Side : std::uint8_t { Body, Head };
enum class Direction : std::uint8_t { Forward, Backward };

const char *to_string(Side s);
const char *to_string(Direction d);

/// Rule variable name -> query term.
using Substitution = std::map<std::string, Term>;

/// A source-to-target tgd. Body parameters are universally quantified
/// variables; head parameters are universal (shared with the body) or
/// existential (head-only).
class MappingRule {
public:
  /// Validates the rule and computes its signature. Head variables that do
  /// not occur in the body are existential.
  MappingRule(std::vector<Atom> body, std::vector<Atom> head);

  const std::vector<Atom> &body() const { return body_; }
  const std::vector<Atom> &head() const { return head_; }
  const std::vector<Atom> &side(Side s) const {
    return s == Side::Body ? body_ : head_;
  }
  const std::set<std::string> &existentials() const { return existentials_; }
  bool is_existential(const std::string &var) const {
    return existentials_.contains(var);
  }
  bool has_existential(const Atom &head_atom) const;

  const Signature &signature() const { return signature_; }
  /// Sorted-atom, positionally renamed text; equal for rules that differ only
  /// in variable names or atom order.
  const std::string &canonical_text() const { return canonical_; }

private:
  std::vector<Atom> body_;
  std::vector<Atom> head_;
  std::set<std::string> existentials_;
  std::string canonical_;
  Signature signature_;
};

using RulePtr = std::shared_ptr<const MappingRule>;

struct SchemaMapping {
  Signature id;
  PeerId source = 0;
  PeerId target = 0;
  std::vector<RulePtr> rules;

  /// The id is the digest of the sorted rule signatures.
  static SchemaMapping make(PeerId source, PeerId target,
                            std::vector<RulePtr> rules);
};

using MappingPtr = std::shared_ptr<const SchemaMapping>;

/// A set of ground facts. Used by the chase oracle in tests.
struct Instance {
  std::set<Atom> facts;
};

// -- unification and relevance ----------------------------------------------

/// Positional unification of a query atom against a rule atom. Succeeds when
/// labels and arities agree and some substitution of the rule variables maps
/// the rule atom onto the query atom.
std::optional<Substitution> unify_atom(const Atom &query_atom,
                                       const Atom &rule_atom);

bool unifies_with_any(const Atom &query_atom, const std::vector<Atom> &atoms);

bool relevant_forward(const ConjunctiveQuery &q, const MappingRule &m);
/// Only head atoms made of universal variables are candidates.
bool relevant_backward(const ConjunctiveQuery &q, const MappingRule &m);
bool relevant(const ConjunctiveQuery &q, const MappingRule &m, Direction d);
bool mapping_relevant(const ConjunctiveQuery &q, const SchemaMapping &mapping);

// -- translation --------------------------------------------------------------

struct Translation {
  ConjunctiveQuery query;
  /// Variables of the input query -> the term standing for them in `query`.
  std::map<std::string, Term> bindings;
};

/// Forward: compose the per-atom substitutions and instantiate the whole
/// head, with fresh `$f<k>` variables for existentials and unbound universals.
/// Backward: unfold every query atom into its own copy of the body.
/// Throws NotRelevant or ConflictingBindings.
Translation translate_with_bindings(const ConjunctiveQuery &q,
                                    const MappingRule &m, Direction dir);

ConjunctiveQuery translate(const ConjunctiveQuery &q, const MappingRule &m,
                           Direction dir);

// -- canonical forms ----------------------------------------------------------

/// Fresh variables are those named f<digits>; they are existential in a query.
bool is_fresh_variable(const Term &t);

/// Drops duplicate atoms and atoms made redundant by a homomorphism that
/// fixes constants and non-fresh variables, then renames fresh variables by
/// first occurrence. Atom order is preserved.
ConjunctiveQuery minimize(const ConjunctiveQuery &q);

/// Order-insensitive text key of a query (hops ignored).
std::string canonical_key(const ConjunctiveQuery &q);

std::set<std::string> variables_of(const ConjunctiveQuery &q);

} // namespace pdms
