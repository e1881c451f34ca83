#pragma once

#include "pdms/mapping.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pdms {

/// One Mapping-content row: a rule atom as seen through gossip.
struct LsvRow {
  std::string atom;       // label/arity
  Signature rule_sig;     // rule-level id
  PeerId source = 0;      // source peer of the mapping holding the rule
  PeerId target = 0;      // target peer of that mapping
  PeerId provider = 0;    // peer that handed us the row
  Side side = Side::Body;
  RulePtr rule;           // full rule, needed for unification-based counts
};

std::string atom_label_key(const Atom &a);

/// One row per atom of each side of the rule, attributed to `provider`.
std::vector<LsvRow> rows_for_rule(const RulePtr &rule, PeerId source,
                                  PeerId target, PeerId provider);

struct ViewEntry {
  PeerId peer = 0;
  unsigned age = 0;
};

/// Gossip-maintained store of external mapping rules. Capacity counts content
/// rows; eviction removes whole providers, greatest age first.
class LocalSemanticView {
public:
  explicit LocalSemanticView(std::size_t capacity = 500) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  const std::vector<LsvRow> &rows() const { return rows_; }
  const std::vector<ViewEntry> &view() const { return view_; }

  /// Adds a contact without content (bootstrap). Keeps an existing age.
  void add_contact(PeerId peer, unsigned age = 0);
  bool knows(PeerId peer) const;
  std::optional<unsigned> age_of(PeerId peer) const;

  /// Inserts `provider` at age 0 and its rows; rows already present (same
  /// atom, rule, side) and rows for `local` rules are dropped. Enforces the
  /// capacity afterwards.
  void merge(PeerId provider, const std::vector<LsvRow> &incoming,
             const std::set<Signature> &local);

  void age_all();
  /// Contact of maximal age, lowest id on ties.
  std::optional<PeerId> oldest() const;
  void drop_provider(PeerId peer);

  /// Signature-distinct rules, in first-row order.
  std::vector<RulePtr> distinct_rules() const;
  /// Peers in the View ordered by ascending age, ties by id.
  std::vector<PeerId> peers_by_age() const;

  /// Throws std::logic_error when a row refers to a provider missing from the
  /// View or when a (atom, rule, side) triple repeats.
  void check_integrity() const;

  /// Raw restore hook used by snapshots.
  void restore(std::vector<ViewEntry> view, std::vector<LsvRow> rows) {
    view_ = std::move(view);
    rows_ = std::move(rows);
  }

private:
  void enforce_capacity(PeerId keep);

  std::size_t capacity_;
  std::vector<ViewEntry> view_;
  std::vector<LsvRow> rows_;
};

} // namespace pdms
