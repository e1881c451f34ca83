#pragma once

#include "pdms/mapping.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pdms {

/// Text key for a set of atoms: atoms sorted by label, variables renamed to
/// positional indices by first occurrence. Constants are treated as distinct
/// variables so that query probes line up with rule keys.
std::string atoms_key(const std::vector<Atom> &atoms);

/// Keys contributed by one side of a rule: every single atom, the full
/// conjunction, and each contiguous run (2 <= length < n) whose adjacent atoms
/// share a variable. Duplicates are removed.
std::vector<std::string> summary_keys(const MappingRule &m, Side side);

/// Counting Bloom filter with k positions per key obtained by double hashing.
class MappingSummary {
public:
  explicit MappingSummary(std::size_t expected_keys = 4, unsigned hash_count = 4,
                          unsigned counters_per_key = 16);

  void insert(const std::string &key);
  /// Throws CounterUnderflow if any position of the key is already zero.
  void remove(const std::string &key);
  bool contains(const std::string &key) const;

  std::size_t size() const { return counters_.size(); }
  unsigned hash_count() const { return hash_count_; }
  const std::vector<std::uint32_t> &counters() const { return counters_; }

  /// Summary of both sides of every rule.
  static MappingSummary of_rules(const std::vector<RulePtr> &rules);

private:
  std::vector<std::size_t> positions(const std::string &key) const;

  unsigned hash_count_;
  std::vector<std::uint32_t> counters_;
};

} // namespace pdms
