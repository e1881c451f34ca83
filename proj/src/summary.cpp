#include "pdms/summary.hpp"

#include "pdms/errors.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pdms {

std::string atoms_key(const std::vector<Atom> &atoms) {
  std::vector<const Atom *> sorted;
  for (const auto &a : atoms)
    sorted.push_back(&a);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Atom *a, const Atom *b) { return a->label < b->label; });

  std::map<std::string, int> index;
  int next = 0;
  std::string key;
  for (const Atom *a : sorted) {
    if (!key.empty())
      key += "&";
    key += a->label + "(";
    for (std::size_t i = 0; i < a->params.size(); ++i) {
      const Term &t = a->params[i];
      int id;
      if (t.is_constant()) {
        id = next++;
      } else {
        auto [it, inserted] = index.emplace(t.name, next);
        if (inserted)
          ++next;
        id = it->second;
      }
      if (i)
        key += ",";
      key += std::to_string(id);
    }
    key += ")";
  }
  return key;
}

namespace {

bool share_variable(const Atom &a, const Atom &b) {
  for (const auto &s : a.params)
    for (const auto &t : b.params)
      if (s.is_variable() && s == t)
        return true;
  return false;
}

std::uint64_t fnv1a(const std::string &s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace

std::vector<std::string> summary_keys(const MappingRule &m, Side side) {
  const auto &atoms = m.side(side);
  const std::size_t n = atoms.size();
  std::vector<std::string> keys;
  std::set<std::string> seen;
  auto add = [&](std::vector<Atom> run) {
    auto k = atoms_key(run);
    if (seen.insert(k).second)
      keys.push_back(std::move(k));
  };
  for (const auto &a : atoms)
    add({a});
  for (std::size_t len = 2; len < n; ++len)
    for (std::size_t i = 0; i + len <= n; ++i) {
      bool joined = true;
      for (std::size_t j = i; j + 1 < i + len && joined; ++j)
        joined = share_variable(atoms[j], atoms[j + 1]);
      if (joined)
        add({atoms.begin() + static_cast<std::ptrdiff_t>(i),
             atoms.begin() + static_cast<std::ptrdiff_t>(i + len)});
    }
  if (n > 1)
    add(atoms);
  return keys;
}

MappingSummary::MappingSummary(std::size_t expected_keys, unsigned hash_count,
                               unsigned counters_per_key)
    : hash_count_(hash_count),
      counters_(std::max<std::size_t>(1, expected_keys) * counters_per_key, 0) {}

std::vector<std::size_t> MappingSummary::positions(const std::string &key) const {
  const std::uint64_t h1 = fnv1a(key, 0xcbf29ce484222325ULL);
  const std::uint64_t h2 = fnv1a(key, 0x84222325cbf29ce4ULL) | 1;
  std::vector<std::size_t> pos(hash_count_);
  for (unsigned i = 0; i < hash_count_; ++i)
    pos[i] = static_cast<std::size_t>((h1 + i * h2) % counters_.size());
  return pos;
}

void MappingSummary::insert(const std::string &key) {
  for (auto p : positions(key))
    ++counters_[p];
}

void MappingSummary::remove(const std::string &key) {
  auto pos = positions(key);
  // count repeats so a key hashing twice to one cell is checked correctly
  std::map<std::size_t, std::uint32_t> need;
  for (auto p : pos)
    ++need[p];
  for (auto [p, c] : need)
    if (counters_[p] < c)
      throw CounterUnderflow("key " + key + " is not in the summary");
  for (auto p : pos)
    --counters_[p];
}

bool MappingSummary::contains(const std::string &key) const {
  auto pos = positions(key);
  return std::all_of(pos.begin(), pos.end(),
                     [&](std::size_t p) { return counters_[p] > 0; });
}

MappingSummary MappingSummary::of_rules(const std::vector<RulePtr> &rules) {
  std::vector<std::string> keys;
  for (const auto &r : rules)
    for (Side s : {Side::Body, Side::Head})
      for (auto &k : summary_keys(*r, s))
        keys.push_back(std::move(k));
  MappingSummary summary(keys.size());
  for (const auto &k : keys)
    summary.insert(k);
  return summary;
}

} // namespace pdms
