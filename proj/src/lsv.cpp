#include "pdms/lsv.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace pdms {

std::string atom_label_key(const Atom &a) {
  return a.label + "/" + std::to_string(a.arity());
}

std::vector<LsvRow> rows_for_rule(const RulePtr &rule, PeerId source,
                                  PeerId target, PeerId provider) {
  std::vector<LsvRow> rows;
  for (Side s : {Side::Body, Side::Head})
    for (const auto &a : rule->side(s))
      rows.push_back({atom_label_key(a), rule->signature(), source, target,
                      provider, s, rule});
  return rows;
}

namespace {

auto row_key(const LsvRow &r) { return std::tie(r.atom, r.rule_sig, r.side); }

} // namespace

void LocalSemanticView::add_contact(PeerId peer, unsigned age) {
  if (!knows(peer))
    view_.push_back({peer, age});
}

bool LocalSemanticView::knows(PeerId peer) const {
  return age_of(peer).has_value();
}

std::optional<unsigned> LocalSemanticView::age_of(PeerId peer) const {
  for (const auto &v : view_)
    if (v.peer == peer)
      return v.age;
  return std::nullopt;
}

void LocalSemanticView::merge(PeerId provider, const std::vector<LsvRow> &incoming,
                              const std::set<Signature> &local) {
  bool found = false;
  for (auto &v : view_)
    if (v.peer == provider) {
      v.age = 0;
      found = true;
    }
  if (!found)
    view_.push_back({provider, 0});

  std::set<std::tuple<std::string, Signature, Side>> present;
  for (const auto &r : rows_)
    present.insert(row_key(r));
  std::vector<LsvRow> fresh;
  for (const auto &r : incoming) {
    if (local.contains(r.rule_sig) || present.contains(row_key(r)))
      continue;
    LsvRow copy = r;
    copy.provider = provider;
    fresh.push_back(std::move(copy));
    present.insert(row_key(fresh.back()));
  }
  for (auto &r : fresh)
    rows_.push_back(std::move(r));
  enforce_capacity(provider);
}

void LocalSemanticView::enforce_capacity(PeerId keep) {
  if (rows_.size() <= capacity_)
    return;
  std::vector<ViewEntry> order = view_;
  std::stable_sort(order.begin(), order.end(), [](const ViewEntry &a, const ViewEntry &b) {
    return std::tie(b.age, a.peer) < std::tie(a.age, b.peer);
  });
  for (const auto &v : order) {
    if (rows_.size() <= capacity_)
      break;
    if (v.peer == keep)
      continue;
    auto held = std::count_if(rows_.begin(), rows_.end(),
                              [&](const LsvRow &r) { return r.provider == v.peer; });
    if (held == 0)
      continue;
    drop_provider(v.peer);
  }
  // a single provider larger than the whole capacity keeps its earliest rows
  if (rows_.size() > capacity_)
    rows_.resize(capacity_);
}

void LocalSemanticView::age_all() {
  for (auto &v : view_)
    ++v.age;
}

std::optional<PeerId> LocalSemanticView::oldest() const {
  std::optional<ViewEntry> best;
  for (const auto &v : view_)
    if (!best || v.age > best->age || (v.age == best->age && v.peer < best->peer))
      best = v;
  if (!best)
    return std::nullopt;
  return best->peer;
}

void LocalSemanticView::drop_provider(PeerId peer) {
  std::erase_if(view_, [&](const ViewEntry &v) { return v.peer == peer; });
  std::erase_if(rows_, [&](const LsvRow &r) { return r.provider == peer; });
}

std::vector<RulePtr> LocalSemanticView::distinct_rules() const {
  std::vector<RulePtr> out;
  std::set<Signature> seen;
  for (const auto &r : rows_)
    if (seen.insert(r.rule_sig).second)
      out.push_back(r.rule);
  return out;
}

std::vector<PeerId> LocalSemanticView::peers_by_age() const {
  std::vector<ViewEntry> order = view_;
  std::stable_sort(order.begin(), order.end(), [](const ViewEntry &a, const ViewEntry &b) {
    return std::tie(a.age, a.peer) < std::tie(b.age, b.peer);
  });
  std::vector<PeerId> out;
  for (const auto &v : order)
    out.push_back(v.peer);
  return out;
}

void LocalSemanticView::check_integrity() const {
  std::set<PeerId> peers;
  for (const auto &v : view_)
    if (!peers.insert(v.peer).second)
      throw std::logic_error("view peer repeats");
  std::set<std::tuple<std::string, Signature, Side>> keys;
  for (const auto &r : rows_) {
    if (!peers.contains(r.provider))
      throw std::logic_error("row provider missing from view");
    if (!keys.emplace(r.atom, r.rule_sig, r.side).second)
      throw std::logic_error("duplicate content row");
  }
  if (rows_.size() > capacity_)
    throw std::logic_error("content rows exceed capacity");
}

} // namespace pdms
