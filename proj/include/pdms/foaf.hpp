#pragma once

#include "pdms/mapping.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pdms {

struct FoafEntry {
  PeerId peer = 0;
  std::string uri;
  std::string summary_ref;
};

std::string foaf_uri(PeerId peer);
std::string summary_ref(PeerId peer);

/// Friend list of one peer, in insertion order.
class FoafFile {
public:
  explicit FoafFile(PeerId owner = 0) : owner_(owner) {}

  PeerId owner() const { return owner_; }
  const std::vector<FoafEntry> &friends() const { return friends_; }
  std::size_t size() const { return friends_.size(); }
  bool contains(PeerId peer) const;

  /// Appends if absent. Throws SelfFriendship for the owner.
  void add(PeerId peer);
  void add(FoafEntry entry);

  /// `owner: <id>` then one `knows: <id> <uri> <summary-ref>` line per friend.
  std::string serialize() const;
  static FoafFile parse(std::string_view text);

private:
  PeerId owner_;
  std::vector<FoafEntry> friends_;
};

} // namespace pdms
