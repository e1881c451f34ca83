#include "pdms/foaf.hpp"

#include "pdms/errors.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

namespace pdms {

std::string foaf_uri(PeerId peer) {
  return "pdms://peer/" + std::to_string(peer) + "/foaf.rdf";
}

std::string summary_ref(PeerId peer) {
  return "P" + std::to_string(peer) + "_MapSum";
}

bool FoafFile::contains(PeerId peer) const {
  return std::any_of(friends_.begin(), friends_.end(),
                     [&](const FoafEntry &e) { return e.peer == peer; });
}

void FoafFile::add(PeerId peer) { add({peer, foaf_uri(peer), summary_ref(peer)}); }

void FoafFile::add(FoafEntry entry) {
  if (entry.peer == owner_)
    throw SelfFriendship("peer " + std::to_string(owner_) + " cannot befriend itself");
  if (!contains(entry.peer))
    friends_.push_back(std::move(entry));
}

std::string FoafFile::serialize() const {
  std::ostringstream os;
  os << "owner: " << owner_ << "\n";
  for (const auto &f : friends_)
    os << "knows: " << f.peer << " " << f.uri << " " << f.summary_ref << "\n";
  return os.str();
}

FoafFile FoafFile::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<FoafFile> file;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "owner:") {
      PeerId owner;
      if (!(ls >> owner) || file)
        throw ParseError("bad FOAF owner line: " + line);
      file.emplace(owner);
    } else if (tag == "knows:") {
      FoafEntry e;
      if (!file || !(ls >> e.peer >> e.uri >> e.summary_ref))
        throw ParseError("bad FOAF knows line: " + line);
      file->add(std::move(e));
    } else {
      throw ParseError("unknown FOAF line: " + line);
    }
  }
  if (!file)
    throw ParseError("FOAF record without owner");
  return *file;
}

} // namespace pdms
