#include "pdms/errors.hpp"
#include "pdms/network.hpp"
#include "pdms/text_format.hpp"

#include <map>
#include <sstream>

namespace pdms {

namespace {

constexpr const char *kMagic = "PDMS-SNAPSHOT 1";

std::string side_tag(Side s) { return s == Side::Body ? "B" : "H"; }

} // namespace

// Text layout: a header, the rule table, mappings by rule index, then one
// block per peer, closed by a SHA-1 line over everything above it. Snapshots
// are taken between cycles, when the event queue is empty.
std::string snapshot(const Network &net) {
  if (!net.queue_.empty())
    throw std::logic_error("snapshot requires a drained event queue");
  std::ostringstream os;
  os << kMagic << "\n";
  const auto &c = net.cfg_;
  os << "config " << c.t_gossip << " " << c.v_gossip << " " << c.l_gossip << " "
     << to_string(net.topo_.mode) << " " << net.topo_.param << "\n";
  os << "clock " << net.now_ << " " << net.seq_ << " " << net.cycle_ << " "
     << net.epoch_ << "\n";
  const auto &k = net.counters_;
  os << "counters " << k.events << " " << k.messages_sent << " " << k.messages_dropped
     << " " << k.exchanges << " " << k.joins << " " << k.removals << "\n";
  os << "rng " << net.rng_.state() << "\n";
  os << "churnrng " << net.churn_rng_.state() << "\n";
  os << "churn " << net.plan_.steps.size() << "\n";
  for (const auto &s : net.plan_.steps)
    os << s.tick << " " << s.remove << "\n";

  // every rule reachable from mappings or LSV rows, interned once
  std::map<Signature, std::size_t> index;
  std::vector<RulePtr> table;
  auto intern = [&](const RulePtr &r) {
    if (index.emplace(r->signature(), table.size()).second)
      table.push_back(r);
  };
  for (const auto &m : net.mappings_)
    for (const auto &r : m->rules)
      intern(r);
  for (const auto &p : net.peers_)
    for (const auto &row : p.lsv.rows())
      intern(row.rule);
  os << "rules " << table.size() << "\n";
  for (const auto &r : table)
    os << r->signature().hex() << " " << format_rule(*r) << "\n";

  std::map<Signature, std::size_t> mapping_index;
  os << "mappings " << net.mappings_.size() << "\n";
  for (std::size_t i = 0; i < net.mappings_.size(); ++i) {
    const auto &m = *net.mappings_[i];
    mapping_index.emplace(m.id, i);
    os << m.source << " " << m.target << " " << m.rules.size();
    for (const auto &r : m.rules)
      os << " " << index.at(r->signature());
    os << "\n";
  }

  os << "peers " << net.peers_.size() << "\n";
  for (const auto &p : net.peers_) {
    os << "peer " << p.id << " " << (p.alive ? 1 : 0) << " "
       << (p.awaiting_reply ? std::to_string(*p.awaiting_reply) : "-") << "\n";
    os << "schema " << p.schema.size();
    for (const auto &t : p.schema)
      os << " " << t.name << " " << t.arity;
    os << "\n";
    os << "maps " << p.mappings.size();
    for (const auto &m : p.mappings)
      os << " " << mapping_index.at(m->id);
    os << "\n";
    os << "view " << p.lsv.view().size();
    for (const auto &v : p.lsv.view())
      os << " " << v.peer << " " << v.age;
    os << "\n";
    os << "rows " << p.lsv.rows().size() << "\n";
    for (const auto &r : p.lsv.rows())
      os << r.atom << " " << index.at(r.rule_sig) << " " << r.source << " " << r.target
         << " " << r.provider << " " << side_tag(r.side) << "\n";
    os << "foaf " << p.foaf.size() << "\n";
    for (const auto &f : p.foaf.friends())
      os << f.peer << " " << f.uri << " " << f.summary_ref << "\n";
  }
  std::string body = os.str();
  return body + "checksum " + Signature::of(body).hex() + "\n";
}

namespace {

class Reader {
public:
  explicit Reader(std::string_view text) : in_(std::string(text)) {}

  std::istringstream line() {
    std::string l;
    if (!std::getline(in_, l))
      throw CorruptSnapshot("unexpected end of snapshot");
    return std::istringstream(l);
  }
  std::string raw_line() {
    std::string l;
    if (!std::getline(in_, l))
      throw CorruptSnapshot("unexpected end of snapshot");
    return l;
  }
  /// Reads `<tag> ...` and returns the stream positioned after the tag.
  std::istringstream tagged(const std::string &tag) {
    auto ls = line();
    std::string got;
    ls >> got;
    if (got != tag)
      throw CorruptSnapshot("expected '" + tag + "' but found '" + got + "'");
    return ls;
  }

private:
  std::istringstream in_;
};

template <class T> T read(std::istream &is, const char *what) {
  T v;
  if (!(is >> v))
    throw CorruptSnapshot(std::string("bad field: ") + what);
  return v;
}

} // namespace

Network restore(std::string_view bytes) {
  const auto mark = bytes.rfind("checksum ");
  if (mark == std::string_view::npos || (mark > 0 && bytes[mark - 1] != '\n'))
    throw CorruptSnapshot("missing checksum");
  std::string_view body = bytes.substr(0, mark);
  std::string_view sum = bytes.substr(mark + 9);
  while (!sum.empty() && (sum.back() == '\n' || sum.back() == '\r'))
    sum.remove_suffix(1);
  if (sum != Signature::of(body).hex())
    throw CorruptSnapshot("checksum mismatch");

  try {
    Reader in(body);
    if (in.raw_line() != kMagic)
      throw CorruptSnapshot("bad header");
    auto cfg_line = in.tagged("config");
    GossipConfig cfg;
    cfg.t_gossip = read<std::uint64_t>(cfg_line, "t_gossip");
    cfg.v_gossip = read<std::size_t>(cfg_line, "v_gossip");
    cfg.l_gossip = read<std::size_t>(cfg_line, "l_gossip");
    TopologyInfo topo;
    topo.mode = parse_topology(read<std::string>(cfg_line, "topology"));
    topo.param = read<std::uint64_t>(cfg_line, "topology param");
    Network net(cfg, topo, 0);

    auto clock = in.tagged("clock");
    net.now_ = read<std::uint64_t>(clock, "now");
    net.seq_ = read<std::uint64_t>(clock, "seq");
    net.cycle_ = read<std::uint64_t>(clock, "cycle");
    net.epoch_ = read<std::uint64_t>(clock, "epoch");
    auto cl = in.tagged("counters");
    auto &k = net.counters_;
    k.events = read<std::uint64_t>(cl, "events");
    k.messages_sent = read<std::uint64_t>(cl, "sent");
    k.messages_dropped = read<std::uint64_t>(cl, "dropped");
    k.exchanges = read<std::uint64_t>(cl, "exchanges");
    k.joins = read<std::uint64_t>(cl, "joins");
    k.removals = read<std::uint64_t>(cl, "removals");

    auto rng_state = [&](const char *tag) {
      std::string l = in.raw_line();
      std::string prefix = std::string(tag) + " ";
      if (l.rfind(prefix, 0) != 0)
        throw CorruptSnapshot(std::string("expected ") + tag);
      return l.substr(prefix.size());
    };
    net.rng_.set_state(rng_state("rng"));
    net.churn_rng_.set_state(rng_state("churnrng"));

    auto churn = in.tagged("churn");
    auto steps = read<std::size_t>(churn, "churn steps");
    for (std::size_t i = 0; i < steps; ++i) {
      auto l = in.line();
      ChurnStep s;
      s.tick = read<std::uint64_t>(l, "tick");
      s.remove = read<std::size_t>(l, "remove");
      net.plan_.steps.push_back(s);
    }

    auto rl = in.tagged("rules");
    std::vector<RulePtr> table(read<std::size_t>(rl, "rule count"));
    for (auto &r : table) {
      std::string l = in.raw_line();
      if (l.size() < 42)
        throw CorruptSnapshot("short rule line");
      auto rule = std::make_shared<const MappingRule>(parse_rule(l.substr(41)));
      if (rule->signature().hex() != l.substr(0, 40))
        throw CorruptSnapshot("rule signature mismatch");
      r = std::move(rule);
    }
    auto rule_at = [&](std::size_t i) {
      if (i >= table.size())
        throw CorruptSnapshot("rule index out of range");
      return table[i];
    };

    auto ml = in.tagged("mappings");
    std::vector<MappingPtr> mappings(read<std::size_t>(ml, "mapping count"));
    for (auto &m : mappings) {
      auto l = in.line();
      auto source = read<PeerId>(l, "source");
      auto target = read<PeerId>(l, "target");
      std::vector<RulePtr> rules(read<std::size_t>(l, "rules"));
      for (auto &r : rules)
        r = rule_at(read<std::size_t>(l, "rule index"));
      m = std::make_shared<const SchemaMapping>(
          SchemaMapping::make(source, target, std::move(rules)));
    }
    net.mappings_ = mappings;

    auto pl = in.tagged("peers");
    auto peer_count = read<std::size_t>(pl, "peer count");
    for (std::size_t i = 0; i < peer_count; ++i) {
      auto hl = in.tagged("peer");
      PeerState p(read<PeerId>(hl, "id"), cfg.v_gossip);
      if (p.id != i)
        throw CorruptSnapshot("peer ids out of order");
      p.alive = read<int>(hl, "alive") != 0;
      auto awaiting = read<std::string>(hl, "awaiting");
      if (awaiting != "-")
        p.awaiting_reply = static_cast<PeerId>(std::stoul(awaiting));

      auto sl = in.tagged("schema");
      p.schema.resize(read<std::size_t>(sl, "tables"));
      for (auto &t : p.schema) {
        t.name = read<std::string>(sl, "table");
        t.arity = read<unsigned>(sl, "arity");
      }
      auto mp = in.tagged("maps");
      auto maps = read<std::size_t>(mp, "maps");
      for (std::size_t j = 0; j < maps; ++j) {
        auto idx = read<std::size_t>(mp, "mapping index");
        if (idx >= mappings.size())
          throw CorruptSnapshot("mapping index out of range");
        p.add_mapping(mappings[idx]);
      }
      p.rebuild_summary();

      auto vl = in.tagged("view");
      std::vector<ViewEntry> view(read<std::size_t>(vl, "view size"));
      for (auto &v : view) {
        v.peer = read<PeerId>(vl, "view peer");
        v.age = read<unsigned>(vl, "view age");
      }
      auto rows_line = in.tagged("rows");
      std::vector<LsvRow> rows(read<std::size_t>(rows_line, "row count"));
      for (auto &r : rows) {
        auto l = in.line();
        r.atom = read<std::string>(l, "atom");
        r.rule = rule_at(read<std::size_t>(l, "row rule"));
        r.rule_sig = r.rule->signature();
        r.source = read<PeerId>(l, "row source");
        r.target = read<PeerId>(l, "row target");
        r.provider = read<PeerId>(l, "row provider");
        auto side = read<std::string>(l, "row side");
        if (side != "B" && side != "H")
          throw CorruptSnapshot("bad side tag");
        r.side = side == "B" ? Side::Body : Side::Head;
      }
      p.lsv.restore(std::move(view), std::move(rows));

      auto fl = in.tagged("foaf");
      auto friends = read<std::size_t>(fl, "friends");
      for (std::size_t j = 0; j < friends; ++j) {
        auto l = in.line();
        FoafEntry e;
        e.peer = read<PeerId>(l, "friend");
        e.uri = read<std::string>(l, "uri");
        e.summary_ref = read<std::string>(l, "summary ref");
        p.foaf.add(std::move(e));
      }
      net.peers_.push_back(std::move(p));
    }
    return net;
  } catch (const CorruptSnapshot &) {
    throw;
  } catch (const std::exception &e) {
    throw CorruptSnapshot(e.what());
  }
}

} // namespace pdms
