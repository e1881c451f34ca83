#include "pdms/text_format.hpp"

#include "pdms/errors.hpp"

#include <cctype>

namespace pdms {
namespace {

class Cursor {
public:
  explicit Cursor(std::string_view s) : s_(s) {}

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!accept(tok))
      fail("expected '" + std::string(tok) + "'");
  }
  std::string identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
            s_[pos_] == '.' || s_[pos_] == '-'))
      ++pos_;
    if (start == pos_)
      fail("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }
  std::string quoted() {
    expect("'");
    std::string out;
    while (true) {
      if (pos_ >= s_.size())
        fail("unterminated constant");
      char c = s_[pos_++];
      if (c == '\'') {
        if (pos_ < s_.size() && s_[pos_] == '\'') {
          out.push_back('\'');
          ++pos_;
          continue;
        }
        return out;
      }
      out.push_back(c);
    }
  }
  std::size_t pos() const { return pos_; }
  std::string_view rest() const { return s_.substr(pos_); }

  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(msg + " at offset " + std::to_string(pos_) + " in \"" +
                     std::string(s_) + "\"");
  }

private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

// Existential markers are kept in the name so the rule parser can validate
// them; `?` is not a legal identifier character otherwise.
Term parse_term(Cursor &c) {
  char p = c.peek();
  if (p == '$') {
    c.expect("$");
    return Term::var(c.identifier());
  }
  if (p == '?') {
    c.expect("?");
    return Term::var("?" + c.identifier());
  }
  if (p == '\'')
    return Term::constant(c.quoted());
  c.fail("expected term");
}

Atom parse_atom(Cursor &c) {
  Atom a;
  a.label = c.identifier();
  c.expect("(");
  if (!c.accept(")")) {
    do {
      a.params.push_back(parse_term(c));
    } while (c.accept(","));
    c.expect(")");
  }
  return a;
}

std::vector<Atom> parse_atom_list(Cursor &c, bool stop_at_arrow) {
  std::vector<Atom> atoms;
  atoms.push_back(parse_atom(c));
  while (!c.done()) {
    if (stop_at_arrow && c.peek() == '-')
      break;
    if (!c.accept(",") && !c.accept("&"))
      c.fail("expected ',' or '&' between atoms");
    atoms.push_back(parse_atom(c));
  }
  return atoms;
}

void reject_existentials(const std::vector<Atom> &atoms, const char *where) {
  for (const auto &a : atoms)
    for (const auto &t : a.params)
      if (t.is_variable() && !t.name.empty() && t.name[0] == '?')
        throw ParseError(std::string("existential variable in ") + where);
}

} // namespace

Atom parse_atom(std::string_view text) {
  Cursor c(text);
  Atom a = parse_atom(c);
  if (!c.done())
    c.fail("trailing input");
  reject_existentials({a}, "atom");
  return a;
}

std::vector<Atom> parse_atoms(std::string_view text) {
  Cursor c(text);
  auto atoms = parse_atom_list(c, false);
  reject_existentials(atoms, "query");
  return atoms;
}

ConjunctiveQuery parse_query(std::string_view text) {
  ConjunctiveQuery q;
  q.atoms = parse_atoms(text);
  return q;
}

MappingRule parse_rule(std::string_view text) {
  Cursor c(text);
  auto body = parse_atom_list(c, true);
  c.expect("->");
  auto head = parse_atom_list(c, false);
  reject_existentials(body, "rule body");

  std::set<std::string> body_vars;
  for (const auto &a : body)
    for (const auto &t : a.params) {
      if (t.is_constant())
        throw ParseError("constants are not allowed in rule bodies");
      body_vars.insert(t.name);
    }
  for (auto &a : head)
    for (auto &t : a.params) {
      if (t.is_constant())
        throw ParseError("constants are not allowed in rule heads");
      if (t.name[0] == '?') {
        t.name.erase(0, 1);
        if (body_vars.contains(t.name))
          throw ParseError("existential ?" + t.name + " also occurs in the body");
      } else if (!body_vars.contains(t.name)) {
        throw ParseError("head variable $" + t.name +
                         " is neither in the body nor marked existential");
      }
    }
  return MappingRule(std::move(body), std::move(head));
}

std::string format_term(const Term &t) {
  if (t.is_variable())
    return "$" + t.name;
  std::string out = "'";
  for (char ch : t.name) {
    if (ch == '\'')
      out.push_back('\'');
    out.push_back(ch);
  }
  out.push_back('\'');
  return out;
}

std::string format_atom(const Atom &a) {
  std::string out = a.label + "(";
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    if (i)
      out += ",";
    out += format_term(a.params[i]);
  }
  return out + ")";
}

std::string format_atoms(const std::vector<Atom> &atoms) {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i)
      out += ", ";
    out += format_atom(atoms[i]);
  }
  return out;
}

std::string format_query(const ConjunctiveQuery &q) { return format_atoms(q.atoms); }

std::string format_rule(const MappingRule &m) {
  std::string out = format_atoms(m.body()) + " -> ";
  for (std::size_t i = 0; i < m.head().size(); ++i) {
    if (i)
      out += ", ";
    const Atom &a = m.head()[i];
    out += a.label + "(";
    for (std::size_t j = 0; j < a.params.size(); ++j) {
      if (j)
        out += ",";
      const Term &t = a.params[j];
      out += (m.is_existential(t.name) ? "?" : "$") + t.name;
    }
    out += ")";
  }
  return out;
}

} // namespace pdms
