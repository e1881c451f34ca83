#pragma once

// Line-oriented text syntax for atoms, queries and rules:
//
//   Hospital($n,$l) -> HealthCareInstitution($n,?i)
//   Hospital($x,'San Francisco')
//
// Variables are prefixed `$`, existential head variables `?`, constants are
// single-quoted (a quote inside a constant is doubled). Atoms are separated by
// `,` or `&`.

#include "pdms/mapping.hpp"

#include <string>
#include <string_view>

namespace pdms {

Atom parse_atom(std::string_view text);
std::vector<Atom> parse_atoms(std::string_view text);
ConjunctiveQuery parse_query(std::string_view text);
MappingRule parse_rule(std::string_view text);

std::string format_term(const Term &t);
std::string format_atom(const Atom &a);
std::string format_atoms(const std::vector<Atom> &atoms);
std::string format_query(const ConjunctiveQuery &q);
std::string format_rule(const MappingRule &m);

} // namespace pdms
