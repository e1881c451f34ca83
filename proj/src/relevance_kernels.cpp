#include "pdms/relevance.hpp"

#include <omp.h>

namespace pdms {

namespace {

void count_rule(const ConjunctiveQuery &q, const MappingRule &r, std::size_t *body,
                std::size_t *head) {
  for (std::size_t i = 0; i < q.atoms.size(); ++i) {
    if (unifies_with_any(q.atoms[i], r.body()))
      ++body[i];
    if (unifies_with_any(q.atoms[i], r.head()))
      ++head[i];
  }
}

} // namespace

AtomCounts count_atoms_serial(const ConjunctiveQuery &q,
                              const std::vector<RulePtr> &rules) {
  AtomCounts c;
  c.n = rules.size();
  c.body.assign(q.atoms.size(), 0);
  c.head.assign(q.atoms.size(), 0);
  for (const auto &r : rules)
    count_rule(q, *r, c.body.data(), c.head.data());
  return c;
}

AtomCounts count_atoms_parallel(const ConjunctiveQuery &q,
                                const std::vector<RulePtr> &rules) {
  const std::size_t a = q.atoms.size();
  AtomCounts c;
  c.n = rules.size();
  c.body.assign(a, 0);
  c.head.assign(a, 0);
  const auto total = static_cast<std::ptrdiff_t>(rules.size());
#pragma omp parallel
  {
    std::vector<std::size_t> body(a, 0), head(a, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < total; ++i)
      count_rule(q, *rules[static_cast<std::size_t>(i)], body.data(), head.data());
    // integer sums, so the merge order does not matter
#pragma omp critical
    for (std::size_t i = 0; i < a; ++i) {
      c.body[i] += body[i];
      c.head[i] += head[i];
    }
  }
  return c;
}

} // namespace pdms
