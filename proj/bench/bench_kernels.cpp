// Serial reference vs OpenMP kernels: IMF atom counting over a rule
// collection, and whole seed sweeps of an experiment.

#include "pdms/harness.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace pdms;

namespace {

struct Collection {
  std::vector<RulePtr> rules;
  std::vector<ConjunctiveQuery> queries;
};

const Collection &collection(std::size_t peers) {
  static std::map<std::size_t, Collection> cache;
  auto it = cache.find(peers);
  if (it != cache.end())
    return it->second;
  ExperimentConfig cfg;
  cfg.peers = peers;
  Network net = prepare_network(cfg, 1);
  Collection c;
  c.rules = net.all_rules();
  for (const auto &gq : generate_queries(net, 16, 1))
    c.queries.push_back(gq.query);
  return cache.emplace(peers, std::move(c)).first->second;
}

template <AtomCounts (*Count)(const ConjunctiveQuery &, const std::vector<RulePtr> &)>
void BM_count_atoms(benchmark::State &state) {
  const auto &c = collection(static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) {
    auto counts = Count(c.queries[i++ % c.queries.size()], c.rules);
    benchmark::DoNotOptimize(counts);
  }
  state.counters["rules"] = static_cast<double>(c.rules.size());
}

void BM_seed_sweep(benchmark::State &state) {
  ExperimentConfig cfg;
  cfg.peers = 60;
  cfg.seeds = 4;
  cfg.queries = 4;
  cfg.topk_max = 3;
  cfg.warmup_cycles = 4;
  cfg.experiments = {"recall"};
  cfg.parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto out = run_experiment(cfg);
    benchmark::DoNotOptimize(out);
  }
}

} // namespace

BENCHMARK(BM_count_atoms<count_atoms_serial>)->Name("count_atoms/serial")->Arg(200)->Arg(1000);
BENCHMARK(BM_count_atoms<count_atoms_parallel>)->Name("count_atoms/parallel")->Arg(200)->Arg(1000);
BENCHMARK(BM_seed_sweep)->Name("seed_sweep")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
