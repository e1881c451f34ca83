#include "pdms/errors.hpp"
#include "pdms/harness.hpp"
#include "pdms/text_format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace pdms;

namespace {

struct Overrides {
  std::string scenario_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> seeds;
  std::optional<std::size_t> peers;
  std::optional<int> row;
  std::vector<std::string> protocols;
  std::optional<std::size_t> topk;
  std::optional<std::size_t> cycles;
  std::string churn; // "<per step>x<steps>"
  std::string reqs;
  std::vector<std::string> experiments;
  bool serial = false;

  void attach(CLI::App *app) {
    app->add_option("-s,--scenario", scenario_file, "scenario config file (key=value)")
        ->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "first seed");
    app->add_option("--seeds", seeds, "number of seeds");
    app->add_option("--peers", peers, "peer count");
    app->add_option("--row", row, "scenario table row 1..10");
    app->add_option("--protocol", protocols, "Full, Full-, Baseline#, Baseline+, Baseline")
        ->delimiter(',');
    app->add_option("--topk", topk, "topK for churn/FOAF runs and the sweep maximum");
    app->add_option("--cycles", cycles, "warm-up gossip cycles");
    app->add_option("--churn", churn, "churn plan as <peers per step>x<steps>, e.g. 10x9");
    app->add_option("--reqs", reqs, "REQS schedule, e.g. 0:2,4:0");
    app->add_option("--experiments", experiments, "recall,precision,foaf,churn,time")
        ->delimiter(',');
    app->add_flag("--serial", serial, "run seed cells sequentially");
  }

  ExperimentConfig build() const {
    ExperimentConfig c =
        scenario_file.empty() ? ExperimentConfig{} : ExperimentConfig::load(scenario_file);
    if (seed)
      c.seed = *seed;
    if (seeds)
      c.seeds = *seeds;
    if (peers)
      c.peers = *peers;
    if (row)
      c.scenario_row = *row;
    if (!protocols.empty()) {
      c.protocols.clear();
      for (const auto &p : protocols)
        c.protocols.push_back(parse_protocol(p));
    }
    if (topk) {
      c.topk = *topk;
      c.topk_max = *topk;
    }
    if (cycles)
      c.warmup_cycles = *cycles;
    if (!churn.empty()) {
      auto x = churn.find('x');
      if (x == std::string::npos)
        throw MalformedScenario("churn plan must look like 10x9");
      c.churn_step = std::stoul(churn.substr(0, x));
      c.churn_steps = std::stoul(churn.substr(x + 1));
    }
    if (!reqs.empty())
      c.reqs = ReqsSchedule::parse(reqs);
    if (!experiments.empty())
      c.experiments = experiments;
    if (serial)
      c.parallel = false;
    return c;
  }
};

void write_file(const fs::path &p, const std::string &text) {
  std::ofstream f(p, std::ios::binary);
  if (!f)
    throw Error("cannot write " + p.string());
  f << text;
}

int cmd_generate(const Overrides &o, const std::string &out) {
  auto cfg = o.build();
  fs::create_directories(out);
  Network net = prepare_network(cfg, cfg.seed);

  std::ostringstream schemas;
  for (const auto &p : net.peers()) {
    schemas << "peer " << p.id << ":";
    for (const auto &t : p.schema)
      schemas << " " << t.name << "/" << t.arity;
    schemas << "\n";
  }
  std::ostringstream mappings;
  for (const auto &m : net.all_mappings()) {
    mappings << "mapping " << m->id.short_hex() << " " << m->source << " -> " << m->target
             << "\n";
    for (const auto &r : m->rules)
      mappings << "  " << format_rule(*r) << "\n";
  }
  std::ostringstream queries;
  std::size_t i = 0;
  for (const auto &q : generate_queries(net, cfg.queries, cfg.seed))
    queries << "q" << i++ << " @" << q.origin << " " << format_query(q.query) << "\n";

  write_file(fs::path(out) / "schemas.txt", schemas.str());
  write_file(fs::path(out) / "mappings.txt", mappings.str());
  write_file(fs::path(out) / "queries.txt", queries.str());
  write_file(fs::path(out) / "network.snapshot", snapshot(net));
  write_file(fs::path(out) / "scenario.cfg", cfg.str());
  std::cout << net.size() << " peers, " << net.all_mappings().size() << " mappings, "
            << net.all_rules().size() << " rules written to " << out << "\n";
  return 0;
}

int cmd_run(const Overrides &o, const std::string &out) {
  auto cfg = o.build();
  auto result = run_experiment(cfg);
  write_outputs(result, out);
  write_file(fs::path(out) / "scenario.cfg", cfg.str());
  std::cout << result.query_runs << " query runs over " << cfg.seeds << " seeds, CSV in "
            << out << "\n";
  for (const auto &v : result.bound_violations)
    std::cerr << "rewriting bound violated: " << v << "\n";
  return result.bound_violations.empty() ? 0 : 3;
}

int cmd_oracle(const Overrides &o) {
  auto cfg = o.build();
  Network net = prepare_network(cfg, cfg.seed);
  net.run_cycles(cfg.warmup_cycles);
  std::size_t i = 0;
  for (const auto &q : generate_queries(net, cfg.queries, cfg.seed)) {
    auto truth = centralized_oracle(net, q.origin, q.query, cfg.alpha);
    std::cout << "q" << i++ << " @" << q.origin << " " << format_query(q.query) << "  ("
              << truth.rewritings.size() << " rewritings)\n";
    for (const auto &r : truth.rewritings)
      std::cout << "  @" << r.peer << " " << r.query << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"PDMS query reformulation simulator"};
  app.require_subcommand(1);

  Overrides gen_o, run_o, oracle_o;
  std::string gen_out = "generated", run_out = "results", report_dir = "results";

  auto *gen = app.add_subcommand("generate", "generate a network and its queries");
  gen_o.attach(gen);
  gen->add_option("-o,--out", gen_out, "output directory");

  auto *run = app.add_subcommand("run", "run experiments and write metric CSVs");
  run_o.attach(run);
  run->add_option("-o,--out", run_out, "output directory");

  auto *oracle = app.add_subcommand("oracle", "print ground-truth rewritings");
  oracle_o.attach(oracle);

  auto *rep = app.add_subcommand("report", "summarize metric CSVs");
  rep->add_option("-d,--dir", report_dir, "directory with CSV files")
      ->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen)
      return cmd_generate(gen_o, gen_out);
    if (*run)
      return cmd_run(run_o, run_out);
    if (*oracle)
      return cmd_oracle(oracle_o);
    if (*rep) {
      std::cout << report(report_dir);
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
