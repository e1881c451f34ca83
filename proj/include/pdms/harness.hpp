#pragma once

#include "pdms/gossip.hpp"
#include "pdms/network.hpp"
#include "pdms/reformulation.hpp"
#include "pdms/relevance.hpp"
#include "pdms/workload.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pdms {

/// REQS value per gossip cycle: each entry applies from its cycle onwards.
struct ReqsSchedule {
  std::vector<std::pair<unsigned, unsigned>> steps{{0, 2}, {4, 0}};

  unsigned at(std::uint64_t cycle) const;
  /// "0:2,4:0"
  static ReqsSchedule parse(const std::string &text);
  std::string str() const;
};

struct ExperimentConfig {
  std::string name = "scenario4";
  int scenario_row = 4;
  std::size_t peers = 200;
  std::optional<std::size_t> rules; // overrides the scaled target
  std::optional<std::size_t> min_acq;
  std::optional<std::size_t> max_acq;
  std::uint64_t seed = 1;
  std::size_t seeds = 10;

  GossipConfig gossip;
  TopologyInfo::Mode topology = TopologyInfo::Mode::Unstructured;
  std::optional<std::uint64_t> topology_param; // defaults to the peer count

  std::vector<Protocol> protocols = all_protocols();
  std::size_t topk_max = 10;
  std::size_t topk = 10; // used by the churn and FOAF runs
  std::optional<unsigned> alpha;
  ReqsSchedule reqs;
  RankFn rank = RankFn::HarmonicMean;
  double accept_probability = 1.0;

  std::size_t queries = 10;
  std::size_t warmup_cycles = 10;
  std::size_t precision_cycles = 10;
  std::size_t churn_step = 10;
  std::size_t churn_steps = 9;

  std::vector<std::string> experiments = {"recall", "precision", "foaf", "churn", "time"};
  std::vector<std::size_t> time_peers = {50, 100, 200};
  bool parallel = true;

  /// key=value lines, `#` starts a comment. Throws MalformedScenario.
  static ExperimentConfig parse(const std::string &text);
  static ExperimentConfig load(const std::string &path);
  std::string str() const;

  ScenarioSpec spec(std::uint64_t seed) const;
  TopologyInfo topology_info() const;
};

struct MetricRow {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string protocol;
  std::size_t top_k = 0;
  std::uint64_t gossip_cycle = 0;
  std::string query_id;
  std::string metric;
  double value = 0.0;
};

std::string csv_header();
std::string to_csv(const std::vector<MetricRow> &rows);
std::vector<MetricRow> parse_csv(const std::string &text);

/// File stem -> rows, plus in-run checks that failed.
struct ExperimentOutput {
  std::map<std::string, std::vector<MetricRow>> files;
  std::vector<std::string> bound_violations;
  std::size_t query_runs = 0;
};

/// Generated network for one seed, before any gossip.
Network prepare_network(const ExperimentConfig &cfg, std::uint64_t seed);

struct ImfPrecision {
  std::optional<double> forward;
  std::optional<double> backward;
};

/// Mean per-atom ratio of the peer's IMF estimate to the IMF over the global
/// rule collection; atoms whose global IMF is zero are skipped.
ImfPrecision imf_precision(Network &net, PeerId peer, const ConjunctiveQuery &q,
                           unsigned reqs);

double pearson(const std::vector<double> &x, const std::vector<double> &y);

// One experiment for one seed; rows land in `out`.
void recall_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out);
void precision_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out);
void foaf_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out);
void churn_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out);
/// Deterministic counts go to time_vs_peers, wall-clock to a separate file.
void time_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out);

/// Runs the configured experiments over seeds seed..seed+seeds-1. Seed cells
/// run in parallel when cfg.parallel is set; output does not depend on it.
ExperimentOutput run_experiment(const ExperimentConfig &cfg);

void write_outputs(const ExperimentOutput &out, const std::string &dir);

/// Means of every CSV in `dir`, grouped by file, protocol, topK, cycle and
/// metric.
std::string report(const std::string &dir);

} // namespace pdms
