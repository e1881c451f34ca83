#include "pdms/harness.hpp"

#include "pdms/errors.hpp"
#include "pdms/text_format.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pdms {

std::string csv_header() {
  return "scenario,seed,protocol,topK,gossipCycle,queryId,metricName,value\n";
}

std::string to_csv(const std::vector<MetricRow> &rows) {
  std::ostringstream os;
  os << csv_header();
  os << std::setprecision(12);
  for (const auto &r : rows)
    os << r.scenario << "," << r.seed << "," << r.protocol << "," << r.top_k << ","
       << r.gossip_cycle << "," << r.query_id << "," << r.metric << "," << r.value
       << "\n";
  return os.str();
}

std::vector<MetricRow> parse_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  std::vector<MetricRow> rows;
  if (!std::getline(in, line) || line + "\n" != csv_header())
    throw ParseError("metric CSV must start with the standard header");
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      f.push_back(cell);
    if (f.size() != 8)
      throw ParseError("metric row needs 8 fields: " + line);
    try {
      rows.push_back({f[0], std::stoull(f[1]), f[2], std::stoull(f[3]), std::stoull(f[4]),
                      f[5], f[6], std::stod(f[7])});
    } catch (const std::logic_error &) {
      throw ParseError("bad numeric field in: " + line);
    }
  }
  return rows;
}

Network prepare_network(const ExperimentConfig &cfg, std::uint64_t seed) {
  return build_network(generate_network(cfg.spec(seed)), cfg.gossip, cfg.topology_info(),
                       seed);
}

ImfPrecision imf_precision(Network &net, PeerId peer, const ConjunctiveQuery &q,
                           unsigned reqs) {
  SideIMF local = compute_imf(q, net.peer(peer), reqs, net.lookup(), net.epoch());
  SideIMF global = imf_from_counts(count_atoms_serial(q, net.all_rules()));
  auto side = [](const std::vector<double> &est,
                 const std::vector<double> &truth) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
      if (truth[i] > 0.0) {
        sum += est[i] / truth[i];
        ++n;
      }
    if (n == 0)
      return std::nullopt;
    return sum / static_cast<double>(n);
  };
  return {side(local.body, global.body), side(local.head, global.head)};
}

double pearson(const std::vector<double> &x, const std::vector<double> &y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2)
    return 0.0;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0)
    return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

namespace {

constexpr std::uint64_t kQueryStream = 0x5175657279ULL;

std::vector<GeneratedQuery> queries_for(const ExperimentConfig &cfg, const Network &net,
                                        std::uint64_t seed) {
  return generate_queries(net, cfg.queries, seed ^ kQueryStream);
}

QueryConfig query_config(const ExperimentConfig &cfg, Protocol p, std::size_t top_k,
                         unsigned reqs) {
  QueryConfig q;
  q.protocol = p;
  q.top_k = top_k;
  q.alpha = cfg.alpha;
  q.reqs = reqs;
  q.rank = cfg.rank;
  q.accept_probability = cfg.accept_probability;
  return q;
}

std::string qid(std::size_t i) { return "q" + std::to_string(i); }

QueryResultSet run_checked(Network &net, const GeneratedQuery &gq, const QueryConfig &qc,
                           ExperimentOutput &out, std::uint64_t seed) {
  QueryResultSet r = translate_query(net, gq.origin, gq.query, qc);
  ++out.query_runs;
  if (!within_rewriting_bound(r, gq.query.atoms.size()))
    out.bound_violations.push_back(
        "seed " + std::to_string(seed) + " " + to_string(qc.protocol) + " k=" +
        std::to_string(qc.top_k) + ": " + std::to_string(r.translated.size()) +
        " rewritings from " + std::to_string(r.rules_used.size()) + " rules over " +
        std::to_string(gq.query.atoms.size()) + " atoms for " + format_query(gq.query));
  return r;
}

std::size_t overlap(const QueryResultSet &a, const QueryResultSet &truth) {
  std::size_t n = 0;
  for (const auto &r : truth.rewritings)
    n += a.rewritings.contains(r) ? 1 : 0;
  return n;
}

std::size_t foaf_links(const Network &net) {
  std::size_t n = 0;
  for (const auto &p : net.peers())
    n += p.foaf.size();
  return n;
}

} // namespace

void recall_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out) {
  Network net = prepare_network(cfg, seed);
  net.run_cycles(cfg.warmup_cycles);
  auto queries = queries_for(cfg, net, seed);
  std::vector<QueryResultSet> truth;
  for (const auto &q : queries)
    truth.push_back(centralized_oracle(net, q.origin, q.query, cfg.alpha));
  const unsigned reqs = cfg.reqs.at(net.cycle());

  auto &recall_rows = out.files["recall_vs_topk"];
  auto &count_rows = out.files["rewritings_vs_topk"];
  for (Protocol p : cfg.protocols)
    for (std::size_t k = 1; k <= cfg.topk_max; ++k) {
      Network copy = net;
      auto qc = query_config(cfg, p, k, reqs);
      for (std::size_t i = 0; i < queries.size(); ++i) {
        auto r = run_checked(copy, queries[i], qc, out, seed);
        MetricRow row{cfg.name, seed, to_string(p), k, net.cycle(), qid(i), "recall",
                      recall(r, truth[i])};
        recall_rows.push_back(row);
        row.metric = "relevant_rewritings";
        row.value = static_cast<double>(overlap(r, truth[i]));
        count_rows.push_back(row);
        row.metric = "ground_truth";
        row.value = static_cast<double>(truth[i].rewritings.size());
        count_rows.push_back(row);
        row.metric = "messages";
        row.value = static_cast<double>(r.messages);
        count_rows.push_back(row);
      }
    }
}

void precision_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out) {
  Network net = prepare_network(cfg, seed);
  auto queries = queries_for(cfg, net, seed);
  auto &rows = out.files["precision_vs_cycles"];
  for (std::size_t c = 0; c <= cfg.precision_cycles; ++c) {
    if (c > 0)
      net.run_cycle();
    const unsigned reqs = cfg.reqs.at(net.cycle());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      auto p = imf_precision(net, queries[i].origin, queries[i].query, reqs);
      if (p.forward)
        rows.push_back({cfg.name, seed, "Full", 0, net.cycle(), qid(i),
                        "precision_forward", *p.forward});
      if (p.backward)
        rows.push_back({cfg.name, seed, "Full", 0, net.cycle(), qid(i),
                        "precision_backward", *p.backward});
    }
  }
}

void foaf_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out) {
  Network net = prepare_network(cfg, seed);
  auto queries = queries_for(cfg, net, seed);
  auto &rows = out.files["foaf_links_vs_cycles"];
  for (std::size_t c = 1; c <= cfg.warmup_cycles; ++c) {
    net.run_cycle();
    auto qc = query_config(cfg, Protocol::Full, cfg.topk, cfg.reqs.at(net.cycle()));
    for (const auto &q : queries)
      run_checked(net, q, qc, out, seed);
    rows.push_back({cfg.name, seed, "Full", cfg.topk, net.cycle(), "-", "foaf_links",
                    static_cast<double>(foaf_links(net))});
  }
}

void churn_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out) {
  Network net = prepare_network(cfg, seed);
  net.run_cycles(cfg.warmup_cycles);
  auto queries = queries_for(cfg, net, seed);
  std::set<PeerId> origins;
  for (const auto &q : queries)
    origins.insert(q.origin);

  // friendships come from answering queries before peers start leaving
  auto warm = query_config(cfg, Protocol::Full, cfg.topk, cfg.reqs.at(net.cycle()));
  for (const auto &q : queries)
    run_checked(net, q, warm, out, seed);

  auto &rows = out.files["rewritings_vs_churn"];
  std::size_t removed = 0;
  for (std::size_t step = 0; step <= cfg.churn_steps; ++step) {
    if (step > 0) {
      removed += net.apply_churn(cfg.churn_step, origins).size();
      net.run_cycle();
    }
    rows.push_back({cfg.name, seed, "-", cfg.topk, net.cycle(), "-", "removed_peers",
                    static_cast<double>(removed)});
    for (Protocol p : {Protocol::Full, Protocol::FullMinus}) {
      Network copy = net;
      auto qc = query_config(cfg, p, cfg.topk, cfg.reqs.at(net.cycle()));
      for (std::size_t i = 0; i < queries.size(); ++i) {
        auto r = run_checked(copy, queries[i], qc, out, seed);
        rows.push_back({cfg.name, seed, to_string(p), cfg.topk, net.cycle(), qid(i),
                        "relevant_rewritings", static_cast<double>(r.relevant.size())});
      }
    }
  }
}

void time_cell(const ExperimentConfig &cfg, std::uint64_t seed, ExperimentOutput &out) {
  auto &rows = out.files["time_vs_peers"];
  auto &clock_rows = out.files["time_vs_peers_wallclock"];
  for (std::size_t n : cfg.time_peers) {
    ExperimentConfig sized = cfg;
    sized.peers = n;
    sized.topology_param.reset();
    Network net = prepare_network(sized, seed);
    net.run_cycles(cfg.warmup_cycles);
    auto queries = queries_for(sized, net, seed);
    auto qc = query_config(sized, Protocol::Full, cfg.topk, cfg.reqs.at(net.cycle()));
    const std::string scenario = cfg.name + "@" + std::to_string(n);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      auto t0 = std::chrono::steady_clock::now();
      auto r = run_checked(net, queries[i], qc, out, seed);
      double ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      rows.push_back({scenario, seed, "Full", cfg.topk, net.cycle(), qid(i), "messages",
                      static_cast<double>(r.messages)});
      rows.push_back({scenario, seed, "Full", cfg.topk, net.cycle(), qid(i), "states",
                      static_cast<double>(r.states)});
      clock_rows.push_back(
          {scenario, seed, "Full", cfg.topk, net.cycle(), qid(i), "wallclock_ms", ms});
    }
    rows.push_back({scenario, seed, "-", 0, net.cycle(), "-", "gossip_events",
                    static_cast<double>(net.counters().events)});
  }
}

ExperimentOutput run_experiment(const ExperimentConfig &cfg) {
  const auto n = static_cast<std::ptrdiff_t>(cfg.seeds);
  std::vector<ExperimentOutput> cells(cfg.seeds);
  std::vector<std::exception_ptr> errors(cfg.seeds);

  auto run_seed = [&](std::size_t i) {
    try {
      const std::uint64_t seed = cfg.seed + i;
      for (const auto &e : cfg.experiments) {
        if (e == "recall")
          recall_cell(cfg, seed, cells[i]);
        else if (e == "precision")
          precision_cell(cfg, seed, cells[i]);
        else if (e == "foaf")
          foaf_cell(cfg, seed, cells[i]);
        else if (e == "churn")
          churn_cell(cfg, seed, cells[i]);
        else if (e == "time")
          time_cell(cfg, seed, cells[i]);
        else
          throw MalformedScenario("unknown experiment '" + e + "'");
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (cfg.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      run_seed(static_cast<std::size_t>(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i)
      run_seed(static_cast<std::size_t>(i));
  }
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  // merge in seed order so the output is independent of scheduling
  ExperimentOutput merged;
  for (const auto &e : cfg.experiments) {
    if (e == "recall") {
      merged.files["recall_vs_topk"];
      merged.files["rewritings_vs_topk"];
    } else if (e == "precision") {
      merged.files["precision_vs_cycles"];
    } else if (e == "foaf") {
      merged.files["foaf_links_vs_cycles"];
    } else if (e == "churn") {
      merged.files["rewritings_vs_churn"];
    } else if (e == "time") {
      merged.files["time_vs_peers"];
      merged.files["time_vs_peers_wallclock"];
    }
  }
  for (auto &cell : cells) {
    for (auto &[name, rows] : cell.files) {
      auto &dst = merged.files[name];
      dst.insert(dst.end(), rows.begin(), rows.end());
    }
    merged.bound_violations.insert(merged.bound_violations.end(),
                                   cell.bound_violations.begin(),
                                   cell.bound_violations.end());
    merged.query_runs += cell.query_runs;
  }
  return merged;
}

void write_outputs(const ExperimentOutput &out, const std::string &dir) {
  std::filesystem::create_directories(dir);
  for (const auto &[name, rows] : out.files) {
    std::ofstream f(std::filesystem::path(dir) / (name + ".csv"), std::ios::binary);
    if (!f)
      throw Error("cannot write " + name + ".csv in " + dir);
    f << to_csv(rows);
  }
}

std::string report(const std::string &dir) {
  std::vector<std::filesystem::path> files;
  for (const auto &entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".csv")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (const auto &path : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    auto rows = parse_csv(buf.str());
    // (protocol, topK, cycle, metric) -> (sum, count)
    std::map<std::tuple<std::string, std::size_t, std::uint64_t, std::string>,
             std::pair<double, std::size_t>>
        groups;
    for (const auto &r : rows) {
      auto &g = groups[{r.protocol, r.top_k, r.gossip_cycle, r.metric}];
      g.first += r.value;
      ++g.second;
    }
    os << "== " << path.stem().string() << " (" << rows.size() << " rows)\n";
    for (const auto &[key, g] : groups) {
      const auto &[protocol, k, cycle, metric] = key;
      os << "  " << std::left << std::setw(10) << protocol << " k=" << std::setw(3) << k
         << " cycle=" << std::setw(4) << cycle << " " << std::setw(22) << metric
         << " mean=" << g.first / static_cast<double>(g.second) << " n=" << g.second
         << "\n";
    }
  }
  return os.str();
}

} // namespace pdms
