#include "pdms/errors.hpp"
#include "pdms/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdms;

namespace {

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.name = "tiny";
  c.peers = 24;
  c.seeds = 2;
  c.queries = 3;
  c.topk_max = 3;
  c.topk = 3;
  c.warmup_cycles = 3;
  c.precision_cycles = 2;
  c.churn_step = 3;
  c.churn_steps = 2;
  c.time_peers = {16, 24};
  return c;
}

std::string all_csv(const ExperimentOutput &o) {
  std::string s;
  for (const auto &[name, rows] : o.files)
    if (name.find("wallclock") == std::string::npos)
      s += name + "\n" + to_csv(rows);
  return s;
}

} // namespace

TEST_CASE("reqs schedule") {
  ReqsSchedule s;
  CHECK(s.at(0) == 2);
  CHECK(s.at(3) == 2);
  CHECK(s.at(4) == 0);
  auto p = ReqsSchedule::parse("5:1,0:3");
  CHECK(p.at(2) == 3);
  CHECK(p.at(9) == 1);
  CHECK(p.str() == "0:3,5:1");
  CHECK_THROWS_AS(ReqsSchedule::parse("3"), MalformedScenario);
  CHECK_THROWS_AS(ReqsSchedule::parse("a:b"), MalformedScenario);
}

TEST_CASE("scenario config round trip") {
  auto c = ExperimentConfig::parse("# comment\nname = demo # trailing\npeers=80\nprotocols=Full, Baseline#\n"
                                   "alpha=4\nreqs=0:1\ntopology=dht\ntopology_param=6\n"
                                   "experiments=recall,churn\nparallel=false\n");
  CHECK(c.name == "demo");
  CHECK(c.peers == 80);
  CHECK(c.protocols == std::vector<Protocol>{Protocol::Full, Protocol::BaselineHash});
  CHECK(c.alpha == 4u);
  CHECK(c.topology == TopologyInfo::Mode::Dht);
  CHECK(c.topology_info().param == 6);
  CHECK_FALSE(c.parallel);
  auto again = ExperimentConfig::parse(c.str());
  CHECK(again.str() == c.str());
  CHECK(ExperimentConfig::parse(ExperimentConfig{}.str()).str() == ExperimentConfig{}.str());
}

TEST_CASE("malformed scenario files") {
  const char *bad[] = {"peers",          "peers=-3",         "colour=red",
                       "protocols=Full+", "topology=ring",    "rank_fn=median",
                       "seeds=0",        "accept_probability=2", "experiments=speed",
                       "l_gossip=0",     "parallel=maybe"};
  for (const char *text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(ExperimentConfig::parse(text), MalformedScenario);
  }
  CHECK_THROWS_AS(ExperimentConfig::load("/nonexistent/scenario.cfg"), MalformedScenario);
}

TEST_CASE("csv round trip") {
  std::vector<MetricRow> rows = {{"s", 3, "Full", 2, 5, "q1", "recall", 0.125},
                                 {"s", 3, "Full-", 0, 0, "-", "messages", 1e6 + 0.5}};
  auto text = to_csv(rows);
  CHECK(text.rfind(csv_header(), 0) == 0);
  auto back = parse_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].metric == "recall");
  CHECK(back[0].value == 0.125);
  CHECK(back[1].value == 1e6 + 0.5);
  CHECK(to_csv(back) == text);
  CHECK(to_csv({}) == csv_header());
  CHECK_THROWS_AS(parse_csv("a,b\n"), ParseError);
  CHECK_THROWS_AS(parse_csv(csv_header() + "1,2,3\n"), ParseError);
}

TEST_CASE("pearson") {
  CHECK(pearson({1, 2, 3, 4}, {2, 4, 6, 8}) == doctest::Approx(1.0));
  CHECK(pearson({1, 2, 3, 4}, {8, 6, 4, 2}) == doctest::Approx(-1.0));
  CHECK(std::abs(pearson({1, 2, 3, 4}, {1, 3, 3, 1})) < 1e-12);
}

TEST_CASE("zero queries give header-only files") {
  auto c = tiny();
  c.queries = 0;
  c.seeds = 1;
  c.experiments = {"recall", "churn"};
  auto out = run_experiment(c);
  REQUIRE(out.files.contains("recall_vs_topk"));
  CHECK(to_csv(out.files["recall_vs_topk"]) == csv_header());
  CHECK(out.bound_violations.empty());
}

TEST_CASE("parallel seeds give the same output as serial ones") {
  auto c = tiny();
  auto par = run_experiment(c);
  c.parallel = false;
  auto ser = run_experiment(c);
  CHECK(all_csv(par) == all_csv(ser));
  CHECK(par.bound_violations.empty());
  CHECK(par.files.contains("recall_vs_topk"));
  CHECK(par.files.contains("precision_vs_cycles"));
  CHECK(par.files.contains("foaf_links_vs_cycles"));
  CHECK(par.files.contains("rewritings_vs_churn"));
  CHECK(par.files.contains("time_vs_peers"));
  CHECK_FALSE(par.files["recall_vs_topk"].empty());
}

TEST_CASE("outputs and report") {
  auto c = tiny();
  c.seeds = 1;
  c.experiments = {"recall"};
  auto out = run_experiment(c);
  auto dir = std::filesystem::temp_directory_path() / "pdms_harness_test";
  std::filesystem::remove_all(dir);
  write_outputs(out, dir.string());
  std::ifstream f(dir / "recall_vs_topk.csv");
  std::stringstream buf;
  buf << f.rdbuf();
  CHECK(parse_csv(buf.str()).size() == out.files["recall_vs_topk"].size());
  auto text = report(dir.string());
  CHECK(text.find("recall") != std::string::npos);
  std::filesystem::remove_all(dir);
}
