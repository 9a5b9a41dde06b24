#include <gtest/gtest.h>

#include <random>

#include "statewalk/coverage.hpp"
#include "statewalk/errors.hpp"
#include "statewalk/explorer.hpp"
#include "statewalk/sim_env.hpp"

using namespace statewalk;

TEST(Coverage, FirstSampleIsEntry) {
  SimEnvironment env(load_corpus_app("linear"));
  auto r = explore(env, EngineConfig{});
  ASSERT_FALSE(r.coverage.empty());
  const auto& first = r.coverage.samples().front();
  EXPECT_EQ(first.states, 1u);
  EXPECT_EQ(first.transitions, 0u);
  EXPECT_EQ(first.events_sent, 0u);
  EXPECT_GE(first.elapsed_ms, 0);
  const auto& last = r.coverage.samples().back();
  EXPECT_EQ(last.states, r.model.state_count());
  EXPECT_EQ(last.transitions, r.model.transition_count());
}

TEST(Coverage, AppendClampsEveryCounter) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(0, 50);
  CoverageLog log;
  for (int i = 0; i < 500; ++i) {
    log.append({d(rng), static_cast<std::size_t>(d(rng)), static_cast<std::size_t>(d(rng)),
                static_cast<std::size_t>(d(rng))});
  }
  const auto& s = log.samples();
  ASSERT_EQ(s.size(), 500u);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_GE(s[i].elapsed_ms, s[i - 1].elapsed_ms);
    EXPECT_GE(s[i].states, s[i - 1].states);
    EXPECT_GE(s[i].transitions, s[i - 1].transitions);
    EXPECT_GE(s[i].events_sent, s[i - 1].events_sent);
  }
}

TEST(Coverage, ExplorationSamplesAreMonotonic) {
  for (const auto& name : corpus_names()) {
    SimEnvironment env(load_corpus_app(name));
    auto s = explore(env, EngineConfig{}).coverage.samples();
    for (std::size_t i = 1; i < s.size(); ++i) {
      EXPECT_GE(s[i].states, s[i - 1].states) << name;
      EXPECT_GE(s[i].transitions, s[i - 1].transitions) << name;
      EXPECT_GE(s[i].events_sent, s[i - 1].events_sent) << name;
    }
  }
}

TEST(Coverage, CsvLayout) {
  CoverageLog log;
  log.append({0, 1, 0, 0});
  log.append({5, 2, 1, 1});
  log.append({9, 2, 2, 3});
  EXPECT_EQ(to_csv(log), "elapsed_ms,states,transitions,events\n0,1,0,0\n5,2,1,1\n9,2,2,3\n");
}

TEST(Coverage, CsvRoundTrip) {
  SimEnvironment env(load_corpus_app("mall"));
  auto log = explore(env, EngineConfig{}).coverage;
  auto parsed = parse_coverage_csv(to_csv(log));
  EXPECT_EQ(parsed, log.samples());
}

TEST(Coverage, CsvRejectsGarbage) {
  EXPECT_THROW(parse_coverage_csv("a,b,c,d\n"), SpecError);
  EXPECT_THROW(parse_coverage_csv("elapsed_ms,states,transitions,events\n1,2,3\n"), SpecError);
  EXPECT_THROW(parse_coverage_csv("elapsed_ms,states,transitions,events\n1,x,3,4\n"), SpecError);
  EXPECT_TRUE(parse_coverage_csv("elapsed_ms,states,transitions,events\n").empty());
}

TEST(Coverage, SummaryAgainstGroundTruth) {
  SimAppSpec spec = load_corpus_app("twenty");
  SimEnvironment env(spec);
  auto r = explore(env, EngineConfig{});
  auto totals = spec_totals(spec);
  EXPECT_EQ(totals.reachable_screens, 20u);
  r.coverage.totals = CoverageTotals{totals.reachable_screens, totals.reachable_transitions};
  auto j = summary_json(r.coverage);
  EXPECT_DOUBLE_EQ(j["state_coverage"].get<double>(), 1.0);
  EXPECT_TRUE(j["transition_coverage"].is_number());
  EXPECT_EQ(j["states"], 20);
  EXPECT_EQ(j["events_sent"], r.coverage.samples().back().events_sent);
}

TEST(Coverage, SummaryWithoutTotals) {
  CoverageLog log;
  auto j = summary_json(log);
  EXPECT_TRUE(j["state_coverage"].is_null());
  EXPECT_TRUE(j["transition_coverage"].is_null());
  EXPECT_EQ(j["events_sent"], 0);
  EXPECT_EQ(j["wall_ms"], 0);
}

TEST(Coverage, EmitReportFormats) {
  CoverageLog log;
  StateModel empty;
  auto g = emit_report(log, OutputFormat::graph, empty);
  EXPECT_TRUE(g.graph && g.dot);
  EXPECT_FALSE(g.csv || g.summary);
  EXPECT_TRUE((*g.graph)["entry"].is_null());
  EXPECT_TRUE((*g.graph)["nodes"].empty());

  auto rep = emit_report(log, OutputFormat::report, empty);
  EXPECT_TRUE(rep.csv && rep.summary);
  EXPECT_FALSE(rep.graph || rep.dot);
  EXPECT_EQ(*rep.csv, "elapsed_ms,states,transitions,events\n");

  auto both = emit_report(log, OutputFormat::both, empty);
  EXPECT_TRUE(both.csv && both.summary && both.graph && both.dot);
}

TEST(Coverage, OutputFormatParsing) {
  EXPECT_EQ(output_format_from_string("graph"), OutputFormat::graph);
  EXPECT_EQ(output_format_from_string("report"), OutputFormat::report);
  EXPECT_EQ(output_format_from_string("both"), OutputFormat::both);
  EXPECT_THROW(output_format_from_string("pdf"), SpecError);
  EXPECT_THROW(output_format_from_string(""), SpecError);
}
