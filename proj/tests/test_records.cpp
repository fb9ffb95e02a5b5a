#include <gtest/gtest.h>

#include <sstream>

#include "jppo/agent.hpp"
#include "jppo/config.hpp"
#include "jppo/errors.hpp"
#include "jppo/records.hpp"

using namespace jppo;

namespace {

const std::vector<compressor::Prompt>& corpus() {
  static const auto c = config::load_corpus(config::default_corpus_path());
  return c;
}

struct Logged {
  config::RunConfig cfg;
  std::string csv;
};

Logged eval_log(std::size_t episodes) {
  Logged l{config::default_config(), {}};
  env::Environment environment(l.cfg.env, corpus());
  Rng rng(7);
  const auto net = agent::QNetwork::initialized(
      agent::network_shape(l.cfg.agent, environment.actions().size()), rng);
  const auto result = agent::evaluate(environment, net, episodes, l.cfg.seed, true);
  std::ostringstream out;
  records::write_step_records(out, result.records);
  l.csv = out.str();
  return l;
}

std::vector<records::LoggedStep> parse(const std::string& csv) {
  std::istringstream in(csv);
  return records::read_step_records(in);
}

}  // namespace

TEST(Format, Conventions) {
  EXPECT_EQ(records::format_fixed(0.5, 6), "0.500000");
  EXPECT_EQ(records::format_fixed(-1.0, 6), "-1.000000");
  EXPECT_EQ(records::format_significant(0.1, 12), "0.1");
  EXPECT_EQ(std::stod(records::format_full(0.1)), 0.1);
  EXPECT_EQ(std::stod(records::format_full(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(StepRecords, HeaderAndRoundTrip) {
  const auto log = eval_log(3);
  EXPECT_EQ(log.csv.substr(0, log.csv.find('\n')), records::kStepHeader);
  EXPECT_EQ(log.csv.find('\r'), std::string::npos);
  const auto rows = parse(log.csv);
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front().line, 2u);
  EXPECT_EQ(rows.front().episode, 0u);
  for (const auto& r : rows) {
    EXPECT_LT(r.c_level, 5u);
    EXPECT_LT(r.p_level, 10u);
  }
}

TEST(Replay, EvalRecordsPass) {
  const auto log = eval_log(20);
  const auto report = records::replay(log.cfg, corpus(), parse(log.csv));
  EXPECT_TRUE(report.passed) << records::to_json(report).dump();
  EXPECT_GT(report.rows, 0u);
  EXPECT_TRUE(report.warnings.empty());
}

TEST(Replay, PerturbedFieldFails) {
  const auto log = eval_log(5);
  auto rows = parse(log.csv);
  ASSERT_GE(rows.size(), 3u);
  rows[2].e_total_j *= 1.0 + 1e-6;
  const auto report = records::replay(log.cfg, corpus(), rows);
  EXPECT_FALSE(report.passed);
  EXPECT_EQ(report.first_bad_line, rows[2].line);
  EXPECT_EQ(report.field, "e_total_j");
  const auto j = records::to_json(report);
  EXPECT_EQ(j.at("passed"), false);
  EXPECT_EQ(j.at("field"), "e_total_j");
}

TEST(Replay, DifferentConfigFails) {
  const auto log = eval_log(5);
  auto other = log.cfg;
  other.env.reward.lambda_power *= 2.0;
  EXPECT_FALSE(records::replay(other, corpus(), parse(log.csv)).passed);
}

TEST(Replay, EmptyLogPassesWithWarning) {
  const auto rows = parse(std::string(records::kStepHeader) + "\n");
  const auto report = records::replay(config::default_config(), corpus(), rows);
  EXPECT_TRUE(report.passed);
  EXPECT_EQ(report.warnings.size(), 1u);
}

TEST(StepRecords, MalformedInput) {
  EXPECT_THROW(parse("nope\n"), ConfigError);
  EXPECT_THROW(parse(std::string(records::kStepHeader) + "\n1,2,3\n"), ConfigError);
  EXPECT_THROW(parse(std::string(records::kStepHeader) + "\n0,0,0,0,x,1,1,1,1,1,1,1,1,1,1,0\n"),
               ConfigError);
}

TEST(Policy, JsonRoundTripIsExact) {
  Rng rng(3);
  const auto net = agent::QNetwork::initialized({3, 8, 8, 50}, rng);
  const auto j = records::policy_to_json(net);
  EXPECT_EQ(j.at("format_version"), 1);
  EXPECT_EQ(j.at("activation"), "relu");
  const auto back = records::policy_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.layer_sizes(), net.layer_sizes());
  const std::vector<double> s{0.3, -0.2, 0.1};
  EXPECT_EQ(back.forward(s), net.forward(s));
  EXPECT_THROW(records::policy_from_json(nlohmann::json::object()), ConfigError);
}

TEST(Tables, Headers) {
  std::ostringstream train, grid, cmp;
  records::write_train_stats(train, {{1, 0.5, 0.6, 0.995, 0.01}});
  EXPECT_EQ(train.str().substr(0, train.str().find('\n')), records::kTrainHeader);
  oracle::RewardGrid g;
  g.compression_levels = 1;
  g.power_levels = 1;
  oracle::GridCell c{0, 0};
  c.mean_reward = 0.25;
  c.mean_fidelity = 0.75;
  g.cells.push_back(c);
  records::write_grid(grid, g);
  EXPECT_EQ(grid.str(), std::string(records::kGridHeader) + "\n0,0,0.250000,0.750000,0.000000\n");
  records::write_comparison(cmp, {});
  EXPECT_EQ(cmp.str(), std::string(records::kCompareHeader) + "\n");
}
