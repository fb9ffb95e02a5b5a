#include <gtest/gtest.h>

#include <cmath>

#include "jppo/config.hpp"
#include "jppo/env.hpp"
#include "jppo/errors.hpp"

using namespace jppo;
using namespace jppo::env;

namespace {

const std::vector<compressor::Prompt>& corpus() {
  static const auto c = config::load_corpus(config::default_corpus_path());
  return c;
}

EnvConfig default_env() { return config::default_config().env; }

// Deterministic channel and corruption, constraint checks off.
EnvConfig relaxed_env() {
  auto cfg = default_env();
  cfg.rayleigh_fading = false;
  cfg.fidelity.stochastic_corruption = false;
  cfg.constraints.check_energy = false;
  cfg.constraints.check_delay = false;
  cfg.constraints.check_fidelity = false;
  return cfg;
}

}  // namespace

TEST(ActionSpace, Decode) {
  const auto cfg = default_env();
  EXPECT_EQ(cfg.actions.size(), 50u);
  EXPECT_EQ(cfg.actions.decode(17), (Action{1, 7}));
  EXPECT_EQ(cfg.actions.encode({1, 7}), 17u);
  EXPECT_EQ(cfg.actions.compression_levels[0], 1.0);
  EXPECT_NEAR(cfg.actions.power_levels_w[0], 0.1, 1e-15);
  EXPECT_EQ(cfg.actions.compression_levels[4], 16.0);
  EXPECT_EQ(cfg.actions.power_levels_w[9], cfg.constraints.p_th_w);
  EXPECT_THROW(cfg.actions.decode(50), DomainError);
  EXPECT_THROW(cfg.actions.encode({5, 0}), DomainError);
  EXPECT_THROW(cfg.actions.encode({0, 10}), DomainError);
  for (std::size_t i = 0; i < cfg.actions.size(); ++i) {
    EXPECT_EQ(cfg.actions.encode(cfg.actions.decode(i)), i);
  }
}

TEST(Reward, Examples) {
  Constraints c;
  RewardParams r;
  resource::ServiceOutcome o;
  o.fidelity.f = 0.8;
  o.bep = 0.0;
  EXPECT_NEAR(reward(o, 0.2, {}, c, r), 0.76, 1e-15);
  Violations v;
  v.delay = true;
  EXPECT_EQ(reward(o, 0.2, v, c, r), -1.0);
  EXPECT_GT(reward(o, 0.2, {}, c, r), reward(o, 0.3, {}, c, r));
  o.bep = 0.5;
  o.fidelity.f = 0.0;
  EXPECT_NEAR(reward(o, 1.0, {}, c, r), -0.7, 1e-15);
}

TEST(Constraints, Checks) {
  Constraints c;
  resource::ServiceOutcome o;
  o.fidelity.f = 0.9;
  o.cost.t_total_s = 80.0;
  o.cost.e_total_j = 20000.0;
  EXPECT_FALSE(check_constraints(o, 1.0, c).any());
  o.cost.t_total_s = 80.1;
  EXPECT_TRUE(check_constraints(o, 1.0, c).delay);
  o.cost.t_total_s = 1.0;
  o.fidelity.f = 0.5;
  EXPECT_TRUE(check_constraints(o, 1.0, c).fidelity);
  o.fidelity.f = 0.9;
  EXPECT_TRUE(check_constraints(o, 1.5, c).power);
  o.cost.e_total_j = 20000.5;
  EXPECT_TRUE(check_constraints(o, 1.0, c).energy);
  c.check_energy = false;
  EXPECT_FALSE(check_constraints(o, 1.0, c).energy);
}

TEST(Constraints, EdgeOnlyBudget) {
  Constraints c;
  resource::CostBreakdown cost;
  cost.e_slm_j = 10;
  cost.e_llm_j = 1000;
  cost.e_tx_j = 1;
  cost.e_encode_j = 1010;
  cost.e_total_j = 1011;
  EXPECT_EQ(budget_energy(cost, c), 1011.0);
  c.count_llm_energy_in_budget = false;
  EXPECT_EQ(budget_energy(cost, c), 11.0);
}

TEST(Environment, ResetState) {
  Environment e(default_env(), corpus());
  const auto s = e.reset(123);
  EXPECT_EQ(s.prev_fidelity, 1.0);
  EXPECT_GE(s.snr_norm, 0.0);
  EXPECT_LE(s.snr_norm, 1.0);
  EXPECT_GE(s.bep_prev, 0.0);
  EXPECT_LE(s.bep_prev, 0.5);
  const auto again = e.reset(123);
  EXPECT_EQ(s.features(), again.features());
}

TEST(Environment, DeterministicRecords) {
  Environment a(default_env(), corpus());
  Environment b(default_env(), corpus());
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    a.reset(seed);
    b.reset(seed);
    const auto ra = a.step(std::size_t{23});
    const auto rb = b.step(std::size_t{23});
    EXPECT_EQ(ra.reward, rb.reward);
    EXPECT_EQ(ra.record.fading_g, rb.record.fading_g);
    EXPECT_EQ(ra.record.outcome.fidelity.f3, rb.record.outcome.fidelity.f3);
    EXPECT_TRUE(ra.terminal);
  }
}

TEST(Environment, NoCompressionIsInfeasibleByDefault) {
  Environment e(default_env(), corpus());
  e.reset(9);
  const auto r = e.step(Action{0, 9});
  EXPECT_TRUE(r.record.violations.delay);
  EXPECT_TRUE(r.record.violations.energy);
  EXPECT_EQ(r.reward, -1.0);
}

TEST(Environment, LosslessPathReward) {
  auto cfg = relaxed_env();
  cfg.channel.noise_power_w = 1e-30;  // BEP effectively zero
  Environment e(cfg, corpus());
  e.reset(1);
  const auto r = e.step(Action{0, 9});
  EXPECT_LT(r.record.outcome.bep, 1e-12);
  EXPECT_NEAR(r.record.outcome.fidelity.f, 1.0, 1e-9);
  EXPECT_NEAR(r.reward, 1.0 - 0.2, 1e-9);
}

TEST(Environment, MatchesHandEvaluatedPipeline) {
  const auto cfg = relaxed_env();
  Environment e(cfg, corpus());
  const auto& prompt = corpus()[cfg.prompt_index];
  for (std::size_t c = 0; c < cfg.actions.compression_count(); ++c) {
    for (std::size_t p = 0; p < cfg.actions.power_count(); p += 3) {
      e.reset(5);
      const auto got = e.step(Action{c, p});
      // Independent recomputation from the module-level pieces.
      const auto trace = compressor::compress(prompt, cfg.plan_for(cfg.actions.compression_levels[c]));
      const double power = cfg.actions.power_levels_w[p];
      const double gain = cfg.channel.gain_per_watt();
      const double bep = channel::average_bep(cfg.modulation, power * gain);
      const double rate = cfg.channel.bandwidth_hz * std::log2(1.0 + power * gain);
      const double kappa = static_cast<double>(trace.output.size()) / prompt.length();
      const double f1 = kappa;
      const double f2 = std::pow(1.0 - bep, 16);
      const auto keys = fidelity::answer_keys(prompt, 8);
      const double f3 = fidelity::f3_understanding(keys, trace.output);
      const double f = 0.4 * f1 + 0.3 * f2 + 0.3 * f3;
      const double expect = f - 0.5 * bep / 0.5 - 0.2 * power / cfg.constraints.p_th_w;
      EXPECT_NEAR(got.record.outcome.bep, bep, 1e-15);
      EXPECT_NEAR(got.record.rate_bps, rate, 1e-6);
      EXPECT_NEAR(got.record.outcome.fidelity.f, f, 1e-12);
      EXPECT_NEAR(got.reward, expect, 1e-12) << c << "," << p;
    }
  }
}

TEST(Environment, PowerTension) {
  // Same episode seed gives the same fading draw for every action.
  Environment e(default_env(), corpus());
  for (std::size_t c = 1; c < 5; ++c) {
    double prev_bep = 1.0;
    for (std::size_t p = 0; p < 10; ++p) {
      e.reset(77);
      const auto r = e.step(Action{c, p});
      EXPECT_LE(r.record.outcome.bep, prev_bep);
      prev_bep = r.record.outcome.bep;
    }
  }
}

TEST(Environment, FeasibleRewardsBounded) {
  Environment e(default_env(), corpus());
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (std::size_t a = 0; a < 50; ++a) {
      e.reset(seed);
      const auto r = e.step(a);
      if (r.record.violations.any()) {
        EXPECT_EQ(r.reward, -1.0);
      } else {
        EXPECT_GE(r.reward, -0.7);
        EXPECT_LE(r.reward, 1.0);
      }
    }
  }
}

TEST(Environment, CyclePromptsAndMultiStep) {
  auto cfg = default_env();
  cfg.prompt_selection = PromptSelection::kCycle;
  cfg.episode_steps = 3;
  Environment e(cfg, corpus());
  e.reset(4, 13);
  EXPECT_EQ(&e.current_prompt(), &e.corpus()[13 % corpus().size()]);
  auto r1 = e.step(std::size_t{12});
  EXPECT_FALSE(r1.terminal);
  EXPECT_EQ(r1.next_state.prev_fidelity, r1.record.outcome.fidelity.f);
  EXPECT_EQ(r1.next_state.bep_prev, r1.record.outcome.bep);
  e.step(std::size_t{12});
  EXPECT_TRUE(e.step(std::size_t{12}).terminal);
}

TEST(Environment, EmptyCorpusRejected) {
  EXPECT_THROW(Environment(default_env(), {}), std::exception);
}
