#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>

#include "jppo/agent.hpp"
#include "jppo/config.hpp"
#include "jppo/errors.hpp"

using namespace jppo;
using namespace jppo::agent;

namespace {

// Single linear layer whose outputs equal the bias regardless of the state.
QNetwork constant_net(std::vector<double> values) {
  QNetwork net({3, values.size()});
  net.layers()[0].bias = std::move(values);
  return net;
}

const State kState{0.5, 0.5, 0.1};

}  // namespace

TEST(Argmax, TiesGoLow) {
  EXPECT_EQ(argmax(std::vector<double>{1, 3, 3, 2}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{0, 0, 0}), 0u);
}

TEST(Act, GreedyAndTies) {
  Rng rng(1);
  EXPECT_EQ(act(constant_net({0.1, 0.9, 0.3}), kState, 0.0, rng), 1u);
  EXPECT_EQ(act(constant_net({0.5, 0.5, 0.5}), kState, 0.0, rng), 0u);
}

TEST(Act, FullExplorationIsUniform) {
  const std::size_t k = 50;
  Rng rng(2024);
  const auto net = constant_net(std::vector<double>(k, 0.0));
  std::vector<double> counts(k, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[act(net, kState, 1.0, rng)] += 1.0;
  const double expected = static_cast<double>(draws) / k;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(static_cast<double>(k - 1));
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(Targets, HandTables) {
  const auto online = constant_net({1.0, 2.0});
  const auto target = constant_net({10.0, 0.0});
  EXPECT_EQ(td_target_double(0.0, kState, false, online, target, 0.9), 0.0);
  EXPECT_EQ(td_target_max(0.0, kState, false, target, 0.9), 9.0);
  EXPECT_EQ(td_target_double(0.7, kState, true, online, target, 0.9), 0.7);
  EXPECT_EQ(td_target_max(0.7, kState, true, target, 0.9), 0.7);
  EXPECT_EQ(td_target_double(0.3, kState, false, online, target, 0.0), 0.3);
}

TEST(TrainBatch, ZeroLossLeavesParametersUnchanged) {
  AgentConfig cfg;
  auto online = constant_net({0.4, -0.2});
  const auto target = online;
  std::vector<Transition> batch{{kState, 0, 0.4, kState, true}, {kState, 1, -0.2, kState, true}};
  Optimizer opt(cfg, online);
  const auto before = online.parameters();
  EXPECT_EQ(train_batch(online, target, batch, cfg, opt), 0.0);
  EXPECT_EQ(online.parameters(), before);
}

TEST(TrainBatch, SingleSampleHandLoss) {
  AgentConfig cfg;
  cfg.learning_rate = 0.1;
  QNetwork net({3, 1});
  net.layers()[0].weights = {1.0, 0.0, 0.0};
  net.layers()[0].bias = {0.0};
  const auto target = net;
  // q = 0.5, y = 1.5: loss 1, dL/dw = -2 * x = [-1, -1, -0.2], dL/db = -2.
  std::vector<Transition> batch{{kState, 0, 1.5, kState, true}};
  Optimizer opt(cfg, net);
  EXPECT_DOUBLE_EQ(train_batch(net, target, batch, cfg, opt), 1.0);
  EXPECT_NEAR(net.layers()[0].weights[0], 1.1, 1e-15);
  EXPECT_NEAR(net.layers()[0].bias[0], 0.2, 1e-15);
  EXPECT_NEAR(net.layers()[0].weights[1], 0.1, 1e-15);
  EXPECT_NEAR(net.layers()[0].weights[2], 0.02, 1e-15);
}

TEST(TrainBatch, NonFiniteLossAborts) {
  AgentConfig cfg;
  auto net = constant_net({0.0});
  const auto target = net;
  std::vector<Transition> batch{{kState, 0, std::numeric_limits<double>::infinity(), kState, true}};
  Optimizer opt(cfg, net);
  EXPECT_THROW(train_batch(net, target, batch, cfg, opt), NumericFailure);
  EXPECT_THROW(loss_and_gradient(net, {}, {}), DomainError);
}

TEST(Sync, CopiesAndDetaches) {
  Rng rng(8);
  auto online = QNetwork::initialized({3, 6, 6, 4}, rng);
  QNetwork target;
  sync_target(online, target);
  for (int i = 0; i < 10; ++i) {
    const State s{rng.uniform(), rng.uniform(), rng.uniform()};
    EXPECT_EQ(online.forward(s), target.forward(s));
  }
  const auto snapshot = target;
  online.layers()[0].bias[0] += 1.0;
  EXPECT_TRUE(target == snapshot);
  sync_target(online, target);
  sync_target(online, target);
  EXPECT_TRUE(target == online);
  QNetwork other({3, 2, 4});
  EXPECT_THROW(sync_target(online, other), DomainError);
}

TEST(Epsilon, Schedule) {
  AgentConfig cfg;
  cfg.epsilon_decay = 0.9;
  EXPECT_DOUBLE_EQ(epsilon_after(cfg, 1), 0.9);
  for (std::size_t n : {2u, 10u, 28u, 29u, 100u}) {
    EXPECT_NEAR(epsilon_after(cfg, n), std::max(std::pow(0.9, n), 0.05), 1e-12);
  }
}

TEST(Replay, CapacityFifoAndUniqueSamples) {
  ReplayBuffer buf(5);
  for (int i = 0; i < 8; ++i) buf.push(Transition{{}, static_cast<std::size_t>(i), 0, {}, true});
  EXPECT_EQ(buf.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(buf.at(i).action, i + 3);
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto batch = buf.sample(5, rng);
    std::set<std::size_t> seen;
    for (const auto& t : batch) seen.insert(t.action);
    EXPECT_EQ(seen.size(), 5u);
  }
  EXPECT_THROW(buf.sample(6, rng), DomainError);
  EXPECT_THROW(ReplayBuffer(0), DomainError);
}

TEST(Config, Validation) {
  AgentConfig cfg;
  cfg.discount = 1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  EXPECT_EQ(parse_optimizer("adam"), OptimizerKind::kAdam);
  EXPECT_THROW(parse_optimizer("rmsprop"), DomainError);
}

TEST(Train, DeterministicUnderSeed) {
  auto run = config::default_config();
  run.agent.episodes = 300;
  const auto corpus = config::load_corpus(run.corpus);
  env::Environment e1(run.env, corpus), e2(run.env, corpus);
  const auto a = train(e1, run.agent, 42);
  const auto b = train(e2, run.agent, 42);
  ASSERT_EQ(a.stats.size(), 300u);
  for (std::size_t i = 0; i < a.stats.size(); ++i) {
    ASSERT_EQ(a.stats[i].reward, b.stats[i].reward);
    ASSERT_EQ(a.stats[i].loss, b.stats[i].loss);
  }
  EXPECT_TRUE(a.online == b.online);
  EXPECT_EQ(a.stats[0].episode, 1u);
  EXPECT_DOUBLE_EQ(a.stats[0].epsilon, 0.995);
  const auto c = train(e1, run.agent, 43);
  EXPECT_FALSE(c.online == a.online);
}

TEST(Train, LearnsToAvoidInfeasibleActions) {
  auto run = config::default_config();
  run.agent.episodes = 2000;
  run.agent.optimizer = OptimizerKind::kMomentum;
  const auto corpus = config::load_corpus(run.corpus);
  env::Environment e(run.env, corpus);
  const auto trained = train(e, run.agent, 7);
  const auto eval = evaluate(e, trained.online, 200, 7);
  EXPECT_GT(eval.mean_reward, 0.4);
  // Compression level 0 (no compression) is always infeasible.
  for (std::size_t p = 0; p < 10; ++p) EXPECT_EQ(eval.action_counts[p], 0u);
}
