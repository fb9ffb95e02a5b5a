#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "jppo/env.hpp"
#include "jppo/qnetwork.hpp"
#include "jppo/rng.hpp"

namespace jppo::agent {

inline constexpr std::size_t kStateSize = 3;
using State = std::array<double, kStateSize>;

struct Transition {
  State state{};
  std::size_t action = 0;
  double reward = 0.0;
  State next_state{};
  bool terminal = true;
};

// Fixed-capacity FIFO store of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return storage_.size(); }
  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;
  // `count` distinct entries (Floyd's algorithm), count <= size().
  std::vector<Transition> sample(std::size_t count, Rng& rng) const;

 private:
  std::vector<Transition> storage_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

enum class OptimizerKind { kSgd, kMomentum, kAdam };

struct AgentConfig {
  double learning_rate = 1e-3;
  double discount = 0.9;
  double epsilon_start = 1.0;
  double epsilon_decay = 0.995;
  double epsilon_min = 0.05;
  std::size_t batch_size = 64;
  std::size_t target_sync_every = 50;  // episodes
  std::size_t episodes = 10000;
  std::size_t hidden_units = 64;
  std::size_t replay_capacity = 10000;
  std::size_t eval_episodes = 1000;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
};

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

// Epsilon-greedy action selection.
std::size_t act(const QNetwork& net, std::span<const double> state, double epsilon, Rng& rng);

// y = r for terminal transitions, otherwise
// y = r + discount * Q_target(s', argmax_a Q_online(s', a)).
double td_target_double(double reward, std::span<const double> next_state, bool terminal,
                        const QNetwork& online, const QNetwork& target, double discount);
// Single-network target r + discount * max_a Q_target(s', a), for comparison.
double td_target_max(double reward, std::span<const double> next_state, bool terminal,
                     const QNetwork& target, double discount);

// Mean squared TD error over a batch with fixed targets, and its gradient with
// respect to the online parameters (only the taken action's output contributes).
struct LossAndGradient {
  double loss = 0.0;
  Gradients gradients;
};
LossAndGradient loss_and_gradient(const QNetwork& net, std::span<const Transition> batch,
                                  std::span<const double> targets);

// Parameter update rule with its own state (momentum / Adam moments).
class Optimizer {
 public:
  Optimizer(const AgentConfig& config, const QNetwork& net);
  void apply(QNetwork& net, const Gradients& grads);

 private:
  AgentConfig config_;
  std::vector<double> first_;
  std::vector<double> second_;
  std::uint64_t steps_ = 0;
};

// One gradient step on the batch; returns the pre-update loss. Throws
// NumericFailure if the loss is not finite.
double train_batch(QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                   const AgentConfig& config, Optimizer& optimizer);

// target := online. Throws DomainError on shape mismatch (unless target is empty).
void sync_target(const QNetwork& online, QNetwork& target);

// max(epsilon_start * decay^n, epsilon_min) after n episodes.
double epsilon_after(const AgentConfig& config, std::size_t episodes);

struct EpisodeStats {
  std::size_t episode = 0;  // 1-based
  double reward = 0.0;      // summed over the episode's steps
  double fidelity = 0.0;    // mean over the episode's steps
  double epsilon = 0.0;     // after this episode's decay
  double loss = 0.0;        // mean training loss over the episode's steps
};

struct TrainResult {
  QNetwork online;
  QNetwork target;
  std::vector<EpisodeStats> stats;
};

// Seeds for training and evaluation episodes; the oracle shares the evaluation
// seeds so its grid and a greedy policy see the same channel realisations.
std::uint64_t train_episode_seed(std::uint64_t root, std::size_t episode);
std::uint64_t eval_episode_seed(std::uint64_t root, std::size_t episode);

std::vector<std::size_t> network_shape(const AgentConfig& config, std::size_t actions);

TrainResult train(env::Environment& environment, const AgentConfig& config, std::uint64_t seed,
                  const std::function<void(const EpisodeStats&)>& on_episode = {});

struct EvalResult {
  double mean_reward = 0.0;
  double reward_stderr = 0.0;
  double mean_fidelity = 0.0;
  double violation_rate = 0.0;
  std::vector<std::size_t> action_counts;
  std::vector<env::StepRecord> records;
};

// Greedy rollouts on evaluation seeds.
EvalResult evaluate(env::Environment& environment, const QNetwork& policy, std::size_t episodes,
                    std::uint64_t seed, bool keep_records = false);

}  // namespace jppo::agent
