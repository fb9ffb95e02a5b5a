#include "jppo/agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jppo/errors.hpp"
#include "jppo/running_stats.hpp"

namespace jppo::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : storage_(capacity) {
  if (capacity == 0) throw DomainError("replay capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  storage_[head_] = t;
  head_ = (head_ + 1) % storage_.size();
  size_ = std::min(size_ + 1, storage_.size());
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw DomainError("replay index out of range");
  const std::size_t oldest = size_ < storage_.size() ? 0 : head_;
  return storage_[(oldest + i) % storage_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  if (count > size_) throw DomainError("cannot sample more transitions than stored");
  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t j = size_ - count; j < size_; ++j) {
    const std::size_t r = rng.uniform_index(j + 1);
    if (std::find(picked.begin(), picked.end(), r) == picked.end()) {
      picked.push_back(r);
    } else {
      picked.push_back(j);
    }
  }
  std::vector<Transition> batch;
  batch.reserve(count);
  for (std::size_t i : picked) batch.push_back(at(i));
  return batch;
}

void AgentConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("learning_rate must be > 0");
  if (!(discount >= 0.0 && discount < 1.0)) throw DomainError("discount must lie in [0, 1)");
  for (double e : {epsilon_start, epsilon_decay, epsilon_min}) {
    if (!(e >= 0.0 && e <= 1.0)) throw DomainError("epsilon values must lie in [0, 1]");
  }
  if (batch_size == 0 || target_sync_every == 0 || episodes == 0 || hidden_units == 0 ||
      replay_capacity == 0 || eval_episodes == 0) {
    throw DomainError("agent counts must be positive");
  }
}

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd:
      return "sgd";
    case OptimizerKind::kMomentum:
      return "momentum";
    case OptimizerKind::kAdam:
      return "adam";
  }
  return "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "momentum") return OptimizerKind::kMomentum;
  if (name == "adam") return OptimizerKind::kAdam;
  throw DomainError("unknown optimizer '" + std::string(name) + "'");
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t act(const QNetwork& net, std::span<const double> state, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw DomainError("epsilon must lie in [0, 1]");
  // Always consume one uniform so the stream layout does not depend on epsilon.
  const double u = rng.uniform();
  if (u < epsilon) return rng.uniform_index(net.output_size());
  const auto q = net.forward(state);
  return argmax(q);
}

double td_target_double(double reward, std::span<const double> next_state, bool terminal,
                        const QNetwork& online, const QNetwork& target, double discount) {
  if (terminal) return reward;
  const auto q_online = online.forward(next_state);
  const auto q_target = target.forward(next_state);
  return reward + discount * q_target[argmax(q_online)];
}

double td_target_max(double reward, std::span<const double> next_state, bool terminal,
                     const QNetwork& target, double discount) {
  if (terminal) return reward;
  const auto q = target.forward(next_state);
  return reward + discount * *std::max_element(q.begin(), q.end());
}

LossAndGradient loss_and_gradient(const QNetwork& net, std::span<const Transition> batch,
                                  std::span<const double> targets) {
  if (batch.empty()) throw DomainError("training batch is empty");
  if (targets.size() != batch.size()) throw DomainError("one target per transition required");
  LossAndGradient out{0.0, Gradients(net)};
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto acts = net.forward_cached(batch[k].state);
    const double q = acts.a.back().at(batch[k].action);
    const double err = targets[k] - q;
    out.loss += err * err * scale;
    // d/dq (y - q)^2 = -2 (y - q)
    accumulate_output_gradient(net, acts, batch[k].action, -2.0 * err * scale, out.gradients);
  }
  return out;
}

Optimizer::Optimizer(const AgentConfig& config, const QNetwork& net) : config_(config) {
  if (config_.optimizer != OptimizerKind::kSgd) first_.assign(net.parameter_count(), 0.0);
  if (config_.optimizer == OptimizerKind::kAdam) second_.assign(net.parameter_count(), 0.0);
}

void Optimizer::apply(QNetwork& net, const Gradients& grads) {
  ++steps_;
  const double lr = config_.learning_rate;
  std::size_t k = 0;
  auto update = [&](double& param, double g) {
    switch (config_.optimizer) {
      case OptimizerKind::kSgd:
        param -= lr * g;
        break;
      case OptimizerKind::kMomentum:
        first_[k] = config_.momentum * first_[k] + g;
        param -= lr * first_[k];
        break;
      case OptimizerKind::kAdam: {
        first_[k] = config_.adam_beta1 * first_[k] + (1.0 - config_.adam_beta1) * g;
        second_[k] = config_.adam_beta2 * second_[k] + (1.0 - config_.adam_beta2) * g * g;
        const double mhat = first_[k] / (1.0 - std::pow(config_.adam_beta1, steps_));
        const double vhat = second_[k] / (1.0 - std::pow(config_.adam_beta2, steps_));
        param -= lr * mhat / (std::sqrt(vhat) + config_.adam_epsilon);
        break;
      }
    }
    ++k;
  };
  auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
      update(layers[l].weights[i], grads.layers[l].weights[i]);
    }
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      update(layers[l].bias[i], grads.layers[l].bias[i]);
    }
  }
}

double train_batch(QNetwork& online, const QNetwork& target, std::span<const Transition> batch,
                   const AgentConfig& config, Optimizer& optimizer) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const auto& t : batch) {
    targets.push_back(
        td_target_double(t.reward, t.next_state, t.terminal, online, target, config.discount));
  }
  auto lg = loss_and_gradient(online, batch, targets);
  if (!std::isfinite(lg.loss)) {
    throw NumericFailure("training loss is not finite (batch of " + std::to_string(batch.size()) +
                         ", loss=" + std::to_string(lg.loss) + ")");
  }
  optimizer.apply(online, lg.gradients);
  return lg.loss;
}

void sync_target(const QNetwork& online, QNetwork& target) {
  if (!target.layer_sizes().empty() && !online.same_shape(target)) {
    throw DomainError("target network shape does not match the online network");
  }
  target = online;
}

double epsilon_after(const AgentConfig& config, std::size_t episodes) {
  double eps = config.epsilon_start;
  for (std::size_t i = 0; i < episodes; ++i) {
    eps = std::max(eps * config.epsilon_decay, config.epsilon_min);
  }
  return eps;
}

std::uint64_t train_episode_seed(std::uint64_t root, std::size_t episode) {
  return derive_seed(root, "train-episode", episode);
}

std::uint64_t eval_episode_seed(std::uint64_t root, std::size_t episode) {
  return derive_seed(root, "eval-episode", episode);
}

std::vector<std::size_t> network_shape(const AgentConfig& config, std::size_t actions) {
  return {kStateSize, config.hidden_units, config.hidden_units, actions};
}

TrainResult train(env::Environment& environment, const AgentConfig& config, std::uint64_t seed,
                  const std::function<void(const EpisodeStats&)>& on_episode) {
  config.validate();
  Rng init_rng(derive_seed(seed, "init"));
  Rng policy_rng(derive_seed(seed, "policy"));
  Rng replay_rng(derive_seed(seed, "replay"));

  TrainResult result;
  result.online = QNetwork::initialized(network_shape(config, environment.actions().size()),
                                        init_rng);
  sync_target(result.online, result.target);
  Optimizer optimizer(config, result.online);
  ReplayBuffer buffer(config.replay_capacity);
  result.stats.reserve(config.episodes);

  double epsilon = config.epsilon_start;
  for (std::size_t ep = 0; ep < config.episodes; ++ep) {
    auto state = environment.reset(train_episode_seed(seed, ep), ep).features();
    EpisodeStats stats;
    stats.episode = ep + 1;
    std::size_t steps = 0;
    bool terminal = false;
    while (!terminal) {
      const std::size_t a = act(result.online, state, epsilon, policy_rng);
      const auto step = environment.step(a);
      terminal = step.terminal;
      const auto next = step.next_state.features();
      buffer.push(Transition{state, a, step.reward, next, terminal});
      const auto batch = buffer.sample(std::min(config.batch_size, buffer.size()), replay_rng);
      stats.loss += train_batch(result.online, result.target, batch, config, optimizer);
      stats.reward += step.reward;
      stats.fidelity += step.record.outcome.fidelity.f;
      state = next;
      ++steps;
    }
    stats.loss /= static_cast<double>(steps);
    stats.fidelity /= static_cast<double>(steps);
    epsilon = std::max(epsilon * config.epsilon_decay, config.epsilon_min);
    stats.epsilon = epsilon;
    if ((ep + 1) % config.target_sync_every == 0) sync_target(result.online, result.target);
    result.stats.push_back(stats);
    if (on_episode) on_episode(stats);
  }
  return result;
}

EvalResult evaluate(env::Environment& environment, const QNetwork& policy, std::size_t episodes,
                    std::uint64_t seed, bool keep_records) {
  if (episodes == 0) throw DomainError("evaluation needs at least one episode");
  EvalResult out;
  out.action_counts.assign(environment.actions().size(), 0);
  double sum = 0.0;
  RunningStats spread;
  std::size_t steps = 0;
  std::size_t violations = 0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    auto state = environment.reset(eval_episode_seed(seed, ep), ep).features();
    double episode_reward = 0.0;
    bool terminal = false;
    while (!terminal) {
      const std::size_t a = argmax(policy.forward(state));
      auto step = environment.step(a);
      terminal = step.terminal;
      ++out.action_counts[a];
      episode_reward += step.reward;
      out.mean_fidelity += step.record.outcome.fidelity.f;
      if (step.record.violations.any()) ++violations;
      ++steps;
      state = step.next_state.features();
      if (keep_records) out.records.push_back(std::move(step.record));
    }
    sum += episode_reward;
    spread.add(episode_reward);
  }
  out.mean_reward = sum / static_cast<double>(episodes);
  out.reward_stderr = spread.standard_error();
  out.mean_fidelity /= static_cast<double>(steps);
  out.violation_rate = static_cast<double>(violations) / static_cast<double>(steps);
  return out;
}

}  // namespace jppo::agent
