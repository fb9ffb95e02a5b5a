#include "jppo/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "jppo/errors.hpp"

namespace jppo::env {

void Constraints::validate() const {
  if (!(e_th_j > 0.0 && p_th_w > 0.0 && t_th_s > 0.0)) {
    throw DomainError("constraint thresholds must be positive");
  }
  if (!(f_th > 0.0 && f_th < 1.0)) throw DomainError("f_th must lie in (0, 1)");
}

std::vector<double> ActionSpace::uniform_power_levels(std::size_t count, double p_th_w) {
  std::vector<double> levels(count);
  for (std::size_t l = 0; l < count; ++l) {
    levels[l] = static_cast<double>(l + 1) / static_cast<double>(count) * p_th_w;
  }
  return levels;
}

Action ActionSpace::decode(std::size_t index) const {
  if (index >= size()) {
    throw DomainError("action index " + std::to_string(index) + " out of range [0, " +
                      std::to_string(size()) + ")");
  }
  return Action{index / power_levels_w.size(), index % power_levels_w.size()};
}

std::size_t ActionSpace::encode(const Action& action) const {
  if (action.c_level >= compression_levels.size() || action.p_level >= power_levels_w.size()) {
    throw DomainError("action level out of range");
  }
  return action.c_level * power_levels_w.size() + action.p_level;
}

void ActionSpace::validate(double p_th_w) const {
  if (compression_levels.empty() || power_levels_w.empty()) {
    throw DomainError("action space needs at least one compression and one power level");
  }
  for (double t : compression_levels) {
    if (!(t >= 1.0) || !std::isfinite(t)) throw DomainError("compression levels must be >= 1");
  }
  for (double p : power_levels_w) {
    if (!(p >= 0.0) || p > p_th_w * (1.0 + 1e-12)) {
      throw DomainError("power levels must lie in [0, P_th]");
    }
  }
}

void EnvConfig::validate() const {
  channel.validate();
  if (modulation.mu1 <= 0.0 || modulation.mu2 <= 0.0) {
    throw DomainError("modulation parameters must be positive");
  }
  resource.validate();
  constraints.validate();
  actions.validate(constraints.p_th_w);
  weights.validate();
  if (fidelity.bits_per_token < 1) throw DomainError("bits_per_token must be >= 1");
  if (fidelity.answer_keys < 1) throw DomainError("answer_keys must be >= 1");
  if (plan_steps < 1) throw DomainError("plan steps must be >= 1");
  if (episode_steps < 1) throw DomainError("episode_steps must be >= 1");
  if (!(snr_db_max > snr_db_min)) throw DomainError("snr_db_max must exceed snr_db_min");
}

compressor::CompressionPlan EnvConfig::plan_for(double target_factor) const {
  return compressor::CompressionPlan{target_factor, plan_steps, plan_schedule, {}};
}

Environment::Environment(EnvConfig config, std::vector<compressor::Prompt> corpus)
    : config_(std::move(config)), corpus_(std::move(corpus)) {
  if (corpus_.empty()) throw DomainError("prompt corpus is empty");
  config_.validate();
  if (config_.prompt_index >= corpus_.size()) {
    throw DomainError("prompt_index " + std::to_string(config_.prompt_index) +
                      " out of range for a corpus of " + std::to_string(corpus_.size()));
  }
}

const compressor::CompressionTrace& Environment::trace(std::size_t prompt, std::size_t c_level) {
  const auto key = std::make_pair(prompt, c_level);
  auto it = traces_.find(key);
  if (it == traces_.end()) {
    const auto plan = config_.plan_for(config_.actions.compression_levels.at(c_level));
    it = traces_.emplace(key, compressor::compress(corpus_.at(prompt), plan, config_.scoring))
             .first;
  }
  return it->second;
}

const std::vector<std::size_t>& Environment::answer_keys(std::size_t prompt) {
  auto it = keys_.find(prompt);
  if (it == keys_.end()) {
    it = keys_
             .emplace(prompt, fidelity::answer_keys(corpus_.at(prompt),
                                                    config_.fidelity.answer_keys, config_.scoring))
             .first;
  }
  return it->second;
}

double Environment::bep_for_power(double p_transmit_w) {
  auto it = bep_cache_.find(p_transmit_w);
  if (it == bep_cache_.end()) {
    const double mean_snr =
        p_transmit_w * config_.channel.fading_mean * config_.channel.gain_per_watt();
    it = bep_cache_.emplace(p_transmit_w, channel::average_bep(config_.modulation, mean_snr)).first;
  }
  return it->second;
}

double Environment::normalize_snr(double snr_linear) const {
  if (!(snr_linear > 0.0)) return 0.0;
  const double db = channel::to_db(snr_linear);
  return std::clamp((db - config_.snr_db_min) / (config_.snr_db_max - config_.snr_db_min), 0.0,
                    1.0);
}

EnvState Environment::reset(std::uint64_t episode_seed, std::size_t episode_index) {
  fading_rng_ = Rng(derive_seed(episode_seed, "fading"));
  corruption_rng_ = Rng(derive_seed(episode_seed, "corruption"));
  episode_ = episode_index;
  step_ = 0;
  prompt_ = config_.prompt_selection == PromptSelection::kCycle
                ? episode_index % corpus_.size()
                : config_.prompt_index;

  // Initial observation: channel quality at the power limit under a fresh draw.
  const double p_ref = config_.constraints.p_th_w;
  const double g = config_.rayleigh_fading
                       ? channel::sample_fading(fading_rng_, config_.channel.fading_mean).g
                       : config_.channel.fading_mean;
  state_ = EnvState{1.0, normalize_snr(channel::snr(p_ref, g, config_.channel)),
                    bep_for_power(p_ref)};
  return state_;
}

StepResult Environment::step(std::size_t action_index) {
  return step(config_.actions.decode(action_index));
}

Violations check_constraints(const resource::ServiceOutcome& outcome, double p_transmit_w,
                             const Constraints& c) {
  Violations v;
  v.energy = c.check_energy && !(budget_energy(outcome.cost, c) <= c.e_th_j);
  v.power = c.check_power && !(p_transmit_w <= c.p_th_w);
  v.delay = c.check_delay && !(outcome.cost.t_total_s <= c.t_th_s);
  v.fidelity = c.check_fidelity && !(outcome.fidelity.f > c.f_th);
  return v;
}

double budget_energy(const resource::CostBreakdown& cost, const Constraints& constraints) {
  return constraints.count_llm_energy_in_budget ? cost.e_total_j : cost.e_slm_j + cost.e_tx_j;
}

double reward(const resource::ServiceOutcome& outcome, double p_transmit_w,
              const Violations& violations, const Constraints& constraints,
              const RewardParams& params) {
  if (violations.any()) return params.penalty;
  return outcome.fidelity.f - params.lambda_bep * (outcome.bep / 0.5) -
         params.lambda_power * (p_transmit_w / constraints.p_th_w);
}

StepResult Environment::step(const Action& action) {
  config_.actions.encode(action);  // range check

  StepResult result;
  StepRecord& rec = result.record;
  rec.episode = episode_;
  rec.step = step_;
  rec.action = action;
  rec.target_factor = config_.actions.compression_levels[action.c_level];
  rec.power_w = config_.actions.power_levels_w[action.p_level];

  const auto& prompt = corpus_.at(prompt_);
  const auto& tr = trace(prompt_, action.c_level);
  auto& out = rec.outcome;
  out.realized_kappa = tr.realized_kappa();

  rec.fading_g = config_.rayleigh_fading
                     ? channel::sample_fading(fading_rng_, config_.channel.fading_mean).g
                     : config_.channel.fading_mean;
  const double inst_snr = channel::snr(rec.power_w, rec.fading_g, config_.channel);
  rec.snr_db = channel::to_db(inst_snr);
  rec.rate_bps = channel::rate(rec.power_w, rec.fading_g, config_.channel);

  try {
    out.bep = bep_for_power(rec.power_w);
    const fidelity::TransmissionModel tx{config_.fidelity.bits_per_token, out.bep};
    out.fidelity.f1 = fidelity::f1_representation(prompt, tr.output);
    out.fidelity.f2 = fidelity::f2_completeness(prompt, tr.output, out.realized_kappa, tx);
    if (config_.fidelity.stochastic_corruption) {
      const auto received = fidelity::transmit(tr.output, tx, corruption_rng_);
      out.fidelity.f3 = fidelity::f3_understanding(answer_keys(prompt_), received);
    } else {
      out.fidelity.f3 = fidelity::f3_understanding(answer_keys(prompt_), tr.output);
    }
    out.fidelity.f = fidelity::overall_fidelity(out.fidelity.f1, out.fidelity.f2,
                                                out.fidelity.f3, config_.weights);
    const double bits = static_cast<double>(config_.fidelity.bits_per_token) *
                        static_cast<double>(tr.final_length());
    out.cost = resource::total_delay_and_energy(tr, bits, rec.rate_bps, rec.power_w,
                                                config_.resource);
    rec.violations = check_constraints(out, rec.power_w, config_.constraints);
  } catch (const NumericFailure& e) {
    rec.violations.numeric = true;
    rec.failure = e.what();
  } catch (const InfeasibleError& e) {
    rec.violations.numeric = true;
    rec.failure = e.what();
  }
  rec.reward = reward(out, rec.power_w, rec.violations, config_.constraints, config_.reward);

  ++step_;
  state_ = EnvState{out.fidelity.f, normalize_snr(inst_snr), out.bep};
  result.next_state = state_;
  result.reward = rec.reward;
  result.terminal = step_ >= static_cast<std::size_t>(config_.episode_steps);
  return result;
}

}  // namespace jppo::env
