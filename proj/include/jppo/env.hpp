#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jppo/channel.hpp"
#include "jppo/compressor.hpp"
#include "jppo/fidelity.hpp"
#include "jppo/resource.hpp"
#include "jppo/rng.hpp"

namespace jppo::env {

// Thresholds of the constrained problem. Each check can be switched off.
struct Constraints {
  double e_th_j = 20000.0;
  double p_th_w = 1.0;
  double t_th_s = 80.0;
  double f_th = 0.5;
  bool check_energy = true;
  bool check_power = true;
  bool check_delay = true;
  bool check_fidelity = true;
  // When false the energy budget only covers SLM and transmission energy.
  bool count_llm_energy_in_budget = true;

  void validate() const;
};

struct Action {
  std::size_t c_level = 0;
  std::size_t p_level = 0;

  friend bool operator==(const Action&, const Action&) = default;
};

// Row-major grid of (compression factor, transmit power) pairs.
struct ActionSpace {
  std::vector<double> compression_levels{1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> power_levels_w;  // empty: filled from power_level_count and P_th

  static std::vector<double> uniform_power_levels(std::size_t count, double p_th_w);

  std::size_t size() const noexcept { return compression_levels.size() * power_levels_w.size(); }
  std::size_t compression_count() const noexcept { return compression_levels.size(); }
  std::size_t power_count() const noexcept { return power_levels_w.size(); }
  Action decode(std::size_t index) const;
  std::size_t encode(const Action& action) const;
  void validate(double p_th_w) const;
};

struct RewardParams {
  double lambda_bep = 0.5;
  double lambda_power = 0.2;
  double penalty = -1.0;
};

struct FidelityOptions {
  int bits_per_token = 16;
  std::size_t answer_keys = 8;
  bool stochastic_corruption = true;
};

enum class PromptSelection { kFixed, kCycle };

struct EnvConfig {
  channel::ChannelParams channel;
  channel::ModulationScheme modulation{"bpsk", 1.0, 0.5};
  bool rayleigh_fading = true;  // false fixes g = fading_mean
  resource::ResourceParams resource;
  Constraints constraints;
  ActionSpace actions;
  RewardParams reward;
  fidelity::FidelityWeights weights;
  FidelityOptions fidelity;
  compressor::ScoringParams scoring;
  int plan_steps = 4;
  compressor::Schedule plan_schedule = compressor::Schedule::kLinear;
  int episode_steps = 1;
  double snr_db_min = -10.0;
  double snr_db_max = 40.0;
  PromptSelection prompt_selection = PromptSelection::kFixed;
  std::size_t prompt_index = 0;

  void validate() const;
  compressor::CompressionPlan plan_for(double target_factor) const;
};

// Observation: [previous fidelity, normalized SNR, previous BEP].
struct EnvState {
  double prev_fidelity = 1.0;
  double snr_norm = 0.0;
  double bep_prev = 0.0;

  std::array<double, 3> features() const { return {prev_fidelity, snr_norm, bep_prev}; }
};

struct Violations {
  bool energy = false;
  bool power = false;
  bool delay = false;
  bool fidelity = false;
  bool numeric = false;

  bool any() const noexcept { return energy || power || delay || fidelity || numeric; }
};

struct StepRecord {
  std::size_t episode = 0;
  std::size_t step = 0;
  Action action;
  double target_factor = 1.0;
  double power_w = 0.0;
  double fading_g = 0.0;
  double snr_db = 0.0;
  double rate_bps = 0.0;
  resource::ServiceOutcome outcome;
  double reward = 0.0;
  Violations violations;
  std::string failure;  // diagnostics when violations.numeric
};

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  bool terminal = true;
  StepRecord record;
};

// Decision problem for one user. Single-threaded; use one instance per worker.
class Environment {
 public:
  Environment(EnvConfig config, std::vector<compressor::Prompt> corpus);

  // Starts an episode. Fading and corruption streams are derived from
  // `episode_seed`; `episode_index` selects the prompt under kCycle.
  EnvState reset(std::uint64_t episode_seed, std::size_t episode_index = 0);
  StepResult step(std::size_t action_index);
  StepResult step(const Action& action);

  const EnvConfig& config() const noexcept { return config_; }
  const ActionSpace& actions() const noexcept { return config_.actions; }
  const compressor::Prompt& current_prompt() const { return corpus_.at(prompt_); }
  const std::vector<compressor::Prompt>& corpus() const noexcept { return corpus_; }

  // Cached pure pieces of the pipeline.
  const compressor::CompressionTrace& trace(std::size_t prompt, std::size_t c_level);
  const std::vector<std::size_t>& answer_keys(std::size_t prompt);
  double bep_for_power(double p_transmit_w);

  double normalize_snr(double snr_linear) const;

 private:
  EnvConfig config_;
  std::vector<compressor::Prompt> corpus_;
  std::map<std::pair<std::size_t, std::size_t>, compressor::CompressionTrace> traces_;
  std::map<std::size_t, std::vector<std::size_t>> keys_;
  std::map<double, double> bep_cache_;

  Rng fading_rng_{0};
  Rng corruption_rng_{0};
  std::size_t prompt_ = 0;
  std::size_t episode_ = 0;
  std::size_t step_ = 0;
  EnvState state_;
};

// f - lambda_bep * bep / 0.5 - lambda_power * P / P_th, or the penalty when
// any flag is set.
double reward(const resource::ServiceOutcome& outcome, double p_transmit_w,
              const Violations& violations, const Constraints& constraints,
              const RewardParams& params);

// Applies the enabled constraint checks to an outcome.
Violations check_constraints(const resource::ServiceOutcome& outcome, double p_transmit_w,
                             const Constraints& constraints);

// Energy counted against the budget (total, or edge-side only).
double budget_energy(const resource::CostBreakdown& cost, const Constraints& constraints);

}  // namespace jppo::env
