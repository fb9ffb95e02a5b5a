#pragma once

#include <cstddef>

#include "jppo/compressor.hpp"
#include "jppo/fidelity.hpp"

namespace jppo::resource {

// GPU counts, per-GPU thermal design power and the timing model:
//   SLM round on n input tokens:  slm_time_base_s + slm_time_per_token_s * n
//   LLM first-token time for n:    llm_time_base_s + llm_time_per_token_s * n
//                                  + llm_time_per_token_sq_s * n^2
struct ResourceParams {
  int n_gpu_slm = 1;
  int n_gpu_llm = 1;
  double p_gpu_slm_w = 70.0;
  double p_gpu_llm_w = 300.0;
  double slm_time_base_s = 0.0;
  double slm_time_per_token_s = 0.0;
  double llm_time_base_s = 0.0;
  double llm_time_per_token_s = 0.0;
  double llm_time_per_token_sq_s = 0.0;

  void validate() const;
};

struct CostBreakdown {
  double t_slm_s = 0.0;
  double t_llm_s = 0.0;
  double t_tx_s = 0.0;
  double t_total_s = 0.0;
  double e_slm_j = 0.0;
  double e_llm_j = 0.0;
  double e_encode_j = 0.0;
  double e_tx_j = 0.0;
  double e_total_j = 0.0;
};

// Everything observed for one service request.
struct ServiceOutcome {
  CostBreakdown cost;
  double realized_kappa = 1.0;
  double bep = 0.0;
  fidelity::FidelityReport fidelity;
};

double slm_round_time(std::size_t input_length, const ResourceParams& params);
double slm_time(const compressor::CompressionTrace& trace, const ResourceParams& params);
double llm_time(std::size_t final_length, const ResourceParams& params);
// Throws InfeasibleError when bits > 0 and rate is not positive.
double transmit_time(double bits, double rate_bps);
double encoding_energy(double t_slm_s, double t_llm_s, const ResourceParams& params);
double transmission_energy(double bits, double rate_bps, double p_transmit_w);

CostBreakdown total_delay_and_energy(const compressor::CompressionTrace& trace, double bits,
                                     double rate_bps, double p_transmit_w,
                                     const ResourceParams& params);

// Anchors for fitting the timing model. The LLM model is pinned by
//   llm_time(prompt_tokens) = llm_time_s
//   1 - T(single round at target_factor) / T(uncompressed) = single_round_saving
// with `quadratic_share` of the prompt-dependent LLM time at prompt_tokens
// coming from the n^2 term. The SLM model is pinned by one round on
// prompt_tokens costing slm_round_fraction * llm_time_s, of which
// `slm_fixed_share` is the per-round constant.
struct CalibrationAnchors {
  double prompt_tokens = 600.0;
  double llm_time_s = 85.0;
  double slm_round_fraction = 0.02;
  double single_round_saving = 0.423;
  double target_factor = 16.0;
  double quadratic_share = 0.5;
  double slm_fixed_share = 0.1;

  void validate() const;
};

struct CalibrationResult {
  ResourceParams params;
  double llm_time_residual_s = 0.0;
  double slm_round_residual_s = 0.0;
  double saving_residual = 0.0;
  double achieved_saving = 0.0;
  std::size_t compressed_tokens = 0;
};

// Fits the five timing parameters of `base` (GPU fields are kept). The
// transmission time of each prompt enters the end-to-end saving at
// `reference_rate_bps` with `bits_per_token` bits per token. Throws
// DomainError if the anchors imply a negative coefficient.
CalibrationResult calibrate(const CalibrationAnchors& anchors, const ResourceParams& base,
                            double reference_rate_bps, int bits_per_token);

// End-to-end time of a prompt of `tokens` tokens through `plan`, using the
// round lengths from compressor::step_lengths and the given rate.
double end_to_end_time(std::size_t tokens, const compressor::CompressionPlan& plan,
                       const ResourceParams& params, double rate_bps, int bits_per_token);

}  // namespace jppo::resource
