#include "jppo/resource.hpp"

#include <cmath>
#include <string>

#include "jppo/errors.hpp"

namespace jppo::resource {

void ResourceParams::validate() const {
  if (n_gpu_slm < 1 || n_gpu_llm < 1) throw DomainError("GPU counts must be >= 1");
  const double fields[] = {p_gpu_slm_w,         p_gpu_llm_w,          slm_time_base_s,
                           slm_time_per_token_s, llm_time_base_s,      llm_time_per_token_s,
                           llm_time_per_token_sq_s};
  for (double v : fields) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DomainError("resource parameters must be finite and nonnegative");
    }
  }
}

double slm_round_time(std::size_t input_length, const ResourceParams& params) {
  return params.slm_time_base_s + params.slm_time_per_token_s * static_cast<double>(input_length);
}

double slm_time(const compressor::CompressionTrace& trace, const ResourceParams& params) {
  double total = 0.0;
  for (const auto& round : trace.rounds) total += slm_round_time(round.input_length, params);
  return total;
}

double llm_time(std::size_t final_length, const ResourceParams& params) {
  const double n = static_cast<double>(final_length);
  return params.llm_time_base_s + params.llm_time_per_token_s * n +
         params.llm_time_per_token_sq_s * n * n;
}

double transmit_time(double bits, double rate_bps) {
  if (bits == 0.0) return 0.0;
  if (!(rate_bps > 0.0)) {
    throw InfeasibleError("transmission rate is zero; cannot send " + std::to_string(bits) +
                          " bits");
  }
  return bits / rate_bps;
}

double encoding_energy(double t_slm_s, double t_llm_s, const ResourceParams& params) {
  return t_slm_s * params.n_gpu_slm * params.p_gpu_slm_w +
         t_llm_s * params.n_gpu_llm * params.p_gpu_llm_w;
}

double transmission_energy(double bits, double rate_bps, double p_transmit_w) {
  return transmit_time(bits, rate_bps) * p_transmit_w;
}

CostBreakdown total_delay_and_energy(const compressor::CompressionTrace& trace, double bits,
                                     double rate_bps, double p_transmit_w,
                                     const ResourceParams& params) {
  CostBreakdown c;
  c.t_slm_s = slm_time(trace, params);
  c.t_llm_s = llm_time(trace.final_length(), params);
  c.t_tx_s = transmit_time(bits, rate_bps);
  c.t_total_s = c.t_slm_s + c.t_llm_s + c.t_tx_s;
  c.e_slm_j = encoding_energy(c.t_slm_s, 0.0, params);
  c.e_llm_j = encoding_energy(0.0, c.t_llm_s, params);
  c.e_encode_j = encoding_energy(c.t_slm_s, c.t_llm_s, params);
  c.e_tx_j = c.t_tx_s * p_transmit_w;
  c.e_total_j = c.e_encode_j + c.e_tx_j;
  return c;
}

void CalibrationAnchors::validate() const {
  if (!(prompt_tokens >= 1.0 && llm_time_s > 0.0 && target_factor >= 1.0)) {
    throw DomainError("calibration anchors need prompt_tokens >= 1, llm_time_s > 0, target >= 1");
  }
  if (!(slm_round_fraction >= 0.0 && single_round_saving >= 0.0 && single_round_saving < 1.0)) {
    throw DomainError("calibration fractions out of range");
  }
  if (!(quadratic_share >= 0.0 && quadratic_share <= 1.0 && slm_fixed_share >= 0.0 &&
        slm_fixed_share <= 1.0)) {
    throw DomainError("calibration shares must lie in [0, 1]");
  }
}

double end_to_end_time(std::size_t tokens, const compressor::CompressionPlan& plan,
                       const ResourceParams& params, double rate_bps, int bits_per_token) {
  double t_slm = 0.0;
  std::size_t n = tokens;
  if (plan.target_factor != 1.0) {
    for (std::size_t budget : compressor::step_lengths(plan, tokens)) {
      t_slm += slm_round_time(n, params);
      n = budget;
    }
  }
  return t_slm + llm_time(n, params) +
         transmit_time(static_cast<double>(bits_per_token) * static_cast<double>(n), rate_bps);
}

CalibrationResult calibrate(const CalibrationAnchors& anchors, const ResourceParams& base,
                            double reference_rate_bps, int bits_per_token) {
  anchors.validate();
  const auto length = static_cast<std::size_t>(std::llround(anchors.prompt_tokens));
  const double L = static_cast<double>(length);
  const compressor::CompressionPlan single{anchors.target_factor, 1,
                                           compressor::Schedule::kLinear, {}};
  const std::size_t compressed = compressor::step_lengths(single, length).back();
  const double n = static_cast<double>(compressed);

  CalibrationResult result;
  result.compressed_tokens = compressed;
  ResourceParams p = base;

  const double slm_round = anchors.slm_round_fraction * anchors.llm_time_s;
  p.slm_time_base_s = anchors.slm_fixed_share * slm_round;
  p.slm_time_per_token_s = (1.0 - anchors.slm_fixed_share) * slm_round / L;

  const double tx_full = transmit_time(bits_per_token * L, reference_rate_bps);
  const double tx_compressed = transmit_time(bits_per_token * n, reference_rate_bps);
  const double target_total =
      (1.0 - anchors.single_round_saving) * (anchors.llm_time_s + tx_full);
  const double target_llm_compressed = target_total - slm_round - tx_compressed;

  // llm(m) = d + D * h(m), h(m) = (1 - rho) m / L + rho (m / L)^2, h(L) = 1.
  const double rho = anchors.quadratic_share;
  const double h = (1.0 - rho) * n / L + rho * (n / L) * (n / L);
  if (h >= 1.0) throw DomainError("calibration target factor must compress the prompt");
  const double span = (anchors.llm_time_s - target_llm_compressed) / (1.0 - h);
  const double base_time = anchors.llm_time_s - span;
  if (span < 0.0 || base_time < 0.0) {
    throw DomainError("calibration anchors imply a negative LLM timing coefficient");
  }
  p.llm_time_base_s = base_time;
  p.llm_time_per_token_s = (1.0 - rho) * span / L;
  p.llm_time_per_token_sq_s = rho * span / (L * L);
  result.params = p;

  const double full = end_to_end_time(length, {1.0, 1, compressor::Schedule::kLinear, {}}, p,
                                      reference_rate_bps, bits_per_token);
  const double reduced = end_to_end_time(length, single, p, reference_rate_bps, bits_per_token);
  result.achieved_saving = 1.0 - reduced / full;
  result.llm_time_residual_s = llm_time(length, p) - anchors.llm_time_s;
  result.slm_round_residual_s = slm_round_time(length, p) - slm_round;
  result.saving_residual = result.achieved_saving - anchors.single_round_saving;
  return result;
}

}  // namespace jppo::resource
