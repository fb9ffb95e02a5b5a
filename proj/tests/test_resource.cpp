#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "jppo/compressor.hpp"
#include "jppo/config.hpp"
#include "jppo/errors.hpp"
#include "jppo/resource.hpp"

using namespace jppo;
using namespace jppo::resource;

namespace {

compressor::Prompt uniform_prompt(std::size_t n) {
  std::vector<std::string> demo;
  for (std::size_t i = 0; i < n; ++i) demo.push_back("t" + std::to_string(i % 31));
  return compressor::Prompt({}, demo, {});
}

ResourceParams slm_params() {
  ResourceParams p;
  p.slm_time_base_s = 0.1;
  p.slm_time_per_token_s = 1e-3;
  return p;
}

double reference_rate(const config::RunConfig& cfg) {
  return channel::rate(cfg.env.constraints.p_th_w, 1.0, cfg.env.channel);
}

}  // namespace

TEST(SlmTime, Examples) {
  const auto p = uniform_prompt(800);
  const auto params = slm_params();
  EXPECT_EQ(slm_time(compressor::compress(p, {1.0, 4, compressor::Schedule::kLinear, {}}), params),
            0.0);
  EXPECT_NEAR(slm_time(compressor::compress(p, {16.0, 1, compressor::Schedule::kLinear, {}}),
                       params),
              0.9, 1e-12);
  EXPECT_NEAR(slm_time(compressor::compress(p, {16.0, 4, compressor::Schedule::kLinear, {}}),
                       params),
              1.9, 1e-12);
}

TEST(LlmTime, Polynomial) {
  ResourceParams p;
  p.llm_time_base_s = 2.0;
  p.llm_time_per_token_s = 0.5;
  p.llm_time_per_token_sq_s = 0.01;
  EXPECT_EQ(llm_time(0, p), 2.0);
  EXPECT_NEAR(llm_time(10, p), 2.0 + 5.0 + 1.0, 1e-12);
}

TEST(Transmit, Examples) {
  EXPECT_NEAR(transmit_time(1000, 2e6), 5e-4, 1e-18);
  EXPECT_EQ(transmit_time(0, 2e6), 0.0);
  EXPECT_EQ(transmit_time(0, 0.0), 0.0);
  EXPECT_THROW(transmit_time(1000, 0.0), InfeasibleError);
  EXPECT_NEAR(transmission_energy(1000, 2e6, 1.0), 5e-4, 1e-18);
  EXPECT_EQ(transmission_energy(1000, 2e6, 0.0), 0.0);
  EXPECT_NEAR(transmission_energy(3000, 2e6, 1.0), 3.0 * transmission_energy(1000, 2e6, 1.0),
              1e-18);
  EXPECT_THROW(transmission_energy(1000, 0.0, 1.0), InfeasibleError);
}

TEST(EncodingEnergy, Examples) {
  ResourceParams p;
  p.p_gpu_slm_w = 50.0;
  EXPECT_EQ(encoding_energy(0.0, 0.0, p), 0.0);
  EXPECT_NEAR(encoding_energy(1.0, 0.0, p), 50.0, 1e-12);
  EXPECT_NEAR(encoding_energy(2.0, 6.0, p), 2.0 * encoding_energy(1.0, 3.0, p), 1e-9);
  p.n_gpu_llm = 2;
  EXPECT_NEAR(encoding_energy(0.0, 1.0, p), 600.0, 1e-12);
}

TEST(Totals, Additivity) {
  // SLM 1.9 s, LLM 40 s, transmission 5e-4 s.
  const auto prompt = uniform_prompt(800);
  const auto trace = compressor::compress(prompt, {16.0, 4, compressor::Schedule::kLinear, {}});
  auto params = slm_params();
  params.llm_time_base_s = 40.0;
  const auto c = total_delay_and_energy(trace, 1000, 2e6, 1.0, params);
  EXPECT_NEAR(c.t_slm_s, 1.9, 1e-12);
  EXPECT_NEAR(c.t_llm_s, 40.0, 1e-12);
  EXPECT_NEAR(c.t_tx_s, 5e-4, 1e-15);
  EXPECT_NEAR(c.t_total_s, 41.9005, 1e-12);
  EXPECT_NEAR(c.e_total_j, c.e_encode_j + c.e_tx_j, 1e-12);
  EXPECT_NEAR(c.e_encode_j, c.e_slm_j + c.e_llm_j, 1e-12);
  EXPECT_NEAR(c.e_slm_j, 1.9 * 70.0, 1e-9);
  EXPECT_NEAR(c.e_llm_j, 40.0 * 300.0, 1e-9);

  const auto zero = total_delay_and_energy(compressor::compress(prompt, {1.0, 1, compressor::Schedule::kLinear, {}}),
                                           0, 1e6, 0.0, ResourceParams{});
  EXPECT_EQ(zero.t_total_s, 0.0);
  EXPECT_EQ(zero.e_total_j, 0.0);
}

TEST(Calibration, AnchorsReproduced) {
  const auto cfg = config::default_config();
  const auto fit = config::run_calibration(cfg);
  const auto& p = fit.params;
  EXPECT_NEAR(llm_time(600, p), 85.0, 1e-9);
  EXPECT_NEAR(slm_round_time(600, p), 0.02 * 85.0, 1e-12);
  EXPECT_NEAR(fit.achieved_saving, 0.423, 1e-9);
  EXPECT_GE(fit.achieved_saving, 0.42);
  EXPECT_EQ(fit.compressed_tokens, 38u);
  EXPECT_GT(p.llm_time_per_token_s, 0.0);
  EXPECT_GT(p.llm_time_per_token_sq_s, 0.0);
  EXPECT_LE(llm_time(37, p), 0.58 * 85.0);
  EXPECT_LE(llm_time(38, p), 0.58 * 85.0);

  // Independent recomputation of the saving from the fitted coefficients.
  const double r = reference_rate(cfg);
  const double bits = cfg.env.fidelity.bits_per_token;
  const double full = llm_time(600, p) + bits * 600 / r;
  const double reduced = slm_round_time(600, p) + llm_time(38, p) + bits * 38 / r;
  EXPECT_NEAR(1.0 - reduced / full, fit.achieved_saving, 1e-12);
}

TEST(Calibration, MultiStepAddsExactlyExtraRounds) {
  const auto cfg = config::default_config();
  const auto p = config::run_calibration(cfg).params;
  const double r = reference_rate(cfg);
  const int bits = cfg.env.fidelity.bits_per_token;
  const compressor::CompressionPlan one{16.0, 1, compressor::Schedule::kLinear, {}};
  const compressor::CompressionPlan four{16.0, 4, compressor::Schedule::kLinear, {}};
  const double t1 = end_to_end_time(600, one, p, r, bits);
  const double t4 = end_to_end_time(600, four, p, r, bits);
  // Extra rounds read 300, 150 and 75 tokens.
  const double extra = slm_round_time(300, p) + slm_round_time(150, p) + slm_round_time(75, p);
  EXPECT_NEAR(t4 - t1, extra, 1e-9);
}

TEST(Calibration, DelayDecreasesWithCompression) {
  const auto cfg = config::default_config();
  const auto p = config::run_calibration(cfg).params;
  const double r = reference_rate(cfg);
  double prev = 1e300;
  for (double target : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double t = end_to_end_time(600, cfg.env.plan_for(target), p, r, 16);
    EXPECT_LT(t, prev);
    prev = t;
  }
  for (std::size_t n = 1; n < 700; ++n) EXPECT_GT(llm_time(n, p), llm_time(n - 1, p));
}

TEST(Calibration, RejectsImpossibleAnchors) {
  CalibrationAnchors a;
  a.single_round_saving = 0.95;
  EXPECT_THROW(calibrate(a, ResourceParams{}, 1e7, 16), DomainError);
  a = {};
  a.quadratic_share = 1.5;
  EXPECT_THROW(a.validate(), DomainError);
}
