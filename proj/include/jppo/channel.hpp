#pragma once

#include <string>
#include <vector>

#include "jppo/rng.hpp"

namespace jppo::channel {

// Uplink link parameters. The power-fading coefficient is unit-mean exponential
// (Rayleigh amplitude), so `fading_mean` stays at 1.0 in the default model.
struct ChannelParams {
  double bandwidth_hz = 1.0e6;
  double distance_m = 100.0;
  double path_loss_exponent = 3.0;
  double noise_power_w = 2.0e-8;
  double fading_mean = 1.0;

  // Throws DomainError if any field is not strictly positive.
  void validate() const;
  // d^(-alpha) / sigma^2, the SNR per Watt at unit fading.
  double gain_per_watt() const;
};

// Conditional BEP for this scheme is Gamma(mu2, mu1*tau) / (2 Gamma(mu2)).
struct ModulationScheme {
  std::string name;
  double mu1 = 1.0;
  double mu2 = 0.5;
};

struct FadingDraw {
  double g = 1.0;
};

// Built-in table: bpsk, dbpsk, bfsk (coherent), plus ncbfsk (non-coherent).
const std::vector<ModulationScheme>& modulation_table();
// Case-insensitive lookup; throws DomainError for unknown names.
const ModulationScheme& find_modulation(const std::string& name);

// g = -ln(u), u uniform on (0, 1], scaled by the fading mean.
FadingDraw sample_fading(Rng& rng, double fading_mean = 1.0);

double snr(double p_transmit_w, double g, const ChannelParams& params);
// Shannon rate W log2(1 + snr), bits/s.
double rate(double p_transmit_w, double g, const ChannelParams& params);

double to_db(double linear);
double from_db(double db);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
// Series for x < a + 1, Lentz continued fraction otherwise.
double regularized_upper_gamma(double a, double x);
// Non-normalized Gamma(a, x) = integral_x^inf t^(a-1) e^-t dt. Requires a > 0, x >= 0.
double upper_incomplete_gamma(double a, double x);

// Probability in [0, 0.5], nonincreasing in tau.
double conditional_bep(const ModulationScheme& mod, double tau);

struct BepDiagnostics {
  double value = 0.0;
  double error_estimate = 0.0;  // quadrature error estimate on the truncated part
  double tail_bound = 0.0;      // analytic bound on the discarded tail
  double truncation = 0.0;      // upper integration limit in tau
};

// Average BEP over a Rayleigh-power SNR density with mean `mean_snr`.
// Adaptive Gauss-Kronrod after the substitution tau = mean_snr * u^2, over
// tau in [0, tau_max] with tau_max = mean_snr * ln(1/1e-12). Throws
// NumericFailure if the relative error estimate exceeds 1e-8.
double average_bep(const ModulationScheme& mod, double mean_snr);
BepDiagnostics average_bep_with_diagnostics(const ModulationScheme& mod, double mean_snr);

inline constexpr double kBepRelativeTolerance = 1e-8;
inline constexpr double kBepTailEpsilon = 1e-12;

}  // namespace jppo::channel
