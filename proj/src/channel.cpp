#include "jppo/channel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "jppo/errors.hpp"

namespace jppo::channel {

void ChannelParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw DomainError(std::string("channel.") + name + " must be finite and > 0");
    }
  };
  positive(bandwidth_hz, "bandwidth_hz");
  positive(distance_m, "distance_m");
  positive(path_loss_exponent, "path_loss_exponent");
  positive(noise_power_w, "noise_power_w");
  positive(fading_mean, "fading_mean");
}

double ChannelParams::gain_per_watt() const {
  return std::pow(distance_m, -path_loss_exponent) / noise_power_w;
}

const std::vector<ModulationScheme>& modulation_table() {
  static const std::vector<ModulationScheme> table = {
      {"bpsk", 1.0, 0.5},
      {"dbpsk", 1.0, 1.0},
      {"bfsk", 0.5, 0.5},
      {"ncbfsk", 0.5, 1.0},
  };
  return table;
}

const ModulationScheme& find_modulation(const std::string& name) {
  std::string key = name;
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& m : modulation_table()) {
    if (m.name == key) return m;
  }
  throw DomainError("unknown modulation '" + name + "'");
}

FadingDraw sample_fading(Rng& rng, double fading_mean) {
  return FadingDraw{-std::log(rng.uniform_open_closed()) * fading_mean};
}

double snr(double p_transmit_w, double g, const ChannelParams& params) {
  return p_transmit_w * g * params.gain_per_watt();
}

double rate(double p_transmit_w, double g, const ChannelParams& params) {
  return params.bandwidth_hz * std::log2(1.0 + snr(p_transmit_w, g, params));
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

double conditional_bep(const ModulationScheme& mod, double tau) {
  if (!(tau >= 0.0)) throw DomainError("conditional_bep requires tau >= 0");
  return 0.5 * regularized_upper_gamma(mod.mu2, mod.mu1 * tau);
}

BepDiagnostics average_bep_with_diagnostics(const ModulationScheme& mod, double mean_snr) {
  if (std::isnan(mean_snr) || mean_snr < 0.0) {
    throw DomainError("average_bep requires mean_snr > 0");
  }
  if (mod.mu1 <= 0.0 || mod.mu2 <= 0.0) {
    throw DomainError("modulation '" + mod.name + "' needs mu1 > 0 and mu2 > 0");
  }
  BepDiagnostics diag;
  if (mean_snr == 0.0) {
    diag.value = 0.5;
    return diag;
  }

  diag.truncation = mean_snr * std::log(1.0 / kBepTailEpsilon);
  // With tau = mean * u^2 the integrand becomes conditional BEP * e^(-u^2) * 2u
  // on a fixed interval; the substitution also removes the u^(2 mu2) cusp.
  auto integrand = [&](double u) {
    const double w = u * u;
    return conditional_bep(mod, mean_snr * w) * std::exp(-w) * 2.0 * u;
  };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
  double error = 0.0;
  const double value = Quadrature::integrate(integrand, 0.0, std::sqrt(std::log(1.0 / kBepTailEpsilon)),
                                             12, 1e-11, &error);
  diag.error_estimate = error;
  diag.tail_bound = conditional_bep(mod, diag.truncation) * kBepTailEpsilon;
  diag.value = value;
  if (!std::isfinite(value) || error > kBepRelativeTolerance * std::abs(value)) {
    throw NumericFailure("average_bep quadrature did not converge: modulation=" + mod.name +
                         " mean_snr=" + std::to_string(mean_snr) +
                         " value=" + std::to_string(value) +
                         " error_estimate=" + std::to_string(error));
  }
  return diag;
}

double average_bep(const ModulationScheme& mod, double mean_snr) {
  return average_bep_with_diagnostics(mod, mean_snr).value;
}

}  // namespace jppo::channel
