#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jppo/compressor.hpp"
#include "jppo/rng.hpp"

namespace jppo::fidelity {

using compressor::Prompt;
using compressor::Token;

// Weights of the three components; nonnegative and summing to 1.
struct FidelityWeights {
  double a1 = 0.4;
  double a2 = 0.3;
  double a3 = 0.3;

  void validate() const;
};

// Per-token channel: a token of `bits_per_token` bits survives when none of
// its bits is in error.
struct TransmissionModel {
  int bits_per_token = 16;
  double bep = 0.0;

  double token_survival() const;
};

struct FidelityReport {
  double f1 = 0.0;  // representation accuracy
  double f2 = 0.0;  // transmission completeness
  double f3 = 0.0;  // understanding accuracy
  double f = 0.0;   // weighted sum
};

// Multiset, position-insensitive overlap of token texts.
std::size_t multiset_overlap(std::span<const Token> a, std::span<const Token> b);

// overlap(original, compressed) / L_x.
double f1_representation(const Prompt& original, std::span<const Token> compressed);

// clamp(retained / (kappa * L_x), 0, 1) * (1 - bep)^bits_per_token.
double f2_completeness(const Prompt& original, std::span<const Token> compressed,
                       double realized_kappa, const TransmissionModel& tx);

// Original positions of the K highest-scoring tokens of the uncompressed prompt.
// Ties go to the earlier position; K is capped at the prompt length.
std::vector<std::size_t> answer_keys(const Prompt& original, std::size_t k,
                                     const compressor::ScoringParams& scoring = {});

// Fraction of answer keys whose position is present in `received`.
double f3_understanding(std::span<const std::size_t> keys, std::span<const Token> received);
double f3_understanding(const Prompt& original, std::span<const Token> received, std::size_t k,
                        const compressor::ScoringParams& scoring = {});

// Deletes each token independently with probability 1 - token_survival().
std::vector<Token> transmit(std::span<const Token> tokens, const TransmissionModel& tx, Rng& rng);

double overall_fidelity(double f1, double f2, double f3, const FidelityWeights& weights);

}  // namespace jppo::fidelity
