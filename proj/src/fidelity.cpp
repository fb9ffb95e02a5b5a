#include "jppo/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>
#include <unordered_map>

#include "jppo/errors.hpp"

namespace jppo::fidelity {

void FidelityWeights::validate() const {
  if (!(a1 >= 0.0 && a2 >= 0.0 && a3 >= 0.0)) {
    throw DomainError("fidelity weights must be nonnegative");
  }
  if (std::abs(a1 + a2 + a3 - 1.0) > 1e-9) {
    throw DomainError("fidelity weights must sum to 1");
  }
}

double TransmissionModel::token_survival() const {
  return std::pow(1.0 - bep, bits_per_token);
}

std::size_t multiset_overlap(std::span<const Token> a, std::span<const Token> b) {
  std::unordered_map<std::string_view, long> counts;
  for (const auto& t : a) ++counts[t.text];
  std::size_t overlap = 0;
  for (const auto& t : b) {
    auto it = counts.find(t.text);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  return overlap;
}

double f1_representation(const Prompt& original, std::span<const Token> compressed) {
  return static_cast<double>(multiset_overlap(original.tokens(), compressed)) /
         static_cast<double>(original.length());
}

double f2_completeness(const Prompt& original, std::span<const Token> compressed,
                       double realized_kappa, const TransmissionModel& tx) {
  if (!(realized_kappa > 0.0 && realized_kappa <= 1.0)) {
    throw DomainError("realized_kappa must lie in (0, 1]");
  }
  const double expected = realized_kappa * static_cast<double>(original.length());
  const double retained = static_cast<double>(multiset_overlap(original.tokens(), compressed));
  const double base = std::clamp(retained / expected, 0.0, 1.0);
  return base * tx.token_survival();
}

std::vector<std::size_t> answer_keys(const Prompt& original, std::size_t k,
                                     const compressor::ScoringParams& scoring) {
  if (k < 1) throw DomainError("answer key count must be >= 1");
  const auto scores = compressor::score_tokens(original.tokens(), scoring);
  auto idx = compressor::select_top(scores, std::min(k, original.length()));
  std::vector<std::size_t> keys;
  keys.reserve(idx.size());
  for (std::size_t i : idx) keys.push_back(original.tokens()[i].position);
  return keys;
}

double f3_understanding(std::span<const std::size_t> keys, std::span<const Token> received) {
  if (keys.empty()) throw DomainError("f3 needs at least one answer key");
  std::size_t hits = 0;
  for (std::size_t key : keys) {
    // `received` is an order-preserving subsequence, so positions are sorted.
    auto it = std::lower_bound(received.begin(), received.end(), key,
                               [](const Token& t, std::size_t p) { return t.position < p; });
    if (it != received.end() && it->position == key) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(keys.size());
}

double f3_understanding(const Prompt& original, std::span<const Token> received, std::size_t k,
                        const compressor::ScoringParams& scoring) {
  const auto keys = answer_keys(original, k, scoring);
  return f3_understanding(keys, received);
}

std::vector<Token> transmit(std::span<const Token> tokens, const TransmissionModel& tx, Rng& rng) {
  const double survive = tx.token_survival();
  std::vector<Token> received;
  received.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (rng.uniform() < survive) received.push_back(t);
  }
  return received;
}

double overall_fidelity(double f1, double f2, double f3, const FidelityWeights& weights) {
  return weights.a1 * f1 + weights.a2 * f2 + weights.a3 * f3;
}

}  // namespace jppo::fidelity
