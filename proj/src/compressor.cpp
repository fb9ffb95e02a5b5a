#include "jppo/compressor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

#include "jppo/errors.hpp"

namespace jppo::compressor {

std::string_view to_string(Schedule schedule) {
  switch (schedule) {
    case Schedule::kLinear:
      return "linear";
    case Schedule::kCosine:
      return "cosine";
    case Schedule::kQuadratic:
      return "quadratic";
  }
  return "unknown";
}

Schedule parse_schedule(std::string_view name) {
  if (name == "linear") return Schedule::kLinear;
  if (name == "cosine") return Schedule::kCosine;
  if (name == "quadratic") return Schedule::kQuadratic;
  throw DomainError("unknown schedule '" + std::string(name) + "'");
}

double sigma(Schedule schedule, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw DomainError("schedule progress t must lie in [0, 1], got " + std::to_string(t));
  }
  switch (schedule) {
    case Schedule::kLinear:
      return t;
    case Schedule::kCosine:
      return (1.0 - std::cos(std::numbers::pi * t)) / 2.0;
    case Schedule::kQuadratic:
      return t * t;
  }
  return t;
}

void CompressionPlan::validate() const {
  if (!(target_factor >= 1.0) || !std::isfinite(target_factor)) {
    throw DomainError("target_factor must be finite and >= 1");
  }
  if (steps < 1) throw DomainError("steps must be >= 1");
  if (!time_grid.empty()) {
    if (time_grid.size() != static_cast<std::size_t>(steps) + 1) {
      throw DomainError("time_grid must have steps + 1 points");
    }
    if (time_grid.front() != 0.0 || time_grid.back() != 1.0) {
      throw DomainError("time_grid must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < time_grid.size(); ++i) {
      if (!(time_grid[i] > time_grid[i - 1])) {
        throw DomainError("time_grid must be strictly increasing");
      }
    }
  }
}

std::vector<double> CompressionPlan::grid() const {
  if (!time_grid.empty()) return time_grid;
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) t[static_cast<std::size_t>(i)] = static_cast<double>(i) / steps;
  return t;
}

double alpha_at(const CompressionPlan& plan, double t) {
  return std::pow(plan.target_factor, -sigma(plan.schedule, t));
}

std::vector<double> step_ratios(const CompressionPlan& plan) {
  plan.validate();
  const auto t = plan.grid();
  std::vector<double> beta;
  beta.reserve(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double ds = sigma(plan.schedule, t[i]) - sigma(plan.schedule, t[i - 1]);
    beta.push_back(std::pow(plan.target_factor, -ds));
  }
  return beta;
}

std::vector<std::size_t> step_lengths(const CompressionPlan& plan, std::size_t original_length) {
  plan.validate();
  if (original_length < 1) throw DomainError("original_length must be >= 1");
  const auto t = plan.grid();
  const double length = static_cast<double>(original_length);
  std::vector<std::size_t> budgets;
  budgets.reserve(t.size() - 1);
  std::size_t previous = original_length;
  for (std::size_t i = 1; i < t.size(); ++i) {
    // The final budget is pinned to L / T directly; sigma(1) = 1 would give the
    // same value up to pow() rounding.
    const double fraction = i + 1 == t.size() ? 1.0 / plan.target_factor : alpha_at(plan, t[i]);
    auto n = static_cast<std::size_t>(std::max(1.0, std::round(length * fraction)));
    n = std::min(n, previous);
    budgets.push_back(n);
    previous = n;
  }
  return budgets;
}

std::string_view to_string(Segment segment) {
  switch (segment) {
    case Segment::kInstruction:
      return "instruction";
    case Segment::kDemonstration:
      return "demonstration";
    case Segment::kQuestion:
      return "question";
  }
  return "unknown";
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  flush();
  return out;
}

Prompt::Prompt(std::string_view instruction, std::string_view demonstrations,
               std::string_view question)
    : Prompt(tokenize(instruction), tokenize(demonstrations), tokenize(question)) {}

Prompt::Prompt(std::vector<std::string> instruction, std::vector<std::string> demonstrations,
               std::vector<std::string> question) {
  lengths_[0] = instruction.size();
  lengths_[1] = demonstrations.size();
  lengths_[2] = question.size();
  tokens_.reserve(lengths_[0] + lengths_[1] + lengths_[2]);
  auto append = [this](std::vector<std::string>& words, Segment segment) {
    for (auto& w : words) {
      tokens_.push_back(Token{std::move(w), segment, tokens_.size()});
    }
  };
  append(instruction, Segment::kInstruction);
  append(demonstrations, Segment::kDemonstration);
  append(question, Segment::kQuestion);
  if (tokens_.empty()) throw DomainError("prompt must contain at least one token");
}

double max_unprotected_score(std::size_t n) {
  return 2.0 * std::log1p(static_cast<double>(n));
}

std::vector<double> score_tokens(std::span<const Token> tokens, const ScoringParams& params) {
  const std::size_t n = tokens.size();
  if (n == 0) throw DomainError("score_tokens requires a nonempty token list");

  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& tok : tokens) ++counts[tok.text];

  // Distance to the nearest other occurrence of the same text.
  std::vector<std::size_t> gap(n, n);
  std::unordered_map<std::string_view, std::size_t> last;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = last.try_emplace(tokens[i].text, i);
    if (!inserted) {
      const std::size_t d = i - it->second;
      gap[i] = std::min(gap[i], d);
      gap[it->second] = std::min(gap[it->second], d);
      it->second = i;
    }
  }

  const double window = static_cast<double>(n);
  const double log_window = std::log1p(window);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rarity = std::log1p(window / static_cast<double>(counts[tokens[i].text]));
    const double novelty = 1.0 + std::log1p(static_cast<double>(gap[i])) / log_window;
    double bonus = 0.0;
    if (params.protect_question && tokens[i].segment == Segment::kQuestion) {
      bonus = 2.0 * params.protected_bonus;
    } else if (params.protect_instruction && tokens[i].segment == Segment::kInstruction) {
      bonus = params.protected_bonus;
    }
    scores[i] = rarity * novelty + bonus;
  }
  return scores;
}

std::vector<std::size_t> select_top(std::span<const double> scores, std::size_t keep_n) {
  if (keep_n > scores.size()) throw DomainError("keep_n exceeds the number of scores");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(keep_n);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<Token> compress_round(std::span<const Token> tokens, std::size_t keep_n,
                                  const ScoringParams& params) {
  if (keep_n < 1 || keep_n > tokens.size()) {
    throw DomainError("compress_round requires 1 <= keep_n <= " + std::to_string(tokens.size()) +
                      ", got " + std::to_string(keep_n));
  }
  if (keep_n == tokens.size()) return {tokens.begin(), tokens.end()};
  const auto scores = score_tokens(tokens, params);
  std::vector<Token> kept;
  kept.reserve(keep_n);
  for (std::size_t idx : select_top(scores, keep_n)) kept.push_back(tokens[idx]);
  return kept;
}

CompressionTrace compress(const Prompt& prompt, const CompressionPlan& plan,
                          const ScoringParams& params) {
  plan.validate();
  CompressionTrace trace;
  trace.original_length = prompt.length();
  trace.output = prompt.tokens();
  if (plan.target_factor == 1.0) return trace;

  for (std::size_t budget : step_lengths(plan, prompt.length())) {
    CompressionRound round;
    round.input_length = trace.output.size();
    trace.output = compress_round(trace.output, budget, params);
    round.output_length = trace.output.size();
    round.kept_positions.reserve(trace.output.size());
    for (const auto& tok : trace.output) round.kept_positions.push_back(tok.position);
    trace.rounds.push_back(std::move(round));
  }
  return trace;
}

}  // namespace jppo::compressor
