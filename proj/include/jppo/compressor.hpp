#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jppo::compressor {

// Monotone schedule sigma(t) with sigma(0) = 0 and sigma(1) = 1.
enum class Schedule { kLinear, kCosine, kQuadratic };

std::string_view to_string(Schedule schedule);
// Accepts "linear", "cosine", "quadratic"; throws DomainError otherwise.
Schedule parse_schedule(std::string_view name);

double sigma(Schedule schedule, double t);

// Multi-step compression toward a target factor T (T = 1/kappa).
// The surviving fraction after progress t is alpha(t) = T^(-sigma(t)).
struct CompressionPlan {
  double target_factor = 1.0;
  int steps = 1;
  Schedule schedule = Schedule::kLinear;
  // Optional explicit t_0 = 0 < t_1 < ... < t_M = 1. Empty means t_i = i / M.
  std::vector<double> time_grid;

  void validate() const;
  std::vector<double> grid() const;
};

double alpha_at(const CompressionPlan& plan, double t);
// beta(i) = alpha(t_i) / alpha(t_{i-1}), i = 1..M.
std::vector<double> step_ratios(const CompressionPlan& plan);
// Token budget after each step, derived from the cumulative alpha(t_i) so that
// rounding never drifts from the target. Nonincreasing, each >= 1, and the last
// equals max(1, round(L / T)).
std::vector<std::size_t> step_lengths(const CompressionPlan& plan, std::size_t original_length);

enum class Segment : std::uint8_t { kInstruction, kDemonstration, kQuestion };

std::string_view to_string(Segment segment);

struct Token {
  std::string text;
  Segment segment = Segment::kDemonstration;
  std::size_t position = 0;  // index in the original prompt

  friend bool operator==(const Token&, const Token&) = default;
};

// Lowercased, whitespace-delimited, ASCII punctuation stripped. Tokens that
// become empty are dropped.
std::vector<std::string> tokenize(std::string_view text);

// A prompt is (instruction, demonstrations, question); tokens are stored
// concatenated in that order with segment tags and original positions.
class Prompt {
 public:
  Prompt(std::string_view instruction, std::string_view demonstrations, std::string_view question);
  Prompt(std::vector<std::string> instruction, std::vector<std::string> demonstrations,
         std::vector<std::string> question);

  const std::vector<Token>& tokens() const noexcept { return tokens_; }
  std::size_t length() const noexcept { return tokens_.size(); }
  std::size_t instruction_length() const noexcept { return lengths_[0]; }
  std::size_t demonstration_length() const noexcept { return lengths_[1]; }
  std::size_t question_length() const noexcept { return lengths_[2]; }

  std::string name;

 private:
  std::vector<Token> tokens_;
  std::size_t lengths_[3] = {0, 0, 0};
};

// Surrogate importance model standing in for the small language model.
//
//   score = ln(1 + n / count(w)) * (1 + ln(1 + gap) / ln(1 + n)) + bonus(segment)
//
// n is the size of the current window, count(w) the occurrences of the token in
// the window and gap the distance to the nearest other occurrence (n when
// unique). Scores are recomputed from the surviving window each round, so the
// kept set depends on the path. Question tokens get 2 * protected_bonus and
// instruction tokens protected_bonus; with the default bonus both tiers dominate
// any unprotected score (at most 2 ln(1 + n)).
struct ScoringParams {
  double protected_bonus = 1000.0;
  bool protect_instruction = true;
  bool protect_question = true;
};

std::vector<double> score_tokens(std::span<const Token> tokens, const ScoringParams& params = {});
// Upper bound on any score without a segment bonus for a window of n tokens.
double max_unprotected_score(std::size_t n);

// Indices of the keep_n largest scores, returned in ascending index order.
// Ties go to the earlier position.
std::vector<std::size_t> select_top(std::span<const double> scores, std::size_t keep_n);

// Keeps the keep_n highest-scoring tokens in original order. Throws
// DomainError unless 1 <= keep_n <= tokens.size().
std::vector<Token> compress_round(std::span<const Token> tokens, std::size_t keep_n,
                                  const ScoringParams& params = {});

struct CompressionRound {
  std::size_t input_length = 0;
  std::size_t output_length = 0;
  std::vector<std::size_t> kept_positions;  // original-prompt positions
};

struct CompressionTrace {
  std::size_t original_length = 0;
  std::vector<CompressionRound> rounds;  // empty for pass-through (T = 1)
  std::vector<Token> output;

  std::size_t final_length() const noexcept { return output.size(); }
  double realized_kappa() const noexcept {
    return static_cast<double>(output.size()) / static_cast<double>(original_length);
  }
};

// Runs M rounds, re-scoring the surviving tokens each time. A target factor of
// exactly 1 is a pass-through with no rounds.
CompressionTrace compress(const Prompt& prompt, const CompressionPlan& plan,
                          const ScoringParams& params = {});

}  // namespace jppo::compressor
