#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "jppo/agent.hpp"
#include "jppo/config.hpp"
#include "jppo/env.hpp"
#include "jppo/oracle.hpp"

namespace jppo::records {

// Output conventions: '.' decimal separator, '\n' line endings, fixed column
// order. Step records carry 17 significant digits so they can be replayed
// exactly; summary tables use 6 decimals for fidelity.
std::string format_full(double v);
std::string format_fixed(double v, int decimals);
std::string format_significant(double v, int digits);

inline constexpr const char* kStepHeader =
    "episode,step,c_level,p_level,kappa,power_w,snr_db,bep,f1,f2,f3,f,e_total_j,t_total_s,"
    "reward,violated";
inline constexpr const char* kTrainHeader = "episode,reward,fidelity,epsilon,loss";
inline constexpr const char* kGridHeader = "c_level,p_level,mean_reward,mean_fidelity,violation_rate";
inline constexpr const char* kCompareHeader = "schedule,opt_c,opt_p,opt_reward,gap_vs_single_step";

void write_step_records(std::ostream& out, const std::vector<env::StepRecord>& records);
void write_train_stats(std::ostream& out, const std::vector<agent::EpisodeStats>& stats);
void write_grid(std::ostream& out, const oracle::RewardGrid& grid);
void write_comparison(std::ostream& out, const std::vector<oracle::ScheduleComparison>& rows);

// Policy file: {"format_version": 1, "activation": "relu", "layer_sizes": [...],
// "layers": [{"weights": [[...] per output row], "bias": [...]}]}.
nlohmann::json policy_to_json(const agent::QNetwork& net);
agent::QNetwork policy_from_json(const nlohmann::json& j);

struct LoggedStep {
  std::size_t line = 0;  // 1-based line in the file, header is line 1
  std::size_t episode = 0;
  std::size_t step = 0;
  std::size_t c_level = 0;
  std::size_t p_level = 0;
  double kappa = 0, power_w = 0, snr_db = 0, bep = 0, f1 = 0, f2 = 0, f3 = 0, f = 0;
  double e_total_j = 0, t_total_s = 0, reward = 0;
  bool violated = false;
};

// Throws ConfigError on malformed input.
std::vector<LoggedStep> read_step_records(std::istream& in);

struct ReplayReport {
  bool passed = true;
  std::size_t rows = 0;
  std::size_t first_bad_line = 0;
  std::string field;  // first mismatching column
  double logged = 0.0;
  double recomputed = 0.0;
  std::vector<std::string> warnings;
};

// Recomputes kappa, bep, f1, f2, f, energy, delay, reward and the violation
// flag from each row's action, SNR and f3 under `config`, and compares within
// `tolerance` (relative for |value| > 1, absolute otherwise).
ReplayReport replay(const config::RunConfig& config, const std::vector<compressor::Prompt>& corpus,
                    const std::vector<LoggedStep>& rows, double tolerance = 1e-9);

nlohmann::json to_json(const ReplayReport& report);

}  // namespace jppo::records
