#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "jppo/compressor.hpp"
#include "jppo/env.hpp"

namespace jppo::oracle {

struct GridCell {
  std::size_t c_level = 0;
  std::size_t p_level = 0;
  double mean_reward = 0.0;
  double reward_stderr = 0.0;
  double mean_fidelity = 0.0;
  double violation_rate = 0.0;
};

// Mean one-shot outcome of every fixed action. Cells are row-major by
// compression level, then power level.
struct RewardGrid {
  std::size_t compression_levels = 0;
  std::size_t power_levels = 0;
  std::size_t episodes_per_cell = 0;
  std::vector<GridCell> cells;

  const GridCell& at(std::size_t c, std::size_t p) const { return cells.at(c * power_levels + p); }
};

// Episode k of every cell uses agent::eval_episode_seed(seed, k), so all cells
// see the same fading and corruption streams. Cells are split across `workers`
// threads, each with its own Environment; the result does not depend on the
// worker count.
RewardGrid reward_grid(const env::EnvConfig& config,
                       const std::vector<compressor::Prompt>& corpus,
                       std::size_t episodes_per_cell, std::uint64_t seed, std::size_t workers = 1);

struct Optimum {
  bool feasible = false;
  std::size_t c_level = 0;
  std::size_t p_level = 0;
  double value = 0.0;
};

// Best mean reward among cells whose violation rate is <= max_violation_rate.
// Ties go to the lexicographically smallest (c, p). `feasible` is false when no
// cell qualifies.
Optimum constrained_optimum(const RewardGrid& grid, double max_violation_rate = 0.0);

struct ScheduleVariant {
  std::string name;
  int steps = 1;
  compressor::Schedule schedule = compressor::Schedule::kLinear;
};

struct ScheduleComparison {
  ScheduleVariant variant;
  Optimum optimum;
  double gap_vs_single_step = 0.0;  // (opt - opt_base) / |opt_base|
  // SLM time of the prompt at the largest compression level, minus the baseline's.
  double slm_time_delta_s = 0.0;
};

// Single-step baseline plus linear, cosine and quadratic schedules at `steps`.
std::vector<ScheduleVariant> default_schedule_variants(int steps);

// Runs the same seeded grid for every variant. The baseline is the first
// variant with steps == 1, or the first variant when none has one step.
std::vector<ScheduleComparison> compare_schedules(const env::EnvConfig& config,
                                                  const std::vector<compressor::Prompt>& corpus,
                                                  const std::vector<ScheduleVariant>& variants,
                                                  std::size_t episodes_per_cell,
                                                  std::uint64_t seed, double max_violation_rate = 0.0,
                                                  std::size_t workers = 1);

}  // namespace jppo::oracle
