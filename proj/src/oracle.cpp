#include "jppo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "jppo/agent.hpp"
#include "jppo/errors.hpp"
#include "jppo/resource.hpp"
#include "jppo/running_stats.hpp"

namespace jppo::oracle {
namespace {

GridCell evaluate_cell(env::Environment& environment, std::size_t c, std::size_t p,
                       std::size_t episodes, std::uint64_t seed) {
  GridCell cell{c, p};
  const env::Action action{c, p};
  double sum = 0.0;
  RunningStats spread;
  std::size_t steps = 0;
  std::size_t violated = 0;
  for (std::size_t ep = 0; ep < episodes; ++ep) {
    environment.reset(agent::eval_episode_seed(seed, ep), ep);
    double episode_reward = 0.0;
    bool terminal = false;
    while (!terminal) {
      const auto step = environment.step(action);
      terminal = step.terminal;
      episode_reward += step.reward;
      cell.mean_fidelity += step.record.outcome.fidelity.f;
      if (step.record.violations.any()) ++violated;
      ++steps;
    }
    sum += episode_reward;
    spread.add(episode_reward);
  }
  cell.mean_reward = sum / static_cast<double>(episodes);
  cell.reward_stderr = spread.standard_error();
  cell.mean_fidelity /= static_cast<double>(steps);
  cell.violation_rate = static_cast<double>(violated) / static_cast<double>(steps);
  return cell;
}

}  // namespace

RewardGrid reward_grid(const env::EnvConfig& config,
                       const std::vector<compressor::Prompt>& corpus,
                       std::size_t episodes_per_cell, std::uint64_t seed, std::size_t workers) {
  if (episodes_per_cell < 1) throw DomainError("episodes_per_cell must be >= 1");
  RewardGrid grid;
  grid.compression_levels = config.actions.compression_count();
  grid.power_levels = config.actions.power_count();
  grid.episodes_per_cell = episodes_per_cell;
  const std::size_t total = grid.compression_levels * grid.power_levels;
  grid.cells.resize(total);
  workers = std::clamp<std::size_t>(workers, 1, total);

  // Worker w handles cells w, w + workers, ...; every cell is computed from
  // the same seeds regardless of which worker runs it.
  auto run = [&](std::size_t w) {
    env::Environment environment(config, corpus);
    for (std::size_t idx = w; idx < total; idx += workers) {
      grid.cells[idx] = evaluate_cell(environment, idx / grid.power_levels,
                                      idx % grid.power_levels, episodes_per_cell, seed);
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  return grid;
}

Optimum constrained_optimum(const RewardGrid& grid, double max_violation_rate) {
  if (grid.cells.empty()) throw DomainError("reward grid is empty");
  Optimum best;
  for (const auto& cell : grid.cells) {
    if (cell.violation_rate > max_violation_rate) continue;
    // Cells are visited in lexicographic order, so strict > keeps the first.
    if (!best.feasible || cell.mean_reward > best.value) {
      best = Optimum{true, cell.c_level, cell.p_level, cell.mean_reward};
    }
  }
  return best;
}

std::vector<ScheduleVariant> default_schedule_variants(int steps) {
  return {
      {"single-step", 1, compressor::Schedule::kLinear},
      {"linear", steps, compressor::Schedule::kLinear},
      {"cosine", steps, compressor::Schedule::kCosine},
      {"quadratic", steps, compressor::Schedule::kQuadratic},
  };
}

std::vector<ScheduleComparison> compare_schedules(const env::EnvConfig& config,
                                                  const std::vector<compressor::Prompt>& corpus,
                                                  const std::vector<ScheduleVariant>& variants,
                                                  std::size_t episodes_per_cell,
                                                  std::uint64_t seed, double max_violation_rate,
                                                  std::size_t workers) {
  if (variants.size() < 2) throw DomainError("compare_schedules needs at least two variants");
  std::size_t base = 0;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    if (variants[i].steps == 1) {
      base = i;
      break;
    }
  }

  const auto& prompt = corpus.at(config.prompt_index);
  const double max_factor = *std::max_element(config.actions.compression_levels.begin(),
                                              config.actions.compression_levels.end());
  std::vector<ScheduleComparison> rows;
  std::vector<double> slm_times;
  for (const auto& variant : variants) {
    env::EnvConfig cfg = config;
    cfg.plan_steps = variant.steps;
    cfg.plan_schedule = variant.schedule;
    const auto grid = reward_grid(cfg, corpus, episodes_per_cell, seed, workers);
    rows.push_back(ScheduleComparison{variant, constrained_optimum(grid, max_violation_rate)});
    const auto trace = compressor::compress(prompt, cfg.plan_for(max_factor), cfg.scoring);
    slm_times.push_back(resource::slm_time(trace, cfg.resource));
  }
  const Optimum& reference = rows[base].optimum;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].slm_time_delta_s = slm_times[i] - slm_times[base];
    if (rows[i].optimum.feasible && reference.feasible && reference.value != 0.0) {
      rows[i].gap_vs_single_step =
          (rows[i].optimum.value - reference.value) / std::abs(reference.value);
    } else {
      rows[i].gap_vs_single_step = std::nan("");
    }
  }
  return rows;
}

}  // namespace jppo::oracle
