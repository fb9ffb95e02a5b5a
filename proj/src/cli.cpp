#include "jppo/cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "jppo/agent.hpp"
#include "jppo/channel.hpp"
#include "jppo/config.hpp"
#include "jppo/errors.hpp"
#include "jppo/oracle.hpp"
#include "jppo/records.hpp"

namespace jppo::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_logger_st("jppo");
    const char* level = std::getenv("JPPO_LOG");
    const std::string v = level ? level : "warn";
    l->set_level(v == "debug"   ? spdlog::level::debug
                 : v == "info"  ? spdlog::level::info
                 : v == "error" ? spdlog::level::err
                 : v == "off"   ? spdlog::level::off
                                : spdlog::level::warn);
    return l;
  }();
  return log;
}

config::RunConfig load_or_default(const std::string& path) {
  return path.empty() ? config::default_config() : config::load_config(path);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("--out", "cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

void report_error(std::ostream& err, const char* kind, const std::string& message,
                  const std::string& key_path = {}) {
  json j{{"error", kind}, {"message", message}};
  if (!key_path.empty()) j["key_path"] = key_path;
  err << j.dump() << '\n';
}

struct TrainArgs {
  std::string config;
  std::size_t episodes = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
};

int cmd_train(const TrainArgs& args, std::ostream& out) {
  auto cfg = load_or_default(args.config);
  if (args.episodes > 0) cfg.agent.episodes = args.episodes;
  if (args.seed_set) cfg.seed = args.seed;
  const auto corpus = config::load_corpus(cfg.corpus);
  const fs::path dir(args.out);
  fs::create_directories(dir);
  write_json(dir / "effective_config.json", config::to_json(cfg));

  env::Environment environment(cfg.env, corpus);
  logger()->info("training {} episodes, seed {}", cfg.agent.episodes, cfg.seed);
  const auto trained = agent::train(environment, cfg.agent, cfg.seed,
                                    [](const agent::EpisodeStats& s) {
                                      if (s.episode % 1000 == 0) {
                                        logger()->info("episode {} reward {:.4f} eps {:.3f}",
                                                       s.episode, s.reward, s.epsilon);
                                      }
                                    });
  {
    auto f = open_output(dir / "train_stats.csv");
    records::write_train_stats(f, trained.stats);
  }
  write_json(dir / "policy.json", records::policy_to_json(trained.online));

  const auto eval = agent::evaluate(environment, trained.online, cfg.agent.eval_episodes, cfg.seed,
                                    /*keep_records=*/true);
  {
    auto f = open_output(dir / "eval_steps.csv");
    records::write_step_records(f, eval.records);
  }
  const auto best = agent::argmax(std::vector<double>(eval.action_counts.begin(),
                                                      eval.action_counts.end()));
  const auto action = environment.actions().decode(best);
  json summary{{"episodes", cfg.agent.episodes},
               {"eval_episodes", cfg.agent.eval_episodes},
               {"eval_mean_reward", eval.mean_reward},
               {"eval_reward_stderr", eval.reward_stderr},
               {"eval_mean_fidelity", eval.mean_fidelity},
               {"eval_violation_rate", eval.violation_rate},
               {"most_selected_c_level", action.c_level},
               {"most_selected_p_level", action.p_level}};
  write_json(dir / "eval_summary.json", summary);
  out << summary.dump() << '\n';
  return kOk;
}

struct GridArgs {
  std::string config;
  std::size_t episodes_per_cell = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t workers = 0;
  std::string out = "grid.csv";
};

config::RunConfig grid_config(const GridArgs& args) {
  auto cfg = load_or_default(args.config);
  if (args.seed_set) cfg.seed = args.seed;
  if (args.episodes_per_cell > 0) cfg.oracle.episodes_per_cell = args.episodes_per_cell;
  if (args.workers > 0) cfg.oracle.workers = args.workers;
  return cfg;
}

int cmd_grid(const GridArgs& args, std::ostream& out) {
  auto cfg = grid_config(args);
  if (!cfg.compression_levels_explicit) {
    cfg.env.actions.compression_levels = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  }
  const auto corpus = config::load_corpus(cfg.corpus);
  const auto grid = oracle::reward_grid(cfg.env, corpus, cfg.oracle.episodes_per_cell, cfg.seed,
                                        cfg.oracle.workers);
  {
    auto f = open_output(args.out);
    records::write_grid(f, grid);
  }
  const auto best = oracle::constrained_optimum(grid, cfg.oracle.max_violation_rate);
  if (!best.feasible) {
    out << json{{"feasible", false}}.dump() << '\n';
    return kInfeasible;
  }
  out << json{{"feasible", true},
              {"c_level", best.c_level},
              {"p_level", best.p_level},
              {"mean_reward", best.value}}
             .dump()
      << '\n';
  return kOk;
}

int cmd_compare(const GridArgs& args, int steps, std::ostream& out) {
  auto cfg = grid_config(args);
  const auto corpus = config::load_corpus(cfg.corpus);
  if (steps < 2) throw ConfigError("--steps", "multi-step variants need --steps >= 2");
  const auto rows = oracle::compare_schedules(cfg.env, corpus, oracle::default_schedule_variants(steps),
                                              cfg.oracle.episodes_per_cell, cfg.seed,
                                              cfg.oracle.max_violation_rate, cfg.oracle.workers);
  auto f = open_output(args.out);
  records::write_comparison(f, rows);
  records::write_comparison(out, rows);
  return kOk;
}

int cmd_schedule(double target, int steps, const std::string& schedule, std::size_t length,
                 std::ostream& out) {
  compressor::CompressionPlan plan{target, steps, compressor::parse_schedule(schedule), {}};
  const auto t = plan.grid();
  const auto beta = compressor::step_ratios(plan);
  std::vector<std::size_t> n;
  if (length > 0) n = compressor::step_lengths(plan, length);
  out << "step,t,sigma,alpha,beta,n\n";
  for (std::size_t i = 1; i < t.size(); ++i) {
    out << i << ',' << records::format_significant(t[i], 12) << ','
        << records::format_significant(compressor::sigma(plan.schedule, t[i]), 12) << ','
        << records::format_significant(compressor::alpha_at(plan, t[i]), 12) << ','
        << records::format_significant(beta[i - 1], 12) << ',';
    if (!n.empty()) out << n[i - 1];
    out << '\n';
  }
  return kOk;
}

int cmd_bep(const std::string& modulation, const std::vector<double>& snr_db, std::ostream& out) {
  const auto& mod = channel::find_modulation(modulation);
  out << "mean_snr_db,bep\n";
  for (double db : snr_db) {
    out << records::format_significant(db, 12) << ','
        << records::format_significant(channel::average_bep(mod, channel::from_db(db)), 12)
        << '\n';
  }
  return kOk;
}

int cmd_calibrate(const std::string& config_path, const std::string& out_path, std::ostream& out) {
  auto cfg = load_or_default(config_path);
  const auto fit = config::run_calibration(cfg);
  cfg.env.resource = fit.params;
  cfg.resource_source = "calibrated";
  if (!out_path.empty()) write_json(out_path, config::to_json(cfg));
  const auto& a = cfg.calibration;
  out << "anchor,target,achieved,residual\n";
  out << "llm_time_s," << records::format_full(a.llm_time_s) << ','
      << records::format_full(a.llm_time_s + fit.llm_time_residual_s) << ','
      << records::format_full(fit.llm_time_residual_s) << '\n';
  const double slm_target = a.slm_round_fraction * a.llm_time_s;
  out << "slm_round_s," << records::format_full(slm_target) << ','
      << records::format_full(slm_target + fit.slm_round_residual_s) << ','
      << records::format_full(fit.slm_round_residual_s) << '\n';
  out << "single_round_saving," << records::format_full(a.single_round_saving) << ','
      << records::format_full(fit.achieved_saving) << ','
      << records::format_full(fit.saving_residual) << '\n';
  return kOk;
}

int cmd_replay(const std::string& config_path, const std::string& records_path,
               std::ostream& out) {
  const auto cfg = load_or_default(config_path);
  const auto corpus = config::load_corpus(cfg.corpus);
  std::ifstream in(records_path);
  if (!in) throw ConfigError("--records", "cannot read " + records_path);
  const auto rows = records::read_step_records(in);
  const auto report = records::replay(cfg, corpus, rows);
  for (const auto& w : report.warnings) logger()->warn("{}", w);
  out << records::to_json(report).dump() << '\n';
  return report.passed ? kOk : kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint power and prompt optimization simulator"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train the Double DQN agent and evaluate it");
  train_cmd->add_option("--config", train.config, "JSON config file");
  train_cmd->add_option("--episodes", train.episodes, "Training episodes (overrides config)");
  train_cmd->add_option("--seed", train.seed, "Root seed (overrides config)");
  train_cmd->add_option("--out", train.out, "Output directory");

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid", "Brute-force reward grid over all actions");
  grid_cmd->add_option("--config", grid.config, "JSON config file");
  grid_cmd->add_option("--episodes-per-cell", grid.episodes_per_cell, "Episodes per cell");
  grid_cmd->add_option("--seed", grid.seed, "Root seed (overrides config)");
  grid_cmd->add_option("--workers", grid.workers, "Worker threads");
  grid_cmd->add_option("--out", grid.out, "Output CSV");

  GridArgs compare;
  int compare_steps = 4;
  compare.out = "compare.csv";
  auto* compare_cmd = app.add_subcommand("compare", "Constrained optimum per compression schedule");
  compare_cmd->add_option("--config", compare.config, "JSON config file");
  compare_cmd->add_option("--episodes-per-cell", compare.episodes_per_cell, "Episodes per cell");
  compare_cmd->add_option("--seed", compare.seed, "Root seed (overrides config)");
  compare_cmd->add_option("--workers", compare.workers, "Worker threads");
  compare_cmd->add_option("--steps", compare_steps, "Steps of the multi-step variants");
  compare_cmd->add_option("--out", compare.out, "Output CSV");

  double target = 16.0;
  int steps = 4;
  std::string schedule = "linear";
  std::size_t length = 0;
  auto* schedule_cmd = app.add_subcommand("schedule", "Print a compression schedule table");
  schedule_cmd->add_option("--target", target, "Target compression factor")->required();
  schedule_cmd->add_option("--steps", steps, "Number of steps")->required();
  schedule_cmd->add_option("--schedule", schedule, "linear | cosine | quadratic");
  schedule_cmd->add_option("--length", length, "Original prompt length in tokens");

  std::string modulation = "bpsk";
  std::vector<double> snr_db;
  auto* bep_cmd = app.add_subcommand("bep", "Average bit-error probability over Rayleigh fading");
  bep_cmd->add_option("--modulation", modulation, "bpsk | dbpsk | bfsk | ncbfsk");
  bep_cmd->add_option("--snr-db", snr_db, "Mean SNR values in dB")->required()->delimiter(',');

  std::string calib_config;
  std::string calib_out;
  auto* calib_cmd = app.add_subcommand("calibrate", "Fit the timing model to its anchors");
  calib_cmd->add_option("--config", calib_config, "JSON config file");
  calib_cmd->add_option("--out", calib_out, "Write the calibrated config here");

  std::string replay_config;
  std::string replay_records;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute and verify logged step records");
  replay_cmd->add_option("--config", replay_config, "Effective config of the logged run");
  replay_cmd->add_option("--records", replay_records, "Step record CSV")->required();

  for (auto* cmd : {train_cmd, grid_cmd, compare_cmd}) {
    cmd->callback([] {});
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kConfigError;
  }
  train.seed_set = train_cmd->count("--seed") > 0;
  grid.seed_set = grid_cmd->count("--seed") > 0;
  compare.seed_set = compare_cmd->count("--seed") > 0;

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*grid_cmd) return cmd_grid(grid, out);
    if (*compare_cmd) return cmd_compare(compare, compare_steps, out);
    if (*schedule_cmd) return cmd_schedule(target, steps, schedule, length, out);
    if (*bep_cmd) return cmd_bep(modulation, snr_db, out);
    if (*calib_cmd) return cmd_calibrate(calib_config, calib_out, out);
    if (*replay_cmd) return cmd_replay(replay_config, replay_records, out);
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what(), e.key_path());
    return kConfigError;
  } catch (const DomainError& e) {
    report_error(err, "config", e.what());
    return kConfigError;
  } catch (const NumericFailure& e) {
    report_error(err, "numeric", e.what());
    return kNumericFailure;
  } catch (const InfeasibleError& e) {
    report_error(err, "infeasible", e.what());
    return kInfeasible;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return kFailure;
  }
  return kFailure;
}

}  // namespace jppo::cli
