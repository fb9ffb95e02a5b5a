#include "jppo/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "jppo/channel.hpp"
#include "jppo/errors.hpp"

#ifndef JPPO_DATA_DIR
#define JPPO_DATA_DIR "data"
#endif

namespace jppo::config {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects anything left unread.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = child(key)) {
      if (!v->is_number()) throw ConfigError(key_path(key), "expected a number");
      out = v->get<double>();
    }
  }

  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = child(key)) {
      if (!v->is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = static_cast<Int>(v->get<std::uint64_t>());
        } else if (v->get<std::int64_t>() >= 0) {
          out = static_cast<Int>(v->get<std::int64_t>());
        } else {
          throw ConfigError(key_path(key), "expected a nonnegative integer");
        }
      } else {
        out = static_cast<Int>(v->get<std::int64_t>());
      }
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = child(key)) {
      if (!v->is_boolean()) throw ConfigError(key_path(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = child(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  bool number_list(const std::string& key, std::vector<double>& out) {
    const json* v = child(key);
    if (!v) return false;
    if (!v->is_array()) throw ConfigError(key_path(key), "expected an array of numbers");
    out.clear();
    for (const auto& x : *v) {
      if (!x.is_number()) throw ConfigError(key_path(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return true;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

const json kEmpty = json::object();

const json& section_or_empty(Section& root, const std::string& key) {
  const json* v = root.child(key);
  return v ? *v : kEmpty;
}

}  // namespace

std::filesystem::path default_corpus_path() {
  return std::filesystem::path(JPPO_DATA_DIR) / "prompts";
}

RunConfig default_config() { return from_json(json::object()); }

RunConfig from_json(const json& j) {
  RunConfig cfg;
  cfg.corpus = default_corpus_path();
  Section root(j, "");

  root.integer("seed", cfg.seed);
  std::string corpus = cfg.corpus.string();
  root.string("corpus", corpus);
  cfg.corpus = corpus;

  auto& e = cfg.env;
  {
    Section s(section_or_empty(root, "prompt"), "prompt");
    std::string selection = "fixed";
    s.string("selection", selection);
    if (selection == "fixed") {
      e.prompt_selection = env::PromptSelection::kFixed;
    } else if (selection == "cycle") {
      e.prompt_selection = env::PromptSelection::kCycle;
    } else {
      throw ConfigError("prompt.selection", "expected \"fixed\" or \"cycle\"");
    }
    s.integer("index", e.prompt_index);
    s.finish();
  }
  {
    Section s(section_or_empty(root, "channel"), "channel");
    s.number("bandwidth_hz", e.channel.bandwidth_hz);
    s.number("distance_m", e.channel.distance_m);
    s.number("path_loss_exponent", e.channel.path_loss_exponent);
    s.number("noise_power_w", e.channel.noise_power_w);
    s.number("fading_mean", e.channel.fading_mean);
    std::string fading = "rayleigh";
    s.string("fading", fading);
    if (fading != "rayleigh" && fading != "none") {
      throw ConfigError("channel.fading", "expected \"rayleigh\" or \"none\"");
    }
    e.rayleigh_fading = fading == "rayleigh";
    std::string modulation = e.modulation.name;
    s.string("modulation", modulation);
    checked("channel.modulation", [&] { e.modulation = channel::find_modulation(modulation); });
    s.finish();
    checked("channel", [&] { e.channel.validate(); });
  }
  {
    Section s(section_or_empty(root, "constraints"), "constraints");
    auto& c = e.constraints;
    s.number("e_th_j", c.e_th_j);
    s.number("p_th_w", c.p_th_w);
    s.number("t_th_s", c.t_th_s);
    s.number("f_th", c.f_th);
    s.boolean("check_energy", c.check_energy);
    s.boolean("check_power", c.check_power);
    s.boolean("check_delay", c.check_delay);
    s.boolean("check_fidelity", c.check_fidelity);
    s.boolean("count_llm_energy_in_budget", c.count_llm_energy_in_budget);
    s.finish();
    checked("constraints", [&] { c.validate(); });
  }
  {
    Section s(section_or_empty(root, "action_space"), "action_space");
    cfg.compression_levels_explicit = s.number_list("compression_levels", e.actions.compression_levels);
    std::size_t count = 10;
    s.integer("power_level_count", count);
    if (!s.number_list("power_levels_w", e.actions.power_levels_w)) {
      if (count == 0) throw ConfigError("action_space.power_level_count", "must be >= 1");
      e.actions.power_levels_w =
          env::ActionSpace::uniform_power_levels(count, e.constraints.p_th_w);
    }
    s.finish();
    checked("action_space", [&] { e.actions.validate(e.constraints.p_th_w); });
  }
  {
    Section s(section_or_empty(root, "reward"), "reward");
    s.number("lambda_bep", e.reward.lambda_bep);
    s.number("lambda_power", e.reward.lambda_power);
    s.number("penalty", e.reward.penalty);
    s.finish();
  }
  {
    Section s(section_or_empty(root, "fidelity_weights"), "fidelity_weights");
    s.number("a1", e.weights.a1);
    s.number("a2", e.weights.a2);
    s.number("a3", e.weights.a3);
    s.finish();
    checked("fidelity_weights", [&] { e.weights.validate(); });
  }
  {
    Section s(section_or_empty(root, "fidelity"), "fidelity");
    s.integer("bits_per_token", e.fidelity.bits_per_token);
    s.integer("answer_keys", e.fidelity.answer_keys);
    s.boolean("stochastic_corruption", e.fidelity.stochastic_corruption);
    s.finish();
    if (e.fidelity.bits_per_token < 1) throw ConfigError("fidelity.bits_per_token", "must be >= 1");
    if (e.fidelity.answer_keys < 1) throw ConfigError("fidelity.answer_keys", "must be >= 1");
  }
  {
    Section s(section_or_empty(root, "compressor"), "compressor");
    s.number("protected_bonus", e.scoring.protected_bonus);
    s.boolean("protect_instruction", e.scoring.protect_instruction);
    s.boolean("protect_question", e.scoring.protect_question);
    s.finish();
    if (!(e.scoring.protected_bonus >= 0.0)) {
      throw ConfigError("compressor.protected_bonus", "must be >= 0");
    }
  }
  {
    Section s(section_or_empty(root, "plan"), "plan");
    s.integer("steps", e.plan_steps);
    std::string schedule(compressor::to_string(e.plan_schedule));
    s.string("schedule", schedule);
    checked("plan.schedule", [&] { e.plan_schedule = compressor::parse_schedule(schedule); });
    s.finish();
    if (e.plan_steps < 1) throw ConfigError("plan.steps", "must be >= 1");
  }
  {
    Section s(section_or_empty(root, "env"), "env");
    s.integer("episode_steps", e.episode_steps);
    s.number("snr_db_min", e.snr_db_min);
    s.number("snr_db_max", e.snr_db_max);
    s.finish();
  }
  {
    Section s(section_or_empty(root, "agent"), "agent");
    auto& a = cfg.agent;
    s.number("learning_rate", a.learning_rate);
    s.number("discount", a.discount);
    s.number("epsilon_start", a.epsilon_start);
    s.number("epsilon_decay", a.epsilon_decay);
    s.number("epsilon_min", a.epsilon_min);
    s.integer("batch_size", a.batch_size);
    s.integer("target_sync_every", a.target_sync_every);
    s.integer("episodes", a.episodes);
    s.integer("hidden_units", a.hidden_units);
    s.integer("replay_capacity", a.replay_capacity);
    s.integer("eval_episodes", a.eval_episodes);
    std::string optimizer(agent::to_string(a.optimizer));
    s.string("optimizer", optimizer);
    checked("agent.optimizer", [&] { a.optimizer = agent::parse_optimizer(optimizer); });
    s.number("momentum", a.momentum);
    s.number("adam_beta1", a.adam_beta1);
    s.number("adam_beta2", a.adam_beta2);
    s.number("adam_epsilon", a.adam_epsilon);
    s.finish();
    checked("agent", [&] { a.validate(); });
  }
  {
    Section s(section_or_empty(root, "oracle"), "oracle");
    s.integer("episodes_per_cell", cfg.oracle.episodes_per_cell);
    s.number("max_violation_rate", cfg.oracle.max_violation_rate);
    s.integer("workers", cfg.oracle.workers);
    s.finish();
    if (cfg.oracle.episodes_per_cell < 1) {
      throw ConfigError("oracle.episodes_per_cell", "must be >= 1");
    }
  }
  {
    Section s(section_or_empty(root, "calibration"), "calibration");
    auto& c = cfg.calibration;
    s.number("prompt_tokens", c.prompt_tokens);
    s.number("llm_time_s", c.llm_time_s);
    s.number("slm_round_fraction", c.slm_round_fraction);
    s.number("single_round_saving", c.single_round_saving);
    s.number("target_factor", c.target_factor);
    s.number("quadratic_share", c.quadratic_share);
    s.number("slm_fixed_share", c.slm_fixed_share);
    s.finish();
    checked("calibration", [&] { c.validate(); });
  }
  {
    Section s(section_or_empty(root, "resource"), "resource");
    auto& r = e.resource;
    s.integer("n_gpu_slm", r.n_gpu_slm);
    s.integer("n_gpu_llm", r.n_gpu_llm);
    s.number("p_gpu_slm_w", r.p_gpu_slm_w);
    s.number("p_gpu_llm_w", r.p_gpu_llm_w);
    const char* timing[] = {"slm_time_base_s", "slm_time_per_token_s", "llm_time_base_s",
                            "llm_time_per_token_s", "llm_time_per_token_sq_s"};
    std::size_t present = 0;
    for (const char* k : timing) present += s.has(k) ? 1 : 0;
    if (present != 0 && present != std::size(timing)) {
      throw ConfigError("resource", "give all five timing fields or none");
    }
    s.number("slm_time_base_s", r.slm_time_base_s);
    s.number("slm_time_per_token_s", r.slm_time_per_token_s);
    s.number("llm_time_base_s", r.llm_time_base_s);
    s.number("llm_time_per_token_s", r.llm_time_per_token_s);
    s.number("llm_time_per_token_sq_s", r.llm_time_per_token_sq_s);
    std::string source = present ? "manual" : "calibrated";
    s.string("source", source);
    if (source != "manual" && source != "calibrated") {
      throw ConfigError("resource.source", "expected \"manual\" or \"calibrated\"");
    }
    cfg.resource_source = source;
    s.finish();
    if (present == 0) {
      checked("calibration", [&] { r = run_calibration(cfg).params; });
    }
    checked("resource", [&] { r.validate(); });
  }
  root.finish();
  checked("", [&] { e.validate(); });
  return cfg;
}

resource::CalibrationResult run_calibration(const RunConfig& config) {
  const auto& e = config.env;
  const double reference_rate = channel::rate(e.constraints.p_th_w, e.channel.fading_mean, e.channel);
  return resource::calibrate(config.calibration, e.resource, reference_rate,
                             e.fidelity.bits_per_token);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError("", "parse error in " + path.string() + ": " + err.what());
  }
  auto cfg = from_json(j);
  if (j.contains("corpus") && cfg.corpus.is_relative()) {
    cfg.corpus = path.parent_path() / cfg.corpus;
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const auto& e = cfg.env;
  json j;
  j["seed"] = cfg.seed;
  j["corpus"] = cfg.corpus.string();
  j["prompt"] = {{"selection", e.prompt_selection == env::PromptSelection::kCycle ? "cycle" : "fixed"},
                 {"index", e.prompt_index}};
  j["channel"] = {{"bandwidth_hz", e.channel.bandwidth_hz},
                  {"distance_m", e.channel.distance_m},
                  {"path_loss_exponent", e.channel.path_loss_exponent},
                  {"noise_power_w", e.channel.noise_power_w},
                  {"fading_mean", e.channel.fading_mean},
                  {"fading", e.rayleigh_fading ? "rayleigh" : "none"},
                  {"modulation", e.modulation.name}};
  j["constraints"] = {{"e_th_j", e.constraints.e_th_j},
                      {"p_th_w", e.constraints.p_th_w},
                      {"t_th_s", e.constraints.t_th_s},
                      {"f_th", e.constraints.f_th},
                      {"check_energy", e.constraints.check_energy},
                      {"check_power", e.constraints.check_power},
                      {"check_delay", e.constraints.check_delay},
                      {"check_fidelity", e.constraints.check_fidelity},
                      {"count_llm_energy_in_budget", e.constraints.count_llm_energy_in_budget}};
  j["action_space"] = {{"compression_levels", e.actions.compression_levels},
                       {"power_levels_w", e.actions.power_levels_w}};
  j["reward"] = {{"lambda_bep", e.reward.lambda_bep},
                 {"lambda_power", e.reward.lambda_power},
                 {"penalty", e.reward.penalty}};
  j["fidelity_weights"] = {{"a1", e.weights.a1}, {"a2", e.weights.a2}, {"a3", e.weights.a3}};
  j["fidelity"] = {{"bits_per_token", e.fidelity.bits_per_token},
                   {"answer_keys", e.fidelity.answer_keys},
                   {"stochastic_corruption", e.fidelity.stochastic_corruption}};
  j["compressor"] = {{"protected_bonus", e.scoring.protected_bonus},
                     {"protect_instruction", e.scoring.protect_instruction},
                     {"protect_question", e.scoring.protect_question}};
  j["plan"] = {{"steps", e.plan_steps}, {"schedule", compressor::to_string(e.plan_schedule)}};
  j["env"] = {{"episode_steps", e.episode_steps},
              {"snr_db_min", e.snr_db_min},
              {"snr_db_max", e.snr_db_max}};
  const auto& a = cfg.agent;
  j["agent"] = {{"learning_rate", a.learning_rate},
                {"discount", a.discount},
                {"epsilon_start", a.epsilon_start},
                {"epsilon_decay", a.epsilon_decay},
                {"epsilon_min", a.epsilon_min},
                {"batch_size", a.batch_size},
                {"target_sync_every", a.target_sync_every},
                {"episodes", a.episodes},
                {"hidden_units", a.hidden_units},
                {"replay_capacity", a.replay_capacity},
                {"eval_episodes", a.eval_episodes},
                {"optimizer", agent::to_string(a.optimizer)},
                {"momentum", a.momentum},
                {"adam_beta1", a.adam_beta1},
                {"adam_beta2", a.adam_beta2},
                {"adam_epsilon", a.adam_epsilon}};
  j["oracle"] = {{"episodes_per_cell", cfg.oracle.episodes_per_cell},
                 {"max_violation_rate", cfg.oracle.max_violation_rate},
                 {"workers", cfg.oracle.workers}};
  const auto& c = cfg.calibration;
  j["calibration"] = {{"prompt_tokens", c.prompt_tokens},
                      {"llm_time_s", c.llm_time_s},
                      {"slm_round_fraction", c.slm_round_fraction},
                      {"single_round_saving", c.single_round_saving},
                      {"target_factor", c.target_factor},
                      {"quadratic_share", c.quadratic_share},
                      {"slm_fixed_share", c.slm_fixed_share}};
  const auto& r = e.resource;
  j["resource"] = {{"n_gpu_slm", r.n_gpu_slm},
                   {"n_gpu_llm", r.n_gpu_llm},
                   {"p_gpu_slm_w", r.p_gpu_slm_w},
                   {"p_gpu_llm_w", r.p_gpu_llm_w},
                   {"slm_time_base_s", r.slm_time_base_s},
                   {"slm_time_per_token_s", r.slm_time_per_token_s},
                   {"llm_time_base_s", r.llm_time_base_s},
                   {"llm_time_per_token_s", r.llm_time_per_token_s},
                   {"llm_time_per_token_sq_s", r.llm_time_per_token_sq_s},
                   {"source", cfg.resource_source}};
  return j;
}

static compressor::Prompt load_prompt_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "prompt must be a JSON object");
  Section s(j, where);
  std::string name, instruction, demonstrations, question;
  s.string("name", name);
  s.string("instruction", instruction);
  s.string("demonstrations", demonstrations);
  s.string("question", question);
  s.finish();
  compressor::Prompt prompt = [&] {
    try {
      return compressor::Prompt(instruction, demonstrations, question);
    } catch (const DomainError& e) {
      throw ConfigError(where, e.what());
    }
  }();
  prompt.name = name;
  return prompt;
}

compressor::Prompt load_prompt(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("corpus", "cannot read prompt file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError("corpus", "parse error in " + path.string() + ": " + err.what());
  }
  auto prompt = load_prompt_json(j, path.filename().string());
  if (prompt.name.empty()) prompt.name = path.stem().string();
  return prompt;
}

std::vector<compressor::Prompt> load_corpus(const std::filesystem::path& path) {
  std::vector<compressor::Prompt> corpus;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) corpus.push_back(load_prompt(f));
  } else {
    std::ifstream in(path);
    if (!in) throw ConfigError("corpus", "cannot read corpus " + path.string());
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& err) {
      throw ConfigError("corpus", "parse error in " + path.string() + ": " + err.what());
    }
    if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) {
        corpus.push_back(load_prompt_json(j[i], path.filename().string() + "[" +
                                                    std::to_string(i) + "]"));
      }
    } else {
      corpus.push_back(load_prompt_json(j, path.filename().string()));
    }
  }
  if (corpus.empty()) throw ConfigError("corpus", "prompt corpus is empty: " + path.string());
  return corpus;
}

}  // namespace jppo::config
