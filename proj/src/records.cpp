#include "jppo/records.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "jppo/channel.hpp"
#include "jppo/errors.hpp"
#include "jppo/fidelity.hpp"
#include "jppo/resource.hpp"

namespace jppo::records {

std::string format_full(double v) { return fmt::format("{:.17g}", v); }
std::string format_fixed(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }
std::string format_significant(double v, int digits) { return fmt::format("{:.{}g}", v, digits); }

void write_step_records(std::ostream& out, const std::vector<env::StepRecord>& records) {
  out << kStepHeader << '\n';
  for (const auto& r : records) {
    const auto& o = r.outcome;
    out << r.episode << ',' << r.step << ',' << r.action.c_level << ',' << r.action.p_level << ','
        << format_full(o.realized_kappa) << ',' << format_full(r.power_w) << ','
        << format_full(r.snr_db) << ',' << format_full(o.bep) << ','
        << format_full(o.fidelity.f1) << ',' << format_full(o.fidelity.f2) << ','
        << format_full(o.fidelity.f3) << ',' << format_full(o.fidelity.f) << ','
        << format_full(o.cost.e_total_j) << ',' << format_full(o.cost.t_total_s) << ','
        << format_full(r.reward) << ',' << (r.violations.any() ? 1 : 0) << '\n';
  }
}

void write_train_stats(std::ostream& out, const std::vector<agent::EpisodeStats>& stats) {
  out << kTrainHeader << '\n';
  for (const auto& s : stats) {
    out << s.episode << ',' << format_significant(s.reward, 10) << ','
        << format_fixed(s.fidelity, 6) << ',' << format_significant(s.epsilon, 10) << ','
        << format_significant(s.loss, 10) << '\n';
  }
}

void write_grid(std::ostream& out, const oracle::RewardGrid& grid) {
  out << kGridHeader << '\n';
  for (const auto& c : grid.cells) {
    out << c.c_level << ',' << c.p_level << ',' << format_fixed(c.mean_reward, 6) << ','
        << format_fixed(c.mean_fidelity, 6) << ',' << format_fixed(c.violation_rate, 6) << '\n';
  }
}

void write_comparison(std::ostream& out, const std::vector<oracle::ScheduleComparison>& rows) {
  out << kCompareHeader << '\n';
  for (const auto& r : rows) {
    out << r.variant.name << ',';
    if (r.optimum.feasible) {
      out << r.optimum.c_level << ',' << r.optimum.p_level << ','
          << format_fixed(r.optimum.value, 6) << ',';
    } else {
      out << ",,,";
    }
    if (std::isnan(r.gap_vs_single_step)) {
      out << '\n';
    } else {
      out << format_fixed(r.gap_vs_single_step, 6) << '\n';
    }
  }
}

nlohmann::json policy_to_json(const agent::QNetwork& net) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["activation"] = "relu";
  j["layer_sizes"] = net.layer_sizes();
  auto layers = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    auto rows = nlohmann::json::array();
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      rows.push_back(std::vector<double>(layer.weights.begin() + o * layer.inputs,
                                         layer.weights.begin() + (o + 1) * layer.inputs));
    }
    layers.push_back({{"weights", rows}, {"bias", layer.bias}});
  }
  j["layers"] = layers;
  return j;
}

agent::QNetwork policy_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw ConfigError("format_version", "unsupported policy format");
    }
    agent::QNetwork net(j.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto& layers = j.at("layers");
    if (layers.size() != net.layers().size()) throw ConfigError("layers", "layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& layer = net.layers()[l];
      const auto rows = layers[l].at("weights").get<std::vector<std::vector<double>>>();
      const auto bias = layers[l].at("bias").get<std::vector<double>>();
      if (rows.size() != layer.outputs || bias.size() != layer.outputs) {
        throw ConfigError("layers", "layer shape mismatch");
      }
      for (std::size_t o = 0; o < rows.size(); ++o) {
        if (rows[o].size() != layer.inputs) throw ConfigError("layers", "layer shape mismatch");
        for (std::size_t i = 0; i < layer.inputs; ++i) layer.w(o, i) = rows[o][i];
      }
      layer.bias = bias;
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("policy", e.what());
  }
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("records", "line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

std::size_t parse_count(const std::string& s, std::size_t line) {
  const double v = parse_double(s, line);
  if (v < 0 || v != std::floor(v)) {
    throw ConfigError("records", "line " + std::to_string(line) + ": bad count '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<LoggedStep> read_step_records(std::istream& in) {
  std::vector<LoggedStep> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line != kStepHeader) throw ConfigError("records", "unexpected header: " + line);
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 16) {
      throw ConfigError("records", "line " + std::to_string(n) + ": expected 16 columns");
    }
    LoggedStep s;
    s.line = n;
    s.episode = parse_count(f[0], n);
    s.step = parse_count(f[1], n);
    s.c_level = parse_count(f[2], n);
    s.p_level = parse_count(f[3], n);
    s.kappa = parse_double(f[4], n);
    s.power_w = parse_double(f[5], n);
    s.snr_db = parse_double(f[6], n);
    s.bep = parse_double(f[7], n);
    s.f1 = parse_double(f[8], n);
    s.f2 = parse_double(f[9], n);
    s.f3 = parse_double(f[10], n);
    s.f = parse_double(f[11], n);
    s.e_total_j = parse_double(f[12], n);
    s.t_total_s = parse_double(f[13], n);
    s.reward = parse_double(f[14], n);
    s.violated = parse_count(f[15], n) != 0;
    rows.push_back(s);
  }
  return rows;
}

ReplayReport replay(const config::RunConfig& config, const std::vector<compressor::Prompt>& corpus,
                    const std::vector<LoggedStep>& rows, double tolerance) {
  ReplayReport report;
  report.rows = rows.size();
  if (rows.empty()) {
    report.warnings.push_back("no step records to replay");
    return report;
  }
  env::Environment environment(config.env, corpus);
  const auto& e = config.env;

  for (const auto& row : rows) {
    auto fail = [&](const char* field, double logged, double recomputed) {
      const double scale = std::max(1.0, std::abs(logged));
      if (std::abs(logged - recomputed) <= tolerance * scale) return false;
      report.passed = false;
      report.first_bad_line = row.line;
      report.field = field;
      report.logged = logged;
      report.recomputed = recomputed;
      return true;
    };

    const env::Action action{row.c_level, row.p_level};
    e.actions.encode(action);
    const std::size_t prompt_index =
        e.prompt_selection == env::PromptSelection::kCycle ? row.episode % corpus.size()
                                                           : e.prompt_index;
    const auto& prompt = corpus.at(prompt_index);
    const auto& trace = environment.trace(prompt_index, row.c_level);
    const double power = e.actions.power_levels_w[row.p_level];

    resource::ServiceOutcome out;
    out.realized_kappa = trace.realized_kappa();
    out.bep = environment.bep_for_power(power);
    const fidelity::TransmissionModel tx{e.fidelity.bits_per_token, out.bep};
    out.fidelity.f1 = fidelity::f1_representation(prompt, trace.output);
    out.fidelity.f2 = fidelity::f2_completeness(prompt, trace.output, out.realized_kappa, tx);
    out.fidelity.f3 = row.f3;
    out.fidelity.f = fidelity::overall_fidelity(out.fidelity.f1, out.fidelity.f2, out.fidelity.f3,
                                                e.weights);
    const double snr = channel::from_db(row.snr_db);
    const double rate = e.channel.bandwidth_hz * std::log2(1.0 + snr);
    const double bits = static_cast<double>(e.fidelity.bits_per_token) *
                        static_cast<double>(trace.final_length());
    out.cost = resource::total_delay_and_energy(trace, bits, rate, power, e.resource);
    const auto violations = env::check_constraints(out, power, e.constraints);
    const double reward = env::reward(out, power, violations, e.constraints, e.reward);

    if (fail("power_w", row.power_w, power) || fail("kappa", row.kappa, out.realized_kappa) ||
        fail("bep", row.bep, out.bep) || fail("f1", row.f1, out.fidelity.f1) ||
        fail("f2", row.f2, out.fidelity.f2) || fail("f", row.f, out.fidelity.f) ||
        fail("e_total_j", row.e_total_j, out.cost.e_total_j) ||
        fail("t_total_s", row.t_total_s, out.cost.t_total_s) ||
        fail("reward", row.reward, reward) ||
        fail("violated", row.violated ? 1.0 : 0.0, violations.any() ? 1.0 : 0.0)) {
      return report;
    }
  }
  return report;
}

nlohmann::json to_json(const ReplayReport& report) {
  nlohmann::json j;
  j["passed"] = report.passed;
  j["rows"] = report.rows;
  if (!report.passed) {
    j["first_bad_line"] = report.first_bad_line;
    j["field"] = report.field;
    j["logged"] = report.logged;
    j["recomputed"] = report.recomputed;
  }
  j["warnings"] = report.warnings;
  return j;
}

}  // namespace jppo::records
