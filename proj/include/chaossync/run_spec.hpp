#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaossync/controller.hpp"
#include "chaossync/scheme.hpp"
#include "chaossync/simulate.hpp"
#include "chaossync/systems.hpp"

namespace chaossync {

/// Raised on malformed or inconsistent configuration input; the message names
/// the offending key (parse errors from the JSON layer carry line/column).
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemChoice {
  std::string name;
  Params params;

  friend bool operator==(const SystemChoice&, const SystemChoice&) = default;
};

struct OutputSpec {
  std::string directory = "out";
  std::string trace_file = "trace.csv";
  std::string report_file = "report.csv";

  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// Everything one run needs, as read from a config file. The eight system
/// roles use the conventional letters: x = A-group drives, y = B-group
/// drives, z = C-group responses, w = D-group responses, with the digit
/// selecting the block.
struct RunSpec {
  std::array<SystemChoice, 2> drive_a, drive_b, response_c, response_d;
  EnsembleState initial;
  ScalingConfig scaling;
  SwitchAssignment assignment;
  double dt = 1e-3;
  double t_end = 10.0;
  std::size_t record_stride = 10;
  SplitPolicy policy = SplitPolicy::Even;
  double gain = 1.0;
  bool controls_enabled = true;
  /// "full", "non_switched", or one of the reduced variant names.
  std::string variant = "full";
  bool allow_non_permutation = false;
  double report_threshold = 1e-3;
  OutputSpec output;

  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

namespace cfg {

using nlohmann::json;

inline const json& require(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError("missing key '" + (ctx.empty() ? key : ctx + "." + key) + "'");
  }
  return j.at(key);
}

template <typename T>
T as(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value at '" + where + "': " + e.what());
  }
}

inline std::vector<double> vec(const json& j, const std::string& where, std::size_t n) {
  auto v = as<std::vector<double>>(j, where);
  if (v.size() != n) {
    throw ConfigError("'" + where + "' must have " + std::to_string(n) + " entries, got " +
                      std::to_string(v.size()));
  }
  return v;
}

inline SystemChoice system_choice(const json& j, const std::string& where) {
  SystemChoice choice;
  if (j.is_string()) {
    choice.name = j.get<std::string>();
  } else if (j.is_object()) {
    choice.name = as<std::string>(require(j, "name", where), where + ".name");
    if (j.contains("params")) {
      choice.params = as<Params>(j.at("params"), where + ".params");
    }
  } else {
    throw ConfigError("'" + where + "' must be a system name or {name, params}");
  }
  return choice;
}

inline json system_choice_to_json(const SystemChoice& c) {
  if (c.params.empty()) return c.name;
  return json{{"name", c.name}, {"params", c.params}};
}

}  // namespace cfg

inline RunSpec parse_run_spec(const nlohmann::json& j) {
  using cfg::as;
  using cfg::require;

  RunSpec spec;

  const auto& systems = require(j, "systems", "");
  const auto& initial = require(j, "initial_conditions", "");
  spec.drive_a[0] = cfg::system_choice(require(systems, "x1", "systems"), "systems.x1");
  spec.drive_a[1] = cfg::system_choice(require(systems, "x2", "systems"), "systems.x2");
  spec.drive_b[0] = cfg::system_choice(require(systems, "y1", "systems"), "systems.y1");
  spec.drive_b[1] = cfg::system_choice(require(systems, "y2", "systems"), "systems.y2");
  spec.response_c[0] = cfg::system_choice(require(systems, "z1", "systems"), "systems.z1");
  spec.response_c[1] = cfg::system_choice(require(systems, "z2", "systems"), "systems.z2");
  spec.response_d[0] = cfg::system_choice(require(systems, "w1", "systems"), "systems.w1");
  spec.response_d[1] = cfg::system_choice(require(systems, "w2", "systems"), "systems.w2");

  auto state = [&](const char* key) {
    return as<std::vector<double>>(require(initial, key, "initial_conditions"),
                                   std::string("initial_conditions.") + key);
  };
  spec.initial.drive_a = {state("x1"), state("x2")};
  spec.initial.drive_b = {state("y1"), state("y2")};
  spec.initial.response_c = {state("z1"), state("z2")};
  spec.initial.response_d = {state("w1"), state("w2")};
  std::size_t n = 0;
  try {
    n = spec.initial.dim();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("initial_conditions: ") + e.what());
  }
  if (n == 0) throw ConfigError("initial_conditions: states must be non-empty");

  if (j.contains("scaling")) {
    const auto& scaling = j.at("scaling");
    auto coeff = [&](const char* key) {
      return cfg::vec(require(scaling, key, "scaling"), std::string("scaling.") + key, n);
    };
    spec.scaling.a = {coeff("a1"), coeff("a2")};
    spec.scaling.b = {coeff("b1"), coeff("b2")};
    spec.scaling.c = {coeff("c1"), coeff("c2")};
    spec.scaling.d = {coeff("d1"), coeff("d2")};
  } else {
    spec.scaling = ScalingConfig::identity(n);
  }

  const auto& assignment = require(j, "assignment", "");
  auto triplets = [&](const char* key) {
    auto raw = as<std::vector<std::array<int, 3>>>(require(assignment, key, "assignment"),
                                                   std::string("assignment.") + key);
    if (raw.size() != n) {
      throw ConfigError("'assignment." + std::string(key) + "' must list " + std::to_string(n) +
                        " (i,j,l) triplets");
    }
    return raw;
  };
  spec.assignment = SwitchAssignment::from_triplets(triplets("block1"), triplets("block2"));

  if (j.contains("integrator")) {
    const auto& integ = j.at("integrator");
    if (integ.contains("dt")) spec.dt = as<double>(integ.at("dt"), "integrator.dt");
    if (integ.contains("t_end")) spec.t_end = as<double>(integ.at("t_end"), "integrator.t_end");
    if (integ.contains("record_stride")) {
      spec.record_stride = as<std::size_t>(integ.at("record_stride"), "integrator.record_stride");
    }
  }

  if (j.contains("controller")) {
    const auto& ctrl = j.at("controller");
    if (ctrl.contains("policy")) {
      try {
        spec.policy = parse_policy(as<std::string>(ctrl.at("policy"), "controller.policy"));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("controller.policy: ") + e.what());
      }
    }
    if (ctrl.contains("gain")) spec.gain = as<double>(ctrl.at("gain"), "controller.gain");
    if (ctrl.contains("enabled")) {
      spec.controls_enabled = as<bool>(ctrl.at("enabled"), "controller.enabled");
    }
  }
  if (!(spec.gain > 0.0)) throw ConfigError("controller.gain must be positive");

  if (j.contains("variant")) {
    spec.variant = as<std::string>(j.at("variant"), "variant");
    if (spec.variant != "full" && spec.variant != "non_switched") {
      try {
        parse_variant(spec.variant);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("variant: ") + e.what());
      }
    }
  }

  if (j.contains("validation")) {
    const auto& val = j.at("validation");
    if (val.contains("allow_non_permutation")) {
      spec.allow_non_permutation =
          as<bool>(val.at("allow_non_permutation"), "validation.allow_non_permutation");
    }
  }

  if (j.contains("report")) {
    const auto& rep = j.at("report");
    if (rep.contains("threshold")) {
      spec.report_threshold = as<double>(rep.at("threshold"), "report.threshold");
    }
  }

  if (j.contains("output")) {
    const auto& out = j.at("output");
    if (out.contains("directory")) {
      spec.output.directory = as<std::string>(out.at("directory"), "output.directory");
    }
    if (out.contains("trace")) {
      spec.output.trace_file = as<std::string>(out.at("trace"), "output.trace");
    }
    if (out.contains("report")) {
      spec.output.report_file = as<std::string>(out.at("report"), "output.report");
    }
  }

  return spec;
}

inline nlohmann::json to_json(const RunSpec& spec) {
  using nlohmann::json;
  json j;
  j["systems"] = {{"x1", cfg::system_choice_to_json(spec.drive_a[0])},
                  {"x2", cfg::system_choice_to_json(spec.drive_a[1])},
                  {"y1", cfg::system_choice_to_json(spec.drive_b[0])},
                  {"y2", cfg::system_choice_to_json(spec.drive_b[1])},
                  {"z1", cfg::system_choice_to_json(spec.response_c[0])},
                  {"z2", cfg::system_choice_to_json(spec.response_c[1])},
                  {"w1", cfg::system_choice_to_json(spec.response_d[0])},
                  {"w2", cfg::system_choice_to_json(spec.response_d[1])}};
  j["initial_conditions"] = {{"x1", spec.initial.drive_a[0]},   {"x2", spec.initial.drive_a[1]},
                             {"y1", spec.initial.drive_b[0]},   {"y2", spec.initial.drive_b[1]},
                             {"z1", spec.initial.response_c[0]}, {"z2", spec.initial.response_c[1]},
                             {"w1", spec.initial.response_d[0]}, {"w2", spec.initial.response_d[1]}};
  j["scaling"] = {{"a1", spec.scaling.a[0]}, {"a2", spec.scaling.a[1]},
                  {"b1", spec.scaling.b[0]}, {"b2", spec.scaling.b[1]},
                  {"c1", spec.scaling.c[0]}, {"c2", spec.scaling.c[1]},
                  {"d1", spec.scaling.d[0]}, {"d2", spec.scaling.d[1]}};
  auto block_triplets = [](const std::vector<SwitchTuple>& block) {
    std::vector<std::array<int, 3>> out;
    out.reserve(block.size());
    for (const SwitchTuple& t : block) out.push_back({t.i, t.j, t.l});
    return out;
  };
  j["assignment"] = {{"block1", block_triplets(spec.assignment.blocks[0])},
                     {"block2", block_triplets(spec.assignment.blocks[1])}};
  j["integrator"] = {{"dt", spec.dt}, {"t_end", spec.t_end}, {"record_stride", spec.record_stride}};
  j["controller"] = {{"policy", std::string(policy_name(spec.policy))},
                     {"gain", spec.gain},
                     {"enabled", spec.controls_enabled}};
  j["variant"] = spec.variant;
  j["validation"] = {{"allow_non_permutation", spec.allow_non_permutation}};
  j["report"] = {{"threshold", spec.report_threshold}};
  j["output"] = {{"directory", spec.output.directory},
                 {"trace", spec.output.trace_file},
                 {"report", spec.output.report_file}};
  return j;
}

inline RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed config '" + path.string() + "': " + e.what());
  }
  return parse_run_spec(j);
}

/// Resolves system names and variant selection into a runnable SimConfig.
/// A reduced variant imposes its zeroing on the configured scaling; the
/// non-switched baseline replaces the assignment with the identity wiring.
inline SimConfig build_sim_config(const RunSpec& spec, const SystemRegistry& registry) {
  SimConfig cfg;
  auto resolve = [&](const SystemChoice& choice) {
    try {
      return registry.lookup(choice.name, choice.params);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("systems: ") + e.what());
    }
  };
  cfg.systems.drive_a = {resolve(spec.drive_a[0]), resolve(spec.drive_a[1])};
  cfg.systems.drive_b = {resolve(spec.drive_b[0]), resolve(spec.drive_b[1])};
  cfg.systems.response_c = {resolve(spec.response_c[0]), resolve(spec.response_c[1])};
  cfg.systems.response_d = {resolve(spec.response_d[0]), resolve(spec.response_d[1])};

  cfg.initial = spec.initial;
  cfg.scaling = spec.scaling;
  cfg.assignment = spec.assignment;
  cfg.controller = {spec.policy, spec.gain};
  cfg.controls_enabled = spec.controls_enabled;
  cfg.dt = spec.dt;
  cfg.t_end = spec.t_end;
  cfg.record_stride = spec.record_stride;
  cfg.validation.allow_non_permutation = spec.allow_non_permutation;

  if (spec.variant == "non_switched") {
    cfg.assignment = SwitchAssignment::non_switching(cfg.systems.dim());
    cfg.validation.allow_non_switching = true;
  } else if (spec.variant != "full") {
    const ReducedVariant v = parse_variant(spec.variant);
    cfg.variant = v;
    cfg.scaling = apply_variant_zeroing(spec.scaling, v);
  }
  return cfg;
}

/// The built-in reference experiment: Genesio-Tesi in every first-block role,
/// Lu in every second-block role, identity scaling and a fixed mixed-pattern
/// switching assignment. The run pins the w-channel split: only the state
/// combinations are controlled, and under the even split the free response
/// directions escape the Genesio-Tesi basin near t = 1.7 (finite-time
/// blow-up); the w-channel split pins every w component and stays bounded.
inline RunSpec reference_run_spec() {
  RunSpec spec;
  const SystemChoice gt{"genesio_tesi", {}};
  const SystemChoice lu{"lu", {}};
  spec.drive_a = {gt, lu};
  spec.drive_b = {gt, lu};
  spec.response_c = {gt, lu};
  spec.response_d = {gt, lu};
  spec.initial.drive_a = {{{2.0, -3.0, 1.0}, {-2.5, 1.0, -3.0}}};
  spec.initial.drive_b = {{{1.0, 0.0, -1.0}, {-1.5, 2.0, 1.5}}};
  spec.initial.response_c = {{{4.0, -3.5, 3.0}, {-0.5, 1.5, 0.0}}};
  spec.initial.response_d = {{{1.0, -1.5, -2.0}, {-1.0, 1.5, 3.0}}};
  spec.scaling = ScalingConfig::identity(3);
  spec.assignment = SwitchAssignment::from_triplets({{2, 1, 3}, {1, 3, 2}, {3, 2, 1}},
                                                    {{3, 2, 2}, {1, 3, 3}, {2, 1, 1}});
  spec.policy = SplitPolicy::WChannel;
  return spec;
}

}  // namespace chaossync
