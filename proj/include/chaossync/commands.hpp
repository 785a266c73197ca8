#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chaossync/analysis.hpp"
#include "chaossync/run_spec.hpp"

namespace chaossync {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDivergence = 3;

/// Command-line values that take precedence over the config file.
struct CliOverrides {
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> gain;
  std::optional<std::string> policy;
  std::optional<std::string> variant;
  std::optional<std::string> out_dir;
};

inline void apply_overrides(RunSpec& spec, const CliOverrides& overrides) {
  if (overrides.dt) spec.dt = *overrides.dt;
  if (overrides.t_end) spec.t_end = *overrides.t_end;
  if (overrides.gain) {
    if (!(*overrides.gain > 0.0)) throw ConfigError("--gain must be positive");
    spec.gain = *overrides.gain;
  }
  if (overrides.policy) {
    try {
      spec.policy = parse_policy(*overrides.policy);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--policy: ") + e.what());
    }
  }
  if (overrides.variant) {
    const std::string& v = *overrides.variant;
    if (v != "full" && v != "non_switched") {
      try {
        parse_variant(v);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--variant: ") + e.what());
      }
    }
    spec.variant = v;
  }
  if (overrides.out_dir) spec.output.directory = *overrides.out_dir;
}

/// Output directory precedence: --out flag, then CHAOSSYNC_OUT, then the
/// config (or built-in) default.
inline std::filesystem::path resolve_out_dir(const std::string& config_default,
                                             const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CHAOSSYNC_OUT")) {
    if (*env != '\0') return env;
  }
  return config_default;
}

namespace detail {

inline void print_report(const ValidationReport& report, std::ostream& os) {
  for (const Violation& v : report.violations) os << "violation: " << v.message << "\n";
  for (const Violation& v : report.warnings) os << "warning: " << v.message << "\n";
}

inline int run_spec_to_files(const RunSpec& spec, const std::filesystem::path& out_dir,
                             std::ostream& diag) {
  SimConfig cfg;
  try {
    cfg = build_sim_config(spec, SystemRegistry::builtins());
  } catch (const ConfigError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::size_t n = cfg.systems.dim();
  ValidationReport assignment_report = validate_assignment(cfg.assignment, n, cfg.validation);
  SchemeValidationOptions scaling_opts = cfg.validation;
  scaling_opts.allow_zero_pairs = cfg.variant.has_value();
  ValidationReport scaling_report = validate_scaling(cfg.scaling, scaling_opts);
  print_report(assignment_report, diag);
  print_report(scaling_report, diag);
  if (!assignment_report.ok() || !scaling_report.ok()) return kExitConfigError;

  ClosedLoopTrace trace;
  try {
    trace = run_closed_loop(cfg);
  } catch (const DivergenceError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const UnrealizableControlError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  std::filesystem::create_directories(out_dir);
  const ConvergenceReport report = convergence_report(trace, spec.report_threshold, spec.gain);
  export_csv(trace, out_dir / spec.output.trace_file);
  export_csv(report, out_dir / spec.output.report_file);

  diag << "trace:  " << (out_dir / spec.output.trace_file).string() << "\n";
  diag << "report: " << (out_dir / spec.output.report_file).string() << "\n";
  diag << "final error norm: " << format_value(report.final_error_norm) << "\n";
  diag << "max decay residual: " << format_value(report.max_decay_residual) << "\n";
  int settled = 0;
  for (const auto& comp : report.components) settled += comp.settled ? 1 : 0;
  diag << "settled components: " << settled << "/" << report.components.size() << "\n";
  return kExitOk;
}

}  // namespace detail

/// `simulate`: run the configured closed loop and write trace + report CSVs.
inline int cmd_simulate(const std::filesystem::path& config_path, const CliOverrides& overrides,
                        std::ostream& diag) {
  RunSpec spec;
  try {
    spec = load_run_spec(config_path);
    apply_overrides(spec, overrides);
  } catch (const ConfigError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const auto out_dir = resolve_out_dir(spec.output.directory, overrides.out_dir);
  return detail::run_spec_to_files(spec, out_dir, diag);
}

/// `validate`: check the assignment and scaling, and classify each slot's
/// switching pattern. Exit 0 only when no violations remain.
inline int cmd_validate(const std::filesystem::path& config_path, std::ostream& diag) {
  RunSpec spec;
  SimConfig cfg;
  try {
    spec = load_run_spec(config_path);
    cfg = build_sim_config(spec, SystemRegistry::builtins());
  } catch (const ConfigError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::size_t n = cfg.systems.dim();
  ValidationReport assignment_report = validate_assignment(cfg.assignment, n, cfg.validation);
  SchemeValidationOptions scaling_opts = cfg.validation;
  scaling_opts.allow_zero_pairs = cfg.variant.has_value();
  ValidationReport scaling_report = validate_scaling(cfg.scaling, scaling_opts);

  detail::print_report(assignment_report, diag);
  detail::print_report(scaling_report, diag);

  for (int bk = 0; bk < 2; ++bk) {
    for (std::size_t slot = 0; slot < cfg.assignment.blocks[bk].size(); ++slot) {
      const SwitchTuple& t = cfg.assignment.blocks[bk][slot];
      diag << "block " << bk + 1 << " slot " << slot + 1 << ": (" << t.i << "," << t.j << ","
           << t.l << "," << t.m << ")  pattern: " << pattern_name(classify_pattern(t)) << "\n";
    }
  }

  if (!assignment_report.ok() || !scaling_report.ok()) return kExitConfigError;
  diag << "ok\n";
  return kExitOk;
}

/// `enumerate-patterns`: count the n^4 wiring tuples per equality pattern.
inline int cmd_enumerate_patterns(int n, std::ostream& os) {
  if (n < 2 || n > 6) {
    os << "error: n must be between 2 and 6 (n = " << n
       << (n == 1 ? " admits only the non-switching tuple)" : " is out of range)") << "\n";
    return kExitConfigError;
  }
  std::array<long, kAllPatterns.size()> counts{};
  long total = 0;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      for (int l = 1; l <= n; ++l) {
        for (int m = 1; m <= n; ++m) {
          const SwitchPattern p = classify_pattern({i, j, l, m});
          ++counts[static_cast<std::size_t>(p)];
          ++total;
        }
      }
    }
  }
  long valid = 0;
  os << "pattern catalog for n = " << n << " (" << total << " tuples)\n";
  for (std::size_t k = 0; k < kAllPatterns.size(); ++k) {
    const SwitchPattern p = kAllPatterns[k];
    os << "  " << pattern_name(p) << (is_switching(p) ? "" : "  [non-switching]") << ": "
       << counts[k] << "\n";
    if (is_switching(p)) valid += counts[k];
  }
  os << "valid switching tuples: " << valid << " of " << total << "\n";
  return kExitOk;
}

namespace detail {

inline void write_figure_csv(const ClosedLoopTrace& trace, const ScalingConfig& scaling, int block,
                             std::size_t slot, const std::filesystem::path& path) {
  const SwitchTuple& t = trace.assignment.blocks[block][slot];
  const std::string drive_label = "x" + std::to_string(block + 1) + std::to_string(t.i) + "+y" +
                                  std::to_string(block + 1) + std::to_string(t.j);
  const std::string response_label = "z" + std::to_string(block + 1) + std::to_string(t.l) + "+w" +
                                     std::to_string(block + 1) + std::to_string(t.m);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << "t," << drive_label << "," << response_label << "\n";
  for (const TraceSample& s : trace.samples) {
    const double drive = scaling.a[block][t.i - 1] * s.state.drive_a[block][t.i - 1] +
                         scaling.b[block][t.j - 1] * s.state.drive_b[block][t.j - 1];
    const double response = scaling.c[block][t.l - 1] * s.state.response_c[block][t.l - 1] +
                            scaling.d[block][t.m - 1] * s.state.response_d[block][t.m - 1];
    os << format_value(s.t) << "," << format_value(drive) << "," << format_value(response) << "\n";
  }
}

inline void write_errors_csv(const ClosedLoopTrace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << "t";
  for (int bk = 0; bk < 2; ++bk) {
    for (const SwitchTuple& t : trace.assignment.blocks[bk]) {
      os << "," << error_label(bk + 1, t);
    }
  }
  os << "\n";
  for (const TraceSample& s : trace.samples) {
    os << format_value(s.t);
    for (const auto& block : s.error.blocks) {
      for (double x : block) os << "," << format_value(x);
    }
    os << "\n";
  }
}

}  // namespace detail

/// `reproduce-paper`: run the built-in reference experiment and write one CSV
/// per figure: six drive-vs-response state combinations and one with all
/// error components, plus the full trace.
inline int cmd_reproduce_paper(const std::optional<std::string>& out_flag, std::ostream& diag) {
  const RunSpec spec = reference_run_spec();
  const SimConfig cfg = build_sim_config(spec, SystemRegistry::builtins());
  const auto out_dir = resolve_out_dir(spec.output.directory, out_flag);

  ClosedLoopTrace trace;
  try {
    trace = run_closed_loop(cfg);
  } catch (const DivergenceError& e) {
    diag << "error: " << e.what() << "\n";
    return kExitDivergence;
  }

  std::filesystem::create_directories(out_dir);
  int figure = 1;
  for (int bk = 0; bk < 2; ++bk) {
    for (std::size_t slot = 0; slot < trace.dim; ++slot, ++figure) {
      const auto path = out_dir / ("figure" + std::to_string(figure) + ".csv");
      detail::write_figure_csv(trace, cfg.scaling, bk, slot, path);
      diag << path.string() << "\n";
    }
  }
  const auto errors_path = out_dir / "figure7.csv";
  detail::write_errors_csv(trace, errors_path);
  diag << errors_path.string() << "\n";
  export_csv(trace, out_dir / "trace.csv");

  const ConvergenceReport report = convergence_report(trace, spec.report_threshold, spec.gain);
  diag << "final error norm: " << format_value(report.final_error_norm) << "\n";
  diag << "max decay residual: " << format_value(report.max_decay_residual) << "\n";
  return kExitOk;
}

}  // namespace chaossync
