#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaossync/simulate.hpp"

namespace chaossync {

/// Formats a value with 9 significant digits; byte-deterministic.
inline std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

/// Label of one error component, e.g. "e11_2131" for block 1, slot 1 wired
/// as (i,j,l,m) = (2,1,3,1).
inline std::string error_label(int block, const SwitchTuple& t) {
  return "e" + std::to_string(block) + std::to_string(t.m) + "_" + std::to_string(t.i) +
         std::to_string(t.j) + std::to_string(t.l) + std::to_string(t.m);
}

/// Euclidean norm of the stacked 2n error components per snapshot.
inline std::vector<std::pair<double, double>> error_norm_series(const ClosedLoopTrace& trace) {
  if (trace.samples.empty()) throw std::invalid_argument("error_norm_series: empty trace");
  std::vector<std::pair<double, double>> out;
  out.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    out.emplace_back(s.t, s.error.norm());
  }
  return out;
}

/// Max over time and components of |e_m(t) - e_m(0) exp(-gain t)|. A small
/// residual certifies that the controllers realise the analytic error decay.
inline double decay_residual(const ClosedLoopTrace& trace, double gain) {
  if (trace.samples.empty()) throw std::invalid_argument("decay_residual: empty trace");
  const ErrorVector& e0 = trace.samples.front().error;
  double residual = 0.0;
  for (const TraceSample& s : trace.samples) {
    const double factor = std::exp(-gain * s.t);
    for (int bk = 0; bk < 2; ++bk) {
      for (std::size_t k = 0; k < s.error.blocks[bk].size(); ++k) {
        residual = std::max(residual,
                            std::abs(s.error.blocks[bk][k] - e0.blocks[bk][k] * factor));
      }
    }
  }
  return residual;
}

/// True when V(t) = e.e/2 never increases by more than `ripple` between
/// consecutive samples.
inline bool lyapunov_monotone(const ClosedLoopTrace& trace, double ripple = 1e-12) {
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    if (trace.samples[k].lyapunov > trace.samples[k - 1].lyapunov + ripple) return false;
  }
  return true;
}

struct ComponentReport {
  std::string label;
  double initial_error = 0.0;
  double settling_time = 0.0;  // first t after which |e| stays below threshold
  bool settled = false;
};

struct ConvergenceReport {
  std::vector<ComponentReport> components;  // block 1 slots, then block 2
  double max_decay_residual = 0.0;
  double final_error_norm = 0.0;
  bool lyapunov_monotone = false;
  double threshold = 0.0;
  double horizon = 0.0;
};

/// Settling uses the last-crossing rule: the settling time is the first
/// sample time after which the component never reaches the threshold again
/// within the horizon.
inline ConvergenceReport convergence_report(const ClosedLoopTrace& trace, double threshold,
                                            double gain = 1.0) {
  if (!(threshold > 0.0)) throw std::invalid_argument("convergence_report: threshold must be > 0");
  if (trace.samples.empty()) throw std::invalid_argument("convergence_report: empty trace");

  ConvergenceReport report;
  report.threshold = threshold;
  report.horizon = trace.samples.back().t;
  report.max_decay_residual = decay_residual(trace, gain);
  report.final_error_norm = trace.samples.back().error.norm();
  report.lyapunov_monotone = chaossync::lyapunov_monotone(trace);

  for (int bk = 0; bk < 2; ++bk) {
    for (std::size_t slot = 0; slot < trace.dim; ++slot) {
      ComponentReport comp;
      comp.label = error_label(bk + 1, trace.assignment.blocks[bk][slot]);
      comp.initial_error = trace.samples.front().error.blocks[bk][slot];

      std::ptrdiff_t last_above = -1;
      for (std::size_t k = 0; k < trace.samples.size(); ++k) {
        if (std::abs(trace.samples[k].error.blocks[bk][slot]) >= threshold) {
          last_above = static_cast<std::ptrdiff_t>(k);
        }
      }
      if (last_above + 1 >= static_cast<std::ptrdiff_t>(trace.samples.size())) {
        comp.settled = false;
        comp.settling_time = report.horizon;
      } else {
        comp.settled = true;
        comp.settling_time = trace.samples[static_cast<std::size_t>(last_above + 1)].t;
      }
      report.components.push_back(std::move(comp));
    }
  }
  return report;
}

namespace detail {

inline std::string component_label(char role, int block, std::size_t component) {
  std::string label{role};
  label += std::to_string(block);
  if (component + 1 >= 10) label += "_";  // keep labels unambiguous past n = 9
  label += std::to_string(component + 1);
  return label;
}

}  // namespace detail

/// Writes a trace as CSV: a header naming every column, then one row per
/// sample. Columns: t, the eight state blocks (x,y = drives, z,w =
/// responses), the error components with their switching subscripts, and the
/// aggregate controls.
inline void export_csv(const ClosedLoopTrace& trace, std::ostream& os) {
  const std::size_t n = trace.dim;
  os << "t";
  const std::array<char, 4> roles = {'x', 'y', 'z', 'w'};
  for (char role : roles) {
    for (int bk = 1; bk <= 2; ++bk) {
      for (std::size_t k = 0; k < n; ++k) os << "," << detail::component_label(role, bk, k);
    }
  }
  for (int bk = 0; bk < 2; ++bk) {
    for (std::size_t slot = 0; slot < n; ++slot) {
      os << "," << error_label(bk + 1, trace.assignment.blocks[bk][slot]);
    }
  }
  for (int bk = 1; bk <= 2; ++bk) {
    for (std::size_t slot = 1; slot <= n; ++slot) {
      os << ",U" << bk << slot;
    }
  }
  os << "\n";

  for (const TraceSample& s : trace.samples) {
    os << format_value(s.t);
    for (const auto* group : {&s.state.drive_a, &s.state.drive_b, &s.state.response_c,
                              &s.state.response_d}) {
      for (const auto& v : *group) {
        for (double x : v) os << "," << format_value(x);
      }
    }
    for (const auto& block : s.error.blocks) {
      for (double x : block) os << "," << format_value(x);
    }
    for (const auto& block : s.control.u) {
      for (double x : block) os << "," << format_value(x);
    }
    os << "\n";
  }
}

/// Report CSV: metric,component,value rows; scalar metrics leave the
/// component column empty.
inline void export_csv(const ConvergenceReport& report, std::ostream& os) {
  os << "metric,component,value\n";
  for (const ComponentReport& comp : report.components) {
    os << "initial_error," << comp.label << "," << format_value(comp.initial_error) << "\n";
    os << "settling_time," << comp.label << "," << format_value(comp.settling_time) << "\n";
    os << "settled," << comp.label << "," << (comp.settled ? 1 : 0) << "\n";
  }
  os << "max_decay_residual,," << format_value(report.max_decay_residual) << "\n";
  os << "final_error_norm,," << format_value(report.final_error_norm) << "\n";
  os << "lyapunov_monotone,," << (report.lyapunov_monotone ? 1 : 0) << "\n";
  os << "threshold,," << format_value(report.threshold) << "\n";
  os << "horizon,," << format_value(report.horizon) << "\n";
}

template <typename T>
void export_csv(const T& value, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + destination.string() + "' for writing");
  }
  export_csv(value, out);
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing '" + destination.string() + "'");
  }
}

}  // namespace chaossync
