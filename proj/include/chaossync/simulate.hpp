#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaossync/controller.hpp"
#include "chaossync/scheme.hpp"
#include "chaossync/systems.hpp"

namespace chaossync {

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double t, double magnitude)
      : std::runtime_error("state diverged at t = " + std::to_string(t) +
                           " (component magnitude " + std::to_string(magnitude) + ")"),
        time_(t) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// One classical fourth-order Runge-Kutta step of the autonomous system
/// x' = field(x). Throws std::domain_error if a stage derivative is
/// non-finite.
template <typename Field>
StateVector rk4_step(Field&& field, const StateVector& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("rk4_step: dt must be positive");
  const std::size_t n = state.size();

  auto eval = [&](const StateVector& s) -> StateVector {
    StateVector d = field(s);
    if (d.size() != n) throw std::invalid_argument("rk4_step: field changed dimension");
    if (!all_finite(d)) throw std::domain_error("rk4_step: non-finite derivative");
    return d;
  };

  const StateVector k1 = eval(state);
  StateVector tmp(n);
  for (std::size_t k = 0; k < n; ++k) tmp[k] = state[k] + 0.5 * dt * k1[k];
  const StateVector k2 = eval(tmp);
  for (std::size_t k = 0; k < n; ++k) tmp[k] = state[k] + 0.5 * dt * k2[k];
  const StateVector k3 = eval(tmp);
  for (std::size_t k = 0; k < n; ++k) tmp[k] = state[k] + dt * k3[k];
  const StateVector k4 = eval(tmp);

  StateVector next(n);
  for (std::size_t k = 0; k < n; ++k) {
    next[k] = state[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  }
  return next;
}

struct SimConfig {
  EnsembleSystems systems;
  EnsembleState initial;
  ScalingConfig scaling;
  SwitchAssignment assignment;
  ControllerOptions controller;
  /// When set, the closed loop drives the responses with the reduced
  /// controllers instead of the general aggregate-and-split path.
  std::optional<ReducedVariant> variant;
  /// Forces all controls to zero (the responses run open loop).
  bool controls_enabled = true;
  double dt = 1e-3;
  double t_end = 10.0;
  std::size_t record_stride = 10;
  double divergence_limit = 1e6;
  SchemeValidationOptions validation;
};

struct TraceSample {
  double t = 0.0;
  EnsembleState state;
  ErrorVector error;
  AggregateControl control;
  double lyapunov = 0.0;  // V = e.e / 2

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

/// Time-indexed record of a closed-loop run, sampled every
/// record_stride-th step starting at t = 0.
struct ClosedLoopTrace {
  std::size_t dim = 0;
  SwitchAssignment assignment;  // kept for labelling exports
  ControllerOptions controller;
  std::vector<TraceSample> samples;

  friend bool operator==(const ClosedLoopTrace&, const ClosedLoopTrace&) = default;
};

namespace detail {

// Flat layout: drive_a[0], drive_a[1], drive_b[0], ..., response_d[1].
inline StateVector pack_ensemble(const EnsembleState& s) {
  StateVector flat;
  flat.reserve(8 * s.dim());
  for (const auto* group : {&s.drive_a, &s.drive_b, &s.response_c, &s.response_d}) {
    for (const auto& v : *group) flat.insert(flat.end(), v.begin(), v.end());
  }
  return flat;
}

inline EnsembleState unpack_ensemble(const StateVector& flat, std::size_t n) {
  EnsembleState s;
  std::size_t pos = 0;
  for (auto* group : {&s.drive_a, &s.drive_b, &s.response_c, &s.response_d}) {
    for (auto& v : *group) {
      v.assign(flat.begin() + pos, flat.begin() + pos + n);
      pos += n;
    }
  }
  return s;
}

}  // namespace detail

/// Validates a closed-loop configuration; throws std::invalid_argument with
/// the first violation message on failure.
inline void validate_sim_config(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (cfg.t_end < cfg.dt) throw std::invalid_argument("t_end must be at least dt");
  if (cfg.record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  const std::size_t n = cfg.systems.dim();
  if (cfg.initial.dim() != n || cfg.scaling.dim() != n) {
    throw std::invalid_argument("systems, initial states and scaling disagree in dimension");
  }
  if (!cfg.initial.finite()) throw std::invalid_argument("initial state has non-finite components");

  ValidationReport assignment_report = validate_assignment(cfg.assignment, n, cfg.validation);
  if (!assignment_report.ok()) {
    throw std::invalid_argument("invalid assignment: " + assignment_report.violations[0].message);
  }
  SchemeValidationOptions scaling_opts = cfg.validation;
  if (cfg.variant) scaling_opts.allow_zero_pairs = true;
  ValidationReport scaling_report = validate_scaling(cfg.scaling, scaling_opts);
  if (!scaling_report.ok()) {
    throw std::invalid_argument("invalid scaling: " + scaling_report.violations[0].message);
  }
  if (cfg.variant) require_variant_zeroing(cfg.scaling, *cfg.variant);
}

/// Integrates the coupled loop: drives run autonomously, responses receive
/// the controls synthesized from the full state. Controls are recomputed at
/// every integrator stage so the closed loop is integrated as a single ODE.
inline ClosedLoopTrace run_closed_loop(const SimConfig& cfg) {
  validate_sim_config(cfg);
  const std::size_t n = cfg.systems.dim();

  auto controls_at = [&](const EnsembleState& s,
                         const EnsembleFieldEval& fields) -> ControlVectors {
    if (!cfg.controls_enabled) return ControlVectors::zero(n);
    if (cfg.variant) {
      return reduced_control(*cfg.variant, s, cfg.scaling, cfg.assignment, cfg.systems,
                             cfg.controller);
    }
    const AggregateControl agg =
        synthesize_aggregate(s, fields, cfg.scaling, cfg.assignment, cfg.controller.gain);
    return split_control(agg, cfg.scaling, cfg.assignment, cfg.controller.policy);
  };

  auto derivative = [&](const StateVector& flat) -> StateVector {
    const EnsembleState s = detail::unpack_ensemble(flat, n);
    const EnsembleFieldEval fields = eval_fields(cfg.systems, s);
    const ControlVectors cv = controls_at(s, fields);
    EnsembleState ds;
    for (int bk = 0; bk < 2; ++bk) {
      ds.drive_a[bk] = fields.drive_a[bk];
      ds.drive_b[bk] = fields.drive_b[bk];
      ds.response_c[bk].resize(n);
      ds.response_d[bk].resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        ds.response_c[bk][k] = fields.response_c[bk][k] + cv.response_c[bk][k];
        ds.response_d[bk][k] = fields.response_d[bk][k] + cv.response_d[bk][k];
      }
    }
    return detail::pack_ensemble(ds);
  };

  const auto total_steps = static_cast<std::size_t>(std::llround(cfg.t_end / cfg.dt));

  ClosedLoopTrace trace;
  trace.dim = n;
  trace.assignment = cfg.assignment;
  trace.controller = cfg.controller;
  trace.samples.reserve(total_steps / cfg.record_stride + 2);

  auto record = [&](double t, const EnsembleState& s) {
    TraceSample sample;
    sample.t = t;
    sample.state = s;
    sample.error = compute_error(s, cfg.scaling, cfg.assignment);
    if (cfg.controls_enabled && !cfg.variant) {
      sample.control =
          synthesize_aggregate(s, cfg.scaling, cfg.assignment, cfg.systems, cfg.controller.gain);
    } else if (cfg.controls_enabled && cfg.variant) {
      // Reconstruct the aggregate the reduced controllers realise.
      const ControlVectors cv =
          reduced_control(*cfg.variant, s, cfg.scaling, cfg.assignment, cfg.systems,
                          cfg.controller);
      for (int bk = 0; bk < 2; ++bk) {
        sample.control.u[bk].assign(n, 0.0);
        for (std::size_t slot = 0; slot < n; ++slot) {
          const SwitchTuple& t2 = cfg.assignment.blocks[bk][slot];
          sample.control.u[bk][slot] =
              cfg.scaling.c[bk][t2.l - 1] * cv.response_c[bk][t2.l - 1] +
              cfg.scaling.d[bk][t2.m - 1] * cv.response_d[bk][t2.m - 1];
        }
      }
    } else {
      sample.control.u[0].assign(n, 0.0);
      sample.control.u[1].assign(n, 0.0);
    }
    double v = 0.0;
    for (const auto& block : sample.error.blocks) {
      for (double x : block) v += x * x;
    }
    sample.lyapunov = 0.5 * v;
    trace.samples.push_back(std::move(sample));
  };

  StateVector flat = detail::pack_ensemble(cfg.initial);
  record(0.0, cfg.initial);

  for (std::size_t step = 1; step <= total_steps; ++step) {
    flat = rk4_step(derivative, flat, cfg.dt);
    const double t = static_cast<double>(step) * cfg.dt;
    for (double x : flat) {
      if (!std::isfinite(x) || std::abs(x) > cfg.divergence_limit) {
        throw DivergenceError(t, std::abs(x));
      }
    }
    if (step % cfg.record_stride == 0) {
      record(t, detail::unpack_ensemble(flat, n));
    }
  }
  return trace;
}

/// Plain autonomous trajectory of one system, no controls. Used for chaos
/// sanity diagnostics.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

inline Trajectory run_uncontrolled(const SystemDef& system, const StateVector& x0, double dt,
                                   double t_end, std::size_t record_stride = 1,
                                   double divergence_limit = 1e6) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (record_stride < 1) throw std::invalid_argument("record_stride must be >= 1");
  require_dim(x0, system.dim, system.name + " initial state");

  auto field = [&system](const StateVector& s) { return system.eval(s); };
  const auto total_steps = static_cast<std::size_t>(std::llround(t_end / dt));

  Trajectory traj;
  traj.times.reserve(total_steps / record_stride + 2);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);

  StateVector x = x0;
  for (std::size_t step = 1; step <= total_steps; ++step) {
    x = rk4_step(field, x, dt);
    const double t = static_cast<double>(step) * dt;
    for (double v : x) {
      if (!std::isfinite(v) || std::abs(v) > divergence_limit) {
        throw DivergenceError(t, std::abs(v));
      }
    }
    if (step % record_stride == 0) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

}  // namespace chaossync
