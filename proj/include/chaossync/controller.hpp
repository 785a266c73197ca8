#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chaossync/scheme.hpp"
#include "chaossync/systems.hpp"

namespace chaossync {

/// Vector fields of the eight systems, laid out like EnsembleState.
struct EnsembleSystems {
  std::array<SystemDef, 2> drive_a, drive_b, response_c, response_d;

  /// Common dimension shared by all eight systems.
  std::size_t dim() const {
    const std::size_t n = drive_a[0].dim;
    for (const auto* group : {&drive_a, &drive_b, &response_c, &response_d}) {
      for (const auto& def : *group) {
        if (def.dim != n) {
          throw std::invalid_argument("ensemble systems disagree in dimension");
        }
      }
    }
    return n;
  }
};

/// Field values of all eight systems at one state snapshot.
struct EnsembleFieldEval {
  std::array<StateVector, 2> drive_a, drive_b, response_c, response_d;
};

inline EnsembleFieldEval eval_fields(const EnsembleSystems& systems, const EnsembleState& state) {
  EnsembleFieldEval out;
  for (int bk = 0; bk < 2; ++bk) {
    out.drive_a[bk] = systems.drive_a[bk].eval(state.drive_a[bk]);
    out.drive_b[bk] = systems.drive_b[bk].eval(state.drive_b[bk]);
    out.response_c[bk] = systems.response_c[bk].eval(state.response_c[bk]);
    out.response_d[bk] = systems.response_d[bk].eval(state.response_d[bk]);
  }
  return out;
}

/// The aggregate control entering each error component's dynamics, one
/// n-vector per block.
struct AggregateControl {
  std::array<std::vector<double>, 2> u;

  friend bool operator==(const AggregateControl&, const AggregateControl&) = default;
};

/// The four physical controller vectors: response_c holds the controls
/// injected into the C-group responses (indexed by the channel component l),
/// response_d those injected into the D-group responses (indexed by m).
struct ControlVectors {
  std::array<std::vector<double>, 2> response_c, response_d;

  static ControlVectors zero(std::size_t n) {
    ControlVectors cv;
    for (int bk = 0; bk < 2; ++bk) {
      cv.response_c[bk].assign(n, 0.0);
      cv.response_d[bk].assign(n, 0.0);
    }
    return cv;
  }

  friend bool operator==(const ControlVectors&, const ControlVectors&) = default;
};

/// Aggregate control for each block and slot m with wiring (i, j, l, m):
///   U[m] = a[i]*fa[i] + b[j]*gb[j] - c[l]*hc[l] - d[m]*kd[m] + gain*e[m]
/// where fa..kd are the eight field values at the current states. Substituted
/// into the error dynamics this yields e' = -gain*e.
inline AggregateControl synthesize_aggregate(const EnsembleState& state,
                                             const EnsembleFieldEval& fields,
                                             const ScalingConfig& scaling,
                                             const SwitchAssignment& assignment,
                                             double gain = 1.0) {
  const std::size_t n = state.dim();
  const ErrorVector e = compute_error(state, scaling, assignment);
  AggregateControl control;
  for (int bk = 0; bk < 2; ++bk) {
    control.u[bk].resize(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
      const SwitchTuple& t = assignment.blocks[bk][slot];
      control.u[bk][slot] = scaling.a[bk][t.i - 1] * fields.drive_a[bk][t.i - 1] +
                            scaling.b[bk][t.j - 1] * fields.drive_b[bk][t.j - 1] -
                            scaling.c[bk][t.l - 1] * fields.response_c[bk][t.l - 1] -
                            scaling.d[bk][t.m - 1] * fields.response_d[bk][t.m - 1] +
                            gain * e.blocks[bk][slot];
    }
  }
  return control;
}

inline AggregateControl synthesize_aggregate(const EnsembleState& state,
                                             const ScalingConfig& scaling,
                                             const SwitchAssignment& assignment,
                                             const EnsembleSystems& systems, double gain = 1.0) {
  return synthesize_aggregate(state, eval_fields(systems, state), scaling, assignment, gain);
}

/// A slot whose aggregate control is nonzero but whose c and d coefficients
/// are both zero cannot be realised by any physical controller.
class UnrealizableControlError : public std::runtime_error {
 public:
  UnrealizableControlError(int block, int slot)
      : std::runtime_error("unrealizable control at block " + std::to_string(block) + " slot " +
                           std::to_string(slot) +
                           ": both channel coefficients are zero with nonzero aggregate"),
        block_(block),
        slot_(slot) {}

  int block() const { return block_; }
  int slot() const { return slot_; }

 private:
  int block_, slot_;
};

/// How to apportion each slot's aggregate between its two channels. The
/// aggregate is underdetermined by one degree of freedom per slot; the error
/// dynamics are policy-independent but individual response trajectories are
/// not.
enum class SplitPolicy {
  Even,      // both channels carry half the aggregate when both coefficients are nonzero
  WChannel,  // route everything through the d-group response when possible
};

struct ControllerOptions {
  SplitPolicy policy = SplitPolicy::Even;
  double gain = 1.0;

  friend bool operator==(const ControllerOptions&, const ControllerOptions&) = default;
};

inline std::string_view policy_name(SplitPolicy p) {
  return p == SplitPolicy::Even ? "even" : "w-channel";
}

inline SplitPolicy parse_policy(std::string_view name) {
  if (name == "even") return SplitPolicy::Even;
  if (name == "w-channel" || name == "w_channel") return SplitPolicy::WChannel;
  throw std::invalid_argument("unknown split policy '" + std::string(name) +
                              "' (expected \"even\" or \"w-channel\")");
}

/// Splits the aggregate into the four physical controls so that for every
/// slot c[l]*u_c[l] + d[m]*u_d[m] recombines to U[m]. Requires l-indices to
/// form a permutation per block so that each c-channel entry is written
/// exactly once.
inline ControlVectors split_control(const AggregateControl& control, const ScalingConfig& scaling,
                                    const SwitchAssignment& assignment, SplitPolicy policy) {
  const std::size_t n = scaling.dim();
  detail::require_assignment_dims(assignment, n);
  ControlVectors cv = ControlVectors::zero(n);
  for (int bk = 0; bk < 2; ++bk) {
    if (control.u[bk].size() != n) {
      throw std::invalid_argument("aggregate control dimension mismatch");
    }
    for (std::size_t slot = 0; slot < n; ++slot) {
      const SwitchTuple& t = assignment.blocks[bk][slot];
      const double cc = scaling.c[bk][t.l - 1];
      const double dc = scaling.d[bk][t.m - 1];
      const double agg = control.u[bk][slot];
      if (cc == 0.0 && dc == 0.0) {
        if (agg != 0.0) throw UnrealizableControlError(bk + 1, static_cast<int>(slot) + 1);
        continue;
      }
      switch (policy) {
        case SplitPolicy::Even:
          if (cc != 0.0 && dc != 0.0) {
            cv.response_c[bk][t.l - 1] = agg / (2.0 * cc);
            cv.response_d[bk][t.m - 1] = agg / (2.0 * dc);
          } else if (cc != 0.0) {
            cv.response_c[bk][t.l - 1] = agg / cc;
          } else {
            cv.response_d[bk][t.m - 1] = agg / dc;
          }
          break;
        case SplitPolicy::WChannel:
          if (dc != 0.0) {
            cv.response_d[bk][t.m - 1] = agg / dc;
          } else {
            cv.response_c[bk][t.l - 1] = agg / cc;
          }
          break;
      }
    }
  }
  return cv;
}

// ---------------------------------------------------------------------------
// Reduced schemes
// ---------------------------------------------------------------------------

/// Special cases obtained by zeroing parts of the scaling. Block-only
/// variants drop one error block entirely; channel-only variants drop one
/// response group; the four single-response variants combine both.
enum class ReducedVariant {
  Block1Only,   // second-block scaling zero
  Block2Only,   // first-block scaling zero
  CChannelOnly, // d pair zero; controls through the C-group responses
  DChannelOnly, // c pair zero; controls through the D-group responses
  Block1COnly,  // second block and d[0] zero
  Block1DOnly,  // second block and c[0] zero
  Block2COnly,  // first block and d[1] zero
  Block2DOnly,  // first block and c[1] zero
};

inline constexpr std::array<ReducedVariant, 8> kAllReducedVariants = {
    ReducedVariant::Block1Only,  ReducedVariant::Block2Only,  ReducedVariant::CChannelOnly,
    ReducedVariant::DChannelOnly, ReducedVariant::Block1COnly, ReducedVariant::Block1DOnly,
    ReducedVariant::Block2COnly, ReducedVariant::Block2DOnly,
};

inline std::string_view variant_name(ReducedVariant v) {
  switch (v) {
    case ReducedVariant::Block1Only:   return "block1_only";
    case ReducedVariant::Block2Only:   return "block2_only";
    case ReducedVariant::CChannelOnly: return "c_channel_only";
    case ReducedVariant::DChannelOnly: return "d_channel_only";
    case ReducedVariant::Block1COnly:  return "block1_c_only";
    case ReducedVariant::Block1DOnly:  return "block1_d_only";
    case ReducedVariant::Block2COnly:  return "block2_c_only";
    case ReducedVariant::Block2DOnly:  return "block2_d_only";
  }
  return "?";
}

inline ReducedVariant parse_variant(std::string_view name) {
  for (ReducedVariant v : kAllReducedVariants) {
    if (variant_name(v) == name) return v;
  }
  throw std::invalid_argument("unknown reduced variant '" + std::string(name) + "'");
}

namespace detail {

struct VariantZeroing {
  std::array<bool, 2> block_zero{false, false};  // zero a,b,c,d of that block
  std::array<bool, 2> c_zero{false, false};
  std::array<bool, 2> d_zero{false, false};
};

inline VariantZeroing variant_zeroing(ReducedVariant v) {
  VariantZeroing z;
  switch (v) {
    case ReducedVariant::Block1Only:   z.block_zero[1] = true; break;
    case ReducedVariant::Block2Only:   z.block_zero[0] = true; break;
    case ReducedVariant::CChannelOnly: z.d_zero = {true, true}; break;
    case ReducedVariant::DChannelOnly: z.c_zero = {true, true}; break;
    case ReducedVariant::Block1COnly:  z.block_zero[1] = true; z.d_zero[0] = true; break;
    case ReducedVariant::Block1DOnly:  z.block_zero[1] = true; z.c_zero[0] = true; break;
    case ReducedVariant::Block2COnly:  z.block_zero[0] = true; z.d_zero[1] = true; break;
    case ReducedVariant::Block2DOnly:  z.block_zero[0] = true; z.c_zero[1] = true; break;
  }
  return z;
}

inline bool vec_zero(const std::vector<double>& v) {
  for (double x : v) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace detail

/// Zeroes the scaling parts the variant requires, leaving the rest intact.
inline ScalingConfig apply_variant_zeroing(ScalingConfig scaling, ReducedVariant v) {
  const auto z = detail::variant_zeroing(v);
  const std::size_t n = scaling.dim();
  const std::vector<double> zeros(n, 0.0);
  for (int bk = 0; bk < 2; ++bk) {
    if (z.block_zero[bk]) {
      scaling.a[bk] = zeros;
      scaling.b[bk] = zeros;
      scaling.c[bk] = zeros;
      scaling.d[bk] = zeros;
    }
    if (z.c_zero[bk]) scaling.c[bk] = zeros;
    if (z.d_zero[bk]) scaling.d[bk] = zeros;
  }
  return scaling;
}

/// Throws unless every scaling entry the variant requires to vanish is zero.
inline void require_variant_zeroing(const ScalingConfig& scaling, ReducedVariant v) {
  const auto z = detail::variant_zeroing(v);
  for (int bk = 0; bk < 2; ++bk) {
    const bool block_ok =
        !z.block_zero[bk] ||
        (detail::vec_zero(scaling.a[bk]) && detail::vec_zero(scaling.b[bk]) &&
         detail::vec_zero(scaling.c[bk]) && detail::vec_zero(scaling.d[bk]));
    const bool c_ok = !z.c_zero[bk] || detail::vec_zero(scaling.c[bk]);
    const bool d_ok = !z.d_zero[bk] || detail::vec_zero(scaling.d[bk]);
    if (!block_ok || !c_ok || !d_ok) {
      throw std::invalid_argument(std::string("scaling is not zeroed as variant '") +
                                  std::string(variant_name(v)) + "' requires");
    }
  }
}

/// Closed-form reduced controllers. Channel-only variants divide by the
/// surviving coefficient directly:
///   u_c[l] = a[i]*fa[i]/c[l] + b[j]*gb[j]/c[l] - hc[l] + gain*e[m]/c[l]
/// (and the d-channel analogue); block-only variants synthesize the active
/// block's aggregate and split it under `opts.policy`. Always agrees with
/// synthesize_aggregate + split_control on the same zeroed scaling.
inline ControlVectors reduced_control(ReducedVariant variant, const EnsembleState& state,
                                      const ScalingConfig& scaling,
                                      const SwitchAssignment& assignment,
                                      const EnsembleSystems& systems,
                                      const ControllerOptions& opts = {}) {
  require_variant_zeroing(scaling, variant);
  const std::size_t n = state.dim();
  detail::require_assignment_dims(assignment, n);
  const auto z = detail::variant_zeroing(variant);
  const EnsembleFieldEval fields = eval_fields(systems, state);
  const ErrorVector e = compute_error(state, scaling, assignment);

  ControlVectors cv = ControlVectors::zero(n);
  for (int bk = 0; bk < 2; ++bk) {
    if (z.block_zero[bk]) continue;  // that block's error is identically zero
    const bool c_active = !z.c_zero[bk];
    const bool d_active = !z.d_zero[bk];
    for (std::size_t slot = 0; slot < n; ++slot) {
      const SwitchTuple& t = assignment.blocks[bk][slot];
      const double drive_terms = scaling.a[bk][t.i - 1] * fields.drive_a[bk][t.i - 1] +
                                 scaling.b[bk][t.j - 1] * fields.drive_b[bk][t.j - 1];
      const double err = opts.gain * e.blocks[bk][slot];
      if (c_active && d_active) {
        // Both channels survive: same aggregate-and-split as the general scheme.
        const double agg = drive_terms -
                           scaling.c[bk][t.l - 1] * fields.response_c[bk][t.l - 1] -
                           scaling.d[bk][t.m - 1] * fields.response_d[bk][t.m - 1] + err;
        const double cc = scaling.c[bk][t.l - 1];
        const double dc = scaling.d[bk][t.m - 1];
        if (cc == 0.0 && dc == 0.0) {
          if (agg != 0.0) throw UnrealizableControlError(bk + 1, static_cast<int>(slot) + 1);
          continue;
        }
        if (opts.policy == SplitPolicy::Even && cc != 0.0 && dc != 0.0) {
          cv.response_c[bk][t.l - 1] = agg / (2.0 * cc);
          cv.response_d[bk][t.m - 1] = agg / (2.0 * dc);
        } else if (dc != 0.0 && (opts.policy == SplitPolicy::WChannel || cc == 0.0)) {
          cv.response_d[bk][t.m - 1] = agg / dc;
        } else {
          cv.response_c[bk][t.l - 1] = agg / cc;
        }
      } else if (d_active) {
        const double dc = scaling.d[bk][t.m - 1];
        if (dc == 0.0) {
          throw std::domain_error("reduced controller divides by zero: d coefficient at block " +
                                  std::to_string(bk + 1) + " slot " + std::to_string(slot + 1));
        }
        cv.response_d[bk][t.m - 1] = scaling.a[bk][t.i - 1] * fields.drive_a[bk][t.i - 1] / dc +
                                     scaling.b[bk][t.j - 1] * fields.drive_b[bk][t.j - 1] / dc -
                                     fields.response_d[bk][t.m - 1] + err / dc;
      } else if (c_active) {
        const double cc = scaling.c[bk][t.l - 1];
        if (cc == 0.0) {
          throw std::domain_error("reduced controller divides by zero: c coefficient at block " +
                                  std::to_string(bk + 1) + " slot " + std::to_string(slot + 1));
        }
        cv.response_c[bk][t.l - 1] = scaling.a[bk][t.i - 1] * fields.drive_a[bk][t.i - 1] / cc +
                                     scaling.b[bk][t.j - 1] * fields.drive_b[bk][t.j - 1] / cc -
                                     fields.response_c[bk][t.l - 1] + err / cc;
      }
    }
  }
  return cv;
}

}  // namespace chaossync
