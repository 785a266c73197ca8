#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chaossync/state.hpp"

namespace chaossync {

// ---------------------------------------------------------------------------
// Scaling
// ---------------------------------------------------------------------------

/// Diagonals of the eight scaling matrices. `a[0]` scales the first drive of
/// the A-group, `a[1]` the second, and likewise for b, c (response group) and
/// d (response group). Array index is the block: 0 pairs with the first error
/// block, 1 with the second.
struct ScalingConfig {
  std::array<std::vector<double>, 2> a, b, c, d;

  static ScalingConfig identity(std::size_t n) {
    ScalingConfig s;
    std::vector<double> ones(n, 1.0);
    s.a = {ones, ones};
    s.b = {ones, ones};
    s.c = {ones, ones};
    s.d = {ones, ones};
    return s;
  }

  static ScalingConfig zero(std::size_t n) {
    ScalingConfig s;
    std::vector<double> zeros(n, 0.0);
    s.a = {zeros, zeros};
    s.b = {zeros, zeros};
    s.c = {zeros, zeros};
    s.d = {zeros, zeros};
    return s;
  }

  /// Common dimension of all eight coefficient vectors.
  std::size_t dim() const {
    const std::size_t n = a[0].size();
    for (const auto* group : {&a, &b, &c, &d}) {
      for (const auto& v : *group) {
        if (v.size() != n) {
          throw std::invalid_argument("scaling coefficient vectors disagree in dimension");
        }
      }
    }
    return n;
  }

  friend bool operator==(const ScalingConfig&, const ScalingConfig&) = default;
};

// ---------------------------------------------------------------------------
// Switching tuples and their equality patterns
// ---------------------------------------------------------------------------

/// One wiring choice for one error slot: error component m draws the i-th
/// component of the A-group drive, the j-th of the B-group drive, the l-th of
/// the C-group response and the m-th of the D-group response. Indices are
/// 1-based, matching the e{block}{m}_{ijlm} labelling used in exports.
struct SwitchTuple {
  int i = 0;
  int j = 0;
  int l = 0;
  int m = 0;

  friend bool operator==(const SwitchTuple&, const SwitchTuple&) = default;
};

/// The fifteen ways the indices (i, j, l, m) can partition by equality.
/// AllEqual is the non-switching wiring; every other class is a valid
/// switching pattern.
enum class SwitchPattern {
  AllEqual,     // i=j=l=m
  TripleIJL,    // i=j=l != m
  TripleIJM,    // i=j=m != l
  TripleILM,    // i=l=m != j
  TripleJLM,    // j=l=m != i
  PairsIJ_LM,   // i=j != l=m
  PairsIL_JM,   // i=l != j=m
  PairsIM_JL,   // i=m != j=l
  PairIJ,       // i=j != l != m
  PairIL,       // i=l != j != m
  PairIM,       // i=m != l != j
  PairJL,       // i != j=l != m
  PairLM,       // i != j != l=m
  PairJM,       // i != l != j=m
  AllDistinct,  // i != j != l != m
};

inline constexpr std::array<SwitchPattern, 15> kAllPatterns = {
    SwitchPattern::AllEqual,   SwitchPattern::TripleIJL,  SwitchPattern::TripleIJM,
    SwitchPattern::TripleILM,  SwitchPattern::TripleJLM,  SwitchPattern::PairsIJ_LM,
    SwitchPattern::PairsIL_JM, SwitchPattern::PairsIM_JL, SwitchPattern::PairIJ,
    SwitchPattern::PairIL,     SwitchPattern::PairIM,     SwitchPattern::PairJL,
    SwitchPattern::PairLM,     SwitchPattern::PairJM,     SwitchPattern::AllDistinct,
};

inline std::string_view pattern_name(SwitchPattern p) {
  switch (p) {
    case SwitchPattern::AllEqual:    return "i=j=l=m";
    case SwitchPattern::TripleIJL:   return "i=j=l != m";
    case SwitchPattern::TripleIJM:   return "i=j=m != l";
    case SwitchPattern::TripleILM:   return "i=l=m != j";
    case SwitchPattern::TripleJLM:   return "j=l=m != i";
    case SwitchPattern::PairsIJ_LM:  return "i=j != l=m";
    case SwitchPattern::PairsIL_JM:  return "i=l != j=m";
    case SwitchPattern::PairsIM_JL:  return "i=m != j=l";
    case SwitchPattern::PairIJ:      return "i=j != l != m";
    case SwitchPattern::PairIL:      return "i=l != j != m";
    case SwitchPattern::PairIM:      return "i=m != l != j";
    case SwitchPattern::PairJL:      return "i != j=l != m";
    case SwitchPattern::PairLM:      return "i != j != l=m";
    case SwitchPattern::PairJM:      return "i != l != j=m";
    case SwitchPattern::AllDistinct: return "i != j != l != m";
  }
  return "?";
}

/// True for every pattern except the non-switching AllEqual wiring.
inline bool is_switching(SwitchPattern p) { return p != SwitchPattern::AllEqual; }

/// Total classification of a tuple by the equality partition of its indices.
inline SwitchPattern classify_pattern(const SwitchTuple& t) {
  const bool ij = t.i == t.j, il = t.i == t.l, im = t.i == t.m;
  const bool jl = t.j == t.l, jm = t.j == t.m, lm = t.l == t.m;
  const int eq = int(ij) + int(il) + int(im) + int(jl) + int(jm) + int(lm);
  switch (eq) {
    case 6:
      return SwitchPattern::AllEqual;
    case 3:  // one triple plus a singleton
      if (ij && il) return SwitchPattern::TripleIJL;
      if (ij && im) return SwitchPattern::TripleIJM;
      if (il && im) return SwitchPattern::TripleILM;
      return SwitchPattern::TripleJLM;
    case 2:  // two disjoint pairs
      if (ij) return SwitchPattern::PairsIJ_LM;
      if (il) return SwitchPattern::PairsIL_JM;
      return SwitchPattern::PairsIM_JL;
    case 1:  // a single pair
      if (ij) return SwitchPattern::PairIJ;
      if (il) return SwitchPattern::PairIL;
      if (im) return SwitchPattern::PairIM;
      if (jl) return SwitchPattern::PairJL;
      if (jm) return SwitchPattern::PairJM;
      return SwitchPattern::PairLM;
    default:
      return SwitchPattern::AllDistinct;
  }
}

// ---------------------------------------------------------------------------
// Assignments
// ---------------------------------------------------------------------------

/// Per error block, one SwitchTuple per slot; the tuple at slot m carries
/// fourth index m. The wiring is fixed for the duration of a run.
struct SwitchAssignment {
  std::array<std::vector<SwitchTuple>, 2> blocks;

  /// Builds an assignment from per-block (i, j, l) triplets; the slot
  /// position supplies m.
  static SwitchAssignment from_triplets(const std::vector<std::array<int, 3>>& block1,
                                        const std::vector<std::array<int, 3>>& block2) {
    SwitchAssignment a;
    auto fill = [](const std::vector<std::array<int, 3>>& triplets) {
      std::vector<SwitchTuple> out;
      out.reserve(triplets.size());
      for (std::size_t slot = 0; slot < triplets.size(); ++slot) {
        out.push_back({triplets[slot][0], triplets[slot][1], triplets[slot][2],
                       static_cast<int>(slot) + 1});
      }
      return out;
    };
    a.blocks[0] = fill(block1);
    a.blocks[1] = fill(block2);
    return a;
  }

  /// The non-switching wiring i=j=l=m for every slot of both blocks.
  static SwitchAssignment non_switching(std::size_t n) {
    SwitchAssignment a;
    for (auto& block : a.blocks) {
      block.resize(n);
      for (std::size_t slot = 0; slot < n; ++slot) {
        const int k = static_cast<int>(slot) + 1;
        block[slot] = {k, k, k, k};
      }
    }
    return a;
  }

  std::size_t dim() const {
    if (blocks[0].size() != blocks[1].size()) {
      throw std::invalid_argument("assignment blocks disagree in size");
    }
    return blocks[0].size();
  }

  friend bool operator==(const SwitchAssignment&, const SwitchAssignment&) = default;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct SchemeValidationOptions {
  /// Downgrades broken i/j/l permutations to warnings. Without permutations
  /// the per-channel control split can write some response channels twice
  /// and others never.
  bool allow_non_permutation = false;
  /// Permits the non-switching wiring i=j=l=m (the plain combination-
  /// combination baseline).
  bool allow_non_switching = false;
  /// Permits a scaling pair (e.g. both c vectors) to be entirely zero, as the
  /// reduced scheme variants require.
  bool allow_zero_pairs = false;
};

struct Violation {
  enum class Rule {
    IndexRange,
    SlotMismatch,
    NonSwitching,
    PermutationI,
    PermutationJ,
    PermutationL,
    BlockSize,
    ScalingZeroPair,
    ScalingAdmissibility,
  };

  Rule rule;
  int block = 0;  // 1-based; 0 when not tied to a block
  int slot = 0;   // 1-based; 0 when not tied to a slot
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> warnings;

  bool ok() const { return violations.empty(); }
};

namespace detail {

inline std::string slot_prefix(int block, int slot) {
  std::string s = "block " + std::to_string(block);
  if (slot > 0) s += " slot " + std::to_string(slot);
  return s;
}

inline void check_permutation(const std::vector<SwitchTuple>& block, int block_no,
                              std::size_t n, char role, Violation::Rule rule,
                              std::vector<Violation>& sink) {
  std::vector<std::vector<int>> slots_of(n + 1);
  for (std::size_t slot = 0; slot < block.size(); ++slot) {
    const SwitchTuple& t = block[slot];
    const int idx = role == 'i' ? t.i : role == 'j' ? t.j : t.l;
    if (idx >= 1 && idx <= static_cast<int>(n)) {
      slots_of[idx].push_back(static_cast<int>(slot) + 1);
    }
  }
  int missing = 0;
  for (int v = 1; v <= static_cast<int>(n); ++v) {
    if (slots_of[v].size() > 1) {
      std::string where = "index " + std::to_string(v) + " repeats in slots";
      for (int s : slots_of[v]) where += " " + std::to_string(s);
      sink.push_back({rule, block_no, slots_of[v].front(),
                      slot_prefix(block_no, 0) + ": " + role +
                          "-indices are not a permutation of 1.." + std::to_string(n) + " (" +
                          where + ")"});
      return;
    }
    if (slots_of[v].empty() && missing == 0) missing = v;
  }
  if (missing != 0) {
    sink.push_back({rule, block_no, 0,
                    slot_prefix(block_no, 0) + ": " + role +
                        "-indices are not a permutation of 1.." + std::to_string(n) +
                        " (index " + std::to_string(missing) + " never appears)"});
  }
}

}  // namespace detail

/// Checks an assignment against the multi-switching rules: indices in range,
/// slot m matching the tuple's fourth index, no non-switching tuples, and the
/// i/j/l indices each forming a permutation across slots. Violations are
/// reported, not thrown.
inline ValidationReport validate_assignment(const SwitchAssignment& a, std::size_t n,
                                            const SchemeValidationOptions& opts = {}) {
  ValidationReport report;
  for (int bk = 0; bk < 2; ++bk) {
    const auto& block = a.blocks[bk];
    const int block_no = bk + 1;
    if (block.size() != n) {
      report.violations.push_back(
          {Violation::Rule::BlockSize, block_no, 0,
           detail::slot_prefix(block_no, 0) + ": expected " + std::to_string(n) +
               " slots, got " + std::to_string(block.size())});
      continue;
    }
    for (std::size_t slot = 0; slot < block.size(); ++slot) {
      const SwitchTuple& t = block[slot];
      const int slot_no = static_cast<int>(slot) + 1;
      const bool in_range = [&] {
        for (int idx : {t.i, t.j, t.l, t.m}) {
          if (idx < 1 || idx > static_cast<int>(n)) return false;
        }
        return true;
      }();
      if (!in_range) {
        report.violations.push_back(
            {Violation::Rule::IndexRange, block_no, slot_no,
             detail::slot_prefix(block_no, slot_no) + ": index out of range 1.." +
                 std::to_string(n)});
        continue;
      }
      if (t.m != slot_no) {
        report.violations.push_back(
            {Violation::Rule::SlotMismatch, block_no, slot_no,
             detail::slot_prefix(block_no, slot_no) + ": tuple m=" + std::to_string(t.m) +
                 " does not match its slot"});
      }
      if (!is_switching(classify_pattern(t))) {
        Violation v{Violation::Rule::NonSwitching, block_no, slot_no,
                    detail::slot_prefix(block_no, slot_no) +
                        ": i=j=l=m is the non-switching wiring"};
        (opts.allow_non_switching ? report.warnings : report.violations).push_back(v);
      }
    }
    auto& perm_sink = opts.allow_non_permutation ? report.warnings : report.violations;
    detail::check_permutation(block, block_no, n, 'i', Violation::Rule::PermutationI, perm_sink);
    detail::check_permutation(block, block_no, n, 'j', Violation::Rule::PermutationJ, perm_sink);
    detail::check_permutation(block, block_no, n, 'l', Violation::Rule::PermutationL, perm_sink);
  }
  return report;
}

/// Checks the scaling invariants: no coefficient pair entirely zero (unless a
/// reduced variant is declared) and at least one response-side pair nonzero.
inline ValidationReport validate_scaling(const ScalingConfig& s,
                                         const SchemeValidationOptions& opts = {}) {
  ValidationReport report;
  auto pair_zero = [](const std::array<std::vector<double>, 2>& pair) {
    for (const auto& v : pair) {
      for (double x : v) {
        if (x != 0.0) return false;
      }
    }
    return true;
  };
  const std::array<std::pair<const char*, const std::array<std::vector<double>, 2>*>, 4> groups =
      {{{"a", &s.a}, {"b", &s.b}, {"c", &s.c}, {"d", &s.d}}};
  for (const auto& [name, pair] : groups) {
    if (pair_zero(*pair)) {
      Violation v{Violation::Rule::ScalingZeroPair, 0, 0,
                  std::string("scaling pair (") + name + "1, " + name + "2) is entirely zero"};
      (opts.allow_zero_pairs ? report.warnings : report.violations).push_back(v);
    }
  }
  if (pair_zero(s.c) && pair_zero(s.d)) {
    report.violations.push_back(
        {Violation::Rule::ScalingAdmissibility, 0, 0,
         "inadmissible scaling: the c and d pairs are both zero, so the error "
         "does not involve any response system"});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Ensemble state and the switched error
// ---------------------------------------------------------------------------

/// States of all eight systems at one instant. drive_a pairs with scaling a,
/// drive_b with b, response_c with c, response_d with d; the array index is
/// the block.
struct EnsembleState {
  std::array<StateVector, 2> drive_a, drive_b, response_c, response_d;

  std::size_t dim() const {
    const std::size_t n = drive_a[0].size();
    for (const auto* group : {&drive_a, &drive_b, &response_c, &response_d}) {
      for (const auto& v : *group) {
        if (v.size() != n) {
          throw std::invalid_argument("ensemble states disagree in dimension");
        }
      }
    }
    return n;
  }

  bool finite() const {
    for (const auto* group : {&drive_a, &drive_b, &response_c, &response_d}) {
      for (const auto& v : *group) {
        if (!all_finite(v)) return false;
      }
    }
    return true;
  }

  friend bool operator==(const EnsembleState&, const EnsembleState&) = default;
};

/// The two switched error blocks.
struct ErrorVector {
  std::array<std::vector<double>, 2> blocks;

  /// Both blocks concatenated into one 2n vector, block 1 first.
  std::vector<double> stacked() const {
    std::vector<double> out = blocks[0];
    out.insert(out.end(), blocks[1].begin(), blocks[1].end());
    return out;
  }

  double norm() const {
    double sum = 0.0;
    for (const auto& block : blocks) {
      for (double x : block) sum += x * x;
    }
    return std::sqrt(sum);
  }

  friend bool operator==(const ErrorVector&, const ErrorVector&) = default;
};

namespace detail {

inline void require_assignment_dims(const SwitchAssignment& a, std::size_t n) {
  for (const auto& block : a.blocks) {
    if (block.size() != n) {
      throw std::invalid_argument("assignment dimension does not match state dimension");
    }
    for (const SwitchTuple& t : block) {
      for (int idx : {t.i, t.j, t.l, t.m}) {
        if (idx < 1 || idx > static_cast<int>(n)) {
          throw std::invalid_argument("assignment index out of range");
        }
      }
    }
  }
}

}  // namespace detail

/// Switched error: for each block and slot m with wiring (i, j, l, m),
///   e[m] = a[i]*xa[i] + b[j]*yb[j] - c[l]*zc[l] - d[m]*wd[m].
/// Permutation validity of the assignment is the caller's responsibility;
/// dimensions and index ranges are checked here.
inline ErrorVector compute_error(const EnsembleState& state, const ScalingConfig& scaling,
                                 const SwitchAssignment& assignment) {
  const std::size_t n = state.dim();
  if (scaling.dim() != n) {
    throw std::invalid_argument("scaling dimension does not match state dimension");
  }
  detail::require_assignment_dims(assignment, n);

  ErrorVector e;
  for (int bk = 0; bk < 2; ++bk) {
    e.blocks[bk].resize(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
      const SwitchTuple& t = assignment.blocks[bk][slot];
      e.blocks[bk][slot] = scaling.a[bk][t.i - 1] * state.drive_a[bk][t.i - 1] +
                           scaling.b[bk][t.j - 1] * state.drive_b[bk][t.j - 1] -
                           scaling.c[bk][t.l - 1] * state.response_c[bk][t.l - 1] -
                           scaling.d[bk][t.m - 1] * state.response_d[bk][t.m - 1];
    }
  }
  return e;
}

/// Combined signal of one drive or response pair: the componentwise products
/// coeff*state stacked over the two systems. Diagnostic/export helper; the
/// controller path works from compute_error directly.
inline std::vector<double> combined_signal(const StateVector& first, const StateVector& second,
                                           const std::vector<double>& coeff_first,
                                           const std::vector<double>& coeff_second) {
  if (first.size() != coeff_first.size() || second.size() != coeff_second.size()) {
    throw std::invalid_argument("combined_signal: coefficient dimension mismatch");
  }
  std::vector<double> out;
  out.reserve(first.size() + second.size());
  for (std::size_t k = 0; k < first.size(); ++k) out.push_back(coeff_first[k] * first[k]);
  for (std::size_t k = 0; k < second.size(); ++k) out.push_back(coeff_second[k] * second[k]);
  return out;
}

}  // namespace chaossync
