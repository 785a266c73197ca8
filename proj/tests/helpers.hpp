#pragma once

#include <algorithm>
#include <numeric>
#include <random>

#include "chaossync/chaossync.hpp"

namespace testutil {

using namespace chaossync;

inline StateVector random_state(std::mt19937& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  StateVector v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline EnsembleState random_ensemble(std::mt19937& rng, std::size_t n, double lo, double hi) {
  EnsembleState s;
  for (auto* group : {&s.drive_a, &s.drive_b, &s.response_c, &s.response_d}) {
    for (auto& v : *group) v = random_state(rng, n, lo, hi);
  }
  return s;
}

inline std::vector<int> random_permutation(std::mt19937& rng, std::size_t n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 1);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Random assignment whose i/j/l indices are permutations and whose every
/// tuple is a genuine switching tuple.
inline SwitchAssignment random_valid_assignment(std::mt19937& rng, std::size_t n) {
  for (;;) {
    SwitchAssignment a;
    for (auto& block : a.blocks) {
      const auto pi = random_permutation(rng, n);
      const auto pj = random_permutation(rng, n);
      const auto pl = random_permutation(rng, n);
      block.resize(n);
      for (std::size_t slot = 0; slot < n; ++slot) {
        block[slot] = {pi[slot], pj[slot], pl[slot], static_cast<int>(slot) + 1};
      }
    }
    if (validate_assignment(a, n).ok()) return a;
  }
}

/// Coefficients with magnitude in [0.5, 1.5] and random sign: nonzero, so
/// every channel stays realizable and divisions stay well conditioned.
inline std::vector<double> random_coeffs(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::bernoulli_distribution flip(0.5);
  std::vector<double> v(n);
  for (double& x : v) x = (flip(rng) ? -1.0 : 1.0) * mag(rng);
  return v;
}

inline ScalingConfig random_scaling(std::mt19937& rng, std::size_t n) {
  ScalingConfig s;
  for (auto* group : {&s.a, &s.b, &s.c, &s.d}) {
    for (auto& v : *group) v = random_coeffs(rng, n);
  }
  return s;
}

/// Genesio-Tesi in the first block of every role, Lu in the second.
inline EnsembleSystems reference_systems() {
  const SystemRegistry reg = SystemRegistry::builtins();
  const SystemDef gt = reg.lookup("genesio_tesi");
  const SystemDef lu = reg.lookup("lu");
  EnsembleSystems sys;
  sys.drive_a = {gt, lu};
  sys.drive_b = {gt, lu};
  sys.response_c = {gt, lu};
  sys.response_d = {gt, lu};
  return sys;
}

inline SimConfig reference_sim_config() {
  return build_sim_config(reference_run_spec(), SystemRegistry::builtins());
}

}  // namespace testutil
