#pragma once

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "chaossync/state.hpp"

namespace chaossync {

using Params = std::map<std::string, double>;

/// A named autonomous vector field x' = f(x) of fixed dimension.
/// Evaluation is pure: the same state always yields bit-identical output.
struct SystemDef {
  std::string name;
  std::size_t dim = 0;
  Params params;
  std::function<StateVector(const StateVector&)> field;

  StateVector eval(const StateVector& state) const {
    require_dim(state, dim, name);
    StateVector out = field(state);
    require_dim(out, dim, name + " field output");
    return out;
  }
};

/// Overlays `overrides` onto `defaults`; rejects keys the system does not declare.
inline Params merge_params(Params defaults, const Params& overrides) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) {
      throw std::invalid_argument("unknown parameter '" + key + "'");
    }
    it->second = value;
  }
  return defaults;
}

/// Genesio-Tesi system:
///   x1' = x2
///   x2' = x3
///   x3' = -a*x1 - b*x2 - c*x3 + x1^2
inline SystemDef make_genesio_tesi(const Params& overrides = {}) {
  Params p = merge_params({{"a", 6.0}, {"b", 2.92}, {"c", 1.2}}, overrides);
  const double a = p.at("a"), b = p.at("b"), c = p.at("c");
  SystemDef def;
  def.name = "genesio_tesi";
  def.dim = 3;
  def.params = std::move(p);
  def.field = [a, b, c](const StateVector& x) -> StateVector {
    return {x[1], x[2], -a * x[0] - b * x[1] - c * x[2] + x[0] * x[0]};
  };
  return def;
}

/// Lu system:
///   x1' = a*(x2 - x1)
///   x2' = -x1*x3 + c*x2
///   x3' = x1*x2 - b*x3
inline SystemDef make_lu(const Params& overrides = {}) {
  Params p = merge_params({{"a", 36.0}, {"b", 3.0}, {"c", 20.0}}, overrides);
  const double a = p.at("a"), b = p.at("b"), c = p.at("c");
  SystemDef def;
  def.name = "lu";
  def.dim = 3;
  def.params = std::move(p);
  def.field = [a, b, c](const StateVector& x) -> StateVector {
    return {a * (x[1] - x[0]), -x[0] * x[2] + c * x[1], x[0] * x[1] - b * x[2]};
  };
  return def;
}

using SystemFactory = std::function<SystemDef(const Params& overrides)>;

/// Name -> vector field lookup. New systems plug in here without touching
/// the scheme or controller code. Registration is a setup-phase activity;
/// lookups after setup are safe to run concurrently.
class SystemRegistry {
 public:
  /// Registers a parameterizable family under `name`.
  void register_factory(const std::string& name, SystemFactory factory) {
    if (factories_.count(name) != 0) {
      throw std::invalid_argument("system '" + name + "' already registered");
    }
    factories_.emplace(name, std::move(factory));
  }

  /// Registers a fixed definition; parameter overrides are rejected at lookup.
  void register_system(const SystemDef& def) {
    register_factory(def.name, [def](const Params& overrides) {
      if (!overrides.empty()) {
        throw std::invalid_argument("system '" + def.name +
                                    "' does not accept parameter overrides");
      }
      return def;
    });
  }

  SystemDef lookup(const std::string& name, const Params& overrides = {}) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) {
      throw std::invalid_argument("unknown system '" + name + "'");
    }
    return it->second(overrides);
  }

  bool contains(const std::string& name) const { return factories_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(factories_.size());
    for (const auto& [name, factory] : factories_) out.push_back(name);
    return out;
  }

  /// Registry preloaded with the built-in systems.
  static SystemRegistry builtins() {
    SystemRegistry reg;
    reg.register_factory("genesio_tesi", [](const Params& p) { return make_genesio_tesi(p); });
    reg.register_factory("lu", [](const Params& p) { return make_lu(p); });
    return reg;
  }

 private:
  std::map<std::string, SystemFactory> factories_;
};

}  // namespace chaossync
