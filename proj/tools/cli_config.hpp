#pragma once
// Experiment config: strict JSON schema, parsed into module specs.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qftlab/causal_ops.hpp"
#include "qftlab/info_flow.hpp"

namespace qftlab::cli {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Axis {
  double min = 0, max = 0;
  int n = 1;
  double at(int i) const { return n == 1 ? min : min + (max - min) * i / (n - 1); }
};

struct BumpSpec {
  double tc, xc, rt, rx, amp;
};

struct PropagatorConfig {
  KernelKind kind;
  Axis t, x;
  std::optional<Grid> grid;  // for pairings
  std::vector<std::pair<BumpSpec, BumpSpec>> pairings;
};

struct ModularConfig {
  std::vector<std::pair<int, int>> regions;
  std::vector<double> ts{0.1, 0.5, 1.0};
};

struct HuygensConfig {
  SweepSpec massless;
  double massive_m = 1.0;
};

struct Config {
  nlohmann::ordered_json raw;
  std::optional<LatticeSpec> model;
  std::optional<SweepSpec> sweep;
  std::optional<HuygensConfig> huygens;
  std::optional<PropagatorConfig> propagator;
  std::optional<RelationSuiteSpec> weyl_check;
  std::optional<ModularConfig> modular;
};

// Validates the whole document; throws SchemaError.
Config parse_config(const std::string& text);

// the config shipped with the tool
const std::string& default_config_text();

}  // namespace qftlab::cli
