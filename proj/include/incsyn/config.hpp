#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incsyn/lpv_model.hpp"
#include "incsyn/simulation.hpp"
#include "incsyn/synthesis.hpp"

namespace incsyn {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

struct ScenarioConfig {
  std::string name;
  ReferenceGenerator reference;
  int horizon = 400;
  std::optional<std::vector<double>> x0;  // default: origin
};

/// Declarative experiment description. Parsing is strict: unknown keys are
/// rejected. Numeric defaults mirror the built-in example.
struct ExperimentConfig {
  std::string plant = "paper-example";  // or inline LPV (stored below)
  std::optional<AffineLpvStateSpace> inline_lpv;

  // weights (built-in plant only)
  double alpha = 0.31830988618379067;
  double error_gain = 0.2;
  double error_zero = 0.5;
  double control_gain = 0.2;
  double eps_pole = 1e-4;

  // synthesis
  double delta_feas = 1e-7;
  std::string factorization = "identity";  // or "lu"
  double gamma_relax = 1e-3;
  double variable_bound = 1e3;

  std::vector<std::string> controllers = {"incremental", "standard"};
  std::vector<ScenarioConfig> scenarios;

  int quadrature_order = 16;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  SynthesisOptions synthesisOptions() const;

  static ExperimentConfig defaults();

  std::string toJson() const;
  static ExperimentConfig fromJson(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

}  // namespace incsyn
