#pragma once

#include <map>
#include <optional>
#include <string>

#include "incsyn/analysis.hpp"
#include "incsyn/builtin_example.hpp"
#include "incsyn/config.hpp"
#include "incsyn/realization.hpp"

namespace incsyn {

/// Models a config resolves to: the simulation plant (built-in only) and the
/// synthesis models per controller kind.
struct PipelineModels {
  std::optional<GeneralizedPlant> plant;  // absent for inline LPV configs
  std::map<std::string, AffineLpvStateSpace> synthesis_models;
};

PipelineModels resolveModels(const ExperimentConfig& config);

std::string controllerToJson(const DifferentialController& ctrl,
                             const SynthesisCertificate& cert, const std::string& kind);
struct LoadedController {
  DifferentialController controller;
  double gamma = 0.0;
  std::string kind;
};
LoadedController controllerFromJson(const std::string& text);

void writeFileAtomic(const std::string& path, const std::string& content);

struct SynthOutcome {
  std::map<std::string, SynthesisResult> results;  // by controller kind
};

/// synth: solves every configured synthesis, writes certificate reports and
/// controller files into out_dir.
SynthOutcome cmdSynth(const ExperimentConfig& config, const std::string& out_dir);

struct AnalyzeOutcome {
  double gamma_closed_loop = 0.0;
  double controller_gamma = 0.0;
  bool transfer_ok = false;  // closed-loop gamma <= certified gamma + 1e-3
  DivergenceProbeReport probe;
  std::string report_path;
};

/// analyze: loads a controller file, certifies the closed loop, runs the
/// divergence probe (built-in plant only).
AnalyzeOutcome cmdAnalyze(const ExperimentConfig& config, const std::string& controller_file,
                          const std::string& out_dir);

struct ScenarioOutcome {
  std::string scenario, controller;
  bool converged = false;
  double trailing_error = 0.0;
  bool limit_cycle = false;
  double oscillation = 0.0;
  bool diverged = false;
  std::string csv_path;
};

struct SimulateOutcome {
  std::vector<ScenarioOutcome> scenarios;
  std::string summary_path;
};

/// simulate: runs every configured scenario for every configured controller
/// file; writes one CSV per run plus a summary.
SimulateOutcome cmdSimulate(const ExperimentConfig& config,
                            const std::map<std::string, std::string>& controller_files,
                            const std::string& out_dir);

struct ReproReport {
  double gamma_incremental = 0.0;          // certified for the built controller
  double gamma_incremental_optimal = 0.0;  // LMI optimum
  double gamma_standard = 0.0;
  double gamma_standard_optimal = 0.0;
  double target_incremental = 1.1;
  double target_standard = 0.80;
  bool gamma_incremental_in_band = false;  // [0.8, 1.5]
  bool gamma_standard_in_band = false;     // [0.6, 1.1]

  double closed_loop_gamma = 0.0;
  bool certificate_transfer_ok = false;

  std::vector<ScenarioOutcome> scenario_outcomes;
  bool behavior_ok = false;  // the Fig.-2 qualitative pattern

  bool probe_all_contract = false;
  double reconstruction_residual = 0.0;

  std::string text;  // rendered report
};

/// repro: full pipeline for both controllers on the built-in example,
/// consolidated comparison against the published bounds.
ReproReport cmdRepro(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace incsyn
