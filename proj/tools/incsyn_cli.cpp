#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "incsyn/pipeline.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> quadrature_order;
  std::optional<double> eps_pole;
};

void addCommon(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* c = cmd->add_option("--config", flags.config_path, "experiment config (json)");
  if (config_required) c->required();
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--seed", flags.seed, "probe / trace seed");
  cmd->add_option("--quadrature-order", flags.quadrature_order,
                  "Gauss-Legendre order for the path integrals");
  cmd->add_option("--eps-pole", flags.eps_pole, "unit-circle weight pole perturbation");
}

incsyn::ExperimentConfig loadConfig(const CommonFlags& flags) {
  incsyn::ExperimentConfig cfg = flags.config_path.empty()
                                     ? incsyn::ExperimentConfig::defaults()
                                     : incsyn::ExperimentConfig::load(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.quadrature_order) cfg.quadrature_order = *flags.quadrature_order;
  if (flags.eps_pole) cfg.eps_pole = *flags.eps_pole;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental-gain LPV controller synthesis toolkit"};
  app.require_subcommand(1);

  CommonFlags synth_flags, analyze_flags, sim_flags, repro_flags;
  std::string analyze_controller;
  std::vector<std::string> sim_controllers;

  CLI::App* synth = app.add_subcommand("synth", "synthesize controllers from a config");
  addCommon(synth, synth_flags, true);

  CLI::App* analyze = app.add_subcommand("analyze", "certify a closed loop");
  addCommon(analyze, analyze_flags, true);
  analyze->add_option("--controller", analyze_controller, "controller file (json)")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "run the configured scenarios");
  addCommon(simulate, sim_flags, true);
  simulate->add_option("--controller", sim_controllers, "controller file(s) (json)")
      ->required();

  CLI::App* repro = app.add_subcommand("repro", "reproduce the built-in example end to end");
  addCommon(repro, repro_flags, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      auto cfg = loadConfig(synth_flags);
      auto out = incsyn::cmdSynth(cfg, cfg.out_dir);
      for (const auto& [kind, res] : out.results)
        std::cout << kind << ": gamma = " << res.certificate.gamma << " (optimum "
                  << res.certificate.gamma_optimal << ")\n";
      return 0;
    }
    if (analyze->parsed()) {
      auto cfg = loadConfig(analyze_flags);
      auto out = incsyn::cmdAnalyze(cfg, analyze_controller, cfg.out_dir);
      std::cout << "closed-loop gamma " << out.gamma_closed_loop << " (controller "
                << out.controller_gamma << "), transfer "
                << (out.transfer_ok ? "PASS" : "FAIL") << "\n"
                << "report: " << out.report_path << "\n";
      return 0;
    }
    if (simulate->parsed()) {
      auto cfg = loadConfig(sim_flags);
      std::map<std::string, std::string> files;
      for (const std::string& path : sim_controllers) {
        std::ifstream in(path);
        if (!in) throw incsyn::ConfigError("cannot open controller file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        files[incsyn::controllerFromJson(ss.str()).kind] = path;
      }
      auto out = incsyn::cmdSimulate(cfg, files, cfg.out_dir);
      for (const auto& so : out.scenarios)
        std::cout << so.controller << "/" << so.scenario << ": trailing error "
                  << so.trailing_error << (so.converged ? " converged" : "")
                  << (so.limit_cycle ? " limit-cycle" : "") << (so.diverged ? " diverged" : "")
                  << "\n";
      std::cout << "summary: " << out.summary_path << "\n";
      return 0;
    }
    if (repro->parsed()) {
      auto cfg = loadConfig(repro_flags);
      auto rep = incsyn::cmdRepro(cfg, cfg.out_dir);
      std::cout << rep.text;
      return 0;
    }
  } catch (const incsyn::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const incsyn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
