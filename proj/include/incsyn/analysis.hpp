#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "incsyn/genplant.hpp"
#include "incsyn/synthesis.hpp"

namespace incsyn {

/// Lower-LFT interconnection of a plant LPV model (channels (w,u)/(z,y)) and
/// a controller, state (x, x_c). Affine in rho because the plant's B_u, C_y,
/// D blocks are constant.
struct ClosedLoopLpv {
  AffineLpvStateSpace model;  // inputs w, outputs z
  std::string provenance;
};

ClosedLoopLpv closeLoop(const AffineLpvStateSpace& plant, const DifferentialController& ctrl);

struct GainCertificate {
  bool certified = false;
  double gamma = 0.0;
  Matrix P;
  double min_margin = 0.0;  // smallest constraint eigenvalue at the solution
  std::string message;      // refusal reason (inconclusive, not a disproof)
};

/// Feasibility of the analysis LMI at fixed gamma (constant storage P).
GainCertificate li2GainBound(const AffineLpvStateSpace& sys, double gamma,
                             const SdpOptions& opts = {});

/// Minimizes gamma in the analysis LMI. Throws InfeasibleError when no
/// constant-storage certificate exists at any gamma.
GainCertificate minLi2Gain(const AffineLpvStateSpace& sys, const SdpOptions& opts = {});

/// Simulation-based incremental-stability falsification: trajectory pairs
/// with shared reference and different initial states.
struct DivergenceProbeOptions {
  int trials = 20;
  int horizon = 400;
  double contraction_tol = 1e-6;
  int trailing_window = 20;
  std::uint64_t seed = 0;
  double init_box_halfwidth = 2.0;
  std::function<double(int)> reference = [](int) { return 2.0; };
};

struct DivergenceProbeReport {
  int trials = 0;
  int contracted = 0;
  double worst_final_distance = 0.0;
  double worst_trailing_distance = 0.0;
  bool all_contract = false;
  std::vector<double> final_distances;
};

class ControllerRuntime;  // simulation.hpp

DivergenceProbeReport incrementalDivergenceProbe(
    const GeneralizedPlant& plant,
    const std::function<std::unique_ptr<ControllerRuntime>()>& runtime_factory,
    const DivergenceProbeOptions& opts = {});

}  // namespace incsyn
