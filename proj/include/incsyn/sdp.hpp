#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "incsyn/lmi.hpp"

namespace incsyn {

enum class SdpStatus { Optimal, Infeasible, NumericalFailure };

std::string toString(SdpStatus s);

struct SdpOptions {
  /// Strict inequalities M > 0 are solved as M >= delta_feas * I.
  double delta_feas = 1e-7;
  /// Relative duality-gap target for objective problems.
  double gap_tol = 1e-9;
  /// Barrier parameter growth per outer round.
  double mu = 5.0;
  /// Newton decrement^2 / 2 threshold for centering.
  double newton_tol = 1e-10;
  int max_newton = 200;
  /// Phase 1 stops once the infeasibility shift s drops below -feas_margin.
  double feas_margin = 1e-6;
  double t0 = 1.0;
  int max_outer = 80;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Vector y;
  std::map<std::string, Matrix> values;
  std::optional<double> objective;
  /// Minimum eigenvalue of every compiled constraint at the solution
  /// (without the delta_feas shift), in constraint order.
  std::vector<std::pair<std::string, double>> constraint_min_eigs;
  double gap = 0.0;            // nu / t at exit
  double phase1_shift = 0.0;   // final infeasibility shift (negative = strictly feasible)
  std::string message;

  double minConstraintEig() const;
};

/// Log-det barrier interior-point solve of an LmiSystem.
/// With an objective: two-phase path following, minimizing the objective to
/// the configured relative gap. Without one: phase 1 followed by analytic
/// centering (requires a bounded feasible set for full centering; the
/// returned point is strictly feasible either way). Deterministic.
SdpSolution solve(const LmiSystem& sys, const SdpOptions& opts = {});

}  // namespace incsyn
