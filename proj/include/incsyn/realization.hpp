#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "incsyn/genplant.hpp"
#include "incsyn/simulation.hpp"
#include "incsyn/synthesis.hpp"

namespace incsyn {

/// Feasible target trajectory of the generalized plant: x carries horizon+1
/// states, the signal sequences carry horizon entries.
struct SteadyStateTrajectory {
  std::vector<Vector> x;        // x*_0 .. x*_H
  std::vector<Vector> w, u, y, z;  // k = 0 .. H-1

  int horizon() const { return static_cast<int>(u.size()); }

  /// Max over k of || x*_{k+1} - (f(x*_k) + Bw w*_k + Bu u*_k) ||.
  double feasibilityResidual(const GeneralizedPlant& gp) const;

  void writeCsv(std::ostream& os) const;
  static SteadyStateTrajectory readCsv(std::istream& is);
};

struct QuadratureRule {
  std::vector<double> nodes, weights;  // on [0, 1]
  static QuadratureRule gaussLegendre(int order);
};

/// Constant-reference steady state. Uses the plant's exact feedforward when
/// available, damped Newton on (x*, u*) otherwise (tolerance 1e-12).
SteadyStateTrajectory steadyStateForConstantReference(
    const GeneralizedPlant& gp, double r, int horizon,
    const std::optional<Vector>& newton_guess = std::nullopt);

/// Reference-sequence steady state through the plant's exact inversion
/// (requires gp.exact_feedforward; the reference generator must be defined
/// up to horizon + lookahead).
SteadyStateTrajectory steadyStateForReferenceSequence(const GeneralizedPlant& gp,
                                                      const ReferenceGenerator& ref,
                                                      int horizon);

struct PathMatrices {
  Matrix A, B, C, D;
  Vector rho_avg;
  bool segment_in_region = true;
};

/// Straight-line path integrals of the controller matrices between x_star and
/// x. Affinity reduces the matrix integrals to the scalar integral of psi
/// along the segment, evaluated by Gauss-Legendre quadrature (or the map's
/// closed form when it has one).
PathMatrices pathAveragedMatrices(const DifferentialController& ctrl, const SchedulingMap& psi,
                                  const Vector& x, const Vector& x_star, int quad_order = 16);

/// Primal realization of a differential controller: increment dynamics around
/// the steady-state trajectory with per-step path-averaged matrices.
class IncrementalControllerRuntime : public ControllerRuntime {
 public:
  IncrementalControllerRuntime(DifferentialController ctrl, SchedulingMap psi,
                               SteadyStateTrajectory trajectory, int quad_order = 16,
                               std::optional<double> gamma = std::nullopt);

  Vector step(int k, const Vector& u_c, const Vector& x_sched) override;
  Vector state() const override { return delta_xc_; }
  void reset() override { delta_xc_.setZero(); region_exits_ = 0; }
  std::string kind() const override { return "incremental"; }

  const SteadyStateTrajectory& trajectory() const { return trajectory_; }
  int regionExits() const { return region_exits_; }
  std::optional<double> gamma() const { return gamma_; }

 private:
  DifferentialController ctrl_;
  SchedulingMap psi_;
  SteadyStateTrajectory trajectory_;
  int quad_order_;
  Vector delta_xc_;
  int region_exits_ = 0;
  std::optional<double> gamma_;
};

}  // namespace incsyn
