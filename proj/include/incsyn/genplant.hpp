#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "incsyn/differential.hpp"
#include "incsyn/lpv_model.hpp"
#include "incsyn/lti.hpp"

namespace incsyn {

/// Mixed-sensitivity shaping filters: z1 = (We*M)(r - y), z2 = Wu*u, with the
/// controller measuring r - y. We*M is realized minimally (common factors
/// cancelled on the coefficients) and unit-circle poles are pulled inward by
/// integrator_eps before synthesis.
struct WeightingScheme {
  TransferFunction error_weight = TransferFunction::gain(1.0);     // We
  TransferFunction reference_model = TransferFunction::gain(1.0);  // M
  TransferFunction control_weight = TransferFunction::gain(1.0);   // Wu
  double integrator_eps = 1e-4;
};

struct FeedforwardPoint {
  Vector x;  // generalized-plant steady state
  Vector u;
};

/// Structured generalized plant: x+ = f(x) + Bw w + Bu u,
/// z = hz(x) + Dzw w + Dzu u, y = Cy x + Dyw w (output map exactly linear).
struct GeneralizedPlant {
  int n_x = 0, n_w = 0, n_u = 0, n_z = 0, n_y = 0;
  std::function<Vector(const Vector&)> f;
  std::function<Matrix(const Vector&)> dfdx;
  std::function<Vector(const Vector&)> h_z;
  std::function<Matrix(const Vector&)> dhzdx;
  Matrix B_w, B_u, D_zw, D_zu, C_y, D_yw;
  /// Tracked plant output rows over the generalized-plant state (what the
  /// reference is compared against in simulation reports).
  Matrix C_track;

  /// Scheduling map lifted to the full generalized-plant state.
  SchedulingMap scheduling;
  /// LPV embedding of the differential form, channels (w,u) / (z,y).
  AffineLpvStateSpace embedding;

  /// Exact steady-state inversion r-sequence -> (x*, u*) when the plant
  /// structure admits one (the built-in example does). refs must cover
  /// horizon + feedforward_lookahead entries.
  std::optional<std::function<std::vector<FeedforwardPoint>(const std::vector<double>&)>>
      exact_feedforward;
  int feedforward_lookahead = 0;

  std::vector<std::string> notes;  // construction provenance (pole moves, topology)

  Vector step(const Vector& x, const Vector& w, const Vector& u) const {
    return f(x) + B_w * w + B_u * u;
  }
  Vector outputZ(const Vector& x, const Vector& w, const Vector& u) const {
    return h_z(x) + D_zw * w + D_zu * u;
  }
  Vector outputY(const Vector& x, const Vector& w) const { return C_y * x + D_yw * w; }

  /// View as the plain nonlinear system with stacked inputs (w,u) and stacked
  /// outputs (z,y); used for Jacobian validation and replay checks.
  NonlinearPlant asNonlinearPlant() const;
};

/// Control plant bundled with its user-proposed differential embedding.
/// The plant's inputs are the control u and its outputs the measured y.
struct EmbeddedPlant {
  NonlinearPlant plant;
  SchedulingMap scheduling;
  AffineMatrixFunction a_embedding;  // A(psi(x)) = dfdx(x) on the region
};

/// Interconnects the plant with the weighting filters. Rejects plants whose
/// input enters non-affinely (non-constant df/du) or whose output map is
/// nonlinear.
GeneralizedPlant buildGeneralizedPlant(const EmbeddedPlant& plant,
                                       const WeightingScheme& weights);

/// The Eq.-12-style affine LPV model of the differential form, channel
/// partitions (w,u) and (z,y). The embedding is validated at construction.
AffineLpvStateSpace differentialGeneralizedPlant(const GeneralizedPlant& gp);

}  // namespace incsyn
