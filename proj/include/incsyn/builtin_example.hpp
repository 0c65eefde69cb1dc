#pragma once

#include "incsyn/genplant.hpp"

namespace incsyn {
namespace builtin {

/// Built-in two-state benchmark plant
///   x1+ = 0.1 x1 - x2
///   x2+ = 0.9 sin(x1) + x2 + u
///   y   = x1
/// with globally valid trigonometric scheduling maps.
NonlinearPlant sinePlant();

/// Differential scheduling: rho = cos(x1) over [-1, 1], with the closed-form
/// segment average (sin b - sin a)/(b - a).
SchedulingMap differentialScheduling();

/// Embedding A(rho) of the plant's state Jacobian (0.9 rho in the (2,1) slot).
AffineMatrixFunction differentialEmbeddingA();

/// Primal-form scheduling: rho_s = sinc(x1) over [-0.22, 1]
/// (sinc(a) = sin(a)/a, sinc(0) = 1).
SchedulingMap standardScheduling();

/// Same affine shape as the differential embedding; valid for the primal form
/// because sin(x1) = sinc(x1) * x1.
AffineMatrixFunction standardEmbeddingA();

/// Tracking weights: We = 0.2(q-0.5)/(q+a), M = (q+a)/(q-1), Wu = 0.2 with
/// a = 1/pi.
WeightingScheme trackingWeights(double integrator_eps = 1e-4);

/// Generalized plant around the differential scheduling (for incremental
/// synthesis). Attaches the exact steady-state inversion.
GeneralizedPlant generalizedPlant(double integrator_eps = 1e-4);

/// Synthesis model for the standard LPV comparator: the same affine blocks
/// (weights included) read as an embedding of the primal form, with the
/// sinc polytope [-0.22, 1].
AffineLpvStateSpace standardComparatorModel(double integrator_eps = 1e-4);

/// standardScheduling lifted to the generalized-plant state (weight states
/// appended; rho still reads x1 only).
SchedulingMap standardSchedulingLifted(int gp_state_dim);

double sinc(double a);

}  // namespace builtin
}  // namespace incsyn
