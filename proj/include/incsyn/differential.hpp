#pragma once

#include <functional>
#include <optional>
#include <string>

#include "incsyn/common.hpp"
#include "incsyn/lpv_model.hpp"
#include "incsyn/polytope.hpp"

namespace incsyn {

/// Axis-aligned box, or the whole space when unbounded.
struct Region {
  std::optional<Vector> lo, hi;

  static Region all(int dim) {
    Region r;
    r.dim_hint = dim;
    return r;
  }
  static Region box(const Vector& lo, const Vector& hi);

  bool isBounded() const { return lo.has_value(); }
  bool contains(const Vector& x, double tol = 0.0) const;
  int dim_hint = 0;
  int dimension() const { return lo ? static_cast<int>(lo->size()) : dim_hint; }
};

/// Discrete-time nonlinear system x+ = f(x, w), z = h(x, w) with user-supplied
/// Jacobians. Maps must be side-effect-free; everything here is reentrant.
struct NonlinearPlant {
  int n_x = 0, n_w = 0, n_z = 0;
  std::function<Vector(const Vector&, const Vector&)> f, h;
  std::function<Matrix(const Vector&, const Vector&)> dfdx, dfdw, dhdx, dhdw;
  Region state_region, input_region;
  /// Bounded boxes to draw validation samples from; required when the
  /// declared regions are unbounded.
  std::optional<Region> state_samples, input_samples;

  Region samplingStateBox() const;
  Region samplingInputBox() const;
};

struct DifferentialForm {
  Matrix A, B, C, D;
};

/// Jacobians of (f, h) at a point of the declared region (Jacobian maps are
/// trusted here; validateJacobians probes them against finite differences).
DifferentialForm differentialFormAt(const NonlinearPlant& plant, const Vector& x,
                                    const Vector& w);

struct JacobianReport {
  bool pass = false;
  double max_rel_error = 0.0;
  int samples = 0;
  std::string detail;
};

/// Central finite-difference cross-check of the supplied Jacobian maps.
JacobianReport validateJacobians(const NonlinearPlant& plant, int samples = 1000,
                                 double fd_step = 1e-6, double rel_tol = 1e-5);

/// State-to-scheduling map with its declared embedding region and target
/// polytope.
struct SchedulingMap {
  int state_dim = 0, rho_dim = 0;
  std::function<Vector(const Vector&)> psi;
  SchedulingPolytope target = SchedulingPolytope::interval(0.0, 1.0);
  Region region;                       // embedding region (may be unbounded)
  std::optional<Region> sampling_box;  // bounded box for sampling-based checks
  /// Exact segment average integral_0^1 psi(a + lambda (b - a)) dlambda when a
  /// closed form is available; quadrature otherwise.
  std::function<Vector(const Vector&, const Vector&)> segment_average;

  Region samplingBox() const;
};

struct EmbeddingReport {
  bool pass = false;
  double max_error_A = 0.0;
  double max_error_C = 0.0;
  bool scheduling_in_polytope = true;
  double worst_membership_margin = 0.0;
  int samples = 0;
  bool sampling_based_only = false;  // region unbounded: containment checked on samples only
  std::string detail;
};

/// Checks A(psi(x)) = A_delta(x) and C(psi(x)) = C_delta(x) on a deterministic
/// low-discrepancy sample of the embedding region, and that psi lands in the
/// target polytope. PASS iff both errors <= tol. Failures are reported, never
/// thrown.
EmbeddingReport validateEmbedding(const NonlinearPlant& plant, const SchedulingMap& map,
                                  const AffineLpvStateSpace& candidate, int samples = 10000,
                                  double tol = 1e-8);

/// Halton sequence point (bases 2,3,5,...) scaled into a box.
Vector haltonPoint(int index, const Region& box);

}  // namespace incsyn
