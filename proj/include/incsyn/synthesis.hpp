#pragma once

#include <optional>
#include <string>
#include <vector>

#include "incsyn/lmi.hpp"
#include "incsyn/lpv_model.hpp"
#include "incsyn/sdp.hpp"

namespace incsyn {

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what) {}
};

/// Full-order LPV output-feedback controller with affine scheduling
/// dependence over the synthesis polytope.
struct DifferentialController {
  AffineMatrixFunction A, B, C, D;
  SchedulingPolytope polytope = SchedulingPolytope::interval(0.0, 1.0);

  int stateDim() const { return A.rows(); }
  int inputDim() const { return B.cols(); }   // n_y
  int outputDim() const { return C.rows(); }  // n_u

  struct Frozen {
    Matrix A, B, C, D;
  };
  Frozen evaluate(const Vector& rho) const {
    return {A.evaluate(rho), B.evaluate(rho), C.evaluate(rho), D.evaluate(rho)};
  }
};

enum class Factorization { Identity, Lu };

struct SynthesisOptions {
  SdpOptions sdp;
  /// First rung of the reconstruction ladder: the controller is constructed
  /// from the analytic center of the feasible set at (1+relax)*gamma_opt.
  double gamma_relax = 1e-3;
  /// Relax escalates x10 while reconstruction quality is poor, up to this
  /// many rungs.
  int max_relax_steps = 3;
  /// Norm bound on every decision matrix in the centering problem (the
  /// gamma-fixed set is unbounded without it); escalates x10 when binding too
  /// tightly for feasibility.
  double variable_bound = 1e3;
  /// Reconstruction acceptance for a rung: theta residual at the vertices and
  /// centroid (half an order inside the certified 1e-8 requirement).
  double recon_tol = 5e-9;
  double cond_limit = 1e12;
  Factorization factorization = Factorization::Identity;
};

struct SynthesisCertificate {
  /// Certified closed-loop l2-gain bound of the constructed controller.
  double gamma = 0.0;
  /// Optimum of the gamma-minimization LMI (the constructed controller is
  /// realized at gamma = (1+relax)*gamma_optimal).
  double gamma_optimal = 0.0;
  double gamma_relax = 0.0;

  Matrix P_x, P_y, P_z, J, N, S;
  AffineMatrixFunction U, V, W, X;
  Matrix R, L;  // S = N J + R L

  std::vector<std::pair<std::string, double>> constraint_min_eigs;
  double reconstruction_residual = 0.0;
  double cond_R = 0.0;
  std::vector<std::string> notes;

  // plant data the reconstruction identity needs
  AffineMatrixFunction plant_A;
  Matrix B_u, C_y;

  Matrix storageP() const;  // [[P_x, P_y],[P_y', P_z]]

  std::string report() const;
};

/// Lemma-1 vertex LMI over (gamma, P_x, P_y, P_z, J, N, S, U..X), objective
/// minimize gamma. The plant model must have channels (w,u)/(z,y) with
/// constant B_u, C_y, D blocks and zero u->y feedthrough.
LmiSystem assembleSynthesisLmi(const AffineLpvStateSpace& plant,
                               const SdpOptions& sdp = {});

struct SynthesisResult {
  SynthesisCertificate certificate;
  DifferentialController controller;
};

/// Solves the synthesis LMI, then re-centers at slightly relaxed gamma and
/// constructs the controller through the two block-triangular inverses.
/// Throws InfeasibleError when no certificate exists.
SynthesisResult synthesize(const AffineLpvStateSpace& plant,
                           const SynthesisOptions& opts = {});

/// Max-norm residual of the construction identity at one scheduling point.
double reconstructTheta(const SynthesisCertificate& cert, const DifferentialController& ctrl,
                        const Vector& rho);

}  // namespace incsyn
