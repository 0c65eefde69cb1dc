#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "incsyn/genplant.hpp"
#include "incsyn/synthesis.hpp"

namespace incsyn {

/// Reference signal r_k. Constant and sinusoid kinds are defined for every k;
/// user sequences must cover the requested horizon (plus any feedforward
/// lookahead).
struct ReferenceGenerator {
  enum class Kind { Constant, Sinusoid, Sequence };
  Kind kind = Kind::Constant;
  double level = 0.0;                         // constant
  double amplitude = 1.0, angular_freq = 0.0, offset = 0.0, phase = 0.0;  // sinusoid
  std::vector<double> sequence;

  static ReferenceGenerator constant(double level);
  static ReferenceGenerator sinusoid(double amplitude, double angular_freq, double offset,
                                     double phase = 0.0);
  static ReferenceGenerator fromSequence(std::vector<double> seq);

  double at(int k) const;
  std::string describe() const;
};

class ControllerRuntime {
 public:
  virtual ~ControllerRuntime() = default;
  /// Consumes the measured controller input and the scheduling state, emits
  /// the control; advances the internal state.
  virtual Vector step(int k, const Vector& u_c, const Vector& x_sched) = 0;
  virtual Vector state() const = 0;
  virtual void reset() = 0;
  virtual std::string kind() const = 0;
};

/// Gain-scheduled runtime for a controller synthesized on the primal LPV
/// embedding: matrices evaluated at rho = psi_s(x_k) each step, no path
/// integral and no incremental coordinates. Scheduling values outside the
/// polytope are clamped (and counted).
class StandardLpvRuntime : public ControllerRuntime {
 public:
  StandardLpvRuntime(DifferentialController ctrl, SchedulingMap psi);

  /// Additive feedforward on the output, u_k = y_c,k + u*_k.
  void setFeedforward(std::vector<Vector> u_star);

  Vector step(int k, const Vector& u_c, const Vector& x_sched) override;
  Vector state() const override { return x_c_; }
  void reset() override;
  std::string kind() const override { return "standard-lpv"; }

  int clampViolations() const { return clamp_violations_; }

 private:
  DifferentialController ctrl_;
  SchedulingMap psi_;
  Vector x_c_;
  std::vector<Vector> feedforward_;
  int clamp_violations_ = 0;
};

struct SimTraceMeta {
  std::string controller_kind;
  std::optional<double> gamma;
  std::string topology_hash;
  std::uint64_t seed = 0;
  bool diverged = false;
  int divergence_step = -1;
};

struct SimTrace {
  std::vector<int> k;
  std::vector<Vector> x, xc, u, y, r, z;
  std::vector<Vector> y_track;  // tracked plant output (C_track * x)
  SimTraceMeta meta;

  int length() const { return static_cast<int>(k.size()); }

  /// Max step residual of the plant equations when the trace is replayed.
  double replayResidual(const GeneralizedPlant& gp) const;

  void writeCsv(std::ostream& os) const;
  std::string csvHeader() const;
};

/// Steps the interconnection u_c = y, u = y_c for `horizon` steps.
/// Bit-reproducible for identical inputs; divergence (state blowup) truncates
/// the trace and sets the flag.
SimTrace simulate(const GeneralizedPlant& gp, ControllerRuntime& controller,
                  const ReferenceGenerator& ref, const Vector& x0, int horizon);

struct ConvergenceCheck {
  bool converged = false;
  double trailing_error = 0.0;
};

/// |y_k - r_k| <= tol over the trailing `window` steps (y = tracked plant
/// output, first state by convention of the tracking layout).
ConvergenceCheck checkConvergence(const SimTrace& trace, const ReferenceGenerator& ref,
                                  double tol = 1e-3, int window = 50);

struct LimitCycleCheck {
  bool limit_cycle = false;
  double oscillation = 0.0;
  double mean_error = 0.0;
};

/// Over the trailing quarter of the horizon: oscillation = max-min of the
/// tracked output > osc_threshold and mean |y - r| > err_threshold.
LimitCycleCheck checkLimitCycle(const SimTrace& trace, const ReferenceGenerator& ref,
                                double osc_threshold = 0.05, double err_threshold = 0.01);

}  // namespace incsyn
