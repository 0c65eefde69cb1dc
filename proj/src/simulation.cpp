#include "incsyn/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace incsyn {

ReferenceGenerator ReferenceGenerator::constant(double level) {
  ReferenceGenerator g;
  g.kind = Kind::Constant;
  g.level = level;
  return g;
}

ReferenceGenerator ReferenceGenerator::sinusoid(double amplitude, double angular_freq,
                                                double offset, double phase) {
  ReferenceGenerator g;
  g.kind = Kind::Sinusoid;
  g.amplitude = amplitude;
  g.angular_freq = angular_freq;
  g.offset = offset;
  g.phase = phase;
  return g;
}

ReferenceGenerator ReferenceGenerator::fromSequence(std::vector<double> seq) {
  ReferenceGenerator g;
  g.kind = Kind::Sequence;
  g.sequence = std::move(seq);
  return g;
}

double ReferenceGenerator::at(int k) const {
  switch (kind) {
    case Kind::Constant:
      return level;
    case Kind::Sinusoid:
      return amplitude * std::sin(angular_freq * k + phase) + offset;
    case Kind::Sequence:
      if (k < 0 || k >= static_cast<int>(sequence.size()))
        throw Error("reference sequence too short for step " + std::to_string(k));
      return sequence[k];
  }
  throw Error("unreachable");
}

std::string ReferenceGenerator::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << "constant r=" << level;
      break;
    case Kind::Sinusoid:
      os << "sinusoid " << amplitude << "*sin(" << angular_freq << "*k + " << phase << ") + "
         << offset;
      break;
    case Kind::Sequence:
      os << "sequence of " << sequence.size() << " samples";
      break;
  }
  return os.str();
}

StandardLpvRuntime::StandardLpvRuntime(DifferentialController ctrl, SchedulingMap psi)
    : ctrl_(std::move(ctrl)), psi_(std::move(psi)), x_c_(Vector::Zero(ctrl_.stateDim())) {}

void StandardLpvRuntime::setFeedforward(std::vector<Vector> u_star) {
  feedforward_ = std::move(u_star);
}

void StandardLpvRuntime::reset() {
  x_c_.setZero();
  clamp_violations_ = 0;
}

Vector StandardLpvRuntime::step(int k, const Vector& u_c, const Vector& x_sched) {
  Vector rho = psi_.psi(x_sched);
  if (!ctrl_.polytope.contains(rho, 1e-12)) {
    rho = ctrl_.polytope.clamp(rho);
    ++clamp_violations_;
  }
  auto m = ctrl_.evaluate(rho);
  Vector out = m.C * x_c_ + m.D * u_c;
  if (!feedforward_.empty()) {
    if (k < 0 || k >= static_cast<int>(feedforward_.size()))
      throw Error("standard runtime: feedforward exhausted at step " + std::to_string(k));
    out += feedforward_[k];
  }
  x_c_ = m.A * x_c_ + m.B * u_c;
  return out;
}

double SimTrace::replayResidual(const GeneralizedPlant& gp) const {
  double worst = 0.0;
  for (int i = 0; i < length(); ++i) {
    worst = std::max(worst, (y[i] - gp.outputY(x[i], r[i])).cwiseAbs().maxCoeff());
    worst = std::max(worst, (z[i] - gp.outputZ(x[i], r[i], u[i])).cwiseAbs().maxCoeff());
    if (i + 1 < length())
      worst = std::max(worst, (x[i + 1] - gp.step(x[i], r[i], u[i])).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::string SimTrace::csvHeader() const {
  std::ostringstream os;
  os << "k";
  auto cols = [&os](const char* base, const Vector& v) {
    for (int i = 0; i < v.size(); ++i) os << "," << base << i + 1;
  };
  cols("r", r[0]);
  cols("x", x[0]);
  cols("xc", xc[0]);
  cols("u", u[0]);
  cols("ymeas", y[0]);
  cols("ytrack", y_track[0]);
  cols("z", z[0]);
  return os.str();
}

void SimTrace::writeCsv(std::ostream& os) const {
  os << std::setprecision(17);
  os << csvHeader() << "\n";
  for (int i = 0; i < length(); ++i) {
    os << k[i];
    for (const auto* col : {&r, &x, &xc, &u, &y, &y_track, &z})
      for (int j = 0; j < (*col)[i].size(); ++j) os << "," << (*col)[i][j];
    os << "\n";
  }
}

SimTrace simulate(const GeneralizedPlant& gp, ControllerRuntime& controller,
                  const ReferenceGenerator& ref, const Vector& x0, int horizon) {
  if (horizon < 1) throw Error("simulate: horizon must be >= 1");
  if (x0.size() != gp.n_x) throw DimensionError("simulate: x0 dimension mismatch");
  SimTrace trace;
  trace.meta.controller_kind = controller.kind();
  trace.meta.topology_hash =
      formatHex(hashMatrices({gp.B_w, gp.B_u, gp.D_zw, gp.D_zu, gp.C_y, gp.D_yw}));
  Vector x = x0;
  for (int k = 0; k < horizon; ++k) {
    Vector w = Vector::Constant(gp.n_w, ref.at(k));
    Vector y = gp.outputY(x, w);
    Vector u = controller.step(k, y, x);
    Vector z = gp.outputZ(x, w, u);
    trace.k.push_back(k);
    trace.r.push_back(w);
    trace.x.push_back(x);
    trace.xc.push_back(controller.state());
    trace.u.push_back(u);
    trace.y.push_back(y);
    trace.y_track.push_back(gp.C_track * x);
    trace.z.push_back(z);
    x = gp.step(x, w, u);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e12) {
      trace.meta.diverged = true;
      trace.meta.divergence_step = k + 1;
      break;
    }
  }
  return trace;
}

ConvergenceCheck checkConvergence(const SimTrace& trace, const ReferenceGenerator& ref,
                                  double tol, int window) {
  ConvergenceCheck out;
  if (trace.meta.diverged || trace.length() < window) {
    out.trailing_error = std::numeric_limits<double>::infinity();
    return out;
  }
  for (int i = trace.length() - window; i < trace.length(); ++i) {
    double r = ref.at(trace.k[i]);
    out.trailing_error =
        std::max(out.trailing_error, (trace.y_track[i].array() - r).abs().maxCoeff());
  }
  out.converged = out.trailing_error <= tol;
  return out;
}

LimitCycleCheck checkLimitCycle(const SimTrace& trace, const ReferenceGenerator& ref,
                                double osc_threshold, double err_threshold) {
  LimitCycleCheck out;
  if (trace.meta.diverged) {
    out.limit_cycle = true;  // divergence is at least as bad
    out.oscillation = std::numeric_limits<double>::infinity();
    out.mean_error = std::numeric_limits<double>::infinity();
    return out;
  }
  const int start = trace.length() - std::max(1, trace.length() / 4);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, err = 0.0;
  int n = 0;
  for (int i = start; i < trace.length(); ++i) {
    double yv = trace.y_track[i][0];
    lo = std::min(lo, yv);
    hi = std::max(hi, yv);
    err += std::abs(yv - ref.at(trace.k[i]));
    ++n;
  }
  out.oscillation = hi - lo;
  out.mean_error = err / std::max(1, n);
  out.limit_cycle = out.oscillation > osc_threshold && out.mean_error > err_threshold;
  return out;
}

}  // namespace incsyn
