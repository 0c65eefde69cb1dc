#include "incsyn/realization.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace incsyn {

double SteadyStateTrajectory::feasibilityResidual(const GeneralizedPlant& gp) const {
  double worst = 0.0;
  for (int k = 0; k < horizon(); ++k) {
    Vector next = gp.step(x[k], w[k], u[k]);
    worst = std::max(worst, (x[k + 1] - next).cwiseAbs().maxCoeff());
    worst = std::max(worst, (y[k] - gp.outputY(x[k], w[k])).cwiseAbs().maxCoeff());
    worst = std::max(worst, (z[k] - gp.outputZ(x[k], w[k], u[k])).cwiseAbs().maxCoeff());
  }
  return worst;
}

void SteadyStateTrajectory::writeCsv(std::ostream& os) const {
  os << std::setprecision(17);
  os << "k";
  for (int i = 0; i < x[0].size(); ++i) os << ",x" << i + 1;
  for (int i = 0; i < w[0].size(); ++i) os << ",w" << i + 1;
  for (int i = 0; i < u[0].size(); ++i) os << ",u" << i + 1;
  for (int i = 0; i < y[0].size(); ++i) os << ",y" << i + 1;
  os << "\n";
  for (int k = 0; k < horizon(); ++k) {
    os << k;
    for (int i = 0; i < x[k].size(); ++i) os << "," << x[k][i];
    for (int i = 0; i < w[k].size(); ++i) os << "," << w[k][i];
    for (int i = 0; i < u[k].size(); ++i) os << "," << u[k][i];
    for (int i = 0; i < y[k].size(); ++i) os << "," << y[k][i];
    os << "\n";
  }
  // closing state row completes the recursion x_0..x_H
  os << horizon();
  for (int i = 0; i < x.back().size(); ++i) os << "," << x.back()[i];
  for (int i = 0; i < w[0].size() + u[0].size() + y[0].size(); ++i) os << ",";
  os << "\n";
}

SteadyStateTrajectory SteadyStateTrajectory::readCsv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error("trajectory csv: missing header");
  int nx = 0, nw = 0, nu = 0, ny = 0;
  {
    std::stringstream hs(header);
    std::string col;
    std::getline(hs, col, ',');  // k
    while (std::getline(hs, col, ',')) {
      if (col.rfind('x', 0) == 0) ++nx;
      else if (col.rfind('w', 0) == 0) ++nw;
      else if (col.rfind('u', 0) == 0) ++nu;
      else if (col.rfind('y', 0) == 0) ++ny;
      else throw Error("trajectory csv: unexpected column '" + col + "'");
    }
  }
  SteadyStateTrajectory out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::getline(ls, cell, ',');
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(cell.empty() ? 0.0 : std::stod(cell));
    bool closing = static_cast<int>(vals.size()) < nx + nw + nu + ny;
    Vector xv(nx);
    for (int i = 0; i < nx; ++i) xv[i] = vals[i];
    out.x.push_back(xv);
    if (closing) break;
    Vector wv(nw), uv(nu), yv(ny);
    for (int i = 0; i < nw; ++i) wv[i] = vals[nx + i];
    for (int i = 0; i < nu; ++i) uv[i] = vals[nx + nw + i];
    for (int i = 0; i < ny; ++i) yv[i] = vals[nx + nw + nu + i];
    out.w.push_back(wv);
    out.u.push_back(uv);
    out.y.push_back(yv);
    out.z.push_back(Vector::Zero(0));
  }
  return out;
}

QuadratureRule QuadratureRule::gaussLegendre(int order) {
  if (order < 1) throw Error("gaussLegendre: order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  // Newton on P_n over [-1,1], then map to [0,1]
  for (int i = 0; i < order; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      if (order == 1) p1 = t;
      for (int n = 2; n <= order; ++n) {
        double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      double pn = order == 1 ? t : p1;
      double dpn = order * (t * pn - p0) / (t * t - 1.0);
      double dt = -pn / dpn;
      t += dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int n = 2; n <= order; ++n) {
      double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    double dpn = order * (t * p1 - p0) / (t * t - 1.0);
    if (order == 1) {
      t = 0.0;
      dpn = 1.0;
    }
    rule.nodes[i] = 0.5 * (t + 1.0);
    rule.weights[i] = order == 1 ? 1.0 : 1.0 / ((1.0 - t * t) * dpn * dpn);
  }
  std::sort(rule.nodes.begin(), rule.nodes.end());
  return rule;
}

namespace {

SteadyStateTrajectory fromFeedforwardPoints(const GeneralizedPlant& gp,
                                            const std::vector<FeedforwardPoint>& pts,
                                            const std::vector<double>& refs, int horizon) {
  SteadyStateTrajectory traj;
  for (int k = 0; k <= horizon; ++k) traj.x.push_back(pts[k].x);
  for (int k = 0; k < horizon; ++k) {
    Vector wv = Vector::Constant(gp.n_w, refs[k]);
    traj.w.push_back(wv);
    traj.u.push_back(pts[k].u);
    traj.y.push_back(gp.outputY(pts[k].x, wv));
    traj.z.push_back(gp.outputZ(pts[k].x, wv, pts[k].u));
  }
  return traj;
}

}  // namespace

SteadyStateTrajectory steadyStateForConstantReference(const GeneralizedPlant& gp, double r,
                                                      int horizon,
                                                      const std::optional<Vector>& newton_guess) {
  if (horizon < 1) throw Error("steady state: horizon must be >= 1");
  if (gp.exact_feedforward) {
    std::vector<double> refs(horizon + gp.feedforward_lookahead + 1, r);
    auto pts = (*gp.exact_feedforward)(refs);
    return fromFeedforwardPoints(gp, pts, refs, horizon);
  }

  // damped Newton on F(x,u) = [f(x) + Bw w + Bu u - x ; C_track x - r]
  const int nx = gp.n_x, nu = gp.n_u;
  Vector wv = Vector::Constant(gp.n_w, r);
  Vector xi = Vector::Zero(nx + nu);
  if (newton_guess) {
    if (newton_guess->size() != nx + nu) throw DimensionError("steady state: guess size");
    xi = *newton_guess;
  }
  auto residual = [&](const Vector& q) {
    Vector xs = q.head(nx), us = q.tail(nu);
    Vector F(nx + gp.n_y);
    F.head(nx) = gp.step(xs, wv, us) - xs;
    F.tail(gp.n_y) = gp.C_track * xs - Vector::Constant(gp.n_y, r);
    return F;
  };
  bool ok = false;
  for (int it = 0; it < 100; ++it) {
    Vector F = residual(xi);
    if (F.cwiseAbs().maxCoeff() < 1e-12) {
      ok = true;
      break;
    }
    Matrix Jac(nx + gp.n_y, nx + nu);
    Jac.topLeftCorner(nx, nx) = gp.dfdx(xi.head(nx)) - Matrix::Identity(nx, nx);
    Jac.topRightCorner(nx, nu) = gp.B_u;
    Jac.bottomLeftCorner(gp.n_y, nx) = gp.C_track;
    Jac.bottomRightCorner(gp.n_y, nu).setZero();
    Vector step = Jac.colPivHouseholderQr().solve(-F);
    double alpha = 1.0;
    double f0 = F.norm();
    while (alpha > 1e-12 && residual(xi + alpha * step).norm() > (1.0 - 0.25 * alpha) * f0)
      alpha *= 0.5;
    if (alpha <= 1e-12) break;
    xi += alpha * step;
  }
  if (!ok && residual(xi).cwiseAbs().maxCoeff() >= 1e-12)
    throw Error("steady state: Newton iteration did not converge");

  std::vector<FeedforwardPoint> pts(horizon + 1, FeedforwardPoint{xi.head(nx), xi.tail(nu)});
  std::vector<double> refs(horizon + 1, r);
  return fromFeedforwardPoints(gp, pts, refs, horizon);
}

SteadyStateTrajectory steadyStateForReferenceSequence(const GeneralizedPlant& gp,
                                                      const ReferenceGenerator& ref,
                                                      int horizon) {
  if (!gp.exact_feedforward)
    throw Error("steady state for reference sequences needs the plant's exact inversion");
  std::vector<double> refs;
  for (int k = 0; k <= horizon + gp.feedforward_lookahead; ++k) refs.push_back(ref.at(k));
  auto pts = (*gp.exact_feedforward)(refs);
  if (static_cast<int>(pts.size()) < horizon + 1)
    throw Error("steady state: exact inversion returned a short trajectory");
  return fromFeedforwardPoints(gp, pts, refs, horizon);
}

PathMatrices pathAveragedMatrices(const DifferentialController& ctrl, const SchedulingMap& psi,
                                  const Vector& x, const Vector& x_star, int quad_order) {
  PathMatrices out;
  out.segment_in_region = psi.region.contains(x) && psi.region.contains(x_star);
  if (psi.segment_average) {
    out.rho_avg = psi.segment_average(x_star, x);
  } else {
    QuadratureRule rule = QuadratureRule::gaussLegendre(quad_order);
    Vector acc = Vector::Zero(psi.rho_dim);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * psi.psi(x_star + rule.nodes[i] * (x - x_star));
    out.rho_avg = acc;
  }
  auto mats = ctrl.evaluate(out.rho_avg);
  out.A = mats.A;
  out.B = mats.B;
  out.C = mats.C;
  out.D = mats.D;
  return out;
}

IncrementalControllerRuntime::IncrementalControllerRuntime(DifferentialController ctrl,
                                                           SchedulingMap psi,
                                                           SteadyStateTrajectory trajectory,
                                                           int quad_order,
                                                           std::optional<double> gamma)
    : ctrl_(std::move(ctrl)),
      psi_(std::move(psi)),
      trajectory_(std::move(trajectory)),
      quad_order_(quad_order),
      delta_xc_(Vector::Zero(ctrl_.stateDim())),
      gamma_(gamma) {}

Vector IncrementalControllerRuntime::step(int k, const Vector& u_c, const Vector& x_sched) {
  if (k < 0 || k >= trajectory_.horizon())
    throw Error("incremental runtime: steady-state trajectory exhausted at step " +
                std::to_string(k));
  PathMatrices m = pathAveragedMatrices(ctrl_, psi_, x_sched, trajectory_.x[k], quad_order_);
  if (!m.segment_in_region) ++region_exits_;
  Vector du = u_c - trajectory_.y[k];       // u_c* = y*
  Vector out = trajectory_.u[k] + m.C * delta_xc_ + m.D * du;  // y_c* = u*
  delta_xc_ = m.A * delta_xc_ + m.B * du;
  return out;
}

}  // namespace incsyn
