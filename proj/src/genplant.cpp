#include "incsyn/genplant.hpp"

#include <cmath>
#include <sstream>

namespace incsyn {

NonlinearPlant GeneralizedPlant::asNonlinearPlant() const {
  NonlinearPlant p;
  p.n_x = n_x;
  p.n_w = n_w + n_u;
  p.n_z = n_z + n_y;
  auto self = *this;  // value capture keeps the view self-contained
  p.f = [self](const Vector& x, const Vector& wu) {
    return self.step(x, wu.head(self.n_w), wu.tail(self.n_u));
  };
  p.h = [self](const Vector& x, const Vector& wu) {
    Vector out(self.n_z + self.n_y);
    out.head(self.n_z) = self.outputZ(x, wu.head(self.n_w), wu.tail(self.n_u));
    out.tail(self.n_y) = self.outputY(x, wu.head(self.n_w));
    return out;
  };
  p.dfdx = [self](const Vector& x, const Vector&) { return self.dfdx(x); };
  p.dfdw = [self](const Vector&, const Vector&) {
    Matrix J(self.n_x, self.n_w + self.n_u);
    J << self.B_w, self.B_u;
    return J;
  };
  p.dhdx = [self](const Vector& x, const Vector&) {
    Matrix J(self.n_z + self.n_y, self.n_x);
    J.topRows(self.n_z) = self.dhzdx(x);
    J.bottomRows(self.n_y) = self.C_y;
    return J;
  };
  p.dhdw = [self](const Vector&, const Vector&) {
    Matrix J = Matrix::Zero(self.n_z + self.n_y, self.n_w + self.n_u);
    J.topLeftCorner(self.n_z, self.n_w) = self.D_zw;
    J.topRightCorner(self.n_z, self.n_u) = self.D_zu;
    J.bottomLeftCorner(self.n_y, self.n_w) = self.D_yw;
    return J;
  };
  p.state_region = scheduling.region;
  p.state_samples = scheduling.sampling_box;
  p.input_region = Region::all(p.n_w);
  Vector lo = Vector::Constant(p.n_w, -2.0), hi = Vector::Constant(p.n_w, 2.0);
  p.input_samples = Region::box(lo, hi);
  return p;
}

namespace {

// diagonal replication of a SISO state-space across `channels` channels
TransferFunction::StateSpace replicate(const TransferFunction::StateSpace& w, int channels) {
  const int n = w.order();
  TransferFunction::StateSpace out;
  out.A = Matrix::Zero(n * channels, n * channels);
  out.B = Matrix::Zero(n * channels, channels);
  out.C = Matrix::Zero(channels, n * channels);
  out.D = Matrix::Zero(channels, channels);
  for (int c = 0; c < channels; ++c) {
    out.A.block(c * n, c * n, n, n) = w.A;
    out.B.block(c * n, c, n, 1) = w.B;
    out.C.block(c, c * n, 1, n) = w.C;
    out.D(c, c) = w.D(0, 0);
  }
  return out;
}

}  // namespace

GeneralizedPlant buildGeneralizedPlant(const EmbeddedPlant& ep, const WeightingScheme& weights) {
  const NonlinearPlant& G = ep.plant;
  const int nxp = G.n_x, nu = G.n_w, ny = G.n_z;

  // --- probe the Eq.-7 structure of the plant ---
  Region xbox = G.samplingStateBox();
  const Vector u0 = Vector::Zero(nu);
  const Matrix Bu_plant = G.dfdw(haltonPoint(0, xbox), u0);
  Matrix Cp = G.dhdx(haltonPoint(0, xbox), u0);
  for (int s = 0; s < 64; ++s) {
    Vector x = haltonPoint(s, xbox);
    Vector u = Vector::Zero(nu);
    for (int i = 0; i < nu; ++i) u[i] = std::cos(1.7 * s + i);  // deterministic probe inputs
    if (maxAbs(G.dfdw(x, u) - Bu_plant) > 1e-9)
      throw Error("buildGeneralizedPlant: df/du is not constant (plant is not control-affine "
                  "with constant input matrix)");
    if (maxAbs(G.f(x, u) - (G.f(x, u0) + Bu_plant * u)) > 1e-9 * std::max(1.0, u.norm()))
      throw Error("buildGeneralizedPlant: f is not affine in the control input");
    if (maxAbs(G.dhdx(x, u) - Cp) > 1e-9 || maxAbs(G.dhdw(x, u)) > 1e-12)
      throw Error("buildGeneralizedPlant: plant output map is nonlinear or has feedthrough");
    if (maxAbs(G.h(x, u) - Cp * x) > 1e-9 * std::max(1.0, x.norm()))
      throw Error("buildGeneralizedPlant: plant output map is nonlinear");
  }

  GeneralizedPlant gp;

  // --- error weight cascade We*M, minimal then perturbed ---
  TransferFunction cascade_raw = weights.error_weight.series(weights.reference_model);
  TransferFunction cascade = cascade_raw.cancelCommonFactors();
  if (cascade.order() < cascade_raw.order())
    gp.notes.push_back("error-weight cascade reduced from order " +
                       std::to_string(cascade_raw.order()) + " to " +
                       std::to_string(cascade.order()) + " by exact pole-zero cancellation");
  int moved = 0;
  if (weights.integrator_eps > 0.0) {
    auto [perturbed, count] = cascade.perturbUnitCirclePoles(weights.integrator_eps);
    cascade = perturbed;
    moved = count;
    if (moved > 0) {
      std::ostringstream os;
      os << moved << " unit-circle pole(s) of the error weight moved inward by eps="
         << weights.integrator_eps;
      gp.notes.push_back(os.str());
    }
  } else {
    bool on_circle = false;
    for (const auto& p : cascade.poles())
      if (std::abs(std::abs(p) - 1.0) <= 1e-9) on_circle = true;
    if (on_circle)
      gp.notes.push_back("warning: eps=0 requested, unit-circle weight pole left in place; "
                         "the synthesis LMI may be infeasible");
  }
  TransferFunction::StateSpace We = replicate(cascade.realize(), ny);
  TransferFunction::StateSpace Wu = replicate(weights.control_weight.realize(), nu);
  const int nwe = We.order(), nwu = Wu.order();

  const int nx = nxp + nwe + nwu;
  gp.n_x = nx;
  gp.n_w = ny;  // one reference per measured plant output
  gp.n_u = nu;
  gp.n_z = ny + nu;
  gp.n_y = ny;

  // state x = (x_plant, x_we, x_wu); e = r - Cp x_plant feeds We, u feeds Wu
  auto f_plant = G.f;
  Matrix WeA = We.A, WeB = We.B, WeC = We.C, WeD = We.D;
  Matrix WuA = Wu.A, WuB = Wu.B, WuC = Wu.C, WuD = Wu.D;
  Matrix Cp_c = Cp;
  gp.f = [f_plant, Cp_c, WeA, WeB, WuA, nxp, nwe, nwu, nu](const Vector& x) {
    Vector out(nxp + nwe + nwu);
    out.head(nxp) = f_plant(x.head(nxp), Vector::Zero(nu));
    if (nwe > 0)
      out.segment(nxp, nwe) = WeA * x.segment(nxp, nwe) - WeB * (Cp_c * x.head(nxp));
    if (nwu > 0) out.tail(nwu) = WuA * x.tail(nwu);
    return out;
  };
  auto dfdx_plant = G.dfdx;
  gp.dfdx = [dfdx_plant, Cp_c, WeA, WeB, WuA, nxp, nwe, nwu, nu](const Vector& x) {
    Matrix J = Matrix::Zero(nxp + nwe + nwu, nxp + nwe + nwu);
    J.topLeftCorner(nxp, nxp) = dfdx_plant(x.head(nxp), Vector::Zero(nu));
    if (nwe > 0) {
      J.block(nxp, 0, nwe, nxp) = -WeB * Cp_c;
      J.block(nxp, nxp, nwe, nwe) = WeA;
    }
    if (nwu > 0) J.bottomRightCorner(nwu, nwu) = WuA;
    return J;
  };
  const int ny_ = ny, nu_ = nu;
  gp.h_z = [WeC, WeD, WuC, Cp_c, nxp, nwe, nwu, ny_, nu_](const Vector& x) {
    Vector z(ny_ + nu_);
    z.head(ny_) = -WeD * (Cp_c * x.head(nxp));
    if (nwe > 0) z.head(ny_) += WeC * x.segment(nxp, nwe);
    z.tail(nu_).setZero();
    if (nwu > 0) z.tail(nu_) = WuC * x.tail(nwu);
    return z;
  };
  gp.dhzdx = [WeC, WeD, WuC, Cp_c, nxp, nwe, nwu, ny_, nu_](const Vector&) {
    Matrix J = Matrix::Zero(ny_ + nu_, nxp + nwe + nwu);
    J.topLeftCorner(ny_, nxp) = -WeD * Cp_c;
    if (nwe > 0) J.block(0, nxp, ny_, nwe) = WeC;
    if (nwu > 0) J.bottomRightCorner(nu_, nwu) = WuC;
    return J;
  };

  gp.B_w = Matrix::Zero(nx, ny);
  if (nwe > 0) gp.B_w.block(nxp, 0, nwe, ny) = WeB;
  gp.B_u = Matrix::Zero(nx, nu);
  gp.B_u.topRows(nxp) = Bu_plant;
  if (nwu > 0) gp.B_u.bottomRows(nwu) = WuB;
  gp.D_zw = Matrix::Zero(ny + nu, ny);
  gp.D_zw.topRows(ny) = WeD;
  gp.D_zu = Matrix::Zero(ny + nu, nu);
  gp.D_zu.bottomRows(nu) = WuD;
  gp.C_y = Matrix::Zero(ny, nx);
  gp.C_y.leftCols(nxp) = -Cp;
  gp.D_yw = Matrix::Identity(ny, ny);
  gp.C_track = Matrix::Zero(ny, nx);
  gp.C_track.leftCols(nxp) = Cp;

  gp.notes.push_back("two-block tracking layout: z1 = We*M*(r - y), z2 = Wu*u, "
                     "controller input r - y");

  // --- lifted scheduling map and the differential embedding ---
  const SchedulingMap& psi_p = ep.scheduling;
  if (psi_p.state_dim != nxp)
    throw DimensionError("buildGeneralizedPlant: scheduling map state dimension mismatch");
  SchedulingMap lifted;
  lifted.state_dim = nx;
  lifted.rho_dim = psi_p.rho_dim;
  auto psi_inner = psi_p.psi;
  lifted.psi = [psi_inner, nxp](const Vector& x) { return psi_inner(x.head(nxp)); };
  lifted.target = psi_p.target;
  auto liftRegion = [&](const Region& r, int extra) -> Region {
    if (!r.isBounded()) return Region::all(r.dimension() + extra);
    Vector lo(r.dimension() + extra), hi(r.dimension() + extra);
    lo.head(r.dimension()) = *r.lo;
    hi.head(r.dimension()) = *r.hi;
    lo.tail(extra).setConstant(-5.0);
    hi.tail(extra).setConstant(5.0);
    return Region::box(lo, hi);
  };
  lifted.region = liftRegion(psi_p.region, nwe + nwu);
  if (psi_p.region.isBounded())
    lifted.sampling_box = lifted.region;
  else if (psi_p.sampling_box)
    lifted.sampling_box = liftRegion(*psi_p.sampling_box, nwe + nwu);
  if (psi_p.segment_average) {
    auto seg = psi_p.segment_average;
    lifted.segment_average = [seg, nxp](const Vector& a, const Vector& b) {
      return seg(a.head(nxp), b.head(nxp));
    };
  }
  gp.scheduling = lifted;

  const int nr = psi_p.rho_dim;
  if (ep.a_embedding.rows() != nxp || ep.a_embedding.schedulingDim() != nr)
    throw DimensionError("buildGeneralizedPlant: plant embedding shape mismatch");

  std::vector<Matrix> Acoef(nr, Matrix::Zero(nx, nx));
  Matrix A0 = Matrix::Zero(nx, nx);
  for (int t = 0; t <= nr; ++t) {
    Matrix& At = t == 0 ? A0 : Acoef[t - 1];
    At.topLeftCorner(nxp, nxp) = ep.a_embedding.term(t);
    if (t == 0) {
      if (nwe > 0) {
        At.block(nxp, 0, nwe, nxp) = -WeB * Cp;
        At.block(nxp, nxp, nwe, nwe) = WeA;
      }
      if (nwu > 0) At.bottomRightCorner(nwu, nwu) = WuA;
    }
  }

  AffineLpvStateSpace emb;
  emb.A = AffineMatrixFunction(A0, Acoef);
  Matrix Bfull(nx, ny + nu);
  Bfull << gp.B_w, gp.B_u;
  emb.B = AffineMatrixFunction(Bfull).withSchedulingDim(nr);
  Matrix Cfull(gp.n_z + ny, nx);
  Cfull.topRows(gp.n_z) = gp.dhzdx(Vector::Zero(nx));
  Cfull.bottomRows(ny) = gp.C_y;
  emb.C = AffineMatrixFunction(Cfull).withSchedulingDim(nr);
  Matrix Dfull = Matrix::Zero(gp.n_z + ny, ny + nu);
  Dfull.topLeftCorner(gp.n_z, ny) = gp.D_zw;
  Dfull.topRightCorner(gp.n_z, nu) = gp.D_zu;
  Dfull.bottomLeftCorner(ny, ny) = gp.D_yw;
  emb.D = AffineMatrixFunction(Dfull).withSchedulingDim(nr);
  emb.polytope = psi_p.target;
  emb.inputs = ChannelLayout({{"w", ny}, {"u", nu}});
  emb.outputs = ChannelLayout({{"z", gp.n_z}, {"y", ny}});
  emb.validate();
  gp.embedding = emb;

  // the embedding must reproduce the differential form on the region
  EmbeddingReport rep = validateEmbedding(gp.asNonlinearPlant(), gp.scheduling, emb,
                                          /*samples=*/2000, /*tol=*/1e-8);
  if (!rep.pass)
    throw Error("buildGeneralizedPlant: differential embedding failed validation: " +
                rep.detail);
  return gp;
}

AffineLpvStateSpace differentialGeneralizedPlant(const GeneralizedPlant& gp) {
  return gp.embedding;
}

}  // namespace incsyn
