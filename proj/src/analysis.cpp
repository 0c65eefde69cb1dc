#include "incsyn/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "incsyn/simulation.hpp"

namespace incsyn {

ClosedLoopLpv closeLoop(const AffineLpvStateSpace& plant, const DifferentialController& ctrl) {
  plant.validate();
  const int nr = plant.polytope.dimension();
  if (ctrl.polytope.dimension() != nr)
    throw DimensionError("closeLoop: scheduling dimension mismatch");

  AffineMatrixFunction Bw = plant.inputSlice(plant.B, "w");
  AffineMatrixFunction Bu = plant.inputSlice(plant.B, "u");
  AffineMatrixFunction Cz = plant.outputSlice(plant.C, "z");
  AffineMatrixFunction Cy = plant.outputSlice(plant.C, "y");
  AffineMatrixFunction Dzw = plant.inputSlice(plant.outputSlice(plant.D, "z"), "w");
  AffineMatrixFunction Dzu = plant.inputSlice(plant.outputSlice(plant.D, "z"), "u");
  AffineMatrixFunction Dyw = plant.inputSlice(plant.outputSlice(plant.D, "y"), "w");
  AffineMatrixFunction Dyu = plant.inputSlice(plant.outputSlice(plant.D, "y"), "u");

  if (maxAbs(Dyu.constant()) > 0.0 || !Dyu.isConstant())
    throw Error("closeLoop: plant u->y feedthrough against a controller feedthrough would "
                "create an algebraic loop");
  for (const AffineMatrixFunction* f : {&Bu, &Cy, &Dzu, &Dyw})
    if (!f->isConstant())
      throw AffineClosureError("closeLoop: interconnection blocks must be constant in rho");

  const Matrix Bu_c = Bu.constant(), Cy_c = Cy.constant(), Dzu_c = Dzu.constant(),
               Dyw_c = Dyw.constant();
  const int nx = plant.stateDim(), nc = ctrl.stateDim();
  const int nw = Bw.cols(), nz = Cz.rows();

  AffineMatrixFunction BuDcCy = ctrl.D.leftMultiply(Bu_c).rightMultiply(Cy_c);
  AffineMatrixFunction BuCc = ctrl.C.leftMultiply(Bu_c);
  AffineMatrixFunction BcCy = ctrl.B.rightMultiply(Cy_c);
  AffineMatrixFunction BuDcDyw = ctrl.D.leftMultiply(Bu_c).rightMultiply(Dyw_c);
  AffineMatrixFunction BcDyw = ctrl.B.rightMultiply(Dyw_c);
  AffineMatrixFunction DzuDcCy = ctrl.D.leftMultiply(Dzu_c).rightMultiply(Cy_c);
  AffineMatrixFunction DzuCc = ctrl.C.leftMultiply(Dzu_c);
  AffineMatrixFunction DzuDcDyw = ctrl.D.leftMultiply(Dzu_c).rightMultiply(Dyw_c);

  const int n = nx + nc;
  Matrix A0 = Matrix::Zero(n, n), B0 = Matrix::Zero(n, nw), C0 = Matrix::Zero(nz, n),
         D0 = Matrix::Zero(nz, nw);
  std::vector<Matrix> Ac(nr, A0), Bc(nr, B0), Cc(nr, C0), Dc(nr, D0);
  for (int t = 0; t <= nr; ++t) {
    Matrix& At = t == 0 ? A0 : Ac[t - 1];
    Matrix& Bt = t == 0 ? B0 : Bc[t - 1];
    Matrix& Ct = t == 0 ? C0 : Cc[t - 1];
    Matrix& Dt = t == 0 ? D0 : Dc[t - 1];
    At.topLeftCorner(nx, nx) = plant.A.term(t) + BuDcCy.term(t);
    At.topRightCorner(nx, nc) = BuCc.term(t);
    At.bottomLeftCorner(nc, nx) = BcCy.term(t);
    At.bottomRightCorner(nc, nc) = ctrl.A.term(t);
    Bt.topRows(nx) = Bw.withSchedulingDim(nr).term(t) + BuDcDyw.term(t);
    Bt.bottomRows(nc) = BcDyw.term(t);
    Ct.leftCols(nx) = Cz.withSchedulingDim(nr).term(t) + DzuDcCy.term(t);
    Ct.rightCols(nc) = DzuCc.term(t);
    Dt = Dzw.withSchedulingDim(nr).term(t) + DzuDcDyw.term(t);
  }

  ClosedLoopLpv cl;
  cl.model.A = AffineMatrixFunction(A0, Ac);
  cl.model.B = AffineMatrixFunction(B0, Bc);
  cl.model.C = AffineMatrixFunction(C0, Cc);
  cl.model.D = AffineMatrixFunction(D0, Dc);
  cl.model.polytope = plant.polytope;
  cl.model.inputs = ChannelLayout({{"w", nw}});
  cl.model.outputs = ChannelLayout({{"z", nz}});
  cl.model.validate();
  cl.provenance = "lower LFT of plant model and controller";

  // affinity probe: frozen evaluation must interpolate between vertices
  const auto& verts = plant.polytope.vertices();
  for (std::size_t a = 0; a < verts.size(); ++a)
    for (std::size_t b = a + 1; b < verts.size(); ++b) {
      Vector mid = 0.5 * (verts[a] + verts[b]);
      auto fm = cl.model.evaluate(mid);
      auto fa = cl.model.evaluate(verts[a]);
      auto fb = cl.model.evaluate(verts[b]);
      double resid = maxAbs(fm.A - 0.5 * (fa.A + fb.A)) + maxAbs(fm.C - 0.5 * (fa.C + fb.C));
      if (resid > 1e-9)
        throw Error("closeLoop: interconnection is not affine in rho (residual " +
                    std::to_string(resid) + ")");
    }
  return cl;
}

namespace {

// Eq.-5-layout analysis block at one scheduling point:
// [P, A P, B, 0; *, P, 0, P C'; *, *, gI, D'; *, *, *, gI]
MatrixExpr analysisBlock(const LmiSystem& sys, const AffineLpvStateSpace& model,
                         const Vector& rho, const AffineScalar& gamma) {
  auto frozen = model.evaluate(rho);
  const int n = model.stateDim(), nw = model.inputDim(), nz = model.outputDim();
  MatrixExpr P = sys.var("P");
  MatrixExpr AP = frozen.A * P;
  MatrixExpr PCt = P * Matrix(frozen.C.transpose());
  MatrixExpr gIw(nw, nw), gIz(nz, nz);
  for (int i = 0; i < nw; ++i) gIw.at(i, i) = gamma;
  for (int i = 0; i < nz; ++i) gIz.at(i, i) = gamma;
  return MatrixExpr::fromBlocks(
      {{P, AP, MatrixExpr::constant(frozen.B), MatrixExpr::zero(n, nz)},
       {AP.transpose(), P, MatrixExpr::zero(n, nw), PCt},
       {MatrixExpr::constant(Matrix(frozen.B.transpose())), MatrixExpr::zero(nw, n), gIw,
        MatrixExpr::constant(Matrix(frozen.D.transpose()))},
       {MatrixExpr::zero(nz, n), PCt.transpose(), MatrixExpr::constant(frozen.D), gIz}});
}

LmiSystem assembleAnalysis(const AffineLpvStateSpace& model, std::optional<double> gamma_fixed) {
  model.validate();
  LmiSystem sys;
  sys.addSymmetric("P", model.stateDim());
  AffineScalar gamma;
  int gid = -1;
  if (gamma_fixed) {
    gamma = AffineScalar(*gamma_fixed);
  } else {
    gid = sys.addScalar("gamma");
    gamma = sys.scalarVar(gid);
  }
  auto tmpl = [&](const Vector& rho) { return analysisBlock(sys, model, rho, gamma); };
  auto lmis = enforceOnVertices(tmpl, model.polytope);
  for (std::size_t i = 0; i < lmis.size(); ++i)
    sys.addConstraint("vertex" + std::to_string(i), lmis[i]);
  sys.addConstraint("storage", sys.var("P"));
  if (gid >= 0) sys.setObjective(sys.scalarVar(gid));
  return sys;
}

}  // namespace

GainCertificate li2GainBound(const AffineLpvStateSpace& sys_model, double gamma,
                             const SdpOptions& opts) {
  LmiSystem sys = assembleAnalysis(sys_model, gamma);
  SdpSolution sol = solve(sys, opts);
  GainCertificate out;
  out.gamma = gamma;
  if (sol.status == SdpStatus::Infeasible) {
    out.certified = false;
    out.message = "analysis LMI infeasible at gamma=" + std::to_string(gamma) +
                  " (inconclusive: the condition is sufficient only)";
    return out;
  }
  if (sol.status != SdpStatus::Optimal) throw Error("analysis SDP failed: " + sol.message);
  out.certified = true;
  out.P = sol.values.at("P");
  out.min_margin = sol.minConstraintEig();
  return out;
}

GainCertificate minLi2Gain(const AffineLpvStateSpace& sys_model, const SdpOptions& opts) {
  LmiSystem sys = assembleAnalysis(sys_model, std::nullopt);
  SdpSolution sol = solve(sys, opts);
  if (sol.status == SdpStatus::Infeasible)
    throw InfeasibleError(
        "analysis LMI infeasible at every gamma (no constant-storage certificate)");
  if (sol.status != SdpStatus::Optimal) throw Error("analysis SDP failed: " + sol.message);
  GainCertificate out;
  out.certified = true;
  out.gamma = *sol.objective;
  out.P = sol.values.at("P");
  out.min_margin = sol.minConstraintEig();
  return out;
}

DivergenceProbeReport incrementalDivergenceProbe(
    const GeneralizedPlant& plant,
    const std::function<std::unique_ptr<ControllerRuntime>()>& runtime_factory,
    const DivergenceProbeOptions& opts) {
  DivergenceProbeReport rep;
  rep.trials = opts.trials;
  Rng rng(opts.seed);
  ReferenceGenerator ref = ReferenceGenerator::fromSequence([&] {
    std::vector<double> seq;
    for (int k = 0; k < opts.horizon; ++k) seq.push_back(opts.reference(k));
    return seq;
  }());
  for (int trial = 0; trial < opts.trials; ++trial) {
    Vector xa(plant.n_x), xb(plant.n_x);
    for (int i = 0; i < plant.n_x; ++i) {
      xa[i] = rng.uniform(-opts.init_box_halfwidth, opts.init_box_halfwidth);
      xb[i] = rng.uniform(-opts.init_box_halfwidth, opts.init_box_halfwidth);
    }
    auto rta = runtime_factory();
    auto rtb = runtime_factory();
    SimTrace ta = simulate(plant, *rta, ref, xa, opts.horizon);
    SimTrace tb = simulate(plant, *rtb, ref, xb, opts.horizon);
    const int len = std::min(ta.length(), tb.length());
    double final_dist = std::numeric_limits<double>::infinity();
    double trailing = 0.0;
    if (len == opts.horizon && !ta.meta.diverged && !tb.meta.diverged) {
      final_dist = (ta.x.back() - tb.x.back()).norm();
      for (int i = len - opts.trailing_window; i < len; ++i)
        trailing = std::max(trailing, (ta.x[i] - tb.x[i]).norm());
    } else {
      trailing = std::numeric_limits<double>::infinity();
    }
    rep.final_distances.push_back(final_dist);
    rep.worst_final_distance = std::max(rep.worst_final_distance, final_dist);
    rep.worst_trailing_distance = std::max(rep.worst_trailing_distance, trailing);
    if (final_dist < opts.contraction_tol) ++rep.contracted;
  }
  rep.all_contract = rep.contracted == rep.trials;
  return rep;
}

}  // namespace incsyn
