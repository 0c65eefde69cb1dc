#include <doctest.h>

#include <cmath>

#include "incsyn/analysis.hpp"
#include "incsyn/builtin_example.hpp"
#include "incsyn/synthesis.hpp"
#include "support/oracles.hpp"

using namespace incsyn;

namespace {

AffineLpvStateSpace scalarTestPlant() {
  // x+ = 0.5x + w + u, z = (x, 0.1u), y = x + w
  AffineLpvStateSpace p;
  Matrix A(1, 1), B(1, 2), C(3, 1), D(3, 2);
  A << 0.5;
  B << 1.0, 1.0;
  C << 1.0, 0.0, 1.0;
  D << 0.0, 0.0, 0.0, 0.1, 1.0, 0.0;
  p.A = AffineMatrixFunction(A).withSchedulingDim(1);
  p.B = AffineMatrixFunction(B).withSchedulingDim(1);
  p.C = AffineMatrixFunction(C).withSchedulingDim(1);
  p.D = AffineMatrixFunction(D).withSchedulingDim(1);
  p.polytope = SchedulingPolytope(1, {Vector::Zero(1)});
  p.inputs = ChannelLayout({{"w", 1}, {"u", 1}});
  p.outputs = ChannelLayout({{"z", 2}, {"y", 1}});
  return p;
}

}  // namespace

TEST_CASE("synthesis on the example embedding lands near the expected optimum") {
  AffineLpvStateSpace model = builtin::generalizedPlant().embedding;
  SynthesisResult res = synthesize(model);
  // frozen from the development solve at gap 1e-9 (two-vertex LMI, delta 1e-7)
  CHECK(res.certificate.gamma_optimal == doctest::Approx(1.2712).epsilon(2e-3));
  CHECK(res.certificate.gamma >= res.certificate.gamma_optimal);
  CHECK(res.certificate.gamma <= 1.5);

  // certificate invariants
  CHECK(minEigSym(res.certificate.storageP()) > 0.0);
  const Matrix& Px = res.certificate.P_x;
  const Matrix& Py = res.certificate.P_y;
  const Matrix& Pz = res.certificate.P_z;
  const Matrix& J = res.certificate.J;
  const Matrix& N = res.certificate.N;
  const Matrix& S = res.certificate.S;
  Matrix I = Matrix::Identity(3, 3);
  Matrix G(6, 6);
  G << J + J.transpose() - Px, I + S.transpose() - Py,
      (I + S.transpose() - Py).transpose(), N + N.transpose() - Pz;
  CHECK(minEigSym(G) > 0.0);
  for (const auto& [name, eig] : res.certificate.constraint_min_eigs)
    CHECK(eig >= 1e-7 - 1e-9);

  // reconstruction identity at vertices and interior points
  Rng rng(2);
  for (const Vector& v : model.polytope.vertices())
    CHECK(reconstructTheta(res.certificate, res.controller, v) <= 1e-8);
  for (int i = 0; i < 10; ++i) {
    Vector rho(1);
    rho << rng.uniform(-1.0, 1.0);
    CHECK(reconstructTheta(res.certificate, res.controller, rho) <= 1e-8);
  }
}

TEST_CASE("standard comparator synthesis reaches its own optimum") {
  SynthesisResult res = synthesize(builtin::standardComparatorModel());
  CHECK(res.certificate.gamma_optimal == doctest::Approx(0.5270).epsilon(2e-3));
}

TEST_CASE("gain monotonicity: a larger polytope never has a smaller optimum") {
  AffineLpvStateSpace model = builtin::generalizedPlant().embedding;
  SynthesisResult big = synthesize(model);
  model.polytope = SchedulingPolytope::interval(-0.5, 0.5);
  SynthesisResult small = synthesize(model);
  CHECK(small.certificate.gamma_optimal <= big.certificate.gamma_optimal + 1e-6);
}

TEST_CASE("scalar LTI double-check: synthesizable with a small gain") {
  SynthesisResult res = synthesize(scalarTestPlant());
  CHECK(res.certificate.gamma_optimal < 2.0);
  // post-synthesis verification through the analysis LMI
  ClosedLoopLpv cl = closeLoop(scalarTestPlant(), res.controller);
  GainCertificate cert = minLi2Gain(cl.model);
  CHECK(cert.gamma <= res.certificate.gamma + 1e-3);
}

TEST_CASE("LTI synthesis is a single-vertex system") {
  LmiSystem sys = assembleSynthesisLmi(scalarTestPlant());
  int vertex_constraints = 0;
  for (const auto& c : sys.constraints())
    if (c.name.rfind("vertex", 0) == 0) ++vertex_constraints;
  CHECK(vertex_constraints == 1);
}

TEST_CASE("example synthesis LMI has two vertex copies") {
  LmiSystem sys = assembleSynthesisLmi(builtin::generalizedPlant().embedding);
  int vertex_constraints = 0;
  for (const auto& c : sys.constraints())
    if (c.name.rfind("vertex", 0) == 0) ++vertex_constraints;
  CHECK(vertex_constraints == 2);
}

TEST_CASE("open-loop-stable LTI plant synthesizes at or below its open-loop gain") {
  AffineLpvStateSpace p;
  Matrix A(2, 2), B(2, 2), C(2, 2), D(2, 2);
  A << 0.4, 0.2, -0.1, 0.3;
  B << 1.0, 0.0, 0.0, 1.0;
  C << 1.0, 0.0, 1.0, 0.0;
  D << 0.0, 0.0, 0.0, 0.0;
  p.A = AffineMatrixFunction(A).withSchedulingDim(1);
  p.B = AffineMatrixFunction(B).withSchedulingDim(1);
  p.C = AffineMatrixFunction(C).withSchedulingDim(1);
  p.D = AffineMatrixFunction(D).withSchedulingDim(1);
  p.polytope = SchedulingPolytope(1, {Vector::Zero(1)});
  p.inputs = ChannelLayout({{"w", 1}, {"u", 1}});
  p.outputs = ChannelLayout({{"z", 1}, {"y", 1}});
  SynthesisResult res = synthesize(p);
  double open_loop =
      oracles::hinfNormSweep(A, B.leftCols(1), C.topRows(1), D.topLeftCorner(1, 1));
  CHECK(res.certificate.gamma_optimal <= open_loop + 1e-4);
}

TEST_CASE("scheduling-dependent interconnection blocks are rejected") {
  AffineLpvStateSpace p = scalarTestPlant();
  Matrix B1(1, 2);
  B1 << 0.0, 1.0;  // rho-dependent B_u column
  p.B = AffineMatrixFunction(p.B.constant(), {B1});
  p.polytope = SchedulingPolytope::interval(-1.0, 1.0);
  CHECK_THROWS_AS(assembleSynthesisLmi(p), AffineClosureError);
}

TEST_CASE("controller coefficients are affine over the polytope") {
  SynthesisResult res = synthesize(builtin::generalizedPlant().embedding);
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    double lam = rng.uniform();
    Vector rho(1);
    rho << lam - (1.0 - lam);
    auto at_rho = res.controller.evaluate(rho);
    auto hi = res.controller.evaluate(Vector::Constant(1, 1.0));
    auto lo = res.controller.evaluate(Vector::Constant(1, -1.0));
    CHECK(maxAbs(at_rho.A - (lam * hi.A + (1.0 - lam) * lo.A)) < 1e-12);
    CHECK(maxAbs(at_rho.D - (lam * hi.D + (1.0 - lam) * lo.D)) < 1e-12);
  }
}

TEST_CASE("zeroing the controller state matrix breaks the reconstruction identity") {
  SynthesisResult res = synthesize(builtin::generalizedPlant().embedding);
  DifferentialController broken = res.controller;
  broken.A = AffineMatrixFunction::zero(3, 3, 1);
  Vector v = Vector::Constant(1, 1.0);
  CHECK(reconstructTheta(res.certificate, broken, v) > 1e-4);
}

TEST_CASE("lu factorization reconstructs to the same certified bound") {
  SynthesisOptions opts;
  opts.factorization = Factorization::Lu;
  AffineLpvStateSpace model = builtin::generalizedPlant().embedding;
  SynthesisResult lu = synthesize(model, opts);
  for (const Vector& v : model.polytope.vertices())
    CHECK(reconstructTheta(lu.certificate, lu.controller, v) <= 1e-8);
  ClosedLoopLpv cl = closeLoop(model, lu.controller);
  GainCertificate cert = minLi2Gain(cl.model);
  CHECK(cert.gamma <= lu.certificate.gamma + 1e-3);
}
