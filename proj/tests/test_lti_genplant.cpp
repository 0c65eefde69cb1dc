#include <doctest.h>

#include <cmath>
#include <complex>

#include "incsyn/builtin_example.hpp"
#include "incsyn/genplant.hpp"
#include "incsyn/lti.hpp"
#include "support/oracles.hpp"

using namespace incsyn;

namespace {
constexpr double kAlpha = 0.31830988618379067;
}

TEST_CASE("transfer function cancellation removes the shared (q+a) factor") {
  TransferFunction We({0.2, -0.1}, {1.0, kAlpha});
  TransferFunction M({1.0, kAlpha}, {1.0, -1.0});
  TransferFunction cascade = We.series(M).cancelCommonFactors();
  CHECK(cascade.order() == 1);
  // 0.2(q-0.5)/(q-1)
  std::complex<double> q(0.3, 0.7);
  std::complex<double> want = 0.2 * (q - 0.5) / (q - 1.0);
  CHECK(std::abs(cascade.evaluate(q) - want) < 1e-12);
}

TEST_CASE("unit-circle pole moves radially inward by eps") {
  TransferFunction tf({1.0}, {1.0, -1.0});
  auto [pert, moved] = tf.perturbUnitCirclePoles(1e-3);
  CHECK(moved == 1);
  REQUIRE(pert.poles().size() == 1);
  CHECK(pert.poles()[0].real() == doctest::Approx(1.0 - 1e-3).epsilon(1e-12));
}

TEST_CASE("controllable canonical realization reproduces the transfer function") {
  TransferFunction tf({0.2, -0.1}, {1.0, -(1.0 - 1e-4)});
  auto ss = tf.realize();
  for (int i = 0; i < 20; ++i) {
    double theta = 0.1 + 0.15 * i;
    std::complex<double> q(std::cos(theta), std::sin(theta));
    auto resp = frequencyResponse(ss.A, ss.B, ss.C, ss.D, q);
    CHECK(std::abs(resp(0, 0) - tf.evaluate(q)) < 1e-12);
  }
}

TEST_CASE("generalized plant of the example has the published dimensions") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  // 2 plant states + 1 for the reduced error-weight cascade (first order)
  CHECK(gp.n_x == 3);
  CHECK(gp.n_w == 1);
  CHECK(gp.n_u == 1);
  CHECK(gp.n_z == 2);
  CHECK(gp.n_y == 1);
}

TEST_CASE("unit weights add no states") {
  EmbeddedPlant ep{builtin::sinePlant(), builtin::differentialScheduling(),
                   builtin::differentialEmbeddingA()};
  WeightingScheme w;  // all gains 1
  GeneralizedPlant gp = buildGeneralizedPlant(ep, w);
  CHECK(gp.n_x == 2);
  // z = (r - y, u), y_meas = r - y
  Vector x(2), wv(1), uv(1);
  x << 0.4, -0.2;
  wv << 1.3;
  uv << 0.7;
  Vector z = gp.outputZ(x, wv, uv);
  CHECK(z[0] == doctest::Approx(1.3 - 0.4));
  CHECK(z[1] == doctest::Approx(0.7));
  CHECK(gp.outputY(x, wv)[0] == doctest::Approx(1.3 - 0.4));
}

TEST_CASE("eps = 0 keeps the integrator pole and records a warning") {
  EmbeddedPlant ep{builtin::sinePlant(), builtin::differentialScheduling(),
                   builtin::differentialEmbeddingA()};
  GeneralizedPlant gp = buildGeneralizedPlant(ep, builtin::trackingWeights(0.0));
  bool warned = false;
  for (const auto& note : gp.notes)
    if (note.find("warning") != std::string::npos) warned = true;
  CHECK(warned);
  // the pole really is at 1: the weight state row has coefficient 1
  CHECK(gp.dfdx(Vector::Zero(3))(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("nonlinear output maps are rejected") {
  NonlinearPlant p = builtin::sinePlant();
  p.h = [](const Vector& x, const Vector&) {
    Vector out(1);
    out << std::sin(x[0]);
    return out;
  };
  p.dhdx = [](const Vector& x, const Vector&) {
    Matrix J(1, 2);
    J << std::cos(x[0]), 0.0;
    return J;
  };
  EmbeddedPlant ep{p, builtin::differentialScheduling(), builtin::differentialEmbeddingA()};
  CHECK_THROWS_WITH_AS(buildGeneralizedPlant(ep, builtin::trackingWeights()),
                       doctest::Contains("output map is nonlinear"), Error);
}

TEST_CASE("structural linearity of the measured output") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    Vector x(3), w1(1), w2(1);
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-2.0, 2.0);
    w1 << rng.uniform(-2.0, 2.0);
    w2 << rng.uniform(-2.0, 2.0);
    Vector dy = gp.outputY(x, w1) - gp.outputY(x, w2);
    CHECK(maxAbs(dy - gp.D_yw * (w1 - w2)) == 0.0);
  }
}

TEST_CASE("differential generalized plant carries the scheduled coefficient only in the plant block") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  AffineLpvStateSpace lpv = differentialGeneralizedPlant(gp);
  REQUIRE(lpv.A.schedulingDim() == 1);
  Matrix A1 = lpv.A.coefficients()[0];
  CHECK(A1(1, 0) == doctest::Approx(0.9));
  A1(1, 0) = 0.0;
  CHECK(maxAbs(A1) == 0.0);
  CHECK(lpv.C.isConstant());
  CHECK(lpv.B.isConstant());
}

TEST_CASE("embedding consistency: A(psi(x)) matches the finite-difference Jacobian") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  Region box = gp.scheduling.samplingBox();
  for (int s = 0; s < 1000; ++s) {
    Vector x = haltonPoint(s, box);
    Matrix fd = oracles::centralDiffJacobian([&](const Vector& xv) { return gp.f(xv); }, x);
    Matrix emb = gp.embedding.A.evaluate(gp.scheduling.psi(x));
    CHECK(maxAbs(emb - fd) / std::max(1.0, maxAbs(fd)) < 1e-5);
  }
}

TEST_CASE("realized weight cascade matches 0.2(q-0.5)/(q-(1-eps)) on the unit circle") {
  const double eps = 1e-4;
  GeneralizedPlant gp = builtin::generalizedPlant(eps);
  // the cascade sits in the third state: extract its SISO realization
  Matrix A(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A << gp.dfdx(Vector::Zero(3))(2, 2);
  B << gp.B_w(2, 0);
  C << gp.dhzdx(Vector::Zero(3))(0, 2);
  D << gp.D_zw(0, 0);
  for (int i = 0; i < 50; ++i) {
    double theta = 0.05 + i * (M_PI - 0.1) / 49.0;
    std::complex<double> q(std::cos(theta), std::sin(theta));
    std::complex<double> want = 0.2 * (q - 0.5) / (q - (1.0 - eps));
    auto got = frequencyResponse(A, B, C, D, q)(0, 0);
    CHECK(std::abs(got - want) / std::abs(want) < 1e-10);
  }
}

TEST_CASE("standard comparator model shares the affine blocks but swaps the polytope") {
  AffineLpvStateSpace std_model = builtin::standardComparatorModel();
  GeneralizedPlant gp = builtin::generalizedPlant();
  CHECK(maxAbs(std_model.A.constant() - gp.embedding.A.constant()) == 0.0);
  CHECK(std_model.polytope.vertices()[0][0] == doctest::Approx(-0.22));
  CHECK(std_model.polytope.vertices()[1][0] == doctest::Approx(1.0));
  // primal-form consistency: A(sinc(x1)) x = f(x) for the plant block
  NonlinearPlant plant = builtin::sinePlant();
  for (int s = 0; s < 200; ++s) {
    Vector x = haltonPoint(s, plant.samplingStateBox());
    Vector rho(1);
    rho << builtin::sinc(x[0]);
    Matrix Ap = builtin::standardEmbeddingA().evaluate(rho);
    CHECK(maxAbs(Ap * x - plant.f(x, Vector::Zero(1))) < 1e-12);
  }
}
