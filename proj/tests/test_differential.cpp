#include <doctest.h>

#include <cmath>

#include "incsyn/builtin_example.hpp"
#include "incsyn/differential.hpp"
#include "support/oracles.hpp"

using namespace incsyn;

TEST_CASE("differential form of the example plant at x1 = 0") {
  NonlinearPlant p = builtin::sinePlant();
  Vector x = Vector::Zero(2), u = Vector::Zero(1);
  auto d = differentialFormAt(p, x, u);
  Matrix want(2, 2);
  want << 0.1, -1.0, 0.9, 1.0;  // cos(0) = 1
  CHECK(maxAbs(d.A - want) == 0.0);
}

TEST_CASE("differential form of the example plant at x1 = pi/2") {
  NonlinearPlant p = builtin::sinePlant();
  Vector x(2), u(1);
  x << M_PI / 2.0, 0.3;
  u << 0.1;
  auto d = differentialFormAt(p, x, u);
  // oracle: finite differences of the plant map
  Matrix fd = oracles::centralDiffJacobian([&](const Vector& xv) { return p.f(xv, u); }, x);
  CHECK(maxAbs(d.A - fd) < 1e-9);
  CHECK(std::abs(d.A(1, 0)) < 1e-9);  // 0.9 cos(pi/2)
}

TEST_CASE("differential form of an LTI plant equals its matrices everywhere") {
  Matrix A(2, 2), B(2, 1);
  A << 0.2, -0.5, 0.1, 0.7;
  B << 1.0, 0.5;
  NonlinearPlant p;
  p.n_x = 2;
  p.n_w = 1;
  p.n_z = 1;
  p.f = [A, B](const Vector& x, const Vector& w) { return Vector(A * x + B * w); };
  p.h = [](const Vector& x, const Vector&) { return Vector(x.head(1)); };
  p.dfdx = [A](const Vector&, const Vector&) { return A; };
  p.dfdw = [B](const Vector&, const Vector&) { return B; };
  p.dhdx = [](const Vector&, const Vector&) {
    Matrix C(1, 2);
    C << 1, 0;
    return C;
  };
  p.dhdw = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
  p.state_region = Region::all(2);
  p.state_samples = Region::box(Vector::Constant(2, -3.0), Vector::Constant(2, 3.0));
  p.input_region = Region::all(1);
  p.input_samples = Region::box(Vector::Constant(1, -3.0), Vector::Constant(1, 3.0));

  for (int s = 0; s < 20; ++s) {
    Vector x = haltonPoint(s, p.samplingStateBox());
    Vector w = haltonPoint(s, p.samplingInputBox());
    auto d = differentialFormAt(p, x, w);
    CHECK(maxAbs(d.A - A) == 0.0);
    CHECK(maxAbs(d.B - B) == 0.0);
  }
}

TEST_CASE("evaluation outside the declared region is rejected") {
  NonlinearPlant p = builtin::sinePlant();
  p.state_region = Region::box(Vector::Constant(2, -1.0), Vector::Constant(2, 1.0));
  Vector x(2), u(1);
  x << 2.0, 0.0;
  u << 0.0;
  CHECK_THROWS_AS(differentialFormAt(p, x, u), Error);
}

TEST_CASE("supplied Jacobians agree with central finite differences") {
  JacobianReport rep = validateJacobians(builtin::sinePlant(), 1000, 1e-6, 1e-5);
  CHECK(rep.pass);
  CHECK(rep.max_rel_error < 1e-5);
}

TEST_CASE("embedding validation passes for the example with zero error") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  EmbeddingReport rep =
      validateEmbedding(gp.asNonlinearPlant(), gp.scheduling, gp.embedding, 2000, 1e-8);
  CHECK(rep.pass);
  CHECK(rep.max_error_A == 0.0);
  CHECK(rep.scheduling_in_polytope);
  CHECK(rep.sampling_based_only);  // region is all of R^n
}

TEST_CASE("embedding validation flags a perturbed coefficient with the right magnitude") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  AffineLpvStateSpace bad = gp.embedding;
  // 0.8 instead of 0.9 in the scheduled slot: error 0.1 * max |cos| = 0.1
  Matrix A1 = bad.A.coefficients()[0];
  A1(1, 0) = 0.8;
  bad.A = AffineMatrixFunction(bad.A.constant(), {A1});
  EmbeddingReport rep =
      validateEmbedding(gp.asNonlinearPlant(), gp.scheduling, bad, 4000, 1e-8);
  CHECK(!rep.pass);
  CHECK(rep.max_error_A == doctest::Approx(0.1).epsilon(1e-3));
}

TEST_CASE("embedding validation accepts a constant candidate for an LTI plant") {
  Matrix A(1, 1), B(1, 1);
  A << 0.5;
  B << 1.0;
  NonlinearPlant p;
  p.n_x = 1;
  p.n_w = 1;
  p.n_z = 1;
  p.f = [A, B](const Vector& x, const Vector& w) { return Vector(A * x + B * w); };
  p.h = [](const Vector& x, const Vector&) { return x; };
  p.dfdx = [A](const Vector&, const Vector&) { return A; };
  p.dfdw = [B](const Vector&, const Vector&) { return B; };
  p.dhdx = [](const Vector&, const Vector&) { return Matrix::Identity(1, 1); };
  p.dhdw = [](const Vector&, const Vector&) { return Matrix::Zero(1, 1); };
  p.state_region = Region::box(Vector::Constant(1, -2.0), Vector::Constant(1, 2.0));
  p.input_region = Region::box(Vector::Constant(1, -2.0), Vector::Constant(1, 2.0));

  SchedulingMap m;
  m.state_dim = 1;
  m.rho_dim = 1;
  m.psi = [](const Vector&) { return Vector::Zero(1); };
  m.target = SchedulingPolytope::interval(-1.0, 1.0);
  m.region = p.state_region;

  AffineLpvStateSpace cand;
  cand.A = AffineMatrixFunction(A).withSchedulingDim(1);
  cand.B = AffineMatrixFunction(B).withSchedulingDim(1);
  cand.C = AffineMatrixFunction(Matrix::Identity(1, 1)).withSchedulingDim(1);
  cand.D = AffineMatrixFunction(Matrix::Zero(1, 1)).withSchedulingDim(1);
  cand.polytope = m.target;

  EmbeddingReport rep = validateEmbedding(p, m, cand, 500, 1e-8);
  CHECK(rep.pass);
  CHECK(!rep.sampling_based_only);
}

TEST_CASE("validation error is monotone in the sample count") {
  GeneralizedPlant gp = builtin::generalizedPlant();
  AffineLpvStateSpace bad = gp.embedding;
  Matrix A1 = bad.A.coefficients()[0];
  A1(1, 0) = 0.85;
  bad.A = AffineMatrixFunction(bad.A.constant(), {A1});
  double prev = 0.0;
  for (int n : {100, 500, 2000}) {
    EmbeddingReport rep = validateEmbedding(gp.asNonlinearPlant(), gp.scheduling, bad, n, 1e-8);
    CHECK(rep.max_error_A >= prev - 1e-15);  // Halton prefixes nest
    prev = rep.max_error_A;
  }
}
