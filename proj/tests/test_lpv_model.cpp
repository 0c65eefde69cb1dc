#include <doctest.h>

#include <cmath>

#include "incsyn/builtin_example.hpp"
#include "incsyn/lpv_model.hpp"
#include "incsyn/lti.hpp"

using namespace incsyn;

namespace {
Vector vec1(double v) {
  Vector out(1);
  out << v;
  return out;
}
}  // namespace

TEST_CASE("affine evaluation matches the example plant's Jacobian form") {
  // M0 = [[0.1,-1],[0,1]], M1 = [[0,0],[0.9,0]], rho = 1
  AffineMatrixFunction f = builtin::differentialEmbeddingA();
  Matrix want(2, 2);
  want << 0.1, -1.0, 0.9, 1.0;
  CHECK(maxAbs(f.evaluate(vec1(1.0)) - want) == doctest::Approx(0.0));
}

TEST_CASE("affine evaluation at zero returns the constant term") {
  Matrix M0(2, 2), M1(2, 2);
  M0 << 1, 2, 3, 4;
  M1 << -1, 0, 0, 5;
  AffineMatrixFunction f(M0, {M1});
  CHECK(maxAbs(f.evaluate(vec1(0.0)) - M0) == 0.0);
}

TEST_CASE("affine evaluation scales the identity") {
  AffineMatrixFunction f(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)});
  CHECK(maxAbs(f.evaluate(vec1(0.5)) - 0.5 * Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("evaluate rejects scheduling dimension mismatch") {
  AffineMatrixFunction f(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)});
  CHECK_THROWS_AS(f.evaluate(Vector::Zero(2)), DimensionError);
}

TEST_CASE("vertex images of the example A over [-1,1]") {
  AffineMatrixFunction f = builtin::differentialEmbeddingA();
  auto imgs = vertexImages(f, SchedulingPolytope::interval(-1.0, 1.0));
  REQUIRE(imgs.size() == 2);
  CHECK(imgs[0](1, 0) == doctest::Approx(-0.9));
  CHECK(imgs[1](1, 0) == doctest::Approx(0.9));
}

TEST_CASE("vertex images of a constant function are copies of the constant") {
  AffineMatrixFunction f(Matrix::Identity(2, 2), {Matrix::Zero(2, 2)});
  auto imgs = vertexImages(f, SchedulingPolytope::interval(-1.0, 1.0));
  for (const auto& m : imgs) CHECK(maxAbs(m - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("vertex images hit the endpoints for rho*I over [0,1]") {
  AffineMatrixFunction f(Matrix::Zero(2, 2), {Matrix::Identity(2, 2)});
  auto imgs = vertexImages(f, SchedulingPolytope::interval(0.0, 1.0));
  CHECK(maxAbs(imgs[0]) == 0.0);
  CHECK(maxAbs(imgs[1] - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("affinity: evaluation commutes with convex combinations of vertices") {
  Rng rng(7);
  Matrix M0(3, 2), M1(3, 2), M2(3, 2);
  for (Matrix* m : {&M0, &M1, &M2})
    for (int i = 0; i < m->size(); ++i) (*m)(i % 3, i / 3) = rng.uniform(-2.0, 2.0);
  AffineMatrixFunction f(M0, {M1, M2});
  SchedulingPolytope box = SchedulingPolytope::box(Vector::Constant(2, -1.0),
                                                   Vector::Constant(2, 1.0));
  auto imgs = vertexImages(f, box);
  for (int trial = 0; trial < 50; ++trial) {
    // random convex weights
    std::vector<double> lam;
    double total = 0.0;
    for (int i = 0; i < box.vertexCount(); ++i) {
      lam.push_back(rng.uniform());
      total += lam.back();
    }
    Vector rho = Vector::Zero(2);
    Matrix combo = Matrix::Zero(3, 2);
    for (int i = 0; i < box.vertexCount(); ++i) {
      lam[i] /= total;
      rho += lam[i] * box.vertices()[i];
      combo += lam[i] * imgs[i];
    }
    CHECK(maxAbs(f.evaluate(rho) - combo) < 1e-12);
  }
}

TEST_CASE("polytope vertex lists reject interior points") {
  std::vector<Vector> verts = {vec1(-1.0), vec1(1.0), vec1(0.25)};
  CHECK_THROWS(SchedulingPolytope(1, verts));
}

TEST_CASE("polytope membership margin on a box") {
  auto p = SchedulingPolytope::interval(-1.0, 1.0);
  CHECK(p.membershipMargin(vec1(0.0)) == doctest::Approx(1.0));
  CHECK(p.membershipMargin(vec1(0.9)) == doctest::Approx(0.1));
  CHECK(p.contains(vec1(1.0)));
  CHECK(!p.contains(vec1(1.1)));
  CHECK(p.clamp(vec1(1.7))[0] == doctest::Approx(1.0));
}

TEST_CASE("series interconnect reproduces the reduced tracking weight") {
  // We(q) = 0.2(q-0.5)/(q+a) then M(q) = (q+a)/(q-1): product 0.2(q-0.5)/(q-1)
  const double a = 0.31830988618379067;
  TransferFunction We({0.2, -0.1}, {1.0, a});
  TransferFunction M({1.0, a}, {1.0, -1.0});
  auto makeSys = [](const TransferFunction& tf) {
    auto ss = tf.realize();
    AffineLpvStateSpace sys;
    sys.A = AffineMatrixFunction(ss.A);
    sys.B = AffineMatrixFunction(ss.B);
    sys.C = AffineMatrixFunction(ss.C);
    sys.D = AffineMatrixFunction(ss.D);
    sys.polytope = SchedulingPolytope(1, {Vector::Zero(1)});
    sys.A = sys.A.withSchedulingDim(1);
    sys.B = sys.B.withSchedulingDim(1);
    sys.C = sys.C.withSchedulingDim(1);
    sys.D = sys.D.withSchedulingDim(1);
    return sys;
  };
  AffineLpvStateSpace cascade = seriesInterconnect(makeSys(We), makeSys(M));
  TransferFunction product = We.series(M).cancelCommonFactors();
  // oracle: symbolic product evaluated on the unit circle
  for (int i = 0; i < 16; ++i) {
    std::complex<double> q(std::cos(0.3 + i * 0.35), std::sin(0.3 + i * 0.35));
    auto frozen = cascade.evaluate(Vector::Zero(1));
    auto resp = frequencyResponse(frozen.A, frozen.B, frozen.C, frozen.D, q);
    CHECK(std::abs(resp(0, 0) - product.evaluate(q)) < 1e-10);
  }
}

TEST_CASE("series with the identity system is the identity up to state reordering") {
  Rng rng(3);
  AffineLpvStateSpace sys;
  Matrix A(2, 2), B(2, 1), C(1, 2), D(1, 1);
  A << 0.3, 0.1, -0.2, 0.5;
  B << 1, 0;
  C << 1, 1;
  D << 0.2;
  sys.A = AffineMatrixFunction(A).withSchedulingDim(1);
  sys.B = AffineMatrixFunction(B).withSchedulingDim(1);
  sys.C = AffineMatrixFunction(C).withSchedulingDim(1);
  sys.D = AffineMatrixFunction(D).withSchedulingDim(1);
  sys.polytope = SchedulingPolytope::interval(-1.0, 1.0);

  AffineLpvStateSpace ident;
  ident.A = AffineMatrixFunction(Matrix::Zero(0, 0)).withSchedulingDim(1);
  ident.B = AffineMatrixFunction(Matrix::Zero(0, 1)).withSchedulingDim(1);
  ident.C = AffineMatrixFunction(Matrix::Zero(1, 0)).withSchedulingDim(1);
  ident.D = AffineMatrixFunction(Matrix::Identity(1, 1)).withSchedulingDim(1);
  ident.polytope = SchedulingPolytope(1, {Vector::Zero(1)});

  AffineLpvStateSpace out = seriesInterconnect(ident, sys);
  for (int i = 0; i < 5; ++i) {
    Vector rho = vec1(rng.uniform(-1.0, 1.0));
    auto a = sys.evaluate(rho);
    auto b = out.evaluate(rho);
    CHECK(maxAbs(a.A - b.A) < 1e-14);
    CHECK(maxAbs(a.D - b.D) < 1e-14);
  }
}

TEST_CASE("series interconnect composes like frozen LTI composition at random rho") {
  Rng rng(11);
  // scheduling-dependent first system, constant second (affine closure holds)
  AffineLpvStateSpace s1;
  Matrix A0(1, 1), A1(1, 1), B(1, 1), C(1, 1), D(1, 1);
  A0 << 0.4;
  A1 << 0.2;
  B << 1.0;
  C << 1.0;
  D << 0.0;
  s1.A = AffineMatrixFunction(A0, {A1});
  s1.B = AffineMatrixFunction(B).withSchedulingDim(1);
  s1.C = AffineMatrixFunction(C).withSchedulingDim(1);
  s1.D = AffineMatrixFunction(D).withSchedulingDim(1);
  s1.polytope = SchedulingPolytope::interval(-1.0, 1.0);

  AffineLpvStateSpace s2;
  Matrix A2(1, 1), B2(1, 1), C2(1, 1), D2(1, 1);
  A2 << -0.3;
  B2 << 0.5;
  C2 << 2.0;
  D2 << 0.1;
  s2.A = AffineMatrixFunction(A2).withSchedulingDim(1);
  s2.B = AffineMatrixFunction(B2).withSchedulingDim(1);
  s2.C = AffineMatrixFunction(C2).withSchedulingDim(1);
  s2.D = AffineMatrixFunction(D2).withSchedulingDim(1);
  s2.polytope = SchedulingPolytope::interval(-1.0, 1.0);

  AffineLpvStateSpace comp = seriesInterconnect(s1, s2);
  for (int trial = 0; trial < 10; ++trial) {
    Vector rho = vec1(rng.uniform(-1.0, 1.0));
    auto f1 = s1.evaluate(rho);
    auto f2 = s2.evaluate(rho);
    auto fc = comp.evaluate(rho);
    Matrix Awant(2, 2), Bwant(2, 1), Cwant(1, 2), Dwant(1, 1);
    Awant << f1.A, Matrix::Zero(1, 1), f2.B * f1.C, f2.A;
    Bwant << f1.B, f2.B * f1.D;
    Cwant << f2.D * f1.C, f2.C;
    Dwant << f2.D * f1.D;
    CHECK(maxAbs(fc.A - Awant) < 1e-13);
    CHECK(maxAbs(fc.B - Bwant) < 1e-13);
    CHECK(maxAbs(fc.C - Cwant) < 1e-13);
    CHECK(maxAbs(fc.D - Dwant) < 1e-13);
  }
}

TEST_CASE("series interconnect rejects double scheduling dependence in the path") {
  AffineLpvStateSpace s;
  Matrix Z1(1, 1), I1(1, 1);
  Z1 << 0.0;
  I1 << 1.0;
  s.A = AffineMatrixFunction(Z1, {I1});  // A depends on rho
  s.B = AffineMatrixFunction(I1).withSchedulingDim(1);
  s.C = AffineMatrixFunction(I1, {I1});  // C depends on rho too
  s.D = AffineMatrixFunction(I1, {I1});
  s.polytope = SchedulingPolytope::interval(-1.0, 1.0);
  CHECK_THROWS_AS(seriesInterconnect(s, s), AffineClosureError);
}

TEST_CASE("channel layouts tile without overlap and reject duplicates") {
  ChannelLayout ch({{"w", 2}, {"u", 1}});
  CHECK(ch.total() == 3);
  CHECK(ch.offset("u") == 2);
  CHECK_THROWS(ChannelLayout({{"w", 1}, {"w", 2}}));
  CHECK_THROWS(ChannelLayout({{"w", 0}}));
}
